"""Command line entry point: ``eqfins {simulate,run,montecarlo,sweep,tune}``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .exceptions import ConfigError
from .sim import io
from .sim.config import SimConfig, format_config, load_config
from .sim.experiments import PHASES, init_error_sweep, monte_carlo, tuning_experiment
from .sim.runner import FILTERS, METRICS, run_filter, simulate

EXIT_OK, EXIT_CONFIG, EXIT_DIVERGED = 0, 2, 3


def _row(values) -> str:
    return " ".join(f"{v:10.5f}" for v in values)


def cmd_simulate(cfg: SimConfig, out: Path, args) -> int:
    scen = simulate(cfg)
    io.write_trajectory(out / "trajectory.csv", scen.traj, scen.streams.imu_index)
    io.write_imu(out / "imu.csv", scen.streams)
    io.write_measurements(out / "meas.csv", scen.streams)
    io.write_bias(out / "bias.csv", scen.streams)
    print(f"wrote {len(scen.streams.imu_t)} IMU samples and {len(scen.streams.meas_t)} measurements to {out}")
    return EXIT_OK


def cmd_run(cfg: SimConfig, out: Path, args) -> int:
    scen = simulate(cfg)
    report = run_filter(args.filter, scen)
    io.write_report(out / f"report_{args.filter}.csv", report)
    print(f"{args.filter}: {'DIVERGED ' + report.reason if report.diverged else 'ok'}")
    print(f"{'':6s}" + " ".join(f"{m:>10s}" for m in METRICS))
    print(f"{'T':6s}" + _row(report.rmse_transient))
    print(f"{'A':6s}" + _row(report.rmse_asymptotic))
    return EXIT_DIVERGED if report.diverged else EXIT_OK


def cmd_montecarlo(cfg: SimConfig, out: Path, args) -> int:
    mc = monte_carlo(cfg, args.runs, n_jobs=args.jobs)
    for kind in FILTERS:
        io.write_aggregate(out / f"aggregate_{kind}.csv", mc, kind)
    print(f"{len(mc.runs)} runs")
    print(f"{'':10s}" + " ".join(f"{m:>10s}" for m in METRICS))
    for kind in FILTERS:
        for ph in PHASES:
            print(f"{kind + ' ' + ph:10s}" + _row(mc.mean(kind, ph)))
        bad = mc.diverged(kind)
        if bad:
            print(f"{kind} diverged in runs {bad}")
    return EXIT_OK


def cmd_sweep(cfg: SimConfig, out: Path, args) -> int:
    sweep = init_error_sweep(cfg)
    io.write_sweep(out / "sweep.csv", sweep)
    for r in sweep.rows:
        status = "converged" if r.converged else ("diverged" if r.diverged else "not converged")
        print(f"scale {r.scale:5.2f} {r.kind:5s} {r.initial_error:10.4g} -> {r.final_error:10.4g}  {status}")
    ok, why = sweep.dominance()
    print(("EqF dominates: " if ok else "EqF does not dominate: ") + why)
    return EXIT_OK


def cmd_tune(cfg: SimConfig, out: Path, args) -> int:
    rows = tuning_experiment(cfg)
    io.write_tuning(out / "tuning.csv", rows)
    for r in rows:
        status = "FAIL" if r.failed else "ok"
        print(f"{r.tuning:7s} {r.kind:5s} {status:5s} T " + _row(r.rmse_transient) + "  A " + _row(r.rmse_asymptotic))
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "run": cmd_run,
    "montecarlo": cmd_montecarlo,
    "sweep": cmd_sweep,
    "tune": cmd_tune,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value file; keys mirror SimConfig fields")
    common.add_argument("--seed", type=int, help="master seed (overrides the config)")
    common.add_argument("--out", default="out", help="output directory (default: out)")

    p = argparse.ArgumentParser(prog="eqfins", description="Equivariant filter vs MEKF for biased INS.")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("simulate", parents=[common], help="write trajectory and sensor CSVs")
    r = sub.add_parser("run", parents=[common], help="run one filter on one simulated trajectory")
    r.add_argument("--filter", choices=FILTERS, required=True)
    m = sub.add_parser("montecarlo", parents=[common], help="Monte-Carlo comparison of both filters")
    m.add_argument("--runs", type=int, help="number of runs (overrides the config)")
    m.add_argument("--jobs", type=int, default=1, help="worker processes (default: 1)")
    sub.add_parser("sweep", parents=[common], help="initial-error sweep, noise-free")
    sub.add_parser("tune", parents=[common], help="tight vs inflated process noise, noise-free IMU")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, seed=args.seed)
        if getattr(args, "runs", None) is not None:
            if args.runs < 1:
                raise ConfigError("--runs must be >= 1")
            cfg = cfg.with_(runs=args.runs)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.txt").write_text(format_config(cfg))
    return COMMANDS[args.command](cfg, out, args)


if __name__ == "__main__":
    sys.exit(main())
