"""Multi-run campaigns: Monte Carlo, initial-error sweep and tuning comparison."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .config import SimConfig
from .runner import FILTERS, METRICS, RunReport, Tuning, default_tuning, run_filter, simulate

PHASES = ("T", "A")  # transient, asymptotic
# final errors below this count as converged whatever the initial error;
# it sits above the error left by interpolating sampled IMU readings
CONVERGED_ABS = 1e-3


def _run_pair(cfg: SimConfig, seed: int, tuning: Tuning | None) -> dict[str, RunReport]:
    scen = simulate(cfg, seed)
    return {k: run_filter(k, scen, tuning) for k in FILTERS}


@dataclass
class MonteCarloReport:
    runs: list[dict[str, RunReport]]

    def table(self, kind: str, phase: str) -> np.ndarray:
        """Per-run RMSE rows (n_runs x 5) for one filter and window."""
        attr = "rmse_transient" if phase == "T" else "rmse_asymptotic"
        return np.array([getattr(r[kind], attr) for r in self.runs])

    def mean(self, kind: str, phase: str) -> np.ndarray:
        return self.table(kind, phase).mean(axis=0)

    def std(self, kind: str, phase: str) -> np.ndarray:
        return self.table(kind, phase).std(axis=0)

    def diverged(self, kind: str) -> list[int]:
        return [i for i, r in enumerate(self.runs) if r[kind].diverged]


def monte_carlo(
    cfg: SimConfig,
    n_runs: int | None = None,
    tuning: Tuning | None = None,
    n_jobs: int = 1,
) -> MonteCarloReport:
    """Independent runs with seeds ``cfg.seed + i``; both filters see the same data in each run."""
    n = cfg.runs if n_runs is None else n_runs
    if n < 1:
        raise ValueError("n_runs must be >= 1")
    seeds = [cfg.seed + i for i in range(n)]
    if n_jobs > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            runs = list(pool.map(_run_pair, [cfg] * n, seeds, [tuning] * n))
    else:
        runs = [_run_pair(cfg, s, tuning) for s in seeds]
    return MonteCarloReport(runs)


@dataclass(frozen=True)
class SweepRow:
    scale: float
    kind: str
    initial_error: float
    final_error: float
    converged: bool
    diverged: bool
    reason: str


@dataclass
class SweepReport:
    cfg: SimConfig
    rows: list[SweepRow]

    def converged_scales(self, kind: str) -> list[float]:
        return [r.scale for r in self.rows if r.kind == kind and r.converged]

    def failed_scales(self, kind: str) -> list[float]:
        return [r.scale for r in self.rows if r.kind == kind and not r.converged]

    def dominance(self) -> tuple[bool, str]:
        """EqF converges wherever the MEKF does, and for two scales beyond the MEKF's
        largest converged one (or everywhere when the MEKF never fails)."""
        scales = sorted({r.scale for r in self.rows})
        eqf_ok, mekf_ok = set(self.converged_scales("eqf")), set(self.converged_scales("mekf"))
        missing = sorted(mekf_ok - eqf_ok)
        if missing:
            return False, f"MEKF converges but EqF does not at scales {missing}"
        if len(mekf_ok) == len(scales):
            return True, "MEKF never fails; EqF converges at every scale"
        top = max(mekf_ok) if mekf_ok else -np.inf
        beyond = [s for s in scales if s > top]
        got = [s for s in beyond if s in eqf_ok]
        if len(got) < min(2, len(beyond)):
            return False, f"EqF converges at only {got} beyond the MEKF limit {top}"
        return True, f"MEKF fails at {self.failed_scales('mekf')}; EqF fails at {self.failed_scales('eqf')}"


def init_error_sweep(cfg: SimConfig, scales=None, noise_free: bool = True) -> SweepReport:
    """One run per scale and filter with initial error ``scale`` times the base magnitudes.

    Every run uses the same trajectory and error directions; the initial
    covariance grows with the error. Convergence means no divergence and
    a final error below one percent of the initial one, or below
    ``CONVERGED_ABS``.
    """
    scales = list(cfg.sweep_scales if scales is None else scales)
    if scales != sorted(scales):
        raise ValueError("scales must be sorted ascending")
    run_cfg = replace(cfg, init_mode="offset", duration=cfg.sweep_duration, noise_free=noise_free)
    rows = []
    for s in scales:
        scen = simulate(run_cfg, cfg.seed, init_scale=s)
        tuning = default_tuning(run_cfg, prior_scale=max(s, 1e-3))
        for kind in FILTERS:
            r = run_filter(kind, scen, tuning)
            ok = (not r.diverged) and (
                r.final_error_norm < 1e-2 * r.initial_error_norm or r.final_error_norm < CONVERGED_ABS
            )
            rows.append(SweepRow(float(s), kind, r.initial_error_norm, r.final_error_norm, bool(ok), r.diverged, r.reason))
    return SweepReport(run_cfg, rows)


@dataclass(frozen=True)
class TuningRow:
    tuning: str
    kind: str
    failed: bool
    rmse_transient: np.ndarray
    rmse_asymptotic: np.ndarray
    reason: str


def tuning_experiment(cfg: SimConfig) -> list[TuningRow]:
    """Both filters with tight and inflated process noise on noise-free IMU data.

    The tight tuning scales every process-noise term by ``tune_tight_scale``,
    the robust one by ``tune_robust_scale``.
    """
    run_cfg = replace(cfg, noise_free_imu=True)
    scen = simulate(run_cfg, cfg.seed)
    rows = []
    for name, scale in (("tight", cfg.tune_tight_scale), ("robust", cfg.tune_robust_scale)):
        tuning = default_tuning(run_cfg, process_scale=scale)
        for kind in FILTERS:
            r = run_filter(kind, scen, tuning)
            rows.append(TuningRow(name, kind, r.diverged, r.rmse_transient, r.rmse_asymptotic, r.reason))
    return rows


__all__ = [
    "METRICS",
    "PHASES",
    "MonteCarloReport",
    "SweepReport",
    "SweepRow",
    "TuningRow",
    "init_error_sweep",
    "monte_carlo",
    "tuning_experiment",
]
