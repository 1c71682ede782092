"""CSV writers with fixed headers and fixed number formatting."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np
from scipy.spatial.transform import Rotation

from .experiments import PHASES, MonteCarloReport, SweepReport, TuningRow
from .runner import METRICS, RunReport
from .sensors import SensorStreams
from .trajectory import Trajectory

TRAJECTORY_HEADER = ["t", "qw", "qx", "qy", "qz", "px", "py", "pz", "vx", "vy", "vz"]
IMU_HEADER = ["t", "wx", "wy", "wz", "ax", "ay", "az"]
MEAS_HEADER = TRAJECTORY_HEADER
BIAS_HEADER = ["t", "bwx", "bwy", "bwz", "bax", "bay", "baz"]
REPORT_HEADER = ["t", "att_err_deg", "pos_err_m", "vel_err_mps", "bw_err", "ba_err", "lyap"]
AGGREGATE_HEADER = ["run", "phase", *METRICS]
SWEEP_HEADER = ["scale", "filter", "initial_error", "final_error", "converged", "diverged"]
TUNING_HEADER = ["tuning", "filter", "status", "phase", *METRICS]


def fmt(x) -> str:
    """Fixed float formatting; identical values always print identically."""
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    x = float(x)
    if not np.isfinite(x):
        return "nan" if np.isnan(x) else ("inf" if x > 0 else "-inf")
    return f"{x:.10g}"


def write_csv(path: str | Path, header: list[str], rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(x) for x in row])
    return path


def read_csv(path: str | Path) -> tuple[list[str], np.ndarray]:
    """Header and float body of a numeric CSV."""
    with Path(path).open() as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array(rows[1:], dtype=float).reshape(len(rows) - 1, len(rows[0]))


def quaternions(R: np.ndarray) -> np.ndarray:
    """Scalar-first unit quaternions with non-negative scalar part."""
    q = Rotation.from_matrix(R).as_quat()[:, [3, 0, 1, 2]]
    q[q[:, 0] < 0] *= -1.0
    return q


def _pose_rows(t, R, p, v):
    return np.column_stack([t, quaternions(R), p, v])


def write_trajectory(path, traj: Trajectory, index: np.ndarray) -> Path:
    return write_csv(path, TRAJECTORY_HEADER, _pose_rows(traj.t[index], traj.R[index], traj.p[index], traj.v[index]))


def write_imu(path, st: SensorStreams) -> Path:
    return write_csv(path, IMU_HEADER, np.column_stack([st.imu_t, st.omega_m, st.acc_m]))


def write_measurements(path, st: SensorStreams) -> Path:
    Y = st.meas_y
    return write_csv(path, MEAS_HEADER, _pose_rows(st.meas_t, Y[:, 0:3, 0:3], Y[:, 0:3, 3], Y[:, 0:3, 4]))


def write_bias(path, st: SensorStreams) -> Path:
    return write_csv(path, BIAS_HEADER, np.column_stack([st.imu_t, st.bias_w, st.bias_a]))


def write_report(path, report: RunReport) -> Path:
    return write_csv(path, REPORT_HEADER, np.column_stack([report.t, report.errors, report.lyap]))


def aggregate_rows(mc: MonteCarloReport, kind: str) -> list[list]:
    rows = []
    for i in range(len(mc.runs)):
        for ph in PHASES:
            rows.append([i, ph, *mc.table(kind, ph)[i]])
    for name, fn in (("mean", mc.mean), ("std", mc.std)):
        for ph in PHASES:
            rows.append([name, ph, *fn(kind, ph)])
    return rows


def write_aggregate(path, mc: MonteCarloReport, kind: str) -> Path:
    return write_csv(path, AGGREGATE_HEADER, aggregate_rows(mc, kind))


def write_sweep(path, sweep: SweepReport) -> Path:
    rows = [[r.scale, r.kind, r.initial_error, r.final_error, r.converged, r.diverged] for r in sweep.rows]
    return write_csv(path, SWEEP_HEADER, rows)


def write_tuning(path, rows: list[TuningRow]) -> Path:
    out = []
    for r in rows:
        status = "FAIL" if r.failed else "OK"
        out.append([r.tuning, r.kind, status, "T", *r.rmse_transient])
        out.append([r.tuning, r.kind, status, "A", *r.rmse_asymptotic])
    return write_csv(path, TUNING_HEADER, out)
