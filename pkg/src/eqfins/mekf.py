"""Multiplicative extended Kalman filter baseline.

15-dimensional error state ``(dtheta, dp, dv, db_w, db_a)`` with

    R = R_hat exp(dtheta),  p = p_hat + dp,  v = v_hat + dv,  b = b_hat + db.

The attitude error sits in the body frame, the same side as the
measurement noise in ``y = T exp(n)``, so the measured attitude residual
``log(R_hat^T R_y)`` is directly ``dtheta`` plus noise.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .exceptions import NonFiniteState, SingularInnovationCov
from .lie import pose, project_rotation, skew, so3_exp, so3_log
from .model import GRAVITY, Measurement, SystemState

I3 = np.eye(3)


@dataclass(frozen=True)
class MekfState:
    R: np.ndarray = field(default_factory=lambda: np.eye(3))
    p: np.ndarray = field(default_factory=lambda: np.zeros(3))
    v: np.ndarray = field(default_factory=lambda: np.zeros(3))
    bw: np.ndarray = field(default_factory=lambda: np.zeros(3))
    ba: np.ndarray = field(default_factory=lambda: np.zeros(3))
    Sigma: np.ndarray = field(default_factory=lambda: np.eye(15))
    t: float = 0.0

    @classmethod
    def from_system_state(cls, xi: SystemState, Sigma: np.ndarray, t: float = 0.0) -> "MekfState":
        """Take pose and gyro/accelerometer biases from ``xi``; the virtual bias is dropped."""
        return cls(xi.R.copy(), xi.p.copy(), xi.v.copy(), xi.b[0:3].copy(), xi.b[6:9].copy(),
                   np.array(Sigma, dtype=float), t)

    def as_system_state(self) -> SystemState:
        return SystemState(pose(self.R, self.p, self.v), np.concatenate([self.bw, np.zeros(3), self.ba]))


def error_state(s: MekfState, R, p, v, bw, ba) -> np.ndarray:
    """Error coordinates of the true values relative to ``s``."""
    return np.concatenate([so3_log(s.R.T @ R), p - s.p, v - s.v, bw - s.bw, ba - s.ba])


def error_matrix(R_hat, omega, acc) -> np.ndarray:
    """Error-state Jacobian ``F`` for bias-corrected IMU readings."""
    F = np.zeros((15, 15))
    F[0:3, 0:3] = -skew(omega)
    F[0:3, 9:12] = -I3
    F[3:6, 6:9] = I3
    F[6:9, 0:3] = -R_hat @ skew(acc)
    F[6:9, 12:15] = -R_hat
    return F


def _frame_map(R_hat) -> np.ndarray:
    """Maps sensor-frame noise onto the error state: position and velocity rows are rotated."""
    G = np.eye(15)
    G[3:6, 3:6] = R_hat
    G[6:9, 6:9] = R_hat
    return G


def _deriv(R, p, v, bw, ba, Sigma, omega_m, acc_m, g, P_m):
    omega, acc = omega_m - bw, acc_m - ba
    R_dot = R @ skew(omega)
    v_dot = R @ acc + g
    F = error_matrix(R, omega, acc)
    G = _frame_map(R)
    FS = F @ Sigma
    return R_dot, v, v_dot, FS + FS.T + G @ P_m @ G.T


def _rk4_step(s: MekfState, w0, a0, w1, a1, h, g, P_m):
    wm, am = 0.5 * (w0 + w1), 0.5 * (a0 + a1)
    R, p, v, S = s.R, s.p, s.v, s.Sigma
    k1 = _deriv(R, p, v, s.bw, s.ba, S, w0, a0, g, P_m)
    k2 = _deriv(R + h / 2 * k1[0], p + h / 2 * k1[1], v + h / 2 * k1[2], s.bw, s.ba, S + h / 2 * k1[3], wm, am, g, P_m)
    k3 = _deriv(R + h / 2 * k2[0], p + h / 2 * k2[1], v + h / 2 * k2[2], s.bw, s.ba, S + h / 2 * k2[3], wm, am, g, P_m)
    k4 = _deriv(R + h * k3[0], p + h * k3[1], v + h * k3[2], s.bw, s.ba, S + h * k3[3], w1, a1, g, P_m)
    c = h / 6.0
    R = R + c * (k1[0] + 2 * (k2[0] + k3[0]) + k4[0])
    p = p + c * (k1[1] + 2 * (k2[1] + k3[1]) + k4[1])
    v = v + c * (k1[2] + 2 * (k2[2] + k3[2]) + k4[2])
    S = S + c * (k1[3] + 2 * (k2[3] + k3[3]) + k4[3])
    if not (np.all(np.isfinite(R)) and np.all(np.isfinite(v)) and np.all(np.isfinite(p)) and np.all(np.isfinite(S))):
        raise NonFiniteState("non-finite MEKF state during propagation")
    return replace(s, R=project_rotation(R), p=p, v=v, Sigma=0.5 * (S + S.T), t=s.t + h)


def mekf_propagate(
    s: MekfState,
    omega_m,
    acc_m,
    dt: float,
    P_m: np.ndarray,
    omega_end=None,
    acc_end=None,
    g=GRAVITY,
    max_step: float = 0.01,
) -> MekfState:
    """Advance by ``dt`` with IMU readings ``omega_m``, ``acc_m``.

    Readings are held constant unless end-of-interval values are given, in
    which case they are linearly interpolated. ``P_m`` is the continuous
    noise density of ``(n_w, n_p, n_a, n_bw, n_ba)`` in the sensor frame.
    """
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    w0, a0 = np.asarray(omega_m, dtype=float), np.asarray(acc_m, dtype=float)
    w1 = w0 if omega_end is None else np.asarray(omega_end, dtype=float)
    a1 = a0 if acc_end is None else np.asarray(acc_end, dtype=float)
    g = np.asarray(g, dtype=float)
    n = max(1, int(np.ceil(dt / max_step - 1e-9)))
    h = dt / n
    for i in range(n):
        s0, s1 = i / n, (i + 1) / n
        s = _rk4_step(s, w0 + s0 * (w1 - w0), a0 + s0 * (a1 - a0), w0 + s1 * (w1 - w0), a0 + s1 * (a1 - a0), h, g, P_m)
    return s


def residual(s: MekfState, y: np.ndarray) -> np.ndarray:
    return np.concatenate([so3_log(s.R.T @ y[0:3, 0:3]), y[0:3, 3] - s.p, y[0:3, 4] - s.v])


def mekf_update(s: MekfState, y: Measurement | np.ndarray, Q_m: np.ndarray) -> MekfState:
    """Fold in an extended-pose measurement.

    ``Q_m`` is the covariance of ``n`` in ``y = T exp(n)``; its position and
    velocity blocks are rotated into the world frame before use.
    """
    Y = y.y if isinstance(y, Measurement) else y
    r = residual(s, Y)
    G = np.eye(9)
    G[3:6, 3:6] = s.R
    G[6:9, 6:9] = s.R
    Qw = G @ Q_m @ G.T
    Sigma = s.Sigma
    S = Sigma[0:9, 0:9] + Qw
    try:
        K = np.linalg.solve(S, Sigma[0:9, :]).T
    except np.linalg.LinAlgError as exc:
        raise SingularInnovationCov(str(exc)) from exc
    if not np.all(np.isfinite(K)):
        raise SingularInnovationCov("non-finite gain")
    d = K @ r
    IKH = np.eye(15)
    IKH[:, 0:9] -= K
    Sigma_new = IKH @ Sigma @ IKH.T + K @ Qw @ K.T
    return replace(
        s,
        R=project_rotation(s.R @ so3_exp(d[0:3])),
        p=s.p + d[3:6],
        v=s.v + d[6:9],
        bw=s.bw + d[9:12],
        ba=s.ba + d[12:15],
        Sigma=0.5 * (Sigma_new + Sigma_new.T),
    )
