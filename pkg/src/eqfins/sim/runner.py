"""Single filter runs against simulated data, and their error metrics."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import eqf
from ..exceptions import EqfInsError
from ..lie import pose, rotation_angle, so3_exp, so3_log
from ..mekf import MekfState, error_state, mekf_propagate, mekf_update
from ..model import GRAVITY, SystemInput, SystemState, measurement_noise_cov
from .config import SimConfig
from .sensors import SensorStreams, simulate_sensors
from .trajectory import Trajectory, generate_trajectory

FILTERS = ("eqf", "mekf")
METRICS = ("att", "pos", "vel", "bw", "ba")
_FLOOR = 1e-6


@dataclass(frozen=True)
class Tuning:
    """Gains for both filters, built from the same noise figures."""

    eqf: eqf.FilterConfig
    mekf_P: np.ndarray
    mekf_Q: np.ndarray
    mekf_Sigma0: np.ndarray


def _prior_std(cfg: SimConfig, scale: float) -> np.ndarray:
    """Initial standard deviations of (att, pos, vel, bw, nu-bias, ba)."""
    if cfg.init_mode == "offset":
        s = np.array([np.deg2rad(cfg.init_att_deg), cfg.init_pos_m, cfg.init_vel_mps,
                      cfg.init_bias, cfg.prior_nu, cfg.init_bias])
    else:
        s = np.array([np.deg2rad(cfg.prior_att_deg), cfg.prior_pos_m, cfg.prior_vel_mps,
                      cfg.prior_bw, cfg.prior_nu, cfg.prior_ba])
    return np.maximum(scale * s, _FLOOR)


def default_tuning(cfg: SimConfig, process_scale: float = 1.0, prior_scale: float = 1.0) -> Tuning:
    """Gains from the configured sensor noise.

    IMU standard deviations are per sample, so their continuous densities
    are ``sigma^2 / imu_rate``. ``process_scale`` multiplies every process
    noise term; ``prior_scale`` multiplies the initial standard deviations.
    """
    dt = 1.0 / cfg.imu_rate
    q = np.array([cfg.sigma_w**2 * dt, cfg.nu_noise**2, cfg.sigma_a**2 * dt,
                  cfg.bias_walk_w**2, cfg.nu_bias_walk**2, cfg.bias_walk_a**2])
    q = np.maximum(process_scale * q, _FLOOR**2)
    s0 = _prior_std(cfg, prior_scale) ** 2
    Q = measurement_noise_cov(cfg.sigma_theta, cfg.sigma_p, cfg.sigma_v)
    Q = np.maximum(Q, _FLOOR**2 * np.eye(9))
    eqf_cfg = eqf.FilterConfig(
        P=np.diag(np.repeat(q, 3)),
        Q=Q,
        Sigma0=np.diag(np.repeat(s0, 3)),
        max_step=cfg.max_step,
        body_frame_noise=cfg.body_frame_noise,
    )
    keep = [0, 1, 2, 3, 5]  # the MEKF has no virtual bias
    return Tuning(eqf_cfg, np.diag(np.repeat(q[keep], 3)), Q.copy(), np.diag(np.repeat(s0[keep], 3)))


@dataclass(frozen=True)
class Scenario:
    """Truth, sensor data and the shared initial estimate of one run."""

    cfg: SimConfig
    traj: Trajectory
    streams: SensorStreams
    xi_hat0: SystemState

    def truth(self, k: int) -> SystemState:
        """True state at base-grid index ``k``."""
        i = min(k // self.cfg.imu_step, len(self.streams.imu_t) - 1)
        b = np.concatenate([self.streams.bias_w[i], np.zeros(3), self.streams.bias_a[i]])
        return SystemState(self.traj.pose(k), b)


def _unit(rng: np.random.Generator) -> np.ndarray:
    d = rng.normal(size=3)
    return d / np.linalg.norm(d)


def initial_estimate(cfg: SimConfig, xi0: SystemState, rng: np.random.Generator, scale: float = 1.0) -> SystemState:
    """Starting estimate for both filters.

    ``zero`` mode ignores the truth. ``offset`` mode displaces every
    component of the truth by ``scale`` times its configured magnitude
    along an independent random direction.
    """
    dirs = [_unit(rng) for _ in range(5)]
    if cfg.init_mode == "zero":
        return SystemState()
    R = xi0.R @ so3_exp(scale * np.deg2rad(cfg.init_att_deg) * dirs[0])
    p = xi0.p + scale * cfg.init_pos_m * dirs[1]
    v = xi0.v + scale * cfg.init_vel_mps * dirs[2]
    bw = xi0.b[0:3] + scale * cfg.init_bias * dirs[3]
    ba = xi0.b[6:9] + scale * cfg.init_bias * dirs[4]
    return SystemState(pose(R, p, v), np.concatenate([bw, np.zeros(3), ba]))


def simulate(cfg: SimConfig, seed: int | None = None, init_scale: float = 1.0) -> Scenario:
    """Generate truth, sensors and initial estimate from independent streams of ``seed``."""
    seed = cfg.seed if seed is None else seed
    traj_ss, sens_ss, init_ss = np.random.SeedSequence(seed).spawn(3)
    traj = generate_trajectory(cfg, np.random.default_rng(traj_ss))
    streams = simulate_sensors(traj, cfg, np.random.default_rng(sens_ss))
    scen = Scenario(cfg, traj, streams, SystemState())
    xi_hat0 = initial_estimate(cfg, scen.truth(0), np.random.default_rng(init_ss), init_scale)
    return Scenario(cfg, traj, streams, xi_hat0)


def error_vector(est: SystemState, truth: SystemState) -> np.ndarray:
    """15-vector (attitude, position, velocity, gyro bias, acc bias) error, filter independent."""
    return np.concatenate([
        so3_log(est.R.T @ truth.R),
        truth.p - est.p,
        truth.v - est.v,
        truth.b[0:3] - est.b[0:3],
        truth.b[6:9] - est.b[6:9],
    ])


def _metrics(est: SystemState, truth: SystemState) -> np.ndarray:
    return np.array([
        np.rad2deg(rotation_angle(est.R.T @ truth.R)),
        np.linalg.norm(truth.p - est.p),
        np.linalg.norm(truth.v - est.v),
        np.linalg.norm(truth.b[0:3] - est.b[0:3]),
        np.linalg.norm(truth.b[6:9] - est.b[6:9]),
    ])


@dataclass
class RunReport:
    kind: str
    t: np.ndarray
    errors: np.ndarray  # columns METRICS; attitude in degrees
    lyap: np.ndarray
    eps_norm: np.ndarray  # norm of the filter's own error coordinates
    update_t: np.ndarray
    update_lyap: np.ndarray
    initial_eps_norm: float
    initial_error_norm: float
    final_error_norm: float
    diverged: bool
    reason: str = ""
    window: float = 40.0
    duration: float = 120.0
    rmse_transient: np.ndarray = field(init=False)
    rmse_asymptotic: np.ndarray = field(init=False)

    def __post_init__(self):
        self.rmse_transient = self._rmse(self.t < self.window)
        self.rmse_asymptotic = self._rmse(self.t >= self.duration - self.window - 1e-9)

    def _rmse(self, mask: np.ndarray) -> np.ndarray:
        if not np.any(mask):
            return np.full(len(METRICS), np.nan)
        return np.sqrt(np.mean(self.errors[mask] ** 2, axis=0))


class _Eqf:
    def __init__(self, scen: Scenario, tuning: Tuning):
        self.cfg = tuning.eqf
        self.fs = eqf.initial_state(self.cfg, scen.xi_hat0)

    def propagate(self, w0, a0, w1, a1, dt):
        u0 = SystemInput.from_imu(w0, a0, GRAVITY)
        u1 = SystemInput.from_imu(w1, a1, GRAVITY)
        self.fs = eqf.propagate(self.fs, u0, dt, self.cfg, u_end=u1)

    def update(self, y):
        self.fs = eqf.update(self.fs, y, self.cfg)

    def estimate(self):
        return eqf.estimate(self.fs)

    def own_error(self, truth):
        eps = eqf.error_coordinates(self.fs.X, truth)
        return eps, float(eps @ np.linalg.solve(self.fs.Sigma, eps))


class _Mekf:
    def __init__(self, scen: Scenario, tuning: Tuning):
        self.P, self.Q = tuning.mekf_P, tuning.mekf_Q
        self.max_step = scen.cfg.max_step
        self.s = MekfState.from_system_state(scen.xi_hat0, tuning.mekf_Sigma0)

    def propagate(self, w0, a0, w1, a1, dt):
        self.s = mekf_propagate(self.s, w0, a0, dt, self.P, omega_end=w1, acc_end=a1, max_step=self.max_step)

    def update(self, y):
        self.s = mekf_update(self.s, y, self.Q)

    def estimate(self):
        return self.s.as_system_state()

    def own_error(self, truth):
        d = error_state(self.s, truth.R, truth.p, truth.v, truth.b[0:3], truth.b[6:9])
        return d, float(d @ np.linalg.solve(self.s.Sigma, d))


def run_filter(kind: str, scen: Scenario, tuning: Tuning | None = None) -> RunReport:
    """Run one filter over a scenario.

    Propagation follows every IMU sample, with the readings linearly
    interpolated between samples; updates happen at measurement times
    (before propagating further when both coincide). Errors are recorded
    at every IMU sample. A filter exception ends the run and marks it
    diverged; the remaining rows are NaN.
    """
    if kind not in FILTERS:
        raise ValueError(f"unknown filter {kind!r}")
    cfg = scen.cfg
    tuning = tuning or default_tuning(cfg)
    st = scen.streams
    filt = _Eqf(scen, tuning) if kind == "eqf" else _Mekf(scen, tuning)

    n_imu = len(st.imu_t)
    last = int(st.imu_index[-1])
    step = cfg.imu_step
    meas_at = {int(k): j for j, k in enumerate(st.meas_index)}
    bounds = sorted(set(st.imu_index.tolist()) | set(k for k in meas_at if k <= last))

    def imu_at(k):
        i, r = divmod(k, step)
        if r == 0 or i + 1 >= n_imu:
            return st.omega_m[i], st.acc_m[i]
        lam = r / step
        return (st.omega_m[i] + lam * (st.omega_m[i + 1] - st.omega_m[i]),
                st.acc_m[i] + lam * (st.acc_m[i + 1] - st.acc_m[i]))

    errors = np.full((n_imu, len(METRICS)), np.nan)
    lyap = np.full(n_imu, np.nan)
    eps_norm = np.full(n_imu, np.nan)
    upd_t, upd_L = [], []
    truth0 = scen.truth(0)
    eps0, _ = filt.own_error(truth0)
    initial_error = float(np.linalg.norm(error_vector(filt.estimate(), truth0)))
    diverged, reason = False, ""
    final_error = np.nan

    try:
        for n, k in enumerate(bounds):
            truth = scen.truth(k)
            if k in meas_at:
                filt.update(st.meas_y[meas_at[k]])
                upd_t.append(k / cfg.base_rate)
                upd_L.append(filt.own_error(truth)[1])
            if k % step == 0:
                i = k // step
                est = filt.estimate()
                errors[i] = _metrics(est, truth)
                e, L = filt.own_error(truth)
                lyap[i], eps_norm[i] = L, np.linalg.norm(e)
                if i == n_imu - 1:
                    final_error = float(np.linalg.norm(error_vector(est, truth)))
            if n + 1 < len(bounds):
                k1 = bounds[n + 1]
                w0, a0 = imu_at(k)
                w1, a1 = imu_at(k1)
                filt.propagate(w0, a0, w1, a1, (k1 - k) / cfg.base_rate)
    except (EqfInsError, np.linalg.LinAlgError) as exc:
        diverged, reason = True, f"{type(exc).__name__}: {exc}"

    if not diverged and not np.isfinite(final_error):
        diverged, reason = True, "non-finite error"
    if not diverged and final_error > max(initial_error, cfg.divergence_floor):
        diverged, reason = True, f"final error {final_error:.3g} exceeds initial {initial_error:.3g}"

    return RunReport(
        kind=kind,
        t=st.imu_t.copy(),
        errors=errors,
        lyap=lyap,
        eps_norm=eps_norm,
        update_t=np.array(upd_t),
        update_lyap=np.array(upd_L),
        initial_eps_norm=float(np.linalg.norm(eps0)),
        initial_error_norm=initial_error,
        final_error_norm=final_error,
        diverged=diverged,
        reason=reason,
        window=cfg.window,
        duration=float(st.imu_t[-1]),
    )
