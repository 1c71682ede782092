"""IMU, bias and extended-pose measurement simulation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..model import Measurement, cov_sqrt, measurement_noise_cov, sample_measurement
from .config import SimConfig
from .trajectory import Trajectory


@dataclass(frozen=True)
class SensorStreams:
    """Sensor data plus the truth needed to score a run.

    IMU arrays are indexed by IMU sample; ``imu_index`` / ``meas_index`` give
    the position of each sample on the trajectory's base grid.
    """

    imu_t: np.ndarray
    imu_index: np.ndarray
    omega_m: np.ndarray
    acc_m: np.ndarray
    bias_w: np.ndarray
    bias_a: np.ndarray
    meas_t: np.ndarray
    meas_index: np.ndarray
    meas_y: np.ndarray
    base_rate: int

    def measurements(self):
        for t, y in zip(self.meas_t, self.meas_y):
            yield Measurement(y, float(t))


def simulate_sensors(traj: Trajectory, cfg: SimConfig, rng: np.random.Generator) -> SensorStreams:
    """Biased noisy IMU at ``imu_rate`` and noisy extended poses at ``meas_rate``.

    Biases start at a random value and follow a random walk integrated at
    the IMU rate. Measurements are ``y = T exp(n)`` with ``n`` drawn from
    the block-diagonal covariance of ``(sigma_theta, sigma_p, sigma_v)``.
    """
    imu_index = np.arange(0, len(traj), cfg.imu_step)
    meas_index = np.arange(0, len(traj), cfg.meas_step)
    m = len(imu_index)
    dt = 1.0 / cfg.imu_rate
    quiet = cfg.noise_free
    quiet_imu = quiet or cfg.noise_free_imu

    # draws happen unconditionally so that switching noise off keeps the
    # remaining random quantities identical
    b0w = cfg.bias_std_w * rng.standard_normal(3)
    b0a = cfg.bias_std_a * rng.standard_normal(3)
    walk_w = rng.standard_normal((m, 3))
    walk_a = rng.standard_normal((m, 3))
    n_w = rng.standard_normal((m, 3))
    n_a = rng.standard_normal((m, 3))
    n_y = rng.standard_normal((len(meas_index), 9))

    ww = 0.0 if quiet_imu else cfg.bias_walk_w * np.sqrt(dt)
    wa = 0.0 if quiet_imu else cfg.bias_walk_a * np.sqrt(dt)
    walk_w[0] = walk_a[0] = 0.0
    bias_w = b0w + ww * np.cumsum(walk_w, axis=0)
    bias_a = b0a + wa * np.cumsum(walk_a, axis=0)

    sw = 0.0 if quiet_imu else cfg.sigma_w
    sa = 0.0 if quiet_imu else cfg.sigma_a
    omega_m = traj.omega[imu_index] + bias_w + sw * n_w
    acc_m = traj.acc[imu_index] + bias_a + sa * n_a

    C = np.zeros((9, 9)) if quiet else measurement_noise_cov(cfg.sigma_theta, cfg.sigma_p, cfg.sigma_v)
    L = cov_sqrt(C)
    meas_y = np.empty((len(meas_index), 5, 5))
    for j, k in enumerate(meas_index):
        meas_y[j] = sample_measurement(traj.pose(k), C, None, noise=L @ n_y[j]).y

    return SensorStreams(
        imu_t=traj.t[imu_index],
        imu_index=imu_index,
        omega_m=omega_m,
        acc_m=acc_m,
        bias_w=bias_w,
        bias_a=bias_a,
        meas_t=traj.t[meas_index],
        meas_index=meas_index,
        meas_y=meas_y,
        base_rate=cfg.base_rate,
    )
