"""Ground-truth trajectories: spline position, sinusoidal body rate."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np
from scipy.interpolate import CubicSpline

from ..lie import pose, project_rotation, skew, so3_exp
from ..model import GRAVITY
from .config import SimConfig


@dataclass(frozen=True)
class TrajectorySample:
    t: float
    T_true: np.ndarray
    omega_true: np.ndarray
    acc_true: np.ndarray  # specific force in the body frame


@dataclass(frozen=True)
class Trajectory:
    """Truth sampled on the common base grid (see :attr:`SimConfig.base_rate`)."""

    t: np.ndarray
    R: np.ndarray
    p: np.ndarray
    v: np.ndarray
    omega: np.ndarray
    acc: np.ndarray

    def __len__(self) -> int:
        return len(self.t)

    def pose(self, k: int) -> np.ndarray:
        return pose(self.R[k], self.p[k], self.v[k])

    def sample(self, k: int) -> TrajectorySample:
        return TrajectorySample(float(self.t[k]), self.pose(k), self.omega[k], self.acc[k])

    def samples(self, step: int = 1) -> Iterator[TrajectorySample]:
        for k in range(0, len(self.t), step):
            yield self.sample(k)


class _BodyRate:
    """Sum of sinusoids per axis; the amplitudes on each axis add up to at most ``omega_max``."""

    def __init__(self, cfg: SimConfig, rng: np.random.Generator):
        n = cfg.n_sines
        w = rng.uniform(0.0, 1.0, size=(3, n))
        total = cfg.omega_max * rng.uniform(0.5, 1.0, size=(3, 1))
        self.amp = w / np.maximum(w.sum(axis=1, keepdims=True), 1e-12) * total if n else np.zeros((3, 0))
        self.freq = 2 * np.pi * rng.uniform(cfg.sine_freq_min, cfg.sine_freq_max, size=(3, n))
        self.phase = rng.uniform(0.0, 2 * np.pi, size=(3, n))

    def __call__(self, t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        return np.einsum("an,tan->ta", self.amp, np.sin(self.freq[None] * t[:, None, None] + self.phase[None]))


def _integrate_attitude(R0: np.ndarray, rate: _BodyRate, t: np.ndarray) -> np.ndarray:
    """RK4 on R_dot = R skew(omega) with re-orthonormalisation after each step."""
    if len(t) == 1:
        return R0[None].copy()
    h = t[1] - t[0]
    w = rate(t)
    w_mid = rate(t[:-1] + 0.5 * h)
    Rs = np.empty((len(t), 3, 3))
    R = R0.copy()
    Rs[0] = R
    for k in range(len(t) - 1):
        W0, Wm, W1 = skew(w[k]), skew(w_mid[k]), skew(w[k + 1])
        k1 = R @ W0
        k2 = (R + 0.5 * h * k1) @ Wm
        k3 = (R + 0.5 * h * k2) @ Wm
        k4 = (R + h * k3) @ W1
        R = project_rotation(R + h / 6.0 * (k1 + 2.0 * (k2 + k3) + k4))
        Rs[k + 1] = R
    return Rs


def random_rotation(rng: np.random.Generator, max_angle: float) -> np.ndarray:
    axis = rng.normal(size=3)
    axis /= np.linalg.norm(axis)
    return so3_exp(rng.uniform(0.0, max_angle) * axis)


def generate_trajectory(cfg: SimConfig, rng: np.random.Generator) -> Trajectory:
    """Smooth random trajectory on the base grid.

    Position is a C2 cubic spline through ``n_waypoints`` points drawn in
    ``[-box, box]^3`` at uniformly spaced times; velocity and acceleration
    are its analytic derivatives. The attitude starts at a random rotation
    and follows the body rate.
    """
    n = int(round(cfg.duration * cfg.base_rate)) + 1
    t = np.arange(n) / cfg.base_rate
    waypoints = rng.uniform(-cfg.box, cfg.box, size=(cfg.n_waypoints, 3))
    if cfg.n_waypoints == 1:
        p = np.repeat(waypoints, n, axis=0)
        v = np.zeros((n, 3))
        acc_world = np.zeros((n, 3))
    else:
        knots = np.linspace(0.0, cfg.duration, cfg.n_waypoints)
        kind = "not-a-knot" if cfg.n_waypoints > 3 else "natural"
        spline = CubicSpline(knots, waypoints, bc_type=kind)
        p, v, acc_world = spline(t), spline(t, 1), spline(t, 2)
    R0 = random_rotation(rng, np.deg2rad(cfg.attitude_max_deg))
    rate = _BodyRate(cfg, rng)
    R = _integrate_attitude(R0, rate, t)
    omega = rate(t)
    acc = np.einsum("tji,tj->ti", R, acc_world - GRAVITY)
    return Trajectory(t, R, p, v, omega, acc)
