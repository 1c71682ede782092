"""Biased inertial navigation system with virtual velocity input and bias.

The state is ``xi = (T, b)`` with ``T`` an extended pose and
``b = (b_omega, b_nu, b_a)``; the input is ``u = (w, g, tau)`` with
``w = (omega, nu, a)`` the (extended) IMU reading, ``g`` the gravity
vector and ``tau`` the bias rates. Physical inputs have ``nu = 0`` and
``tau = 0``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .lie import se23_exp, se23_wedge

GRAVITY = np.array([0.0, 0.0, -9.80665])


def _zeros9() -> np.ndarray:
    return np.zeros(9)


@dataclass(frozen=True)
class SystemState:
    T: np.ndarray = field(default_factory=lambda: np.eye(5))
    b: np.ndarray = field(default_factory=_zeros9)

    @property
    def R(self) -> np.ndarray:
        return self.T[0:3, 0:3]

    @property
    def p(self) -> np.ndarray:
        return self.T[0:3, 3]

    @property
    def v(self) -> np.ndarray:
        return self.T[0:3, 4]


@dataclass(frozen=True)
class SystemInput:
    w: np.ndarray = field(default_factory=_zeros9)
    g: np.ndarray = field(default_factory=lambda: GRAVITY.copy())
    tau: np.ndarray = field(default_factory=_zeros9)

    @classmethod
    def from_imu(cls, omega, acc, g=GRAVITY) -> "SystemInput":
        """Physical input: zero virtual velocity and zero bias rates."""
        w = np.zeros(9)
        w[0:3] = omega
        w[6:9] = acc
        return cls(w, np.asarray(g, dtype=float), np.zeros(9))

    @property
    def g9(self) -> np.ndarray:
        """Gravity as se_2(3) coordinates ``(0, 0, g)``."""
        return gravity_coords(self.g)


@dataclass(frozen=True)
class Measurement:
    y: np.ndarray
    t: float = 0.0


def gravity_coords(g) -> np.ndarray:
    out = np.zeros(9)
    out[6:9] = g
    return out


def f01(T: np.ndarray) -> np.ndarray:
    """Drift field: the velocity placed in the position column."""
    F = np.zeros((5, 5))
    F[0:3, 3] = T[0:3, 4]
    return F


def system_dynamics(xi: SystemState, u: SystemInput) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(T_dot, b_dot)`` of the extended system in compact affine form."""
    T = xi.T
    T_dot = f01(T) @ T + T @ se23_wedge(u.w - xi.b) + se23_wedge(u.g9) @ T
    return T_dot, np.array(u.tau, dtype=float)


def output(xi: SystemState) -> np.ndarray:
    return xi.T


def measurement_noise_cov(sigma_theta: float, sigma_p: float, sigma_v: float) -> np.ndarray:
    return np.diag(np.repeat([sigma_theta, sigma_p, sigma_v], 3) ** 2)


def cov_sqrt(C: np.ndarray) -> np.ndarray:
    """Matrix square root ``L`` with ``L L^T = C``; accepts singular PSD input."""
    try:
        return np.linalg.cholesky(C)
    except np.linalg.LinAlgError:
        w, V = np.linalg.eigh(C)
        return V * np.sqrt(np.clip(w, 0.0, None))


def sample_measurement(
    T: np.ndarray,
    noise_cov: np.ndarray,
    rng: np.random.Generator | None,
    t: float = 0.0,
    global_noise: bool = False,
    noise: np.ndarray | None = None,
) -> Measurement:
    """Draw ``y = T exp(n)`` with ``n ~ N(0, noise_cov)``.

    ``global_noise=True`` selects the alternative ``y = exp(n) T`` model.
    A pre-drawn ``noise`` vector is used as ``n`` directly, and then
    ``noise_cov`` and ``rng`` are ignored.
    """
    n = cov_sqrt(noise_cov) @ rng.standard_normal(9) if noise is None else np.asarray(noise, dtype=float)
    N = se23_exp(n)
    return Measurement(N @ T if global_noise else T @ N, t)
