"""Equivariant filter for the biased INS on SE_2(3) x| se_2(3).

The filter state is ``(X_hat, Sigma)``. Between measurements the lifted
system and the Riccati equation (without its output term) are integrated
with RK4; each measurement is folded in with a discrete Kalman-style
update whose correction is applied as ``X_hat <- exp(Delta) X_hat``.

Error coordinates are ``eps = (log(e_1), e_2)`` with
``e = phi(X_hat^-1, xi)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .exceptions import NonFiniteState, SingularInnovationCov, StructureViolation
from .lie import (
    adjoint_algebra,
    adjoint_matrix,
    project_rotation,
    se23_exp,
    se23_inverse,
    se23_log,
    se23_wedge,
    skew,
)
from .model import Measurement, SystemInput, SystemState
from .sdp import SdpElement, compose, inverse, sdp_exp
from .symmetry import ORIGIN, phi, psi

OUTPUT_MATRIX = np.hstack([np.eye(9), np.zeros((9, 9))])
OUTPUT_MATRIX.setflags(write=False)

# d(eps) o D phi_{xi_0}(E)|_{E=I}; its own inverse
_INNOVATION_MAP = np.concatenate([np.ones(9), -np.ones(9)])


@dataclass(frozen=True)
class FilterConfig:
    """Gains of the filter.

    ``P`` (18x18) and ``Q`` (9x9) are the state and output gain matrices.
    With ``body_frame_noise`` set they are read as sensor-frame noise
    covariances and mapped into error coordinates through ``Ad_{A_hat}`` at
    every use; otherwise they are used as given.
    """

    P: np.ndarray
    Q: np.ndarray
    Sigma0: np.ndarray
    max_step: float = 0.01
    body_frame_noise: bool = True

    def __post_init__(self):
        for name, M, n in (("P", self.P, 18), ("Q", self.Q, 9), ("Sigma0", self.Sigma0, 18)):
            M = np.asarray(M, dtype=float)
            if M.shape != (n, n):
                raise StructureViolation(f"{name} must be {n}x{n}, got {M.shape}")
            if not np.allclose(M, M.T, atol=1e-12) or np.linalg.eigvalsh(M)[0] <= 0.0:
                raise StructureViolation(f"{name} must be symmetric positive definite")
        if self.max_step <= 0.0:
            raise ValueError("max_step must be positive")


@dataclass(frozen=True)
class FilterState:
    X: SdpElement = field(default_factory=SdpElement.identity)
    Sigma: np.ndarray = field(default_factory=lambda: np.eye(18))
    t: float = 0.0


def initial_state(cfg: FilterConfig, xi_hat: SystemState | None = None, t: float = 0.0) -> FilterState:
    """Filter state whose estimate is ``xi_hat`` (the origin by default)."""
    X = SdpElement.identity() if xi_hat is None else element_for_estimate(xi_hat)
    return FilterState(X, np.array(cfg.Sigma0, dtype=float), t)


def element_for_estimate(xi_hat: SystemState) -> SdpElement:
    """``X`` with ``phi(X, xi_0) = xi_hat``."""
    return SdpElement(xi_hat.T.copy(), -adjoint_matrix(xi_hat.T) @ xi_hat.b)


def estimate(fs: FilterState) -> SystemState:
    return phi(fs.X, ORIGIN)


def error_coordinates(X_hat: SdpElement, xi: SystemState) -> np.ndarray:
    """``eps`` of the true state ``xi`` relative to ``X_hat``."""
    e = phi(inverse(X_hat), xi)
    return np.concatenate([se23_log(e.T), e.b])


def state_from_error(X_hat: SdpElement, eps: np.ndarray) -> SystemState:
    """Inverse of :func:`error_coordinates`."""
    return phi(X_hat, SystemState(se23_exp(eps[0:9]), np.array(eps[9:18], dtype=float)))


def origin_input(X_hat: SdpElement, u: SystemInput) -> SystemInput:
    return psi(inverse(X_hat), u)


def upsilon(g: np.ndarray) -> np.ndarray:
    U = np.zeros((9, 9))
    U[3:6, 6:9] = np.eye(3)
    U[6:9, 0:3] = skew(g)
    return U


def state_matrix(u0: SystemInput) -> np.ndarray:
    """Linearised error-state matrix for the origin input ``u0``."""
    At = np.zeros((18, 18))
    At[0:9, 0:9] = upsilon(u0.g)
    At[0:9, 9:18] = -np.eye(9)
    At[9:18, 9:18] = adjoint_algebra(u0.w + u0.g9)
    return At


def output_matrix() -> np.ndarray:
    return OUTPUT_MATRIX.copy()


def residual(X_hat: SdpElement, y: np.ndarray) -> np.ndarray:
    """``log(y A_hat^-1)``; raises :class:`~eqfins.exceptions.ChartBoundary` when undefined."""
    return se23_log(y @ se23_inverse(X_hat.A))


def innovation(Sigma: np.ndarray, r: np.ndarray, Q: np.ndarray) -> np.ndarray:
    """Innovation ``Delta`` for residual ``r`` with continuous output gain ``Q``."""
    k = Sigma[:, 0:9] @ np.linalg.solve(Q, r)
    return _INNOVATION_MAP * k


def _noise_matrices(A: np.ndarray, cfg: FilterConfig, Ad: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray]:
    if not cfg.body_frame_noise:
        return cfg.P, cfg.Q
    if Ad is None:
        Ad = adjoint_matrix(A)
    P = cfg.P
    Pt = np.empty((18, 18))
    Pt[0:9, 0:9] = Ad @ P[0:9, 0:9] @ Ad.T
    Pt[0:9, 9:18] = Ad @ P[0:9, 9:18] @ Ad.T
    Pt[9:18, 0:9] = Pt[0:9, 9:18].T
    Pt[9:18, 9:18] = Ad @ P[9:18, 9:18] @ Ad.T
    return Pt, Ad @ cfg.Q @ Ad.T


def _state_matrix_at(A: np.ndarray, a: np.ndarray, u: SystemInput, Ad: np.ndarray | None = None) -> np.ndarray:
    # origin input w-slot: Ad_A w + a + f01(A)
    if Ad is None:
        Ad = adjoint_matrix(A)
    w0 = Ad @ u.w + a
    w0[3:6] += A[0:3, 4]
    At = np.zeros((18, 18))
    At[0:9, 0:9] = upsilon(u.g)
    At[0:9, 9:18] = -np.eye(9)
    At[9:18, 9:18] = adjoint_algebra(w0 + u.g9)
    return At


def _flow(A, a, Sigma, u, cfg):
    """Lifted-system velocity and Riccati rate, sharing the adjoint matrices."""
    Ad = adjoint_matrix(A)
    Ad_inv = adjoint_matrix(se23_inverse(A))
    g9 = u.g9
    b_neg = Ad_inv @ a
    W = u.w + b_neg
    A_dot = A @ se23_wedge(W) + se23_wedge(g9) @ A
    A_dot[0:3, 3] += A[0:3, 4]
    lam1 = W + Ad_inv @ g9
    lam1[3:6] += A[0:3, 0:3].T @ A[0:3, 4]
    a_dot = Ad @ (adjoint_algebra(-b_neg) @ lam1 - u.tau)
    At = _state_matrix_at(A, a, u, Ad)
    Pt, _ = _noise_matrices(A, cfg, Ad)
    AS = At @ Sigma
    return A_dot, a_dot, AS + AS.T + Pt


def _rk4_step(A, a, Sigma, u_at, h, cfg):
    u_mid = u_at(0.5)
    k1 = _flow(A, a, Sigma, u_at(0.0), cfg)
    k2 = _flow(A + 0.5 * h * k1[0], a + 0.5 * h * k1[1], Sigma + 0.5 * h * k1[2], u_mid, cfg)
    k3 = _flow(A + 0.5 * h * k2[0], a + 0.5 * h * k2[1], Sigma + 0.5 * h * k2[2], u_mid, cfg)
    k4 = _flow(A + h * k3[0], a + h * k3[1], Sigma + h * k3[2], u_at(1.0), cfg)
    c = h / 6.0
    A = A + c * (k1[0] + 2.0 * (k2[0] + k3[0]) + k4[0])
    a = a + c * (k1[1] + 2.0 * (k2[1] + k3[1]) + k4[1])
    Sigma = Sigma + c * (k1[2] + 2.0 * (k2[2] + k3[2]) + k4[2])
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(a)) and np.all(np.isfinite(Sigma))):
        raise NonFiniteState("non-finite filter state during propagation")
    A[0:3, 0:3] = project_rotation(A[0:3, 0:3])
    return A, a, 0.5 * (Sigma + Sigma.T)


def _interpolator(u: SystemInput, u_end: SystemInput | None):
    if u_end is None:
        return lambda s: u
    dw, dtau = u_end.w - u.w, u_end.tau - u.tau
    return lambda s: SystemInput(u.w + s * dw, u.g, u.tau + s * dtau)


def propagate(
    fs: FilterState,
    u: SystemInput,
    dt: float,
    cfg: FilterConfig,
    u_end: SystemInput | None = None,
) -> FilterState:
    """Advance the filter by ``dt`` seconds with no measurement.

    ``u`` is held constant over the interval unless ``u_end`` is given, in
    which case the input is linearly interpolated from ``u`` to ``u_end``.
    Intervals longer than ``cfg.max_step`` are split into equal RK4 steps.

    :raises NonFiniteState: if the result contains NaN or inf.
    """
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    n = max(1, int(np.ceil(dt / cfg.max_step - 1e-9)))
    h = dt / n
    u_at = _interpolator(u, u_end)
    A, a, Sigma = fs.X.A.copy(), fs.X.a.copy(), fs.Sigma
    for i in range(n):
        s0, s1 = i / n, (i + 1) / n
        A, a, Sigma = _rk4_step(A, a, Sigma, lambda s: u_at(s0 + s * (s1 - s0)), h, cfg)
    return FilterState(SdpElement(A, a), Sigma, fs.t + dt)


def update(fs: FilterState, y: Measurement | np.ndarray, cfg: FilterConfig) -> FilterState:
    """Fold in an extended-pose measurement (Joseph-form covariance update).

    :raises ChartBoundary: if the residual leaves the logarithm's domain.
    :raises SingularInnovationCov: if the innovation covariance is singular.
    """
    Y = y.y if isinstance(y, Measurement) else y
    X, Sigma = fs.X, fs.Sigma
    r = residual(X, Y)
    _, Qt = _noise_matrices(X.A, cfg)
    S = Sigma[0:9, 0:9] + Qt
    try:
        K = np.linalg.solve(S, Sigma[0:9, :]).T
    except np.linalg.LinAlgError as exc:
        raise SingularInnovationCov(str(exc)) from exc
    if not np.all(np.isfinite(K)):
        raise SingularInnovationCov("non-finite gain")
    Delta = _INNOVATION_MAP * (K @ r)
    X_new = compose(sdp_exp(Delta), X)
    IKC = np.eye(18)
    IKC[:, 0:9] -= K
    Sigma_new = IKC @ Sigma @ IKC.T + K @ Qt @ K.T
    Sigma_new = 0.5 * (Sigma_new + Sigma_new.T)
    if not (np.all(np.isfinite(X_new.A)) and np.all(np.isfinite(X_new.a))):
        raise NonFiniteState("non-finite state after update")
    return replace(fs, X=X_new, Sigma=Sigma_new)


def lyapunov(fs: FilterState, xi_true: SystemState) -> float:
    """``eps^T Sigma^-1 eps`` for the true state ``xi_true``."""
    eps = error_coordinates(fs.X, xi_true)
    return float(eps @ np.linalg.solve(fs.Sigma, eps))
