"""Group actions, equivariant lift and lifted system for the biased INS."""

from __future__ import annotations

import numpy as np

from .lie import adjoint_algebra, adjoint_matrix, se23_inverse, se23_wedge
from .model import SystemInput, SystemState, f01
from .sdp import SdpElement

#: State origin ``xi_0 = (I, 0)``; its output is the identity pose.
ORIGIN = SystemState()
OUTPUT_ORIGIN = np.eye(5)


def _f01_coords(T: np.ndarray) -> np.ndarray:
    """``f01(T)`` as se_2(3) coordinates: ``(0, v, 0)``."""
    out = np.zeros(9)
    out[3:6] = T[0:3, 4]
    return out


def phi(X: SdpElement, xi: SystemState) -> SystemState:
    """State action ``(T A, Ad_{A^-1}(b - a))``."""
    Ainv = se23_inverse(X.A)
    return SystemState(xi.T @ X.A, adjoint_matrix(Ainv) @ (xi.b - X.a))


def dphi(X: SdpElement, tangent: tuple[np.ndarray, np.ndarray]) -> tuple[np.ndarray, np.ndarray]:
    """Differential of ``phi_X`` (the same at every state, as the action is affine)."""
    T_dot, b_dot = tangent
    return T_dot @ X.A, adjoint_matrix(se23_inverse(X.A)) @ b_dot


def psi(X: SdpElement, u: SystemInput) -> SystemInput:
    """Input action.

    The ``f01(A^-1)`` term is ``wedge(0, -R^T v, 0)`` and therefore stays in
    se_2(3), so the transformed input keeps the coordinate representation.
    """
    Ainv = se23_inverse(X.A)
    Ad = adjoint_matrix(Ainv)
    return SystemInput(Ad @ (u.w - X.a) + _f01_coords(Ainv), u.g, Ad @ u.tau)


def rho(X: SdpElement, y: np.ndarray) -> np.ndarray:
    return y @ X.A


def transitivity_witness(xi1: SystemState, xi2: SystemState) -> SdpElement:
    """Group element ``Z`` with ``phi(Z, xi1) = xi2``."""
    D = se23_inverse(xi1.T) @ xi2.T
    return SdpElement(D, xi1.b - adjoint_matrix(D) @ xi2.b)


def lift_components(xi: SystemState, u: SystemInput) -> tuple[np.ndarray, np.ndarray]:
    T = xi.T
    R = T[0:3, 0:3]
    lam1 = u.w - xi.b + adjoint_matrix(se23_inverse(T)) @ u.g9
    lam1[3:6] += R.T @ T[0:3, 4]
    lam2 = adjoint_algebra(xi.b) @ lam1 - u.tau
    return lam1, lam2


def lift(xi: SystemState, u: SystemInput) -> np.ndarray:
    """Equivariant lift ``Lambda(xi, u)`` as an 18-vector ``[Lambda1, Lambda2]``."""
    return np.concatenate(lift_components(xi, u))


def lifted_dynamics(X: SdpElement, u: SystemInput) -> tuple[np.ndarray, np.ndarray]:
    """Velocity ``(A_dot, a_dot)`` of the lifted system at ``X``.

    Written out explicitly rather than through ``dL_X Lambda(phi(X, xi_0), u)``;
    the two forms agree and the tests check it.
    """
    A, a = X.A, X.a
    Ainv = se23_inverse(A)
    Ad_inv = adjoint_matrix(Ainv)
    b_neg = Ad_inv @ a
    g9 = u.g9
    A_dot = A @ se23_wedge(u.w + b_neg) + se23_wedge(g9) @ A + f01(A)
    lam1 = u.w + b_neg + Ad_inv @ g9
    lam1[3:6] += A[0:3, 0:3].T @ A[0:3, 4]
    a_dot = adjoint_matrix(A) @ (adjoint_algebra(-b_neg) @ lam1 - u.tau)
    return A_dot, a_dot
