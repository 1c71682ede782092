"""The semi-direct product group SE_2(3) x| se_2(3).

Elements are pairs ``(A, a)`` with ``A`` an extended pose and ``a`` the
coordinates of an se_2(3) element. The product is
``(B, b)(A, a) = (BA, b + Ad_B a)``.

Tangent vectors at the identity are 18-vectors ``[w1, w2]`` (two stacked
se_2(3) coordinate vectors). Tangent vectors at a general element ``X``
are returned as a pair ``(A_dot, a_dot)`` with ``A_dot`` a 5x5 matrix.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .lie import (
    adjoint_algebra,
    adjoint_matrix,
    se23_exp,
    se23_inverse,
    se23_wedge,
)


@dataclass(frozen=True)
class SdpElement:
    A: np.ndarray = field(default_factory=lambda: np.eye(5))
    a: np.ndarray = field(default_factory=lambda: np.zeros(9))

    @classmethod
    def identity(cls) -> "SdpElement":
        return cls()

    def __matmul__(self, other: "SdpElement") -> "SdpElement":
        return compose(self, other)

    def inv(self) -> "SdpElement":
        return inverse(self)


def compose(Y: SdpElement, X: SdpElement) -> SdpElement:
    """Group product ``YX``."""
    return SdpElement(Y.A @ X.A, Y.a + adjoint_matrix(Y.A) @ X.a)


def inverse(X: SdpElement) -> SdpElement:
    Ainv = se23_inverse(X.A)
    return SdpElement(Ainv, -adjoint_matrix(Ainv) @ X.a)


def dL(X: SdpElement, w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Differential of left translation by ``X`` applied to an identity tangent."""
    return X.A @ se23_wedge(w[0:9]), adjoint_matrix(X.A) @ w[9:18]


def dR(X: SdpElement, w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Differential of right translation by ``X`` applied to an identity tangent."""
    return se23_wedge(w[0:9]) @ X.A, w[9:18] + adjoint_algebra(w[0:9]) @ X.a


def sdp_adjoint_matrix(X: SdpElement) -> np.ndarray:
    """18x18 matrix of the group Adjoint ``Ad_X = dL_X dR_{X^-1}``."""
    Ad = adjoint_matrix(X.A)
    M = np.zeros((18, 18))
    M[0:9, 0:9] = Ad
    M[9:18, 9:18] = Ad
    # -ad_{Ad u1} a = ad_a (Ad u1)
    M[9:18, 0:9] = adjoint_algebra(X.a) @ Ad
    return M


def sdp_adjoint(X: SdpElement, u: np.ndarray) -> np.ndarray:
    Ad = adjoint_matrix(X.A)
    u1 = Ad @ u[0:9]
    return np.concatenate([u1, Ad @ u[9:18] - adjoint_algebra(u1) @ X.a])


def sdp_exp(u: np.ndarray) -> SdpElement:
    """Group exponential, the time-one flow of ``X_dot = dR_X[u]`` from identity.

    The algebra part is ``D(ad_u1) u2`` with ``D(M) = int_0^1 exp(sM) ds``,
    read off the exponential of the augmented matrix ``[[M, u2], [0, 0]]``.
    """
    u = np.asarray(u, dtype=float)
    aug = np.zeros((10, 10))
    aug[0:9, 0:9] = adjoint_algebra(u[0:9])
    aug[0:9, 9] = u[9:18]
    return SdpElement(se23_exp(u[0:9]), expm(aug)[0:9, 9])
