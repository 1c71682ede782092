"""Matrix Lie group primitives for SO(3) and SE_2(3).

Conventions used throughout the package:

* An extended pose is the 5x5 matrix ``[[R, p, v], [0, I_2]]``.
* se_2(3) coordinates are ordered ``(omega, nu, a)``; ``wedge`` puts
  ``skew(omega)`` top-left, ``nu`` in column 4 and ``a`` in column 5.

All functions take and return plain numpy arrays and never modify their
arguments.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from .exceptions import AngleNearPi, StructureViolation

SMALL_ANGLE = 1e-6
# Rotations closer than this to angle pi are outside the log chart.
PI_MARGIN = 1e-6

I3 = np.eye(3)


def skew(w: np.ndarray) -> np.ndarray:
    return np.array(
        [[0.0, -w[2], w[1]], [w[2], 0.0, -w[0]], [-w[1], w[0], 0.0]]
    )


def unskew(W: np.ndarray) -> np.ndarray:
    return np.array([W[2, 1], W[0, 2], W[1, 0]])


def _rodrigues_coeffs(theta: float) -> tuple[float, float, float]:
    """Return (sin t / t, (1 - cos t) / t^2, (t - sin t) / t^3)."""
    if theta < SMALL_ANGLE:
        t2 = theta * theta
        return 1.0 - t2 / 6.0, 0.5 - t2 / 24.0, 1.0 / 6.0 - t2 / 120.0
    s, c = np.sin(theta), np.cos(theta)
    return s / theta, (1.0 - c) / theta**2, (theta - s) / theta**3


def so3_exp(w: np.ndarray) -> np.ndarray:
    """Rodrigues formula, with a second-order expansion near zero."""
    w = np.asarray(w, dtype=float)
    theta = float(np.sqrt(w @ w))
    A, B, _ = _rodrigues_coeffs(theta)
    W = skew(w)
    return I3 + A * W + B * (W @ W)


def so3_left_jacobian(w: np.ndarray) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    theta = float(np.sqrt(w @ w))
    _, B, C = _rodrigues_coeffs(theta)
    W = skew(w)
    return I3 + B * W + C * (W @ W)


def so3_left_jacobian_inv(w: np.ndarray) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    theta = float(np.sqrt(w @ w))
    W = skew(w)
    if theta < SMALL_ANGLE:
        D = 1.0 / 12.0 + theta**2 / 720.0
    else:
        D = 1.0 / theta**2 - (1.0 + np.cos(theta)) / (2.0 * theta * np.sin(theta))
    return I3 - 0.5 * W + D * (W @ W)


def rotation_angle(R: np.ndarray) -> float:
    """Angle of a rotation matrix in [0, pi], accurate at both ends."""
    s = 0.5 * np.linalg.norm(unskew(R - R.T))
    c = 0.5 * (np.trace(R) - 1.0)
    return float(np.arctan2(s, c))


def so3_log(R: np.ndarray) -> np.ndarray:
    """Inverse of :func:`so3_exp` on rotations with angle below pi.

    :raises AngleNearPi: if the angle is within ``PI_MARGIN`` of pi.
    """
    R = np.asarray(R, dtype=float)
    theta = rotation_angle(R)
    if theta > np.pi - PI_MARGIN:
        raise AngleNearPi(f"rotation angle too close to pi ({theta:.9f})")
    v = unskew(R - R.T)
    if theta < SMALL_ANGLE:
        return 0.5 * (1.0 + theta**2 / 6.0) * v
    if theta < np.pi - 1e-2:
        return theta / (2.0 * np.sin(theta)) * v
    # near pi the antisymmetric part vanishes; read the axis off the
    # symmetric part and fix its sign with the antisymmetric one
    B = 0.5 * (R + R.T) - np.cos(theta) * I3
    k = int(np.argmax(np.diag(B)))
    axis = B[:, k] / np.linalg.norm(B[:, k])
    if axis @ v < 0.0:
        axis = -axis
    return theta * axis


def se23_wedge(v: np.ndarray) -> np.ndarray:
    M = np.zeros((5, 5))
    M[0, 1], M[0, 2] = -v[2], v[1]
    M[1, 0], M[1, 2] = v[2], -v[0]
    M[2, 0], M[2, 1] = -v[1], v[0]
    M[0:3, 3] = v[3:6]
    M[0:3, 4] = v[6:9]
    return M


def se23_vee(M: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Coordinates of a structured se_2(3) matrix.

    :raises StructureViolation: if the top-left block is not skew or the
        bottom two rows are non-zero beyond ``tol``.
    """
    M = np.asarray(M, dtype=float)
    if M.shape != (5, 5):
        raise StructureViolation(f"expected a 5x5 matrix, got {M.shape}")
    W = M[0:3, 0:3]
    if np.max(np.abs(W + W.T)) > tol or np.max(np.abs(M[3:5, :])) > tol:
        raise StructureViolation("matrix is not in se_2(3)")
    return np.concatenate([unskew(W), M[0:3, 3], M[0:3, 4]])


def pose(R=None, p=None, v=None) -> np.ndarray:
    """Assemble an extended pose; missing parts default to identity/zero."""
    T = np.eye(5)
    if R is not None:
        T[0:3, 0:3] = R
    if p is not None:
        T[0:3, 3] = p
    if v is not None:
        T[0:3, 4] = v
    return T


def se23_inverse(T: np.ndarray) -> np.ndarray:
    R = T[0:3, 0:3]
    Ti = np.eye(5)
    Ti[0:3, 0:3] = R.T
    Ti[0:3, 3:5] = -R.T @ T[0:3, 3:5]
    return Ti


def se23_exp(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    w = v[0:3]
    theta = float(np.sqrt(w @ w))
    A, B, C = _rodrigues_coeffs(theta)
    W = skew(w)
    W2 = W @ W
    T = np.eye(5)
    T[0:3, 0:3] = I3 + A * W + B * W2
    J = I3 + B * W + C * W2
    T[0:3, 3] = J @ v[3:6]
    T[0:3, 4] = J @ v[6:9]
    return T


def se23_log(T: np.ndarray) -> np.ndarray:
    """Inverse of :func:`se23_exp`; raises :class:`AngleNearPi` near pi."""
    w = so3_log(T[0:3, 0:3])
    Jinv = so3_left_jacobian_inv(w)
    return np.concatenate([w, Jinv @ T[0:3, 3], Jinv @ T[0:3, 4]])


def adjoint_matrix(T: np.ndarray) -> np.ndarray:
    """9x9 matrix of ``u -> vee(T wedge(u) T^-1)``."""
    R = T[0:3, 0:3]
    Ad = np.zeros((9, 9))
    Ad[0:3, 0:3] = R
    Ad[3:6, 3:6] = R
    Ad[6:9, 6:9] = R
    Ad[3:6, 0:3] = skew(T[0:3, 3]) @ R
    Ad[6:9, 0:3] = skew(T[0:3, 4]) @ R
    return Ad


def adjoint_algebra(u: np.ndarray) -> np.ndarray:
    """9x9 matrix of ``v -> [u, v]``."""
    W = skew(u[0:3])
    ad = np.zeros((9, 9))
    ad[0:3, 0:3] = W
    ad[3:6, 3:6] = W
    ad[6:9, 6:9] = W
    ad[3:6, 0:3] = skew(u[3:6])
    ad[6:9, 0:3] = skew(u[6:9])
    return ad


def is_rotation(R: np.ndarray, tol: float = 1e-9) -> bool:
    return bool(
        np.max(np.abs(R.T @ R - I3)) < tol and abs(np.linalg.det(R) - 1.0) < tol
    )


def is_extended_pose(T: np.ndarray, tol: float = 1e-9) -> bool:
    T = np.asarray(T)
    if T.shape != (5, 5) or not np.all(np.isfinite(T)):
        return False
    return is_rotation(T[0:3, 0:3], tol) and np.array_equal(T[3:5, :], np.eye(5)[3:5, :])


def project_rotation(R: np.ndarray) -> np.ndarray:
    """Closest rotation in the Frobenius norm."""
    U, _, Vt = np.linalg.svd(R)
    Rp = U @ Vt
    if np.linalg.det(Rp) < 0.0:
        U[:, -1] = -U[:, -1]
        Rp = U @ Vt
    return Rp


def numeric_differential(
    f: Callable,
    x,
    direction,
    h: float = 1e-6,
    retract: Callable | None = None,
):
    """Central-difference directional derivative of ``f`` at ``x``.

    ``retract(x, d)`` moves ``x`` along the tangent ``d``; it defaults to
    vector addition. ``f`` may return an array or a tuple of arrays, in
    which case a tuple of derivatives is returned.
    """
    if not 1e-8 <= h <= 1e-3:
        raise ValueError(f"step {h} outside [1e-8, 1e-3]")
    if retract is None:
        retract = lambda base, d: base + d  # noqa: E731
    direction = np.asarray(direction, dtype=float)
    fp = f(retract(x, h * direction))
    fm = f(retract(x, -h * direction))
    if isinstance(fp, tuple):
        return tuple((np.asarray(a) - np.asarray(b)) / (2.0 * h) for a, b in zip(fp, fm))
    return (np.asarray(fp) - np.asarray(fm)) / (2.0 * h)
