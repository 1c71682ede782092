import numpy as np
import pytest

from conftest import random_pose, random_state
from eqfins.lie import se23_exp, se23_inverse, se23_log, skew, so3_exp
from eqfins.model import (
    GRAVITY,
    SystemInput,
    SystemState,
    f01,
    measurement_noise_cov,
    output,
    sample_measurement,
    system_dynamics,
)


def componentwise_dynamics(R, p, v, b, w, g, tau):
    """Extended BINS written out per component, independent of the matrix form."""
    R_dot = R @ skew(w[0:3] - b[0:3])
    p_dot = R @ (w[3:6] - b[3:6]) + v
    v_dot = R @ (w[6:9] - b[6:9]) + g
    return R_dot, p_dot, v_dot, np.array(tau)


def test_f01_values():
    assert np.array_equal(f01(np.eye(5)), np.zeros((5, 5)))
    T = np.eye(5)
    T[0:3, 4] = [1.0, 2.0, 3.0]
    F = f01(T)
    expected = np.zeros((5, 5))
    expected[0:3, 3] = [1.0, 2.0, 3.0]
    assert np.array_equal(F, expected)


def test_f01_cocycle(rng):
    for _ in range(200):
        Ai, Bi = se23_inverse(random_pose(rng)), se23_inverse(random_pose(rng))
        np.testing.assert_allclose(f01(Ai @ Bi), Ai @ f01(Bi) + f01(Ai), atol=1e-10)


def test_f01_right_invariance_identity(rng):
    for _ in range(200):
        A = random_pose(rng)
        np.testing.assert_allclose(A @ f01(se23_inverse(A)), -f01(A), atol=1e-12)


def test_hover_equilibrium():
    u = SystemInput.from_imu(np.zeros(3), -GRAVITY)
    T_dot, b_dot = system_dynamics(SystemState(), u)
    assert np.array_equal(T_dot, np.zeros((5, 5)))
    assert np.array_equal(b_dot, np.zeros(9))


def test_free_fall():
    T = np.eye(5)
    T[0:3, 4] = [1.0, -2.0, 0.5]
    T_dot, _ = system_dynamics(SystemState(T), SystemInput.from_imu(np.zeros(3), np.zeros(3)))
    np.testing.assert_allclose(T_dot[0:3, 4], GRAVITY)
    np.testing.assert_allclose(T_dot[0:3, 3], [1.0, -2.0, 0.5])
    np.testing.assert_allclose(T_dot[0:3, 0:3], 0.0)


def test_compact_form_equals_componentwise(rng):
    for _ in range(500):
        xi = random_state(rng)
        u = SystemInput(rng.normal(size=9), rng.normal(size=3), rng.normal(size=9))
        T_dot, b_dot = system_dynamics(xi, u)
        R_dot, p_dot, v_dot, bd = componentwise_dynamics(xi.R, xi.p, xi.v, xi.b, u.w, u.g, u.tau)
        np.testing.assert_allclose(T_dot[0:3, 0:3], R_dot, atol=1e-12)
        np.testing.assert_allclose(T_dot[0:3, 3], p_dot, atol=1e-12)
        np.testing.assert_allclose(T_dot[0:3, 4], v_dot, atol=1e-12)
        np.testing.assert_allclose(T_dot[3:5], 0.0, atol=0)
        np.testing.assert_allclose(b_dot, bd, atol=0)


def _imu(t):
    return np.array([0.3 * np.sin(t), 0.2 * np.cos(0.5 * t), 0.1]), np.array(
        [0.5 * np.cos(t), 0.2, 9.0 + np.sin(2 * t)]
    )


def test_extension_recovers_physical_system(rng):
    """nu = 0, tau = 0, b_nu = 0: extended and physical trajectories coincide."""
    b_w, b_a = np.array([0.01, -0.02, 0.03]), np.array([0.1, 0.0, -0.05])
    b = np.concatenate([b_w, np.zeros(3), b_a])
    dt, steps = 0.01, 1000

    def phys(t, s):
        R, v = s[0:9].reshape(3, 3), s[12:15]
        om, acc = _imu(t)
        return np.concatenate([(R @ skew(om - b_w)).ravel(), v, R @ (acc - b_a) + GRAVITY])

    def ext(t, T):
        om, acc = _imu(t)
        return system_dynamics(SystemState(T, b), SystemInput.from_imu(om, acc))[0]

    T0 = random_pose(rng)
    s = np.concatenate([T0[0:3, 0:3].ravel(), T0[0:3, 3], T0[0:3, 4]])
    T = T0.copy()
    worst = 0.0
    for k in range(steps):
        t = k * dt
        k1 = phys(t, s); k2 = phys(t + dt / 2, s + dt / 2 * k1)
        k3 = phys(t + dt / 2, s + dt / 2 * k2); k4 = phys(t + dt, s + dt * k3)
        s = s + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        K1 = ext(t, T); K2 = ext(t + dt / 2, T + dt / 2 * K1)
        K3 = ext(t + dt / 2, T + dt / 2 * K2); K4 = ext(t + dt, T + dt * K3)
        T = T + dt / 6 * (K1 + 2 * K2 + 2 * K3 + K4)
        worst = max(
            worst,
            np.max(np.abs(T[0:3, 0:3].ravel() - s[0:9])),
            np.max(np.abs(T[0:3, 3] - s[9:12])),
            np.max(np.abs(T[0:3, 4] - s[12:15])),
        )
    assert worst < 1e-8


def test_output_is_pose(rng):
    assert np.array_equal(output(SystemState()), np.eye(5))
    xi = random_state(rng)
    assert output(xi) is xi.T


def test_noise_free_measurement(rng):
    T = random_pose(rng)
    y = sample_measurement(T, np.zeros((9, 9)), rng, t=1.5)
    np.testing.assert_allclose(y.y, T, atol=1e-15)
    assert y.t == 1.5


def test_measurement_roundtrip_fixed_seed(rng):
    T = random_pose(rng)
    cov = 1e-4 * np.eye(9)
    y = sample_measurement(T, cov, np.random.default_rng(7))
    n = 1e-2 * np.random.default_rng(7).standard_normal(9)
    np.testing.assert_allclose(se23_log(se23_inverse(T) @ y.y), n, atol=1e-12)


def test_measurement_covariance_statistics(rng):
    T = random_pose(rng)
    cov = measurement_noise_cov(8.7e-2, 0.25, 0.1)
    n = np.array([se23_log(se23_inverse(T) @ sample_measurement(T, cov, rng).y) for _ in range(10_000)])
    emp = np.cov(n.T)
    np.testing.assert_allclose(np.diag(emp), np.diag(cov), rtol=0.1)
    corr = emp / np.sqrt(np.outer(np.diag(emp), np.diag(emp)))
    assert np.max(np.abs(corr - np.eye(9))) < 0.05


def test_global_noise_variant(rng):
    T = random_pose(rng)
    y = sample_measurement(T, 1e-4 * np.eye(9), np.random.default_rng(3), global_noise=True)
    n = 1e-2 * np.random.default_rng(3).standard_normal(9)
    np.testing.assert_allclose(y.y, se23_exp(n) @ T, atol=1e-14)


@pytest.mark.parametrize("angle", [0.0, 0.4, 2.0])
def test_state_accessors(angle):
    T = np.eye(5)
    T[0:3, 0:3] = so3_exp([0.0, 0.0, angle])
    T[0:3, 3] = [1, 2, 3]
    T[0:3, 4] = [4, 5, 6]
    xi = SystemState(T)
    assert np.array_equal(xi.p, [1, 2, 3]) and np.array_equal(xi.v, [4, 5, 6])
    np.testing.assert_array_equal(xi.R, T[0:3, 0:3])
