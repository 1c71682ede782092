import numpy as np
import pytest

from eqfins.exceptions import ConfigError
from eqfins.lie import is_rotation
from eqfins.model import GRAVITY
from eqfins.sim.config import SimConfig, format_config, load_config, parse_config
from eqfins.sim.experiments import init_error_sweep, monte_carlo, tuning_experiment
from eqfins.sim.runner import default_tuning, error_vector, run_filter, simulate
from eqfins.sim.sensors import simulate_sensors
from eqfins.sim.trajectory import generate_trajectory

SHORT = SimConfig(duration=6.0, window=2.0)


# configuration


def test_config_defaults_and_grid():
    cfg = SimConfig()
    assert cfg.base_rate == 300 and cfg.imu_step == 3 and cfg.meas_step == 10


def test_config_parse_roundtrip():
    cfg = parse_config("duration = 12.5  # seconds\n\nseed=7\ninit_mode = offset\nnoise_free = yes\nsweep_scales = 1, 2, 4\n")
    assert cfg.duration == 12.5 and cfg.seed == 7 and cfg.init_mode == "offset"
    assert cfg.noise_free is True and cfg.sweep_scales == (1.0, 2.0, 4.0)
    assert parse_config(format_config(cfg)) == cfg


@pytest.mark.parametrize(
    "text",
    [
        "bogus = 1",
        "duration",
        "duration = abc",
        "duration = -1",
        "imu_rate = 100.5",
        "meas_rate = 200",
        "init_mode = sideways",
        "sigma_w = -0.1",
        "sweep_scales = 3, 1",
        "noise_free = maybe",
    ],
)
def test_config_rejects(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_load_config_overrides(tmp_path):
    path = tmp_path / "c.txt"
    path.write_text("seed = 3\nduration = 10\n")
    cfg = load_config(path, seed=9, duration=None)
    assert cfg.seed == 9 and cfg.duration == 10
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.txt")


# trajectory and sensors


def test_trajectory_static_case():
    cfg = SimConfig(duration=2.0, n_waypoints=1, n_sines=0)
    traj = generate_trajectory(cfg, np.random.default_rng(0))
    assert np.all(traj.v == 0) and np.ptp(traj.p, axis=0).max() == 0
    np.testing.assert_allclose(traj.R, np.broadcast_to(traj.R[0], traj.R.shape), atol=1e-14)
    # at rest the accelerometer reads minus gravity in the body frame
    np.testing.assert_allclose(traj.acc, np.tile(-traj.R[0].T @ GRAVITY, (len(traj), 1)), atol=1e-12)


def test_trajectory_kinematics_consistent():
    cfg = SimConfig(duration=20.0)
    traj = generate_trajectory(cfg, np.random.default_rng(1))
    dt = 1.0 / cfg.base_rate
    v_fd = (traj.p[2:] - traj.p[:-2]) / (2 * dt)
    np.testing.assert_allclose(v_fd, traj.v[1:-1], atol=1e-3)
    acc_world = np.einsum("tij,tj->ti", traj.R, traj.acc) + GRAVITY
    a_fd = (traj.v[2:] - traj.v[:-2]) / (2 * dt)
    np.testing.assert_allclose(a_fd, acc_world[1:-1], atol=1e-3)
    assert all(is_rotation(R, 1e-9) for R in traj.R[:: cfg.base_rate])
    assert np.all(np.abs(traj.omega) <= cfg.omega_max + 1e-12)
    assert np.all(np.abs(traj.p[0]) <= cfg.box) and np.all(np.abs(traj.p[-1]) <= cfg.box)


def test_trajectory_deterministic():
    a = generate_trajectory(SHORT, np.random.default_rng(5))
    b = generate_trajectory(SHORT, np.random.default_rng(5))
    assert np.array_equal(a.R, b.R) and np.array_equal(a.p, b.p) and np.array_equal(a.acc, b.acc)


def test_sensor_noise_statistics():
    cfg = SimConfig(duration=300.0, bias_walk_w=0.0, bias_walk_a=0.0)
    traj = generate_trajectory(cfg, np.random.default_rng(2))
    st = simulate_sensors(traj, cfg, np.random.default_rng(3))
    n_w = st.omega_m - traj.omega[st.imu_index] - st.bias_w
    n_a = st.acc_m - traj.acc[st.imu_index] - st.bias_a
    assert abs(n_w.std() / cfg.sigma_w - 1) < 0.05
    assert abs(n_a.std() / cfg.sigma_a - 1) < 0.05
    assert len(st.meas_t) == 300 * 30 + 1 and np.allclose(np.diff(st.meas_t), 1 / 30)


def test_bias_walk_variance_grows_linearly():
    cfg = SimConfig(duration=10.0, bias_std_w=0.0, bias_std_a=0.0)
    traj = generate_trajectory(cfg, np.random.default_rng(0))
    ends = np.array([simulate_sensors(traj, cfg, np.random.default_rng(s)).bias_w[[250, -1]] for s in range(400)])
    var = ends.var(axis=(0, 2))
    t = np.array([2.5, 10.0])
    np.testing.assert_allclose(var / t, cfg.bias_walk_w**2, rtol=0.1)


def test_noise_switches():
    cfg = SHORT.with_(noise_free=True)
    scen = simulate(cfg, 4)
    traj, st = scen.traj, scen.streams
    np.testing.assert_allclose(st.omega_m, traj.omega[st.imu_index] + st.bias_w[0], atol=1e-15)
    np.testing.assert_allclose(st.meas_y, np.array([traj.pose(k) for k in st.meas_index]), atol=1e-14)
    # switching IMU noise off keeps measurement noise and truth unchanged
    noisy, quiet = simulate(SHORT, 4), simulate(SHORT.with_(noise_free_imu=True), 4)
    assert np.array_equal(noisy.streams.meas_y, quiet.streams.meas_y)
    assert np.array_equal(noisy.streams.bias_w[0], quiet.streams.bias_w[0])


def test_offset_initial_estimate_magnitudes():
    cfg = SHORT.with_(init_mode="offset")
    scen = simulate(cfg, 0, init_scale=2.0)
    e = error_vector(scen.xi_hat0, scen.truth(0))
    np.testing.assert_allclose(np.linalg.norm(e[0:3]), 2 * np.deg2rad(cfg.init_att_deg), rtol=1e-9)
    np.testing.assert_allclose(np.linalg.norm(e[3:6]), 2 * cfg.init_pos_m, rtol=1e-9)
    np.testing.assert_allclose(np.linalg.norm(e[12:15]), 2 * cfg.init_bias, rtol=1e-9)


# runs and campaigns


@pytest.mark.parametrize("kind", ["eqf", "mekf"])
def test_exact_start_noise_free_error_is_input_sampling(kind):
    # starting on the truth with exact data, the only error source is the
    # linear interpolation of sampled IMU readings: second order in 1/rate
    rmse = []
    for rate in (100, 300):
        cfg = SHORT.with_(noise_free=True, init_mode="offset", imu_rate=rate)
        rep = run_filter(kind, simulate(cfg, 1, init_scale=0.0))
        assert not rep.diverged
        rmse.append(np.concatenate([rep.rmse_transient, rep.rmse_asymptotic]))
    assert np.all(rmse[0] < 1e-2)
    assert np.all(rmse[0] / rmse[1] > 6.0)


@pytest.mark.parametrize("kind", ["eqf", "mekf"])
def test_run_deterministic_and_windows(kind):
    scen = simulate(SHORT, 2)
    a, b = run_filter(kind, scen), run_filter(kind, simulate(SHORT, 2))
    assert np.array_equal(a.errors, b.errors) and np.array_equal(a.lyap, b.lyap)
    assert len(a.t) == len(scen.streams.imu_t)
    m = a.t < SHORT.window
    np.testing.assert_allclose(a.rmse_transient, np.sqrt(np.mean(a.errors[m] ** 2, axis=0)))


def test_unknown_filter_rejected():
    with pytest.raises(ValueError):
        run_filter("ukf", simulate(SHORT, 0))


def test_monte_carlo_single_run_matches_direct():
    mc = monte_carlo(SHORT, 1)
    direct = run_filter("eqf", simulate(SHORT, SHORT.seed))
    assert np.array_equal(mc.table("eqf", "T")[0], direct.rmse_transient)
    assert np.array_equal(mc.mean("eqf", "A"), direct.rmse_asymptotic)


def test_monte_carlo_aggregate():
    mc = monte_carlo(SHORT, 3)
    tab = mc.table("mekf", "A")
    assert tab.shape == (3, 5)
    np.testing.assert_allclose(mc.mean("mekf", "A"), tab.mean(axis=0))
    assert not np.array_equal(tab[0], tab[1])


def test_sweep_scale_zero_converges():
    cfg = SHORT.with_(sweep_duration=4.0)
    sweep = init_error_sweep(cfg, scales=[0.0, 1.0])
    assert sweep.converged_scales("eqf")[0] == 0.0
    assert sweep.converged_scales("mekf")[0] == 0.0
    ok, why = sweep.dominance()
    assert isinstance(ok, bool) and why
    with pytest.raises(ValueError):
        init_error_sweep(cfg, scales=[2.0, 1.0])


def test_tuning_degenerate_scales_identical():
    cfg = SHORT.with_(tune_tight_scale=1.0, tune_robust_scale=1.0)
    rows = tuning_experiment(cfg)
    assert [(r.tuning, r.kind) for r in rows] == [("tight", "eqf"), ("tight", "mekf"), ("robust", "eqf"), ("robust", "mekf")]
    for a, b in zip(rows[:2], rows[2:]):
        assert np.array_equal(a.rmse_transient, b.rmse_transient)
        assert np.array_equal(a.rmse_asymptotic, b.rmse_asymptotic)


def test_default_tuning_scales_process_noise():
    cfg = SimConfig()
    base, tight = default_tuning(cfg), default_tuning(cfg, process_scale=1e-3)
    np.testing.assert_allclose(tight.eqf.P, 1e-3 * base.eqf.P)
    np.testing.assert_allclose(tight.mekf_P, 1e-3 * base.mekf_P)
    np.testing.assert_allclose(tight.eqf.Q, base.eqf.Q)
