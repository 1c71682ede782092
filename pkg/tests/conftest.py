import numpy as np
import pytest

from eqfins import eqf
from eqfins.lie import se23_exp, se23_inverse, se23_vee
from eqfins.model import SystemInput, SystemState, output, system_dynamics
from eqfins.sdp import SdpElement
from eqfins.symmetry import lifted_dynamics


def random_pose(rng, scale=1.0):
    v = rng.normal(size=9) * scale
    v[0:3] = rng.normal(size=3)
    v[0:3] *= rng.uniform(0, 3.0) / np.linalg.norm(v[0:3])
    return se23_exp(v)


def random_element(rng):
    return SdpElement(random_pose(rng), rng.normal(size=9))


def random_state(rng):
    return SystemState(random_pose(rng), rng.normal(size=9))


def random_input(rng):
    return SystemInput(rng.normal(size=9), rng.normal(size=3) * 5.0, rng.normal(size=9))


def series_expm(M, terms=30):
    out = np.eye(M.shape[0])
    term = np.eye(M.shape[0])
    for k in range(1, terms):
        term = term @ M / k
        out = out + term
    return out


# finite-difference oracles for the linearised error dynamics and output


def eps_rate(X_hat, xi, u, h=1e-4):
    """d/dt of the error coordinates with truth and observer flowing under ``u``."""
    T_dot, b_dot = system_dynamics(xi, u)
    A_dot, a_dot = lifted_dynamics(X_hat, u)
    wT = se23_vee(se23_inverse(xi.T) @ T_dot)
    wA = se23_vee(se23_inverse(X_hat.A) @ A_dot)

    def eps(s):
        Xs = SdpElement(X_hat.A @ se23_exp(s * wA), X_hat.a + s * a_dot)
        xs = SystemState(xi.T @ se23_exp(s * wT), xi.b + s * b_dot)
        return eqf.error_coordinates(Xs, xs)

    return (8 * (eps(h) - eps(-h)) - (eps(2 * h) - eps(-2 * h))) / (12 * h)


def numeric_state_matrix(X_hat, u, d=1e-4):
    J = np.zeros((18, 18))
    for j in range(18):
        e = np.zeros(18)
        e[j] = d
        plus = eps_rate(X_hat, eqf.state_from_error(X_hat, e), u)
        minus = eps_rate(X_hat, eqf.state_from_error(X_hat, -e), u)
        J[:, j] = (plus - minus) / (2 * d)
    return J


def numeric_output_matrix(X_hat, d=1e-6):
    J = np.zeros((9, 18))
    for j in range(18):
        e = np.zeros(18)
        e[j] = d
        rp = eqf.residual(X_hat, output(eqf.state_from_error(X_hat, e)))
        rm = eqf.residual(X_hat, output(eqf.state_from_error(X_hat, -e)))
        J[:, j] = (rp - rm) / (2 * d)
    return J


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# acceptance reporting: one PASS/FAIL line per criterion in the terminal summary

_CRITERIA: list[tuple[str, str, bool, str]] = []


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(key, title): acceptance criterion reported in the summary")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or not (rep.when == "call" or (rep.when == "setup" and rep.failed)):
        return
    detail = dict(item.user_properties).get("detail", "")
    if rep.failed and not detail:
        detail = str(call.excinfo.value).splitlines()[0] if call.excinfo else "error"
    _CRITERIA.append((str(mark.args[0]), mark.args[1], rep.passed, detail))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for key, title, ok, detail in _CRITERIA:
        terminalreporter.write_line(f"criterion {key} {'PASS' if ok else 'FAIL'}: {title}" + (f" [{detail}]" if detail else ""))
