import numpy as np
import pytest

from optspoof import Scenario, channels_for, optimal_attack


def random_scenario(rng, m_range=(2, 6), n_range=(2, 32), max_delay=10, feasible=True,
                    signaling="gaussian", trials=1000):
    """Random delay geometry; with ``feasible`` the attacker noise sits inside the feasible region."""
    m = int(rng.integers(m_range[0], m_range[1] + 1))
    n = int(rng.integers(n_range[0], n_range[1] + 1))
    taus = [rng.integers(0, max_delay + 1, size=m).tolist() for _ in range(3)]
    mx = float(rng.uniform(0.5, 2.0))
    sigma_b2 = float(rng.uniform(0.5, 5.0))
    sigma_bt2 = 0.1 * sigma_b2
    probe = Scenario(m=m, n=n, mx=mx, sigma_b2=sigma_b2, sigma_bt2=sigma_bt2, sigma_e2=1.0,
                     tau_bob=taus[0], tau_eve=taus[1], tau_forged=taus[2],
                     signaling=signaling, seed=int(rng.integers(0, 2**32)), trials=trials)
    A, F = channels_for(probe)
    _, rep = optimal_attack(A, F, mx, sigma_b2, 1.0, sigma_bt2)
    headroom = sigma_b2 - sigma_bt2
    frac = rng.uniform(0.2, 0.9) if feasible else rng.uniform(1.2, 3.0)
    return probe.replace(sigma_e2=float(frac * headroom / rep.lambda_max))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def m4_scenario():
    """Feasible four-SV geometry used across the DET tests."""
    return Scenario(m=4, n=64, mx=1.0, sigma_b2=50.0, sigma_bt2=5.0, sigma_e2=5.0,
                    tau_bob=[0, 2, 9, 15], tau_eve=[0, 6, 12, 21], tau_forged=[0, 7, 12, 20],
                    seed=1, trials=2000)


# --- acceptance reporting -------------------------------------------------------
# Tests marked ``acceptance(number, title)`` get one PASS/FAIL line each in the
# terminal summary, so the criteria read at a glance in the test log.

_ACCEPTANCE = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None or report.when not in ("setup", "call"):
        return
    number, title = marker.args
    prev = _ACCEPTANCE.get(number, (True, title, 0.0))
    ok = prev[0] and not report.failed and not report.skipped
    _ACCEPTANCE[number] = (ok, title, prev[2] + report.duration)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        ok, title, seconds = _ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {title}  ({seconds:.1f} s)")
