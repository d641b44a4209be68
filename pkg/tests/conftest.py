import numpy as np
import pytest

from frilab.signal_model import FourierPulse, PulseStreamTheta

REF_AMPS = (0.3204, 0.6063)
REF_DELAYS = (0.6678, 0.9863)


@pytest.fixture
def two_pulse_theta():
    return PulseStreamTheta.periodic(REF_AMPS, REF_DELAYS)


@pytest.fixture
def flat401():
    return FourierPulse.flat(200)


@pytest.fixture
def flat41():
    return FourierPulse.flat(20)


@pytest.fixture
def lorentzian41():
    return FourierPulse.lorentzian(20)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_real_theta(rng, L, min_gap=0.05, period=1.0):
    """Periodic theta with circularly separated delays."""
    while True:
        t = np.sort(rng.uniform(0, period, L))
        gaps = np.diff(np.concatenate([t, [t[0] + period]]))
        if L == 1 or np.min(gaps) > min_gap * period:
            break
    a = rng.uniform(0.3, 1.0, L) * rng.choice([-1.0, 1.0], L)
    return PulseStreamTheta.periodic(a, t, period)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[number])
