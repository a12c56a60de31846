import os
import warnings

import pytest
from hypothesis import HealthCheck, settings

from nvsqueeze import SystemParams, ValidityWarning

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def fig4(**kw) -> SystemParams:
    """Caption parameters of the single-mode figures, locked to resonance."""
    base = dict(omega_m=1.0, gamma_m=1e-6, n_th=1e3, Gamma0=0.25, Gamma1=0.25, g=0.06, omega1=0.0)
    base.update(kw)
    return SystemParams(**base).at_resonance()


@pytest.fixture
def fig4_params():
    return fig4


@pytest.fixture(autouse=True)
def _quiet_validity():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ValidityWarning)
        yield


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    lines = getattr(mod, "CRITERIA", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
