import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def distinct_sorted(rng, m, scale=10.0):
    """``m`` strictly ascending reals, none equal to zero."""
    while True:
        x = np.sort(rng.normal(0.0, scale, m))
        if np.all(np.diff(x) > 0) and np.all(x != 0):
            return x


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for line in mod.format_results():
        terminalreporter.write_line(line)
