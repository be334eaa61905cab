import random
import sys

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from nsclosure.box import random_box
from nsclosure.wiring import random_wiring

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

seeds = st.integers(min_value=0, max_value=2**32 - 1)
boxes = seeds.map(lambda s: random_box(random.Random(s)))
rationals01 = st.fractions(min_value=0, max_value=1, max_denominator=50)


def wirings(n):
    return seeds.map(lambda s: random_wiring(random.Random(s), n))


@pytest.fixture
def rng():
    return random.Random(20240611)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance")
    for k in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[k])
