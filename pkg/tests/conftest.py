import numpy as np
import pytest
from hypothesis import settings

from kweak.field import SensorField

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


def make_field(points, L=10.0, battery=None):
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    b = np.ones(len(pts)) if battery is None else np.asarray(battery, dtype=float)
    return SensorField(L, pts, b)


@pytest.fixture
def field_factory():
    return make_field


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
