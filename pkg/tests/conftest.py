import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from deconv_les.grid import GridSpec, build_grid

settings.register_profile(
    "default", deadline=None, max_examples=25, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def box():
    return build_grid(GridSpec(16, 8, 1.0, 0.5))


@pytest.fixture(scope="session")
def stepped():
    """16x8 grid with a three-cell step in the middle columns."""
    mask = np.zeros((16, 8), dtype=bool)
    mask[6:10, :3] = True
    mask[5, :1] = True
    return build_grid(GridSpec(16, 8, 1.0, 0.5, mask))


ACCEPTANCE: dict[int, str] = {}


def record_criterion(number: int, title: str, passed: bool, detail: str) -> None:
    line = f"criterion {number:2d} {'PASS' if passed else 'FAIL'}  {title}: {detail}"
    ACCEPTANCE[number] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
