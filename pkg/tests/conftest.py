import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from sasmig import MigrationConfig, PulseSpec, make_grid, synthesize_sas

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

C = 1500.0
DX = 0.02


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def point_record(scatterers, n_traces=64, n_samples=256, f=7500.0, dx=DX):
    pulse = PulseSpec(f, "gaussian", 2.0 / f)
    return synthesize_sas(scatterers, n_traces, dx, n_samples, dx / C, 0.0, pulse, C)


@pytest.fixture(scope="session")
def small_scene():
    """Two scatterers, 64 traces, imaged on a 64 x 64 grid."""
    scat = [(0.4, 0.5, 1.0), (0.9, 0.9, 1.0)]
    rec = point_record(scat)
    grid = make_grid(64, 64, DX, DX)
    return scat, rec, grid


def small_config(grid, **kw):
    return MigrationConfig(grid, **kw)


@pytest.fixture
def criterion(request):
    """Record one acceptance line; printed together at the end of the run."""
    lines = request.config.stash.setdefault(_ACCEPT_KEY, [])

    def record(number, name, ok, detail):
        lines.append(f"criterion {number} {name}: {'PASS' if ok else 'FAIL'} ({detail})")
        return ok

    return record


_ACCEPT_KEY = pytest.StashKey[list]()


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPT_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip("abc"))):
            terminalreporter.write_line(line)
