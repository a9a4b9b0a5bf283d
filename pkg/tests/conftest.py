import numpy as np
import pytest

from nnlif import Grid, ModelParams


def pytest_runtest_logreport(report):
    """One visible pass/fail line per acceptance criterion."""
    if report.when != "call" or "test_acceptance" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    verdict = "PASS" if report.passed else "FAIL"
    print(f"\n[acceptance] {name}: {verdict}", flush=True)


@pytest.fixture
def grid300():
    """Default production grid: [-4, 2] with h = 0.02 and the reset node at 1."""
    return Grid(-4.0, 1.0, 2.0, 300)


@pytest.fixture
def grid_pow2():
    """Grid whose spacing 6/384 is an exact binary fraction (h = 0.015625)."""
    return Grid(-4.0, 1.0, 2.0, 384)


@pytest.fixture
def linear_params():
    return ModelParams(a0=1.0, a1=0.0, b=0.0, v_ext=0.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
