import numpy as np
import pytest

from syngait.demo import generate_demo_sample
from syngait.functional import QtsFPCA


@pytest.fixture(scope="session")
def demo():
    return generate_demo_sample(30, seed=7)


@pytest.fixture(scope="session")
def demo_fpca(demo):
    return QtsFPCA().fit(demo)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_unit(rng, size=()):
    q = rng.standard_normal(tuple(np.atleast_1d(size)) + (4,)) if size != () else rng.standard_normal(4)
    return q / np.linalg.norm(q, axis=-1, keepdims=True)


def pytest_terminal_summary(terminalreporter):
    import sys
    module = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    results = getattr(module, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for number in sorted(results):
            terminalreporter.write_line(results[number])
