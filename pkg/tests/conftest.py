import math
import time

import pytest

from weightinit.activations import builtin
from weightinit.simulator import SimConfig, WeightDistribution, run

WIDTH = 512
SEED = 7

# seconds spent in each shared Monte Carlo run, keyed by fixture name
TIMINGS = {}
# one line per acceptance criterion, printed in the terminal summary
ACCEPTANCE = {}


def _timed(key, activation, weights, depth, trials=200, width=WIDTH, seed=SEED):
    start = time.perf_counter()
    report = run(SimConfig(width, depth, weights, builtin(activation), trials, seed))
    TIMINGS[key] = time.perf_counter() - start
    return report


@pytest.fixture(scope="session")
def relu_xavier_report():
    return _timed("relu_xavier", "relu", WeightDistribution.with_variance("gaussian", 1.0 / WIDTH), 10)


@pytest.fixture(scope="session")
def relu_he_report():
    return _timed("relu_he", "relu", WeightDistribution.with_variance("gaussian", 2.0 / WIDTH), 10)


@pytest.fixture(scope="session")
def tanh_uniform_report():
    """Uniform U[-1/sqrt(N), 1/sqrt(N)] weights, variance 1/(3N)."""
    return _timed("tanh_uniform", "tanh", WeightDistribution.uniform(1.0 / math.sqrt(WIDTH)), 8)


@pytest.fixture(scope="session")
def tanh_xavier_report():
    return _timed("tanh_xavier", "tanh", WeightDistribution.with_variance("gaussian", 1.0 / WIDTH), 8)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[key])
