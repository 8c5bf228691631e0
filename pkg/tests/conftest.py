import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from qlap import corpus
from qlap.graph import Graph

settings.register_profile(
    "qlap", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "qlap"))


@pytest.fixture
def barbell() -> Graph:
    return corpus.generate("barbell")


@pytest.fixture
def k2() -> Graph:
    return Graph(2, ((0, 1),))


def random_graph(rng: np.random.Generator, n: int, p: float) -> Graph:
    edges = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < p]
    return Graph(n, tuple(edges))


def pytest_terminal_summary(terminalreporter):
    module = __import__("sys").modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        terminalreporter.write_line(results[n])
