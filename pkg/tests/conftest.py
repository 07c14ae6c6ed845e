import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from digcomm.graph import Digraph
from digcomm.oracles import example_graph

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def ex():
    """4-node digraph 1->3, 2->1, 2->4, 3->2, 4->2 (one-based)."""
    return example_graph()


@pytest.fixture
def single_edge():
    return Digraph.from_edges(2, [(0, 1)])


@pytest.fixture
def two_cycle():
    return Digraph.from_edges(2, [(0, 1), (1, 0)])


@pytest.fixture
def three_cycle():
    return Digraph.from_edges(3, [(0, 1), (1, 2), (2, 0)])


@st.composite
def digraphs(draw, min_n=2, max_n=12, min_edges=0):
    n = draw(st.integers(min_n, max_n))
    pairs = [(i, j) for i in range(n) for j in range(n) if i != j]
    chosen = draw(st.lists(st.sampled_from(pairs), min_size=min_edges, max_size=len(pairs),
                           unique=True))
    return Digraph.from_edges(n, chosen)


def dense_lift(a):
    n = a.shape[0]
    z = np.zeros((n, n))
    return np.block([[z, a], [a.T, z]])


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
