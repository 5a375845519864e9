import numpy as np
import pytest
from hypothesis import strategies as st

from polarnet.graph import build_graph

# acceptance criteria register their outcome here; printed in the terminal summary
ACCEPTANCE_RESULTS = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_RESULTS):
        ok, detail = ACCEPTANCE_RESULTS[key]
        terminalreporter.write_line(f"{key}: {'PASS' if ok else 'FAIL'}  {detail}")


@st.composite
def connected_graphs(draw, min_nodes=2, max_nodes=12):
    """Random connected simple graph: random spanning tree plus random extra edges."""
    n = draw(st.integers(min_nodes, max_nodes))
    parents = [draw(st.integers(0, i - 1)) for i in range(1, n)]
    edges = {(p, i) for i, p in zip(range(1, n), parents)}
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    extra = draw(st.lists(st.sampled_from(pairs), max_size=len(pairs))) if pairs else []
    perm = draw(st.permutations(range(n)))
    edges = {(perm[a], perm[b]) for a, b in edges | set(extra)}
    return build_graph(n, edges)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
