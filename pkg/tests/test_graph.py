import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polarnet.errors import (DimensionMismatch, DisconnectedGraph,
                             IndexOutOfRange, NegativeQuadraticForm,
                             ParseError, SelfLoop)
from polarnet.generators import chain, community_network, complete
from polarnet.graph import (LaplacianKernel, build_graph, format_edge_list,
                            ged, is_connected, laplacian,
                            laplacian_pseudoinverse, parse_edge_list,
                            read_edge_list, write_edge_list)

from conftest import connected_graphs


def pinv_oracle(L):
    """Independent pseudoinverse for a connected Laplacian: (L + J/n)^-1 - J/n."""
    n = L.shape[0]
    J = np.full((n, n), 1.0 / n)
    return np.linalg.inv(L + J) - J


def test_build_graph_collapses_reversed_edges():
    g = build_graph(2, [(0, 1), (1, 0)])
    assert g.edge_count == 1
    assert g.edges == frozenset({(0, 1)})


def test_build_graph_rejects_self_loop():
    with pytest.raises(SelfLoop):
        build_graph(3, [(0, 0)])


def test_build_graph_rejects_out_of_range():
    with pytest.raises(IndexOutOfRange):
        build_graph(3, [(0, 3)])
    with pytest.raises(IndexOutOfRange):
        build_graph(3, [(-1, 2)])


def test_build_graph_chain():
    g = build_graph(4, [(0, 1), (1, 2), (2, 3)])
    assert g == chain(4)
    assert list(g.degrees()) == [1, 2, 2, 1]


@pytest.mark.parametrize("g, expected", [
    (chain(2), [[1, -1], [-1, 1]]),
    (complete(3), [[2, -1, -1], [-1, 2, -1], [-1, -1, 2]]),
    (build_graph(3, []), np.zeros((3, 3))),
])
def test_laplacian_examples(g, expected):
    np.testing.assert_array_equal(laplacian(g), np.asarray(expected, dtype=float))


@given(connected_graphs())
def test_laplacian_rows_sum_to_zero(g):
    L = laplacian(g)
    assert np.all(L.sum(axis=1) == 0)
    np.testing.assert_array_equal(np.diag(L), g.degrees())


def test_is_connected():
    assert is_connected(chain(4))
    assert not is_connected(build_graph(4, [(0, 1), (2, 3)]))
    assert is_connected(build_graph(1, []))


def test_pinv_two_node_chain():
    k = laplacian_pseudoinverse(chain(2))
    np.testing.assert_allclose(k.pinv, [[0.25, -0.25], [-0.25, 0.25]], atol=1e-15)


def test_pinv_triangle():
    k = laplacian_pseudoinverse(complete(3))
    np.testing.assert_allclose(k.pinv, (np.eye(3) - np.ones((3, 3)) / 3) / 3, atol=1e-15)


def test_pinv_disconnected_raises():
    with pytest.raises(DisconnectedGraph):
        laplacian_pseudoinverse(build_graph(4, [(0, 1), (2, 3)]))


def test_pinv_single_node():
    k = laplacian_pseudoinverse(build_graph(1, []))
    assert k.pinv.shape == (1, 1) and k.pinv[0, 0] == 0


@settings(max_examples=150, deadline=None)
@given(connected_graphs())
def test_pinv_matches_oracles_and_penrose_identities(g):
    L = laplacian(g)
    k = laplacian_pseudoinverse(g)
    P = k.pinv
    np.testing.assert_allclose(P, pinv_oracle(L), atol=1e-9, rtol=0)
    np.testing.assert_allclose(P, np.linalg.pinv(L), atol=1e-9, rtol=0)
    assert np.max(np.abs(P - P.T)) <= 1e-12
    np.testing.assert_allclose(P @ np.ones(g.node_count), 0, atol=1e-9)

    def rel(a, b):
        return np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-300)

    assert rel(L @ P @ L, L) < 1e-9
    assert rel(P @ L @ P, P) < 1e-9
    assert rel((L @ P).T, L @ P) < 1e-9
    assert rel((P @ L).T, P @ L) < 1e-9


def test_ged_examples():
    assert ged(laplacian_pseudoinverse(chain(2)), [1, 0], [0, 1]) == pytest.approx(1.0, abs=1e-12)
    assert ged(laplacian_pseudoinverse(chain(3)), [1, 0, 0], [0, 0, 1]) == \
        pytest.approx(math.sqrt(2), abs=1e-12)
    assert ged(laplacian_pseudoinverse(complete(3)), [1, 0, 0], [0, 1, 0]) == \
        pytest.approx(math.sqrt(2 / 3), abs=1e-12)
    k = laplacian_pseudoinverse(community_network(2, 6)[0])
    assert ged(k, [0.3, 0.1, 0, 1, 1, 0.2], [0.3, 0.1, 0, 1, 1, 0.2]) == 0.0


@pytest.mark.parametrize("n", range(2, 13))
def test_ged_chain_end_to_end_is_series_resistance(n):
    k = laplacian_pseudoinverse(chain(n))
    a = np.zeros(n)
    b = np.zeros(n)
    a[0] = b[-1] = 1
    assert ged(k, a, b) == pytest.approx(math.sqrt(n - 1), abs=1e-9)


def test_ged_dimension_mismatch():
    k = laplacian_pseudoinverse(chain(3))
    with pytest.raises(DimensionMismatch):
        ged(k, [1, 0], [0, 1])
    with pytest.raises(DimensionMismatch):
        ged(k, [1, 0, 0], [0, 1])


def test_negative_quadratic_form_is_reported():
    bad = LaplacianKernel(-np.eye(2), 0.0)
    with pytest.raises(NegativeQuadraticForm):
        ged(bad, [1, 0], [0, 1])
    tiny = LaplacianKernel(np.array([[-1e-13, 0], [0, 0]]), 0.0)
    assert ged(tiny, [1, 0], [0, 0]) == 0.0


vectors = st.lists(st.floats(-1, 1, allow_nan=False), min_size=1, max_size=1)


@settings(max_examples=60, deadline=None)
@given(connected_graphs(), st.data())
def test_ged_properties(g, data):
    n = g.node_count
    floats = st.floats(-2, 2, allow_nan=False, allow_infinity=False)
    a = np.array(data.draw(st.lists(floats, min_size=n, max_size=n)))
    b = np.array(data.draw(st.lists(floats, min_size=n, max_size=n)))
    c = data.draw(floats)
    s = data.draw(floats)
    k = laplacian_pseudoinverse(g)
    assert ged(k, a, b) == ged(k, b, a)
    assert ged(k, a + c, b) == pytest.approx(ged(k, a, b), abs=1e-9)
    assert ged(k, s * a, s * b) == pytest.approx(abs(s) * ged(k, a, b), abs=1e-9)


def test_edge_list_roundtrip(tmp_path):
    g = community_network(3, 9)[0]
    path = tmp_path / "g.edges"
    write_edge_list(g, path)
    assert read_edge_list(path) == g
    text = format_edge_list(chain(12))
    assert text.splitlines()[0] == "# nodes=12"
    assert len([ln for ln in text.splitlines() if not ln.startswith("#")]) == 11


def test_edge_list_parsing_rules():
    g = parse_edge_list("# a comment\n0 1\n\n1 2\n2 0\n# trailing\n")
    assert g.node_count == 3 and g.edge_count == 3
    g = parse_edge_list("# nodes=5\n0 1\n")
    assert g.node_count == 5
    with pytest.raises(ParseError, match=":2:"):
        parse_edge_list("0 1\n1 x\n", path="f.edges")
    with pytest.raises(ParseError):
        parse_edge_list("# nodes=2\n0 2\n")
    with pytest.raises(ParseError):
        parse_edge_list("1 1\n")
