import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from polarnet.errors import (ConnectivityFailure, LastCommunities,
                             TooFewNodes, Unbalanced)
from polarnet.generators import (SbmParams, WeakCommunityWarning, _sbm_edges,
                                 chain, community_network, complete,
                                 nested_sbm, remove_community, sbm)
from polarnet.graph import is_connected


@pytest.mark.parametrize("n", [1, 2, 5, 12])
def test_chain_and_complete_edge_counts(n):
    assert len(chain(n).edges) == n - 1
    assert len(complete(n).edges) == n * (n - 1) // 2
    assert is_connected(chain(n)) and is_connected(complete(n))


def test_community_network_two_by_four():
    g, a = community_network(2, 8)
    # two K4 (6 edges each) plus two bridges
    assert len(g.edges) == 14
    assert (3, 4) in g.edges and (2, 5) in g.edges
    assert a.membership == (0, 0, 0, 0, 1, 1, 1, 1)


def test_community_network_ring():
    g, a = community_network(3, 9)
    # three triangles plus two bridges per neighbouring pair on a ring
    assert len(g.edges) == 3 * 3 + 3 * 2
    assert (0, 8) in g.edges and (1, 7) in g.edges
    assert is_connected(g)


@given(st.integers(2, 6), st.integers(3, 8))
def test_community_network_structure(c, m):
    g, a = community_network(c, c * m)
    ring = c if c >= 3 else 1
    assert len(g.edges) == c * m * (m - 1) // 2 + 2 * ring
    memb = a.as_array()
    cross = [(u, v) for u, v in g.edges if memb[u] != memb[v]]
    assert len(cross) == 2 * ring
    assert is_connected(g)


def test_community_network_errors():
    with pytest.raises(TooFewNodes):
        community_network(3, 6)
    with pytest.raises(Unbalanced):
        community_network(3, 10)


def test_sbm_p_out_zero_fails():
    with pytest.raises(ConnectivityFailure):
        sbm(SbmParams(2, 5, p_in=1.0, p_out=0.0))


def test_sbm_complete_when_all_probabilities_one():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", WeakCommunityWarning)
        # p_out must stay below p_in, so use the largest p_out short of 1
        g, _ = sbm(SbmParams(3, 4, p_in=1.0, p_out=np.nextafter(1.0, 0)))
    assert g.edges == complete(12).edges


def test_sbm_parameter_validation():
    with pytest.raises(ValueError):
        SbmParams(3, 10, p_in=0.1, p_out=0.2)
    with pytest.raises(ValueError):
        SbmParams(1, 10)
    with pytest.warns(WeakCommunityWarning):
        SbmParams(6, 10, p_in=0.1, p_out=0.03)


def test_sbm_expected_edge_counts():
    # 2 x 100 nodes: expected 2 * C(100, 2) * 0.1 = 990 inside, 100 * 100 * 0.01 = 100 across
    params = SbmParams(2, 100)
    inside, across = [], []
    for s in range(200):
        g = _sbm_edges(params, s)
        e = g.edge_array
        same = (e[:, 0] < 100) == (e[:, 1] < 100)
        inside.append(same.sum())
        across.append((~same).sum())
    assert abs(np.mean(inside) - 990) < 0.05 * 990
    assert abs(np.mean(across) - 100) < 0.05 * 100


def test_sbm_is_deterministic():
    p = SbmParams(3, 30, p_in=0.35, p_out=0.03, rng_seed=7)
    assert sbm(p) == sbm(p)
    assert sbm(p)[0] != sbm(SbmParams(3, 30, p_in=0.35, p_out=0.03, rng_seed=8))[0]


def test_sbm_is_connected_and_assortative():
    g, a = sbm(SbmParams(3, 100, rng_seed=1))
    assert is_connected(g)
    memb = a.as_array()
    inside = sum(memb[u] == memb[v] for u, v in g.edges)
    assert inside > len(g.edges) - inside


def test_nested_chain():
    chain_ = nested_sbm(SbmParams(4, 40, p_in=0.25, p_out=0.0251 / 2, rng_seed=3))
    assert [a.community_count for _, a in chain_] == [4, 3, 2]
    for (g_big, _), (g_small, a_small) in zip(chain_, chain_[1:]):
        assert is_connected(g_small)
        n = a_small.node_count
        # the smaller graph is the induced subgraph on the surviving nodes
        assert g_small.edges == {(u, v) for u, v in g_big.edges if v < n}


def test_remove_community_reindexes():
    g, a = community_network(3, 9)
    g2, a2 = remove_community(g, a, 1)
    assert a2.membership == (0, 0, 0, 1, 1, 1)
    assert g2.node_count == 6
    # bridge (8, 0) survives as (5, 0) after relabelling
    assert (0, 5) in g2.edges
    with pytest.raises(LastCommunities):
        remove_community(g2, a2, 0)
