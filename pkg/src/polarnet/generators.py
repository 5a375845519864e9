"""Network generators: chains, cliques, ring-of-cliques community networks
and the planted-partition stochastic block model."""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import (ConnectivityFailure, LastCommunities, TooFewNodes,
                     Unbalanced)
from .graph import Graph, build_graph, is_connected
from .opinions import CommunityAssignment
from .seeding import derive_seed, generator

log = logging.getLogger(__name__)

MAX_SBM_ATTEMPTS = 100


class WeakCommunityWarning(UserWarning):
    """p_in does not exceed (n - 1) * p_out."""


def chain(n: int) -> Graph:
    if n < 1:
        raise ValueError(f"chain needs at least one node, got {n}")
    return build_graph(n, [(i, i + 1) for i in range(n - 1)])


def complete(n: int) -> Graph:
    if n < 1:
        raise ValueError(f"complete graph needs at least one node, got {n}")
    return build_graph(n, combinations(range(n), 2))


def community_network(n_comms: int, total_nodes: int) -> tuple[Graph, CommunityAssignment]:
    """Equal cliques joined by two bridge edges between neighbouring communities.

    Communities are contiguous node blocks. For three or more communities
    the neighbours form a ring; with two there is a single bridged pair.
    The bridges run from the last and second-last node of community ``c``
    to the first and second node of community ``c + 1``.
    """
    if n_comms < 1:
        raise TooFewNodes(f"need at least one community, got {n_comms}")
    if total_nodes < 3 * n_comms:
        raise TooFewNodes(f"{total_nodes} nodes cannot hold {n_comms} communities "
                          f"of at least 3 nodes")
    if total_nodes % n_comms:
        raise Unbalanced(f"{total_nodes} nodes do not split evenly into {n_comms} communities")
    m = total_nodes // n_comms
    edges = []
    for c in range(n_comms):
        edges += combinations(range(c * m, (c + 1) * m), 2)
    neighbour_pairs = [(c, (c + 1) % n_comms) for c in range(n_comms)] if n_comms >= 3 \
        else [(0, 1)] if n_comms == 2 else []
    for c, d in neighbour_pairs:
        last = (c + 1) * m - 1
        first = d * m
        edges += [(last, first), (last - 1, first + 1)]
    return build_graph(total_nodes, edges), CommunityAssignment.blocks(n_comms, m)


@dataclass(frozen=True)
class SbmParams:
    community_count: int
    community_size: int
    p_in: float = 0.1
    p_out: float = 0.01
    rng_seed: int = 0

    def __post_init__(self):
        if self.community_count < 2:
            raise ValueError(f"SBM needs at least 2 communities, got {self.community_count}")
        if self.community_size < 1:
            raise ValueError(f"community_size must be positive, got {self.community_size}")
        if not 0 <= self.p_out < self.p_in <= 1:
            raise ValueError(f"need 0 <= p_out < p_in <= 1, got p_in={self.p_in}, "
                             f"p_out={self.p_out}")
        if self.p_in <= (self.community_count - 1) * self.p_out:
            warnings.warn(
                f"p_in={self.p_in} <= (n-1)*p_out={(self.community_count - 1) * self.p_out}: "
                f"communities get fewer internal than external edges on average",
                WeakCommunityWarning, stacklevel=3)

    @property
    def node_count(self) -> int:
        return self.community_count * self.community_size


def _sbm_edges(params: SbmParams, seed: int) -> Graph:
    n = params.node_count
    comm = np.repeat(np.arange(params.community_count), params.community_size)
    iu, ju = np.triu_indices(n, k=1)  # row-major, i.e. lexicographic pair order
    prob = np.where(comm[iu] == comm[ju], params.p_in, params.p_out)
    hit = generator(seed).random(iu.size) < prob
    return Graph(n, frozenset(zip(iu[hit].tolist(), ju[hit].tolist())))


def sbm(params: SbmParams) -> tuple[Graph, CommunityAssignment]:
    """Planted-partition SBM, redrawn until connected.

    Attempt ``a`` samples with seed ``derive_seed(rng_seed, a)``; after
    ``MAX_SBM_ATTEMPTS`` disconnected draws ``ConnectivityFailure`` is raised.
    """
    return nested_sbm(params, params.community_count)[0]


def nested_sbm(params: SbmParams, min_communities: int = 2) -> list:
    """An SBM and its shrinking chain down to ``min_communities`` communities.

    Element ``i`` of the result is the ``(graph, assignment)`` pair with
    ``community_count - i`` communities, obtained by repeatedly removing the
    highest-numbered community. Draws are repeated (as in :func:`sbm`)
    until every graph in the chain is connected.
    """
    if not 2 <= min_communities <= params.community_count:
        raise ValueError(f"min_communities must lie in [2, {params.community_count}]")
    assignment = CommunityAssignment.blocks(params.community_count, params.community_size)
    for attempt in range(MAX_SBM_ATTEMPTS):
        g = _sbm_edges(params, derive_seed(params.rng_seed, attempt))
        chain_ = [(g, assignment)]
        while is_connected(chain_[-1][0]) and len(chain_) <= params.community_count - min_communities:
            g_, a_ = chain_[-1]
            chain_.append(remove_community(g_, a_, a_.community_count - 1))
        if len(chain_) == params.community_count - min_communities + 1 \
                and is_connected(chain_[-1][0]):
            if attempt:
                log.debug("SBM seed %d connected after %d redraws", params.rng_seed, attempt)
            return chain_
    raise ConnectivityFailure(
        f"no connected SBM in {MAX_SBM_ATTEMPTS} attempts for {params}")


def remove_community(g: Graph, assignment: CommunityAssignment,
                     community: int) -> tuple[Graph, CommunityAssignment]:
    """Drop a community with all incident edges and reindex the rest in order.

    Communities above the removed one shift down by one label.
    """
    n = assignment.community_count
    if not 0 <= community < n:
        raise ValueError(f"community {community} not in [0, {n})")
    if n - 1 < 2:
        raise LastCommunities(f"removing a community from {n} would leave fewer than 2")
    m = assignment.as_array()
    keep = np.flatnonzero(m != community)
    sub = g.induced_subgraph(keep)
    new_m = m[keep]
    new_m = np.where(new_m > community, new_m - 1, new_m)
    return sub, CommunityAssignment(tuple(new_m.tolist()), n - 1)
