"""Graphs, Laplacians and the generalized Euclidean distance.

Graphs are small (at most a few hundred nodes), undirected, unweighted and
simple, so everything here works on dense numpy arrays.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable

import numpy as np

from .errors import (DimensionMismatch, DisconnectedGraph, IndexOutOfRange,
                     NegativeQuadraticForm, ParseError, SelfLoop)
from .io import atomic_write_text

#: relative eigenvalue cutoff used when building the pseudoinverse
ZERO_TOL_FACTOR = 1e-10
#: quadratic forms in [-NEG_QF_TOL, 0) are treated as rounding noise
NEG_QF_TOL = 1e-12


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph on nodes ``0 .. node_count - 1``.

    ``edges`` holds each edge once as a sorted ``(low, high)`` pair.
    Use :func:`build_graph` to construct one from arbitrary pair lists.
    """

    node_count: int
    edges: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if self.node_count < 1:
            raise ValueError("node_count must be positive")
        for a, b in self.edges:
            if not (0 <= a < b < self.node_count):
                raise ValueError(f"edge {(a, b)} is not a normalized pair")

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    @cached_property
    def edge_array(self) -> np.ndarray:
        """Edges as a lexicographically sorted ``(m, 2)`` int array."""
        if not self.edges:
            return np.empty((0, 2), dtype=np.int64)
        return np.array(sorted(self.edges), dtype=np.int64)

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.node_count, dtype=np.int64)
        e = self.edge_array
        np.add.at(deg, e[:, 0], 1)
        np.add.at(deg, e[:, 1], 1)
        return deg

    def neighbors(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in range(self.node_count)]
        for a, b in self.edge_array.tolist():
            adj[a].append(b)
            adj[b].append(a)
        return adj

    def induced_subgraph(self, nodes: Iterable[int]) -> "Graph":
        """Subgraph on ``nodes``, relabelled ``0..k-1`` in increasing original order."""
        keep = sorted(set(int(v) for v in nodes))
        index = {v: i for i, v in enumerate(keep)}
        edges = frozenset((index[a], index[b]) for a, b in self.edges
                          if a in index and b in index)
        return Graph(len(keep), edges)

    def relabel(self, perm) -> "Graph":
        """Graph with node ``v`` renamed to ``perm[v]``."""
        perm = [int(p) for p in perm]
        if sorted(perm) != list(range(self.node_count)):
            raise ValueError("perm must be a permutation of the nodes")
        return Graph(self.node_count,
                     frozenset(_norm(perm[a], perm[b]) for a, b in self.edges))


def _norm(a, b):
    return (a, b) if a < b else (b, a)


def build_graph(node_count: int, edges: Iterable) -> Graph:
    """Build a :class:`Graph`, collapsing duplicate and reversed pairs.

    Raises ``IndexOutOfRange`` for endpoints outside ``[0, node_count)`` and
    ``SelfLoop`` for ``(v, v)`` pairs.
    """
    node_count = int(node_count)
    if node_count < 1:
        raise IndexOutOfRange(f"node_count must be positive, got {node_count}")
    norm = set()
    for pair in edges:
        a, b = (int(x) for x in pair)
        for v in (a, b):
            if not 0 <= v < node_count:
                raise IndexOutOfRange(f"node {v} outside [0, {node_count})")
        if a == b:
            raise SelfLoop(f"self-loop on node {a}")
        norm.add(_norm(a, b))
    return Graph(node_count, frozenset(norm))


def laplacian(g: Graph) -> np.ndarray:
    """Combinatorial Laplacian ``D - A`` as a dense float array."""
    n = g.node_count
    L = np.zeros((n, n))
    e = g.edge_array
    if len(e):
        L[e[:, 0], e[:, 1]] = -1.0
        L[e[:, 1], e[:, 0]] = -1.0
    L[np.diag_indices(n)] = g.degrees()
    return L


def is_connected(g: Graph) -> bool:
    adj = g.neighbors()
    seen = [False] * g.node_count
    seen[0] = True
    queue = deque([0])
    count = 1
    while queue:
        v = queue.popleft()
        for w in adj[v]:
            if not seen[w]:
                seen[w] = True
                count += 1
                queue.append(w)
    return count == g.node_count


@dataclass(frozen=True)
class LaplacianKernel:
    """Moore-Penrose pseudoinverse of a connected graph's Laplacian."""

    pinv: np.ndarray
    zero_tol: float

    @property
    def node_count(self) -> int:
        return self.pinv.shape[0]

    def quadratic_form(self, x: np.ndarray) -> np.ndarray:
        """``x^T L+ x`` for a node vector, or column-wise for an ``(n, k)`` matrix.

        The all-ones component, which ``L+`` annihilates anyway, is removed
        first so that constant offsets cancel exactly instead of leaving
        rounding residue. Tiny negative values from rounding are clamped to
        zero; anything below ``-NEG_QF_TOL`` raises ``NegativeQuadraticForm``.
        """
        x = np.asarray(x, dtype=float)
        if x.shape[0] != self.node_count:
            raise DimensionMismatch(
                f"vector of length {x.shape[0]} on a {self.node_count}-node graph")
        x = x - x.mean(axis=0)
        if x.ndim == 1:
            q = np.asarray(x @ self.pinv @ x)
        else:
            q = np.einsum("ik,ij,jk->k", x, self.pinv, x)
        if np.any(q < -NEG_QF_TOL):
            raise NegativeQuadraticForm(f"quadratic form {q.min():.3e} < 0")
        return np.maximum(q, 0.0)

    def norm(self, x) -> float:
        """``sqrt(x^T L+ x)``: distance of ``x`` from the zero vector."""
        return float(np.sqrt(self.quadratic_form(x)))


def laplacian_pseudoinverse(g: Graph) -> LaplacianKernel:
    """Dense pseudoinverse via a symmetric eigendecomposition.

    Eigenvalues below ``1e-10`` times the largest one are treated as zero.
    Raises ``DisconnectedGraph`` unless the graph has a single component.
    """
    if not is_connected(g):
        raise DisconnectedGraph(
            f"graph with {g.node_count} nodes and {g.edge_count} edges is not connected")
    L = laplacian(g)
    if g.node_count == 1:
        return LaplacianKernel(np.zeros((1, 1)), 0.0)
    w, V = np.linalg.eigh(L)
    zero_tol = ZERO_TOL_FACTOR * float(np.max(np.abs(w)))
    keep = np.abs(w) > zero_tol
    Vk = V[:, keep]
    pinv = (Vk / w[keep]) @ Vk.T
    pinv = 0.5 * (pinv + pinv.T)
    pinv.setflags(write=False)
    return LaplacianKernel(pinv, zero_tol)


def ged(k: LaplacianKernel, a, b) -> float:
    """Generalized Euclidean distance ``sqrt((a-b)^T L+ (a-b))``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise DimensionMismatch(f"node vectors of shapes {a.shape} and {b.shape}")
    return k.norm(a - b)


# ---------------------------------------------------------------------------
# edge-list text format
# ---------------------------------------------------------------------------

def format_edge_list(g: Graph) -> str:
    lines = [f"# nodes={g.node_count}"]
    lines += [f"{a} {b}" for a, b in g.edge_array.tolist()]
    return "\n".join(lines) + "\n"


def parse_edge_list(text: str, path="<string>") -> Graph:
    """Parse ``u v`` lines; ``#`` lines are comments, ``# nodes=N`` fixes the size."""
    node_count = None
    pairs = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip().replace(" ", "")
            if node_count is None and not pairs and body.startswith("nodes="):
                try:
                    node_count = int(body[len("nodes="):])
                except ValueError:
                    raise ParseError(path, lineno, f"bad node count {raw!r}") from None
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ParseError(path, lineno, f"expected 'u v', got {raw!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise ParseError(path, lineno, f"non-integer node in {raw!r}") from None
        if u < 0 or v < 0:
            raise ParseError(path, lineno, f"negative node index in {raw!r}")
        if u == v:
            raise ParseError(path, lineno, f"self-loop {raw!r}")
        if node_count is not None and max(u, v) >= node_count:
            raise ParseError(path, lineno, f"node index >= nodes={node_count}")
        pairs.append((u, v))
    if node_count is None:
        if not pairs:
            raise ParseError(path, None, "empty edge list without '# nodes=N' header")
        node_count = 1 + max(max(p) for p in pairs)
    return build_graph(node_count, pairs)


def read_edge_list(path) -> Graph:
    path = Path(path)
    return parse_edge_list(path.read_text(), path=path)


def write_edge_list(g: Graph, path) -> None:
    atomic_write_text(path, format_edge_list(g))
