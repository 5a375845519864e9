"""Opinion matrices and the constructors used by the experiments.

An opinion matrix has one row per node and one column per opinion; each
entry is a stance in ``[0, 1]``. Stances are never normalized per node.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (NotOrthogonal, ParseError, RangeViolation,
                     WrongCommunityCount, ZeroVector)
from .io import atomic_write_text, fmt
from .seeding import generator

RANGE_TOL = 1e-12


@dataclass(frozen=True)
class CommunityAssignment:
    """Partition of nodes into ``community_count`` non-empty communities."""

    membership: tuple
    community_count: int

    def __post_init__(self):
        m = tuple(int(c) for c in self.membership)
        object.__setattr__(self, "membership", m)
        if self.community_count < 1:
            raise ValueError("community_count must be positive")
        present = set(m)
        if present != set(range(self.community_count)):
            raise ValueError(
                f"membership must use every community in [0, {self.community_count}) "
                f"and nothing else")

    @classmethod
    def blocks(cls, community_count: int, community_size: int) -> "CommunityAssignment":
        """Contiguous equal-size blocks: nodes ``0..m-1`` in community 0, and so on."""
        return cls(tuple(np.repeat(np.arange(community_count), community_size).tolist()),
                   community_count)

    @classmethod
    def singletons(cls, node_count: int) -> "CommunityAssignment":
        return cls(tuple(range(node_count)), node_count)

    @property
    def node_count(self) -> int:
        return len(self.membership)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.membership, dtype=np.int64)

    def members(self, community: int) -> np.ndarray:
        return np.flatnonzero(self.as_array() == community)


@dataclass(frozen=True, eq=False)
class OpinionMatrix:
    """Stances of ``|V|`` nodes towards ``|O|`` opinions.

    The array is copied and made read-only. Construction does not validate;
    call :func:`validate` (or :meth:`checked`) where a violation should be fatal.
    """

    stances: np.ndarray

    def __post_init__(self):
        s = np.array(self.stances, dtype=float)
        if s.ndim == 1:
            s = s[:, None]
        if s.ndim != 2:
            raise ValueError("stances must be a 2-d array")
        s.setflags(write=False)
        object.__setattr__(self, "stances", s)

    @property
    def node_count(self) -> int:
        return self.stances.shape[0]

    @property
    def opinion_count(self) -> int:
        return self.stances.shape[1]

    def column(self, i: int) -> np.ndarray:
        return self.stances[:, i]

    def checked(self) -> "OpinionMatrix":
        report = validate(self)
        if not report.ok:
            raise RangeViolation(str(report))
        return self

    def __eq__(self, other):
        return (isinstance(other, OpinionMatrix)
                and self.stances.shape == other.stances.shape
                and bool(np.array_equal(self.stances, other.stances)))

    __hash__ = None


@dataclass
class ValidationReport:
    range_violations: list  # (node, opinion, value)
    zero_columns: list

    @property
    def ok(self) -> bool:
        return not self.range_violations and not self.zero_columns

    def __str__(self):
        if self.ok:
            return "ok"
        parts = []
        if self.range_violations:
            shown = ", ".join(f"({i},{j})={v:g}" for i, j, v in self.range_violations[:5])
            more = len(self.range_violations) - 5
            parts.append(f"stances outside [0,1]: {shown}" + (f" (+{more} more)" if more > 0 else ""))
        if self.zero_columns:
            parts.append(f"zero opinion columns: {self.zero_columns}")
        return "; ".join(parts)


def validate(O: OpinionMatrix) -> ValidationReport:
    s = O.stances
    bad = np.argwhere((s < -RANGE_TOL) | (s > 1 + RANGE_TOL) | ~np.isfinite(s))
    violations = [(int(i), int(j), float(s[i, j])) for i, j in bad]
    zero = [int(j) for j in np.flatnonzero(~np.any(s != 0, axis=0))]
    return ValidationReport(violations, zero)


def unique_orthogonal(assignment: CommunityAssignment) -> OpinionMatrix:
    """One-hot stances: node ``i`` holds stance 1 on opinion ``membership[i]``."""
    m = assignment.as_array()
    s = np.zeros((len(m), assignment.community_count))
    s[np.arange(len(m)), m] = 1.0
    return OpinionMatrix(s)


def neutral_between(assignment: CommunityAssignment, neutral_community: int) -> OpinionMatrix:
    """Two opinions held by the extreme communities; the neutral one sits at ``[0.5, 0.5]``."""
    if assignment.community_count != 3:
        raise WrongCommunityCount(
            f"need exactly 3 communities, got {assignment.community_count}")
    if neutral_community not in (0, 1, 2):
        raise WrongCommunityCount(f"neutral community {neutral_community} not in 0..2")
    extremes = [c for c in range(3) if c != neutral_community]
    m = assignment.as_array()
    s = np.zeros((len(m), 2))
    for col, c in enumerate(extremes):
        s[m == c, col] = 1.0
    s[m == neutral_community] = 0.5
    return OpinionMatrix(s)


def rotate_pair(O: OpinionMatrix, i: int, j: int, phi: float) -> OpinionMatrix:
    """Rotate opinions ``i`` and ``j`` towards each other by ``phi`` degrees each.

    Works in the plane spanned by the two (orthogonal) columns and keeps
    their norms, so the angle between them becomes ``90 - 2 * phi``.
    """
    if not 0 <= phi <= 45:
        raise ValueError(f"phi must lie in [0, 45], got {phi}")
    a, b = O.column(i), O.column(j)
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        raise ZeroVector("cannot rotate a zero opinion")
    u, v = a / na, b / nb
    if abs(u @ v) > 1e-12:
        raise NotOrthogonal(f"opinions {i} and {j} have cosine {u @ v:.3e}")
    t = np.deg2rad(phi)
    c, s = np.cos(t), np.sin(t)
    out = O.stances.copy()
    out[:, i] = na * (c * u + s * v)
    out[:, j] = nb * (s * u + c * v)
    bad = (out < -RANGE_TOL) | (out > 1 + RANGE_TOL)
    if bad.any():
        raise RangeViolation(f"rotation by {phi} degrees leaves [0, 1]")
    return OpinionMatrix(out)


def opinion_angle(a, b) -> float:
    """Angle in degrees between two opinion vectors (arccos of cosine similarity)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        raise ZeroVector("angle undefined for a zero opinion")
    cos = np.clip((a @ b) / (na * nb), -1.0, 1.0)
    return float(np.rad2deg(np.arccos(cos)))


def sample_consensus(assignment: CommunityAssignment, mu: float, sigma: float,
                     rng_seed: int) -> OpinionMatrix:
    """Own-opinion stances drawn from ``Normal(mu, sigma)`` and clipped to ``[0, 1]``.

    Every other entry is zero. Draws come from a PCG64 generator seeded
    with ``rng_seed``, one standard normal per node in node order, so equal
    seeds give equal matrices for every ``sigma``.
    """
    if not 0 <= mu <= 1:
        raise ValueError(f"mu must lie in [0, 1], got {mu}")
    if sigma < 0:
        raise ValueError(f"sigma must be nonnegative, got {sigma}")
    m = assignment.as_array()
    z = generator(rng_seed).standard_normal(len(m))
    s = np.zeros((len(m), assignment.community_count))
    s[np.arange(len(m)), m] = np.clip(mu + sigma * z, 0.0, 1.0)
    return OpinionMatrix(s)


# ---------------------------------------------------------------------------
# CSV formats
# ---------------------------------------------------------------------------

def format_opinion_csv(O: OpinionMatrix) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["node"] + [f"op{j}" for j in range(O.opinion_count)])
    for i, row in enumerate(O.stances):
        w.writerow([i] + [fmt(x) for x in row])
    return buf.getvalue()


def parse_opinion_csv(text: str, path="<string>") -> OpinionMatrix:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        raise ParseError(path, None, "empty opinion file")
    header = [h.strip() for h in rows[0]]
    if len(header) < 2 or header[0] != "node":
        raise ParseError(path, 1, "header must be 'node,op0,op1,...'")
    k = len(header) - 1
    data = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != k + 1:
            raise ParseError(path, lineno, f"expected {k + 1} fields, got {len(row)}")
        try:
            node = int(row[0])
            vals = [float(x) for x in row[1:]]
        except ValueError:
            raise ParseError(path, lineno, f"non-numeric field in {row!r}") from None
        if node != len(data):
            raise ParseError(path, lineno, f"expected node {len(data)}, got {node}")
        data.append(vals)
    if not data:
        raise ParseError(path, None, "no opinion rows")
    return OpinionMatrix(np.array(data))


def read_opinion_csv(path) -> OpinionMatrix:
    path = Path(path)
    return parse_opinion_csv(path.read_text(), path=path)


def write_opinion_csv(O: OpinionMatrix, path) -> None:
    atomic_write_text(path, format_opinion_csv(O))


def format_membership_csv(assignment: CommunityAssignment) -> str:
    lines = ["node,community"]
    lines += [f"{i},{c}" for i, c in enumerate(assignment.membership)]
    return "\n".join(lines) + "\n"


def parse_membership_csv(text: str, path="<string>") -> CommunityAssignment:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or [h.strip() for h in rows[0]] != ["node", "community"]:
        raise ParseError(path, 1, "header must be 'node,community'")
    membership = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        try:
            node, comm = int(row[0]), int(row[1])
        except (ValueError, IndexError):
            raise ParseError(path, lineno, f"bad row {row!r}") from None
        if node != len(membership):
            raise ParseError(path, lineno, f"expected node {len(membership)}, got {node}")
        membership.append(comm)
    try:
        return CommunityAssignment(tuple(membership), max(membership) + 1)
    except ValueError as exc:
        raise ParseError(path, None, str(exc)) from None


def write_membership_csv(assignment: CommunityAssignment, path) -> None:
    atomic_write_text(path, format_membership_csv(assignment))
