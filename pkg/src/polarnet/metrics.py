"""Multipolar polarization metrics.

Four metrics build on the generalized Euclidean distance through a
:class:`~polarnet.graph.LaplacianKernel`:

* ``apd`` - average distance over all unordered pairs of opinions
* ``adm`` - average distance of each opinion to the mean opinion
* ``pc``  - norm of the stances projected on the first principal component
* ``mds`` - norm of a one-dimensional metric MDS embedding of the stances

``tv`` (total variation) ignores the graph and sums the opinion variances.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
from scipy.spatial.distance import pdist, squareform

from .errors import (DegenerateCovariance, DimensionMismatch, EmptySamples,
                     TooFewOpinions)
from .graph import LaplacianKernel
from .opinions import OpinionMatrix
from .seeding import derive_seed, generator

log = logging.getLogger(__name__)

METHODS = ("APD", "ADM", "PC", "MDS", "TV")


@dataclass(frozen=True)
class MdsConfig:
    n_init: int = 100
    max_iter: int = 300
    rel_tol: float = 1e-4
    rng_seed: int = 0

    def __post_init__(self):
        if self.n_init < 1 or self.max_iter < 1 or not self.rel_tol > 0:
            raise ValueError(f"invalid MDS configuration {self}")


@dataclass(frozen=True)
class PolarizationEstimate:
    """Mean of replicated values plus a 95-percentile interval."""

    mean: float
    ci_low: float
    ci_high: float
    samples: tuple = field(default=(), repr=False)

    @classmethod
    def from_samples(cls, samples) -> "PolarizationEstimate":
        vals = sorted(float(x) for x in samples)
        if not vals:
            raise EmptySamples("no samples to aggregate")
        lo, hi = percentile_ci(vals)
        return cls(math.fsum(vals) / len(vals), lo, hi, tuple(vals))

    @property
    def n_samples(self) -> int:
        return len(self.samples)


def percentile_ci(samples) -> tuple[float, float]:
    """2.5th and 97.5th percentiles, linearly interpolated between order statistics."""
    vals = np.sort(np.asarray(list(samples), dtype=float))
    if vals.size == 0:
        raise EmptySamples("percentile of an empty sample")
    lo, hi = np.percentile(vals, [2.5, 97.5])
    return float(lo), float(hi)


def _check_rows(k: LaplacianKernel, O: OpinionMatrix):
    if O.node_count != k.node_count:
        raise DimensionMismatch(
            f"opinion matrix has {O.node_count} rows, graph has {k.node_count} nodes")


def pairwise_distances(k: LaplacianKernel, O: OpinionMatrix) -> dict:
    """GED for every unordered pair of opinion columns, keyed ``(i, j)`` with ``i < j``."""
    _check_rows(k, O)
    pairs = list(combinations(range(O.opinion_count), 2))
    if not pairs:
        return {}
    s = O.stances
    diffs = np.stack([s[:, i] - s[:, j] for i, j in pairs], axis=1)
    q = k.quadratic_form(diffs)
    return {p: float(np.sqrt(v)) for p, v in zip(pairs, q)}


def apd(k: LaplacianKernel, O: OpinionMatrix) -> float:
    """Average pairwise GED between opinions."""
    if O.opinion_count < 2:
        raise TooFewOpinions(f"APD needs at least 2 opinions, got {O.opinion_count}")
    d = pairwise_distances(k, O)
    return math.fsum(d.values()) / len(d)


def adm(k: LaplacianKernel, O: OpinionMatrix) -> float:
    """Average GED from each opinion to the entrywise mean opinion."""
    _check_rows(k, O)
    s = O.stances
    mean = s.mean(axis=1, keepdims=True)
    q = k.quadratic_form(s - mean)
    return math.fsum(np.sqrt(q)) / O.opinion_count


def first_principal_component(O: OpinionMatrix) -> np.ndarray:
    """Leading eigenvector of the covariance of the stance rows.

    The sign is fixed so that the entry of largest magnitude is
    nonnegative. With tied leading eigenvalues the direction is whatever
    LAPACK's ``syevd`` returns; it is deterministic but not canonical.
    """
    s = O.stances
    if s.shape[0] < 2:
        raise DimensionMismatch("principal component needs at least 2 nodes")
    centered = s - s.mean(axis=0)
    if not np.any(centered):
        raise DegenerateCovariance("all stance rows are identical")
    cov = centered.T @ centered / (s.shape[0] - 1)
    w, V = np.linalg.eigh(cov)
    vec = V[:, -1]
    if vec[np.argmax(np.abs(vec))] < 0:
        vec = -vec
    return vec / np.linalg.norm(vec)


def project_first_component(O: OpinionMatrix) -> np.ndarray:
    """Uncentered stance rows projected on the first principal component."""
    try:
        w = first_principal_component(O)
    except DegenerateCovariance:
        # every row is equal, so any unit direction gives a constant projection
        w = np.zeros(O.opinion_count)
        w[0] = 1.0
    return O.stances @ w


def pc(k: LaplacianKernel, O: OpinionMatrix) -> float:
    """GED norm of the projected stances.

    Projections are not clamped; a unit-norm direction can push them
    outside ``[0, 1]``, which is logged at debug level.
    """
    _check_rows(k, O)
    proj = project_first_component(O)
    if proj.size and (proj.min() < 0 or proj.max() > 1):
        log.debug("PC projection leaves [0, 1]: range [%.6g, %.6g]", proj.min(), proj.max())
    return k.norm(proj)


# ---------------------------------------------------------------------------
# metric MDS by stress majorization (SMACOF), one output dimension
# ---------------------------------------------------------------------------

def stance_dissimilarities(O: OpinionMatrix) -> np.ndarray:
    """Euclidean distances between the stance rows of every node pair."""
    return squareform(pdist(O.stances))


def raw_stress(x: np.ndarray, delta: np.ndarray) -> float:
    """``sum_{i<j} (|x_i - x_j| - delta_ij)^2``."""
    d = np.abs(x[:, None] - x[None, :])
    r = d - delta
    return float(np.sum(np.triu(r * r, 1)))


def _guttman(x: np.ndarray, delta: np.ndarray) -> np.ndarray:
    diff = x[:, None] - x[None, :]
    d = np.abs(diff)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(d > 0, delta / d, 0.0)
    # B x / n with B_ij = -ratio_ij, B_ii = sum_j ratio_ij
    return np.sum(ratio * diff, axis=1) / x.size


def smacof_1d(delta: np.ndarray, x0: np.ndarray, max_iter: int = 300,
              rel_tol: float = 1e-4) -> tuple[np.ndarray, float, list]:
    """Minimize raw stress from ``x0`` by Guttman transforms.

    Stops once an iteration improves stress by less than ``rel_tol`` times
    the previous value (or stress reaches zero) or after ``max_iter``
    transforms. Returns the final embedding, its stress, and the stress
    history starting with the stress of ``x0``.
    """
    x = np.asarray(x0, dtype=float).copy()
    stress = raw_stress(x, delta)
    history = [stress]
    for _ in range(max_iter):
        x_new = _guttman(x, delta)
        new_stress = raw_stress(x_new, delta)
        if new_stress > stress:
            # majorization cannot increase stress; only rounding can do this
            break
        improvement = stress - new_stress
        x, stress = x_new, new_stress
        history.append(stress)
        if stress == 0.0 or improvement < rel_tol * history[-2]:
            break
    return x, stress, history


def mds_init(n: int, config: MdsConfig, init_index: int) -> np.ndarray:
    """Uniform ``[0, 1)`` starting positions for restart ``init_index``."""
    return generator(derive_seed(config.rng_seed, init_index)).random(n)


def mds_embed(O: OpinionMatrix, config: MdsConfig, init_index: int,
              delta: np.ndarray | None = None) -> tuple[np.ndarray, float]:
    """One-dimensional metric MDS of the stance rows from a single random start.

    ``delta`` may pass precomputed :func:`stance_dissimilarities`.
    """
    n = O.node_count
    if n < 2:
        raise DimensionMismatch("MDS needs at least 2 nodes")
    if delta is None:
        delta = stance_dissimilarities(O)
    x, stress, _ = smacof_1d(delta, mds_init(n, config, init_index),
                             config.max_iter, config.rel_tol)
    return x, stress


def mds_polarization(k: LaplacianKernel, O: OpinionMatrix,
                     config: MdsConfig) -> PolarizationEstimate:
    """GED norm of the MDS embedding across ``config.n_init`` random restarts."""
    _check_rows(k, O)
    delta = stance_dissimilarities(O)
    vals = [k.norm(mds_embed(O, config, r, delta)[0]) for r in range(config.n_init)]
    return PolarizationEstimate.from_samples(vals)


def tv(O: OpinionMatrix) -> float:
    """Total variation: sum of opinion sample variances (denominator ``|V| - 1``)."""
    if O.node_count < 2:
        raise DimensionMismatch("total variation needs at least 2 nodes")
    return float(np.sum(np.var(O.stances, axis=0, ddof=1)))


def evaluate(method: str, k: LaplacianKernel, O: OpinionMatrix,
             mds_config: MdsConfig | None = None):
    """Dispatch by method name; MDS returns a :class:`PolarizationEstimate`."""
    method = method.upper()
    if method == "APD":
        return apd(k, O)
    if method == "ADM":
        return adm(k, O)
    if method == "PC":
        return pc(k, O)
    if method == "MDS":
        return mds_polarization(k, O, mds_config or MdsConfig())
    if method == "TV":
        return tv(O)
    raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
