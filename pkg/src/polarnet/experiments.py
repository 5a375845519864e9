"""Synthetic polarization experiments, trend classification and conformity.

Four scenarios, each run on small deterministic networks ("local" scale:
chain, complete, community) and on planted-partition SBMs ("large" scale):

``unique_opinions``
    Add nodes (local) or communities (large) that each hold a unique
    one-hot opinion. Large-scale networks are generated with the maximal
    community count and shrunk by removing communities, so the smaller
    networks are induced subgraphs of the largest.
``neutral_orthogonal``
    Three communities; the middle one first holds ``[0.5, 0.5]`` between
    two extreme opinions, then its own orthogonal opinion. Reported as the
    change in polarization (``METHOD``) plus the neutral level
    (``METHOD:neutral``).
``correlation``
    Three one-hot opinions; the first two are rotated towards each other
    until the angle between them goes from 90 to 0 degrees.
``consensus``
    Three communities whose own-opinion stances are drawn from
    ``Normal(0.5, sigma)`` (clipped), with ``sigma`` shrinking.

Work is split into independent units, one per replication index. Unit
``r`` draws its SBM and opinion samples from seeds derived from
``(master_seed, scenario, scale, stream, r)``; the same network and
normal draws are reused across all sweep values of a unit. Scalar methods
use units ``r < replications``; MDS uses units ``r < mds.n_init`` with
MDS start ``r``, so every MDS restart sees its own network at large scale.
"""
from __future__ import annotations

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from functools import lru_cache
from pathlib import Path

import numpy as np
from scipy.stats import spearmanr

from .errors import ConfigMismatch, MissingScenario, TooFewPoints
from .generators import (SbmParams, chain, community_network, complete,
                         nested_sbm, sbm)
from .graph import laplacian_pseudoinverse
from .io import atomic_write_text, fmt
from .metrics import (METHODS, MdsConfig, PolarizationEstimate, adm, apd,
                      mds_embed, pc, stance_dissimilarities, tv)
from .opinions import (CommunityAssignment, neutral_between, rotate_pair,
                       sample_consensus, unique_orthogonal)
from .seeding import derive_seed

SCENARIOS = ("unique_opinions", "neutral_orthogonal", "correlation", "consensus")
SCALES = ("local", "large")
NETWORK_KINDS = ("chain", "complete", "community")
SCALAR_METHODS = ("APD", "ADM", "PC", "TV")

INCREASING, DECREASING, CONSTANT = "increasing", "decreasing", "constant"

#: which trend classes count as conforming, per scenario
DESIRED = {
    "unique_opinions": (CONSTANT, DECREASING),
    "neutral_orthogonal": (CONSTANT,),
    "correlation": (DECREASING,),
    "consensus": (INCREASING,),
}

DEFAULT_SWEEPS = {
    ("unique_opinions", "local"): (6, 8, 10, 12),
    ("unique_opinions", "large"): (2, 3, 4, 5, 6),
    ("neutral_orthogonal", "local"): (9, 12, 15, 18),
    ("correlation", "local"): tuple(range(90, -1, -10)),
    ("correlation", "large"): tuple(range(90, -1, -10)),
    ("consensus", "local"): (0.2, 0.15, 0.1, 0.05, 0.01),
    ("consensus", "large"): (0.2, 0.15, 0.1, 0.05, 0.01),
}

FULL_SIZE, FULL_P_IN, FULL_P_OUT = 100, 0.1, 0.01

LOCAL_COMMUNITIES = {"unique_opinions": 2, "neutral_orthogonal": 3,
                     "correlation": 3, "consensus": 3}
LOCAL_NODES = 12  # fixed |V| for the correlation and consensus local tests
CONSENSUS_MEAN = 0.5
NEUTRAL_COMMUNITY = 1

# seed streams
_GRAPH, _OPINIONS, _MDS = 0, 1, 2


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str
    scale: str
    network_kind: str | None = None
    sweep: tuple = ()
    replications: int = 10
    community_size: int = 100
    p_in: float = 0.1
    p_out: float = 0.01
    mds: MdsConfig = field(default_factory=MdsConfig)
    master_seed: int = 0

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ConfigMismatch(f"unknown scenario {self.scenario!r}")
        if self.scale not in SCALES:
            raise ConfigMismatch(f"unknown scale {self.scale!r}")
        if self.scale == "local" and self.network_kind not in NETWORK_KINDS:
            raise ConfigMismatch(f"local scale needs network_kind in {NETWORK_KINDS}")
        if self.scale == "large" and self.network_kind is not None:
            raise ConfigMismatch("network_kind applies to local scale only")
        sweep = tuple(self.sweep)
        object.__setattr__(self, "sweep", sweep)
        if not sweep:
            raise ConfigMismatch("sweep must not be empty")
        steps = np.diff(np.asarray(sweep, dtype=float))
        if len(steps) and not (np.all(steps > 0) or np.all(steps < 0)):
            raise ConfigMismatch(f"sweep {sweep} is not strictly monotone")
        if self.replications < 1:
            raise ConfigMismatch("replications must be positive")
        self._check_sweep(sweep)

    def _check_sweep(self, sweep):
        s, scale = self.scenario, self.scale
        if s == "unique_opinions" and scale == "large":
            if any(int(n) != n or n < 2 for n in sweep):
                raise ConfigMismatch("community counts must be integers >= 2")
        elif s == "correlation":
            if any(not 0 <= t <= 90 for t in sweep):
                raise ConfigMismatch("angles must lie in [0, 90]")
        elif s == "consensus":
            if any(v < 0 for v in sweep):
                raise ConfigMismatch("standard deviations must be nonnegative")
        elif scale == "local":
            n = LOCAL_COMMUNITIES[s]
            for v in sweep:
                if int(v) != v or v < 3 * n or v % n:
                    raise ConfigMismatch(
                        f"|V|={v} invalid for {n} balanced communities of >= 3 nodes")
        elif s == "neutral_orthogonal":
            if tuple(sweep) != (3 * self.community_size,):
                raise ConfigMismatch("large neutral scenario sweeps the single value 3*size")

    @property
    def is_random(self) -> bool:
        return self.scale == "large" or self.scenario == "consensus"

    def to_dict(self) -> dict:
        d = asdict(self)
        d["sweep"] = list(self.sweep)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ScenarioConfig":
        d = dict(d)
        d["mds"] = MdsConfig(**d["mds"])
        d["sweep"] = tuple(d["sweep"])
        return cls(**d)


def default_config(scenario: str, scale: str, network_kind: str | None = None, *,
                   desk: bool = False, master_seed: int = 0) -> ScenarioConfig:
    """Full-scale settings, or the reduced ``desk`` settings for quick runs.

    Full scale: 100-node communities, 10 replications, 100 MDS restarts;
    the large neutral scenario uses 100 replications and 500 restarts.
    Desk scale: 30-node communities, 5 replications, 20 MDS restarts
    (50 and 100 for the large neutral scenario). Desk SBMs rescale the edge
    probabilities so that expected within- and cross-community degrees match
    the 100-node setting.
    """
    if scenario not in SCENARIOS:
        raise ConfigMismatch(f"unknown scenario {scenario!r}")
    if scale not in SCALES:
        raise ConfigMismatch(f"unknown scale {scale!r}")
    if scale == "large":
        network_kind = None
    elif network_kind is None:
        network_kind = "community"
    size = 30 if desk else 100
    reps, n_init = (5, 20) if desk else (10, 100)
    if scenario == "neutral_orthogonal" and scale == "large":
        reps, n_init = (50, 100) if desk else (100, 500)
    sweep = DEFAULT_SWEEPS.get((scenario, scale), (3 * size,))
    p_in = FULL_P_IN * (FULL_SIZE - 1) / (size - 1)
    p_out = FULL_P_OUT * FULL_SIZE / size
    mds_seed = derive_seed(master_seed, SCENARIOS.index(scenario), SCALES.index(scale), _MDS)
    return ScenarioConfig(scenario=scenario, scale=scale, network_kind=network_kind,
                          sweep=sweep, replications=reps, community_size=size,
                          p_in=p_in, p_out=p_out,
                          mds=MdsConfig(n_init=n_init, rng_seed=mds_seed),
                          master_seed=master_seed)


# ---------------------------------------------------------------------------
# tables
# ---------------------------------------------------------------------------

@dataclass
class ExperimentTable:
    config: ScenarioConfig
    rows: list  # (x, method, PolarizationEstimate)

    def methods(self) -> list[str]:
        seen = []
        for _, m, _ in self.rows:
            if m not in seen:
                seen.append(m)
        return seen

    def series(self, method: str) -> list[tuple[float, float]]:
        return [(x, est.mean) for x, m, est in self.rows if m == method]

    def estimate(self, x, method: str) -> PolarizationEstimate:
        for xx, m, est in self.rows:
            if m == method and xx == x:
                return est
        raise KeyError((x, method))

    def to_csv(self) -> str:
        lines = ["x,method,mean,ci_low,ci_high,n_samples"]
        for x, m, est in self.rows:
            lines.append(f"{fmt(x)},{m},{fmt(est.mean)},{fmt(est.ci_low)},"
                         f"{fmt(est.ci_high)},{est.n_samples}")
        return "\n".join(lines) + "\n"

    def to_json(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "rows": [{"x": x, "method": m, "mean": est.mean, "ci_low": est.ci_low,
                      "ci_high": est.ci_high, "n_samples": est.n_samples,
                      "samples": list(est.samples)}
                     for x, m, est in self.rows],
        }

    @classmethod
    def from_json(cls, d: dict) -> "ExperimentTable":
        rows = [(r["x"], r["method"],
                 PolarizationEstimate(r["mean"], r["ci_low"], r["ci_high"],
                                      tuple(r.get("samples", ()))))
                for r in d["rows"]]
        return cls(ScenarioConfig.from_dict(d["config"]), rows)

    @property
    def stem(self) -> str:
        c = self.config
        return f"{c.scenario}_{c.scale}" + (f"_{c.network_kind}" if c.network_kind else "")

    def write(self, out_dir) -> list[Path]:
        out_dir = Path(out_dir)
        csv_path = out_dir / f"{self.stem}.csv"
        json_path = out_dir / f"{self.stem}.json"
        atomic_write_text(csv_path, self.to_csv())
        atomic_write_text(json_path, json.dumps(self.to_json(), indent=1, sort_keys=True) + "\n")
        return [csv_path, json_path]


def read_table(path) -> ExperimentTable:
    return ExperimentTable.from_json(json.loads(Path(path).read_text()))


# ---------------------------------------------------------------------------
# instances: (kernel, opinion matrices) for one sweep value of one unit
# ---------------------------------------------------------------------------

@lru_cache(maxsize=64)
def _local_network(kind: str, n_nodes: int, n_comms: int):
    if kind == "community":
        g, a = community_network(n_comms, n_nodes)
    else:
        g = chain(n_nodes) if kind == "chain" else complete(n_nodes)
        a = CommunityAssignment.blocks(n_comms, n_nodes // n_comms)
    return laplacian_pseudoinverse(g), a


def _seed(config: ScenarioConfig, stream: int, r: int) -> int:
    return derive_seed(config.master_seed, SCENARIOS.index(config.scenario),
                       SCALES.index(config.scale), stream, r)


def _opinions(config: ScenarioConfig, x, assignment, r: int) -> dict:
    """Opinion matrices to evaluate, keyed by role ('' or 'neutral'/'orthogonal')."""
    s = config.scenario
    if s == "unique_opinions":
        if config.scale == "local":
            return {"": unique_orthogonal(CommunityAssignment.singletons(assignment.node_count))}
        return {"": unique_orthogonal(assignment)}
    if s == "neutral_orthogonal":
        return {"neutral": neutral_between(assignment, NEUTRAL_COMMUNITY),
                "orthogonal": unique_orthogonal(assignment)}
    if s == "correlation":
        return {"": rotate_pair(unique_orthogonal(assignment), 0, 1, (90.0 - x) / 2.0)}
    return {"": sample_consensus(assignment, CONSENSUS_MEAN, x, _seed(config, _OPINIONS, r))}


def _instances(config: ScenarioConfig, r: int):
    """Yield ``(x, kernel, opinions)`` for every sweep value of unit ``r``."""
    if config.scale == "local":
        n_comms = LOCAL_COMMUNITIES[config.scenario]
        for x in config.sweep:
            n_nodes = int(x) if config.scenario in ("unique_opinions", "neutral_orthogonal") \
                else LOCAL_NODES
            k, a = _local_network(config.network_kind, n_nodes, n_comms)
            yield x, k, _opinions(config, x, a, r)
        return
    params = dict(community_size=config.community_size, p_in=config.p_in,
                  p_out=config.p_out, rng_seed=_seed(config, _GRAPH, r))
    if config.scenario == "unique_opinions":
        nested = nested_sbm(SbmParams(int(max(config.sweep)), **params), int(min(config.sweep)))
        nets = {a.community_count: (g, a) for g, a in nested}
        for x in config.sweep:
            g, a = nets[int(x)]
            yield x, laplacian_pseudoinverse(g), _opinions(config, x, a, r)
        return
    g, a = sbm(SbmParams(3, **params))
    k = laplacian_pseudoinverse(g)
    for x in config.sweep:
        yield x, k, _opinions(config, x, a, r)


def _scalar(method, k, O):
    if method == "APD":
        return apd(k, O)
    if method == "ADM":
        return adm(k, O)
    if method == "PC":
        return pc(k, O)
    return tv(O)


def _run_unit(config: ScenarioConfig, r: int) -> dict:
    """Values of unit ``r``: ``{(x, method, role): value}``."""
    do_scalar = r < config.replications
    do_mds = r < config.mds.n_init
    out = {}
    for x, k, ops in _instances(config, r):
        for role, O in ops.items():
            if do_scalar:
                for m in SCALAR_METHODS:
                    out[(x, m, role)] = _scalar(m, k, O)
            if do_mds:
                emb, _ = mds_embed(O, config.mds, r, stance_dissimilarities(O))
                out[(x, "MDS", role)] = k.norm(emb)
    return out


def _run_unit_star(args):
    return _run_unit(*args)


def run_scenario(config: ScenarioConfig, workers: int = 1) -> ExperimentTable:
    """Evaluate all five methods at every sweep value.

    Deterministic local networks with fixed opinions get a single scalar
    evaluation; MDS always aggregates ``config.mds.n_init`` restarts.
    Results do not depend on ``workers``.
    """
    reps = config.replications if config.is_random else 1
    config_eff = replace(config, replications=reps)
    n_units = max(reps, config.mds.n_init)
    jobs = [(config_eff, r) for r in range(n_units)]
    if workers > 1 and n_units > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_unit_star, jobs, chunksize=max(1, n_units // (4 * workers))))
    else:
        results = [_run_unit(*j) for j in jobs]
    samples: dict = {}
    for res in results:
        for key, v in res.items():
            samples.setdefault(key, []).append(v)

    rows = []
    for x in config.sweep:
        for m in METHODS:
            if config.scenario == "neutral_orthogonal":
                neutral = samples[(x, m, "neutral")]
                ortho = samples[(x, m, "orthogonal")]
                delta = [b - a for a, b in zip(neutral, ortho)]
                rows.append((x, m, PolarizationEstimate.from_samples(delta)))
                rows.append((x, f"{m}:neutral", PolarizationEstimate.from_samples(neutral)))
            else:
                rows.append((x, m, PolarizationEstimate.from_samples(samples[(x, m, "")])))
    return ExperimentTable(config, rows)


def replicate(evaluate, replications: int, master_seed: int) -> PolarizationEstimate:
    """Run ``evaluate(seed)`` on ``replications`` seeds derived from ``master_seed``."""
    if replications < 1:
        raise ValueError("replications must be positive")
    return PolarizationEstimate.from_samples(
        evaluate(derive_seed(master_seed, r)) for r in range(replications))


# ---------------------------------------------------------------------------
# trends and conformity
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TrendThresholds:
    spearman: float = 0.8
    rel_range: float = 0.02
    delta_rel: float = 0.05


def classify_trend(series, baseline=None, thresholds: TrendThresholds = TrendThresholds()) -> str:
    """Classify a series as increasing, decreasing or constant.

    Sweep rule (``baseline is None``): ``series`` is ``[(x, mean), ...]``
    with at least 3 points. Increasing needs Spearman rank correlation
    >= ``thresholds.spearman`` and ``(max - min) / |mean|`` >=
    ``thresholds.rel_range``; decreasing is the mirror image.

    Delta rule: ``series`` holds changes and ``baseline`` the reference
    level(s). The mean change is constant when its magnitude is at most
    ``thresholds.delta_rel`` times the mean baseline, otherwise its sign
    decides.
    """
    pts = [(float(x), float(y)) for x, y in series]
    if baseline is not None:
        if not pts:
            raise TooFewPoints("no delta values")
        base = np.atleast_1d(np.asarray(baseline, dtype=float))
        delta = math.fsum(y for _, y in pts) / len(pts)
        ref = abs(math.fsum(base) / base.size)
        if abs(delta) <= thresholds.delta_rel * ref:
            return CONSTANT
        return INCREASING if delta > 0 else DECREASING
    if len(pts) < 3:
        raise TooFewPoints(f"need at least 3 points, got {len(pts)}")
    xs = np.array([p[0] for p in pts])
    ys = np.array([p[1] for p in pts])
    spread = ys.max() - ys.min()
    if spread == 0:
        return CONSTANT
    centre = abs(ys.mean())
    rel = spread / centre if centre > 0 else math.inf
    rho = spearmanr(xs, ys).statistic
    if not np.isfinite(rho) or rel < thresholds.rel_range:
        return CONSTANT
    if rho >= thresholds.spearman:
        return INCREASING
    if rho <= -thresholds.spearman:
        return DECREASING
    return CONSTANT


@dataclass(frozen=True)
class TrendVerdict:
    scenario: str
    method: str
    local: str
    large: str
    conforms: bool

    @property
    def classification(self) -> str:
        """Large-scale class; the local class is kept separately."""
        return self.large


def table_trend(table: ExperimentTable, method: str,
                thresholds: TrendThresholds = TrendThresholds()) -> str:
    """Trend of one method along the scenario's progression (sweep order)."""
    if table.config.scenario == "neutral_orthogonal":
        deltas = table.series(method)
        base = [y for _, y in table.series(f"{method}:neutral")]
        return classify_trend(deltas, baseline=base, thresholds=thresholds)
    ys = [y for _, y in table.series(method)]
    return classify_trend(list(enumerate(ys)), thresholds=thresholds)


def run_conformity(tables, thresholds: TrendThresholds = TrendThresholds()) -> dict:
    """Pass/fail of every method in every scenario.

    Needs, per scenario, the local community-network table and the large
    SBM table; a method conforms only if both trends are desired ones.
    Returns ``{(scenario, method): TrendVerdict}``.
    """
    index = {}
    for t in tables:
        c = t.config
        if c.scale == "large" or c.network_kind == "community":
            index[(c.scenario, c.scale)] = t
    missing = [f"{s}/{sc}" for s in SCENARIOS for sc in SCALES if (s, sc) not in index]
    if missing:
        raise MissingScenario(f"missing experiment tables: {', '.join(missing)}")
    verdicts = {}
    for s in SCENARIOS:
        for m in METHODS:
            local = table_trend(index[(s, "local")], m, thresholds)
            large = table_trend(index[(s, "large")], m, thresholds)
            ok = local in DESIRED[s] and large in DESIRED[s]
            verdicts[(s, m)] = TrendVerdict(s, m, local, large, ok)
    return verdicts


def conformity_csv(verdicts: dict) -> str:
    lines = ["method," + ",".join(SCENARIOS)]
    for m in METHODS:
        cells = ["pass" if verdicts[(s, m)].conforms else "fail" for s in SCENARIOS]
        lines.append(f"{m}," + ",".join(cells))
    return "\n".join(lines) + "\n"


def conformity_summary(verdicts: dict) -> str:
    width = max(len(s) for s in SCENARIOS)
    out = []
    for s in SCENARIOS:
        out.append(f"{s} (desired: {' or '.join(DESIRED[s])})")
        for m in METHODS:
            v = verdicts[(s, m)]
            mark = "pass" if v.conforms else "fail"
            out.append(f"  {m:<4} {mark}  local={v.local:<10} large={v.large}")
    out.append("")
    out.append(f"{'':<5}" + " ".join(f"{s[:width]}" for s in SCENARIOS))
    for m in METHODS:
        marks = ["Y" if verdicts[(s, m)].conforms else "x" for s in SCENARIOS]
        out.append(f"{m:<5}" + " ".join(f"{c:^{len(s)}}" for c, s in zip(marks, SCENARIOS)))
    return "\n".join(out) + "\n"


def run_all(master_seed: int = 0, desk: bool = False, workers: int = 1,
            kinds=NETWORK_KINDS) -> list[ExperimentTable]:
    """Every scenario at large scale plus each requested local network kind."""
    tables = []
    for s in SCENARIOS:
        for kind in kinds:
            tables.append(run_scenario(default_config(s, "local", kind, desk=desk,
                                                      master_seed=master_seed), workers))
        tables.append(run_scenario(default_config(s, "large", desk=desk,
                                                  master_seed=master_seed), workers))
    return tables


def default_workers() -> int:
    return max(1, min(8, os.cpu_count() or 1))
