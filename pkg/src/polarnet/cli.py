"""Command-line interface.

    polarnet generate   --kind {chain,complete,community,sbm} ...
    polarnet metric     --graph G.edges --opinions O.csv --methods apd,tv
    polarnet experiment --scenario correlation --scale local --out runs/corr
    polarnet report     runs/ --out runs/report

Exit codes: 0 success, 2 usage/config error, 3 data/validation error,
4 numerical failure. ``POLARNET_SEED`` sets the default master seed.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .errors import (ConfigError, DimensionMismatch, MissingScenario,
                     PolarnetError)
from .experiments import (NETWORK_KINDS, SCALES, SCENARIOS, ExperimentTable,
                          ScenarioConfig, conformity_csv, conformity_summary,
                          default_config, read_table, run_conformity,
                          run_scenario)
from .generators import SbmParams, chain, community_network, complete, sbm
from .graph import (laplacian_pseudoinverse, read_edge_list,
                    write_edge_list)
from .io import atomic_write_json, atomic_write_text, fmt
from .metrics import METHODS, MdsConfig, PolarizationEstimate, evaluate
from .opinions import (CommunityAssignment, neutral_between,
                       read_opinion_csv, unique_orthogonal,
                       write_membership_csv, write_opinion_csv)

log = logging.getLogger("polarnet")

MANIFEST = "manifest.json"
TABLE_MANIFEST_KEY = "tables"


def _default_seed() -> int:
    raw = os.environ.get("POLARNET_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"POLARNET_SEED must be an integer, got {raw!r}") from None


def _manifest(command: str, config: dict, artifacts, out_dir: Path) -> dict:
    return {
        "command": command,
        "config": config,
        "artifacts": sorted(str(Path(p).relative_to(out_dir)) for p in artifacts),
        "version": __version__,
    }


def _load_manifest(path, command: str) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read manifest {path}: {exc}") from None
    if data.get("command") != command:
        raise ConfigError(f"manifest {path} is for '{data.get('command')}', not '{command}'")
    return data["config"]


# ---------------------------------------------------------------------------
# generate
# ---------------------------------------------------------------------------

def _generate(cfg: dict):
    kind = cfg["kind"]
    if kind == "sbm":
        params = SbmParams(cfg["communities"], cfg["size"], cfg["p_in"], cfg["p_out"],
                           cfg["seed"])
        return sbm(params)
    if kind == "community":
        return community_network(cfg["communities"], cfg["nodes"])
    n = cfg["nodes"]
    if n % cfg["communities"]:
        raise ConfigError(f"{n} nodes do not split into {cfg['communities']} blocks")
    g = chain(n) if kind == "chain" else complete(n)
    return g, CommunityAssignment.blocks(cfg["communities"], n // cfg["communities"])


def cmd_generate(args) -> int:
    if args.manifest:
        cfg = _load_manifest(args.manifest, "generate")
    else:
        if args.kind is None:
            raise ConfigError("--kind is required (or --manifest)")
        if args.kind == "sbm":
            communities = args.communities or 2
        else:
            communities = args.communities or 1
            if args.nodes is None:
                raise ConfigError(f"--nodes is required for kind {args.kind}")
        cfg = {"kind": args.kind, "nodes": args.nodes, "communities": communities,
               "size": args.size, "p_in": args.p_in, "p_out": args.p_out,
               "seed": args.seed if args.seed is not None else _default_seed(),
               "opinions": args.opinions}
    try:
        g, assignment = _generate(cfg)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    out = Path(args.out)
    paths = [out / "graph.edges", out / "membership.csv"]
    write_edge_list(g, paths[0])
    write_membership_csv(assignment, paths[1])
    if cfg.get("opinions"):
        if cfg["opinions"] == "community":
            O = unique_orthogonal(assignment)
        elif cfg["opinions"] == "node":
            O = unique_orthogonal(CommunityAssignment.singletons(g.node_count))
        else:
            O = neutral_between(assignment, 1)
        paths.append(out / "opinions.csv")
        write_opinion_csv(O, paths[-1])
    atomic_write_json(out / MANIFEST, _manifest("generate", cfg, paths, out))
    print(f"wrote {g.node_count} nodes, {g.edge_count} edges to {out}")
    return 0


# ---------------------------------------------------------------------------
# metric
# ---------------------------------------------------------------------------

def cmd_metric(args) -> int:
    methods = [m.strip().upper() for m in args.methods.split(",") if m.strip()]
    unknown = [m for m in methods if m not in METHODS]
    if unknown:
        raise ConfigError(f"unknown method(s) {unknown}; choose from {', '.join(METHODS)}")
    seed = args.seed if args.seed is not None else _default_seed()
    mds = MdsConfig(n_init=args.mds_n_init, max_iter=args.mds_max_iter,
                    rel_tol=args.mds_rel_tol, rng_seed=seed)
    g = read_edge_list(args.graph)
    O = read_opinion_csv(args.opinions)
    O.checked()
    if O.node_count != g.node_count:
        raise DimensionMismatch(f"{args.opinions} has {O.node_count} rows but "
                                f"{args.graph} has {g.node_count} nodes")
    k = laplacian_pseudoinverse(g) if any(m != "TV" for m in methods) else None
    records = []
    print("method,value,ci_low,ci_high,n_samples")
    for m in methods:
        val = evaluate(m, k, O, mds) if m != "TV" else evaluate(m, None, O)
        est = val if isinstance(val, PolarizationEstimate) else PolarizationEstimate(val, val, val, (val,))
        records.append({"method": m, "value": est.mean, "ci_low": est.ci_low,
                        "ci_high": est.ci_high, "n_samples": est.n_samples})
        print(f"{m},{fmt(est.mean)},{fmt(est.ci_low)},{fmt(est.ci_high)},{est.n_samples}")
    if args.json:
        out = Path(args.json)
        atomic_write_json(out, {"graph": str(args.graph), "opinions": str(args.opinions),
                                "records": records})
        cfg = {"graph": str(args.graph), "opinions": str(args.opinions), "methods": methods,
               "mds": vars(mds)}
        atomic_write_json(out.with_name(out.stem + ".manifest.json"),
                          _manifest("metric", cfg, [out], out.parent))
    return 0


# ---------------------------------------------------------------------------
# experiment
# ---------------------------------------------------------------------------

def _experiment_configs(args) -> list[ScenarioConfig]:
    seed = args.seed if args.seed is not None else _default_seed()
    scenarios = SCENARIOS if args.scenario == "all" else (args.scenario,)
    scales = SCALES if args.scale == "all" else (args.scale,)
    configs = []
    for s in scenarios:
        for scale in scales:
            kinds = (None,) if scale == "large" else \
                (NETWORK_KINDS if args.network_kind == "all" else (args.network_kind,))
            for kind in kinds:
                c = default_config(s, scale, kind, desk=args.desk, master_seed=seed)
                over = {}
                if args.replications is not None:
                    over["replications"] = args.replications
                if args.community_size is not None and scale == "large":
                    over["community_size"] = args.community_size
                    if s == "neutral_orthogonal":
                        over["sweep"] = (3 * args.community_size,)
                if args.mds_n_init is not None:
                    over["mds"] = MdsConfig(n_init=args.mds_n_init, max_iter=c.mds.max_iter,
                                            rel_tol=c.mds.rel_tol, rng_seed=c.mds.rng_seed)
                if over:
                    c = ScenarioConfig.from_dict({**c.to_dict(), **{
                        k: (vars(v) if isinstance(v, MdsConfig) else v) for k, v in over.items()}})
                configs.append(c)
    return configs


def cmd_experiment(args) -> int:
    if args.manifest:
        raw = _load_manifest(args.manifest, "experiment")
        configs = [ScenarioConfig.from_dict(c) for c in raw[TABLE_MANIFEST_KEY]]
    else:
        if args.scenario is None:
            raise ConfigError("--scenario is required (or --manifest)")
        configs = _experiment_configs(args)
    out = Path(args.out)
    paths = []
    for c in configs:
        log.info("running %s/%s%s", c.scenario, c.scale,
                 f"/{c.network_kind}" if c.network_kind else "")
        table = run_scenario(c, workers=args.workers)
        paths += table.write(out)
        print(f"{table.stem}: {len(table.rows)} rows")
    manifest = _manifest("experiment", {TABLE_MANIFEST_KEY: [c.to_dict() for c in configs]},
                         paths, out)
    atomic_write_json(out / MANIFEST, manifest)
    return 0


# ---------------------------------------------------------------------------
# report
# ---------------------------------------------------------------------------

def _collect_tables(dirs) -> list[ExperimentTable]:
    tables = []
    for d in dirs:
        d = Path(d)
        if not d.is_dir():
            raise MissingScenario(f"experiment directory {d} does not exist")
        for p in sorted(d.rglob("*.json")):
            if p.name == MANIFEST or p.name.endswith(".manifest.json"):
                continue
            try:
                data = json.loads(p.read_text())
            except json.JSONDecodeError:
                continue
            if isinstance(data, dict) and "rows" in data and "config" in data:
                tables.append(read_table(p))
    return tables


def cmd_report(args) -> int:
    tables = _collect_tables(args.dirs)
    verdicts = run_conformity(tables)
    summary = conformity_summary(verdicts)
    sys.stdout.write(summary)
    if args.out:
        out = Path(args.out)
        paths = [out / "conformity.csv", out / "summary.txt", out / "trends.csv"]
        atomic_write_text(paths[0], conformity_csv(verdicts))
        atomic_write_text(paths[1], summary)
        lines = ["scenario,method,local,large,conforms"]
        lines += [f"{v.scenario},{v.method},{v.local},{v.large},"
                  f"{'pass' if v.conforms else 'fail'}" for v in verdicts.values()]
        atomic_write_text(paths[2], "\n".join(lines) + "\n")
        atomic_write_json(out / MANIFEST, _manifest(
            "report", {"dirs": [str(d) for d in args.dirs]}, paths, out))
    return 0


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="polarnet",
                                description="Multipolar polarization metrics on networks.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a synthetic network (+ membership, opinions)")
    g.add_argument("--kind", choices=("chain", "complete", "community", "sbm"))
    g.add_argument("--nodes", type=int, help="total nodes (chain, complete, community)")
    g.add_argument("--communities", type=int, help="number of communities")
    g.add_argument("--size", type=int, default=100, help="SBM community size")
    g.add_argument("--p-in", type=float, default=0.1)
    g.add_argument("--p-out", type=float, default=0.01)
    g.add_argument("--seed", type=int)
    g.add_argument("--opinions", choices=("community", "node", "neutral"),
                   help="also write one-hot opinions per community / per node, "
                        "or neutral-middle opinions (3 communities)")
    g.add_argument("--out", default=".", help="output directory")
    g.add_argument("--manifest", help="regenerate from a previous manifest.json")
    g.set_defaults(func=cmd_generate)

    m = sub.add_parser("metric", help="compute polarization of an opinion file on a graph")
    m.add_argument("--graph", required=True)
    m.add_argument("--opinions", required=True)
    m.add_argument("--methods", default=",".join(METHODS).lower())
    m.add_argument("--mds-n-init", type=int, default=100)
    m.add_argument("--mds-max-iter", type=int, default=300)
    m.add_argument("--mds-rel-tol", type=float, default=1e-4)
    m.add_argument("--seed", type=int)
    m.add_argument("--json", help="also write the records to this JSON file")
    m.set_defaults(func=cmd_metric)

    e = sub.add_parser("experiment", help="run synthetic experiments")
    e.add_argument("--scenario", choices=SCENARIOS + ("all",))
    e.add_argument("--scale", choices=SCALES + ("all",), default="all")
    e.add_argument("--network-kind", choices=NETWORK_KINDS + ("all",), default="all",
                   help="local-scale network type")
    e.add_argument("--desk", action="store_true",
                   help="reduced scale: 30-node communities, 5 replications, 20 MDS restarts")
    e.add_argument("--replications", type=int)
    e.add_argument("--community-size", type=int)
    e.add_argument("--mds-n-init", type=int)
    e.add_argument("--seed", type=int)
    e.add_argument("--workers", type=int, default=1)
    e.add_argument("--out", required=True, help="output directory")
    e.add_argument("--manifest", help="rerun the configurations of a manifest.json")
    e.set_defaults(func=cmd_experiment)

    r = sub.add_parser("report", help="conformity table from experiment outputs")
    r.add_argument("dirs", nargs="+", help="directories holding experiment tables")
    r.add_argument("--out", help="directory for conformity.csv, trends.csv, summary.txt")
    r.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except PolarnetError as exc:
        print(f"polarnet {args.command}: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"polarnet {args.command}: error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
