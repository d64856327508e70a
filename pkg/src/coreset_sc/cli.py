"""Command-line surface: generate | coreset | cluster | eval | bench.

Every structured output embeds the full run configuration and seed, so any
artefact can be regenerated from its own header. Exit codes: 0 success,
1 compute failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from .clustering import coreset_kernel_kmeans, csc
from .coreset import construct_coreset, importance_sample
from .generate import generate_sbm, knn_graph
from .graph import GraphError, SparseGraph, ncut_average
from .io import (
    LoadError,
    load_edge_list,
    load_labels,
    load_matrix_market,
    save_coreset,
    save_edge_list,
    save_labels,
)
from .kernel import GraphKernel
from .metrics import ari, evaluate
from .rng import child_seeds
from .seeding import fast_d2_sample, naive_d2_sample

USAGE_ERROR = 2
COMPUTE_ERROR = 1


def _load_graph(path: str, add_self_loops: bool = False) -> SparseGraph:
    if str(path).endswith(".mtx"):
        return load_matrix_market(path, add_self_loops=add_self_loops)
    return load_edge_list(path, add_self_loops=add_self_loops)


def _write_json(path: str | None, payload: dict) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True)
    if path:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _config_dict(args: argparse.Namespace) -> dict:
    skip = {"func"}
    return {
        k: v for k, v in sorted(vars(args).items()) if k not in skip
    } | {"version": __version__}


def cmd_generate(args) -> int:
    if args.kind == "sbm":
        g, labels = generate_sbm(
            args.k, args.size, args.p, args.q, seed=args.seed,
            add_self_loops=args.self_loops,
        )
        save_edge_list(args.out_graph, g)
        if args.out_labels:
            save_labels(args.out_labels, labels)
    else:  # knn
        pts = np.load(args.points) if args.points.endswith(".npy") else np.loadtxt(args.points)
        if pts.ndim == 1:
            pts = pts[:, None]
        g = knn_graph(pts, args.neighbours)
        save_edge_list(args.out_graph, g)
    summary = {
        "config": _config_dict(args),
        "n": g.n,
        "m": g.num_edges,
        "d_avg": g.d_avg,
    }
    if args.report:
        _write_json(args.report, summary)
    else:
        print(json.dumps(summary))
    return 0


def cmd_coreset(args) -> int:
    g = _load_graph(args.graph, add_self_loops=args.self_loops)
    kern = GraphKernel(g, sigma=args.sigma)
    timings: dict[str, float] = {}

    t0 = time.perf_counter()
    if args.sampler == "fast":
        seeding = fast_d2_sample(kern, args.k, args.seed)
    else:
        seeding = naive_d2_sample(kern, args.k, args.seed)
    timings["d2_sampling_ms"] = (time.perf_counter() - t0) * 1e3

    t0 = time.perf_counter()
    cs = importance_sample(
        kern, args.k, args.eps, args.seed,
        size_override=args.size_override, seeding=seeding,
    )
    timings["importance_sampling_ms"] = (time.perf_counter() - t0) * 1e3

    save_coreset(args.out, cs.indices, cs.weights)
    report = {
        "config": _config_dict(args),
        "n": g.n,
        "m": g.num_edges,
        "coreset_size": cs.size,
        "neighbour_checks": seeding.neighbour_checks,
        "seeding_cost_final": seeding.final_cost,
        "timings_ms": timings,
    }
    if args.report:
        _write_json(args.report, report)
    else:
        print(json.dumps(report))
    return 0


def _one_cluster_run(graph_path, args_dict, seed):
    """Worker for --repeat; reloads from files so it can run in a subprocess."""
    g = _load_graph(graph_path, add_self_loops=args_dict["self_loops"])
    algo = args_dict["algo"]
    if algo in ("csc", "csc-fast"):
        report = csc(
            g,
            args_dict["k"],
            eps=args_dict["eps"],
            seed=seed,
            backend="dense" if algo == "csc" else "fast",
            coreset_frac=args_dict["coreset_frac"],
            sigma=args_dict["sigma"],
        )
        out = report.as_dict()
    else:  # ckkm
        kern = GraphKernel(g, sigma=args_dict["sigma"])
        seeds = child_seeds(seed, 2)
        size_override = None
        if args_dict["coreset_frac"] is not None:
            size_override = max(2, int(round(args_dict["coreset_frac"] * g.n)))
        t0 = time.perf_counter()
        cs = construct_coreset(
            kern, args_dict["k"], args_dict["eps"], seeds[0],
            size_override=size_override,
        )
        labels, info = coreset_kernel_kmeans(kern, cs, args_dict["k"], seeds[1])
        out = {
            "k": args_dict["k"],
            "seed": seed,
            "coreset_size": cs.size,
            "ncut_coreset": None,
            "ncut_full": ncut_average(g, labels, args_dict["k"]),
            "params": {"algo": "ckkm", "eps": args_dict["eps"], "sigma": args_dict["sigma"]},
            "timings_ms": {"total": (time.perf_counter() - t0) * 1e3},
            "labels_coreset": info["labels_coreset"].tolist(),
            "labels": labels.tolist(),
        }
    if args_dict["truth"]:
        truth = load_labels(args_dict["truth"])
        out["ari"] = ari(np.array(out["labels"]), truth)
    return out


def cmd_cluster(args) -> int:
    args_dict = {
        "k": args.k,
        "eps": args.eps,
        "sigma": args.sigma,
        "coreset_frac": args.coreset_frac,
        "algo": args.algo,
        "truth": args.truth,
        "self_loops": args.self_loops,
    }
    seeds = [args.seed + i for i in range(args.repeat)]
    jobs = args.jobs or int(os.environ.get("CSC_JOBS", "1"))
    if jobs > 1 and args.repeat > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            runs = list(
                pool.map(_one_cluster_run, [args.graph] * len(seeds),
                         [args_dict] * len(seeds), seeds)
            )
    else:
        runs = [_one_cluster_run(args.graph, args_dict, s) for s in seeds]

    save_labels(args.out_labels, np.array(runs[0]["labels"], dtype=np.int64))
    report = {"config": _config_dict(args), "runs": runs}
    if args.repeat > 1:
        aris = [r["ari"] for r in runs if r.get("ari") is not None]
        if aris:
            report["ari_median"] = float(np.median(aris))
        report["ncut_full_median"] = float(np.median([r["ncut_full"] for r in runs]))
    if args.report:
        _write_json(args.report, report)
    return 0


def cmd_eval(args) -> int:
    labels = load_labels(args.labels)
    truth = load_labels(args.truth) if args.truth else None
    if args.graph is None:
        if truth is None:
            raise GraphError("eval needs --graph (for ncut) or --truth (for ari)")
        payload = {
            "config": _config_dict(args),
            "ari": ari(labels, truth),
        }
    else:
        g = _load_graph(args.graph, add_self_loops=args.self_loops)
        k = args.k or int(labels.max()) + 1
        rec = evaluate(g, labels, k, truth=truth, sigma=args.sigma)
        payload = {"config": _config_dict(args)} | rec.as_dict()
    _write_json(args.out, payload)
    return 0


_BENCH_COLUMNS = [
    "run", "kind", "repeat", "seed", "k", "eps", "n", "m", "coreset_size",
    "sampler", "algo", "wall_ms", "ari", "ncut", "wall_ms_std", "ari_std",
    "ncut_std",
]


def _bench_one(entry: dict, repeat: int, seed) -> dict:
    kind = entry["kind"]
    g = _load_graph(entry["graph"], add_self_loops=entry.get("self_loops", False))
    row = {
        "run": entry.get("name", kind),
        "kind": kind,
        "repeat": repeat,
        "seed": seed,
        "k": entry.get("k"),
        "eps": entry.get("eps", 0.2),
        "n": g.n,
        "m": g.num_edges,
    }
    if kind == "coreset":
        kern = GraphKernel(g, sigma=entry.get("sigma", 1.0))
        sampler = entry.get("sampler", "fast")
        t0 = time.perf_counter()
        if sampler == "fast":
            res = fast_d2_sample(kern, entry["k"], seed)
        else:
            res = naive_d2_sample(kern, entry["k"], seed)
        row |= {
            "sampler": sampler,
            "wall_ms": (time.perf_counter() - t0) * 1e3,
            "coreset_size": res.centers.shape[0],
        }
    elif kind == "cluster":
        algo = entry.get("algo", "csc-fast")
        truth = load_labels(entry["truth"]) if entry.get("truth") else None
        t0 = time.perf_counter()
        if algo in ("csc", "csc-fast"):
            rep = csc(
                g, entry["k"], eps=entry.get("eps", 0.2), seed=seed,
                backend="dense" if algo == "csc" else "fast",
                coreset_frac=entry.get("coreset_frac"),
                sigma=entry.get("sigma", 1.0),
            )
            labels = rep.labels_full
            row["coreset_size"] = rep.coreset_size
            row["ncut"] = rep.ncut_full
        else:
            kern = GraphKernel(g, sigma=entry.get("sigma", 1.0))
            seeds = child_seeds(seed, 2)
            size_override = None
            if entry.get("coreset_frac") is not None:
                size_override = max(2, int(round(entry["coreset_frac"] * g.n)))
            cs = construct_coreset(
                kern, entry["k"], entry.get("eps", 0.2), seeds[0],
                size_override=size_override,
            )
            labels, _ = coreset_kernel_kmeans(kern, cs, entry["k"], seeds[1])
            row["coreset_size"] = cs.size
            row["ncut"] = ncut_average(g, labels, entry["k"])
        row["wall_ms"] = (time.perf_counter() - t0) * 1e3
        row["algo"] = algo
        if truth is not None:
            row["ari"] = ari(labels, truth)
    else:
        raise GraphError(f"unknown bench kind {kind!r}")
    return row


def cmd_bench(args) -> int:
    try:
        with open(args.spec) as fh:
            spec = json.load(fh)
    except json.JSONDecodeError as exc:
        raise LoadError(f"{args.spec}:{exc.lineno}: {exc.msg}")
    if not isinstance(spec, list):
        raise LoadError(f"{args.spec}:1: bench spec must be a JSON list of runs")
    rows: list[dict] = []
    for i, entry in enumerate(spec):
        for key in ("kind", "graph"):
            if key not in entry:
                raise LoadError(f"{args.spec}: run {i}: missing field {key!r}")
        repeats = int(entry.get("repeats", 1))
        base_seed = int(entry.get("seed", 0))
        per_run = [
            _bench_one(entry, r, base_seed + r) for r in range(repeats)
        ]
        rows.extend(per_run)
        agg = dict(per_run[0])
        agg["repeat"] = "agg"
        agg["seed"] = base_seed
        for col, std_col in (("wall_ms", "wall_ms_std"), ("ari", "ari_std"), ("ncut", "ncut_std")):
            vals = [r[col] for r in per_run if r.get(col) is not None]
            if vals:
                agg[col] = float(np.mean(vals))
                agg[std_col] = float(np.std(vals))
            else:
                agg.pop(col, None)
        rows.append(agg)
    with open(args.out, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=_BENCH_COLUMNS, extrasaction="ignore")
        writer.writeheader()
        for row in rows:
            writer.writerow(row)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="coreset-sc",
        description="Coreset spectral clustering toolkit",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="write a synthetic graph")
    gsub = gen.add_subparsers(dest="kind", required=True)
    sbm = gsub.add_parser("sbm")
    sbm.add_argument("--k", type=int, required=True)
    sbm.add_argument("--size", type=int, required=True)
    sbm.add_argument("--p", type=float, required=True)
    sbm.add_argument("--q", type=float, required=True)
    sbm.add_argument("--seed", type=int, default=0)
    sbm.add_argument("--self-loops", action="store_true")
    sbm.add_argument("--out-graph", required=True)
    sbm.add_argument("--out-labels")
    sbm.add_argument("--report")
    sbm.set_defaults(func=cmd_generate)
    knn = gsub.add_parser("knn")
    knn.add_argument("--points", required=True, help="text matrix or .npy file")
    knn.add_argument("--neighbours", type=int, required=True)
    knn.add_argument("--seed", type=int, default=0)
    knn.add_argument("--self-loops", action="store_true")
    knn.add_argument("--out-graph", required=True)
    knn.add_argument("--report")
    knn.set_defaults(func=cmd_generate)

    cor = sub.add_parser("coreset", help="build a coreset for a graph")
    cor.add_argument("graph")
    cor.add_argument("--k", type=int, required=True)
    cor.add_argument("--eps", type=float, default=0.2)
    cor.add_argument("--seed", type=int, default=0)
    cor.add_argument("--sigma", type=float, default=1.0)
    cor.add_argument("--sampler", choices=["fast", "naive"], default="fast")
    cor.add_argument("--size-override", type=int)
    cor.add_argument("--self-loops", action="store_true")
    cor.add_argument("--out", required=True)
    cor.add_argument("--report")
    cor.set_defaults(func=cmd_coreset)

    clu = sub.add_parser("cluster", help="cluster a graph end to end")
    clu.add_argument("graph")
    clu.add_argument("--k", type=int, required=True)
    clu.add_argument("--eps", type=float, default=0.2)
    clu.add_argument("--seed", type=int, default=0)
    clu.add_argument("--sigma", type=float, default=1.0)
    clu.add_argument("--algo", choices=["csc", "csc-fast", "ckkm"], default="csc")
    clu.add_argument("--coreset-frac", type=float)
    clu.add_argument("--truth")
    clu.add_argument("--repeat", type=int, default=1)
    clu.add_argument("--jobs", type=int)
    clu.add_argument("--self-loops", action="store_true")
    clu.add_argument("--out-labels", required=True)
    clu.add_argument("--report")
    clu.set_defaults(func=cmd_cluster)

    ev = sub.add_parser("eval", help="metrics for a labelling")
    ev.add_argument("--graph")
    ev.add_argument("--labels", required=True)
    ev.add_argument("--truth")
    ev.add_argument("--k", type=int)
    ev.add_argument("--sigma", type=float, default=1.0)
    ev.add_argument("--self-loops", action="store_true")
    ev.add_argument("--out")
    ev.set_defaults(func=cmd_eval)

    be = sub.add_parser("bench", help="run a declarative benchmark spec")
    be.add_argument("spec")
    be.add_argument("--out", required=True)
    be.set_defaults(func=cmd_bench)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except (GraphError, LoadError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return COMPUTE_ERROR


if __name__ == "__main__":
    sys.exit(main())
