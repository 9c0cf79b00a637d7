"""Command-line front end.

One executable with one subcommand per capability: cache building,
structure learning, scoring, inference, sampling, synthetic network
generation, missingness injection, EM-based imputation, and the
benchmark harness. Outputs are TSV on stdout or in files; exit code 0
means success, 2 a usage error, and 3 a data or validation error.
"""

from __future__ import annotations

import argparse
import sys
from typing import Dict, List, Optional

import numpy as np

from . import __version__
from .bench import bench_compare, generate_synthetic_net, sample_from_network, testset_ll
from .dataset import CategoricalDataset, inject_mcar, load_csv, save_csv
from .inference import build_junction_tree, estimate_parameters
from .learners import LearnerConfig, learn
from .netio import load_network, save_network
from .scoring import ParentSetCache, bic_family, build_cache
from .sem import SemConfig, mode_impute, sem_run


def _parse_evidence(text: Optional[str], net) -> Dict[int, int]:
    evidence: Dict[int, int] = {}
    if not text:
        return evidence
    var_index = {name: i for i, name in enumerate(net.variables)}
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        if "=" not in item:
            raise ValueError(f"evidence item {item!r} is not of the form NAME=STATE")
        name, label = item.split("=", 1)
        if name not in var_index:
            raise ValueError(f"unknown variable {name!r}")
        v = var_index[name]
        if label not in net.states[v]:
            raise ValueError(f"unknown state {label!r} for variable {name!r}")
        evidence[v] = net.states[v].index(label)
    return evidence


def _int_list(text: str) -> List[int]:
    return [int(t) for t in text.split(",") if t.strip() != ""]


def _cmd_parentsets(args) -> int:
    ds = load_csv(args.data, args.missing_token)
    cache = build_cache(ds, args.k, time_budget=args.time, max_explored=args.max_explored)
    cache.save(args.out)
    for w in cache.diagnostics.warnings:
        print(f"warning: {w}", file=sys.stderr)
    print(f"variables\t{cache.n_variables}")
    print(f"entries\t{sum(len(e) for e in cache.entries)}")
    print(f"elapsed\t{cache.diagnostics.elapsed:.3f}")
    print(f"wrote\t{args.out}")
    return 0


def _cmd_learn(args) -> int:
    ds = load_csv(args.data, args.missing_token)
    if args.cache:
        cache = ParentSetCache.load(args.cache)
        if cache.n_variables != ds.n_variables:
            raise ValueError("cache and dataset disagree on the variable count")
    else:
        cache_time = args.cache_time if args.cache_time is not None else float(ds.n_variables)
        cache = build_cache(ds, args.k, time_budget=cache_time, max_explored=args.max_explored)
    config = LearnerConfig(
        k=args.k,
        time_budget=args.time,
        max_iterations=args.max_iter,
        seed=args.seed,
        workers=args.workers,
    )
    res = learn(cache, config, args.algo)
    fit_ds = ds
    if not ds.is_complete():
        fit_ds = mode_impute(ds)
        print("note: data is incomplete; parameters fit on a mode-completed copy")
    net = estimate_parameters(fit_ds, res.dag, args.alpha, ktree=res.ktree)
    save_network(
        net,
        args.out,
        metadata={
            "tool": "ktbn",
            "tool_version": __version__,
            "algorithm": args.algo,
            "k": args.k,
            "seed": args.seed,
            "score": res.score,
        },
    )
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            fh.write("iteration\tscore\n")
            for i, s in enumerate(res.per_iteration_scores):
                fh.write(f"{i}\t{s!r}\n")
    print(f"score\t{res.score!r}")
    print(f"iterations\t{res.iterations}")
    print(f"elapsed\t{res.elapsed:.3f}")
    print(f"wrote\t{args.out}")
    return 0


def _cmd_score(args) -> int:
    net, _ = load_network(args.net)
    ds = load_csv(args.data, args.missing_token)
    if tuple(ds.variables) != tuple(net.variables):
        raise ValueError("dataset and network variables differ")
    total = 0.0
    for v in range(net.n_variables):
        total += bic_family(ds, v, net.parents[v]).score
    print(f"rows\t{ds.n_rows}")
    print(f"bic\t{total!r}")
    if ds.is_complete():
        print(f"loglik\t{testset_ll(net, ds)!r}")
    else:
        print("loglik\tNA")
    return 0


def _cmd_infer(args) -> int:
    net, _ = load_network(args.net)
    jt = build_junction_tree(net)
    evidence = _parse_evidence(args.evidence, net)
    chosen = sum(1 for x in (args.target, args.prob, args.mpe) if x)
    if chosen != 1:
        raise ValueError("choose exactly one of --target, --prob, --mpe")
    if args.prob:
        log_p = jt.log_prob_evidence(evidence)
        print(f"p_evidence\t{float(np.exp(log_p))!r}")
        print(f"log_p_evidence\t{log_p!r}")
    elif args.target:
        names = {name: i for i, name in enumerate(net.variables)}
        if args.target not in names:
            raise ValueError(f"unknown variable {args.target!r}")
        t = names[args.target]
        dist = jt.marginal(evidence, t)
        for label, p in zip(net.states[t], dist):
            print(f"{label}\t{float(p)!r}")
    else:
        assignment = jt.mpe(evidence)
        for v in range(net.n_variables):
            print(f"{net.variables[v]}\t{net.states[v][assignment[v]]}")
    return 0


def _cmd_sample(args) -> int:
    net, _ = load_network(args.net)
    ds = sample_from_network(net, args.rows, args.seed)
    save_csv(ds, args.out, args.missing_token)
    print(f"wrote\t{args.out}")
    return 0


def _cmd_gen_net(args) -> int:
    net = generate_synthetic_net(args.n, args.k, args.max_arity, args.seed)
    save_network(
        net,
        args.out,
        metadata={
            "tool": "ktbn",
            "tool_version": __version__,
            "kind": "synthetic",
            "k": args.k,
            "seed": args.seed,
        },
    )
    print(f"wrote\t{args.out}")
    return 0


def _cmd_inject_missing(args) -> int:
    ds = load_csv(args.data, args.missing_token)
    degraded, mask = inject_mcar(ds, args.rate, args.seed)
    save_csv(degraded, args.out, args.missing_token)
    if args.mask_out:
        rows, cols = np.nonzero(mask)
        with open(args.mask_out, "w", encoding="utf-8") as fh:
            fh.write("row\tvariable\n")
            for r, c in zip(rows, cols):
                fh.write(f"{r}\t{ds.variables[c]}\n")
    print(f"hidden\t{int(mask.sum())}")
    print(f"wrote\t{args.out}")
    return 0


def _cmd_sem_impute(args) -> int:
    ds = load_csv(args.data, args.missing_token)
    config = SemConfig(
        k=args.k,
        t=args.t,
        alpha=args.alpha,
        mode=args.mode,
        seed=args.seed,
        max_sem_iterations=args.max_sem_iter,
        workers=args.workers,
        max_explored=args.max_explored,
    )
    res = sem_run(ds, config)
    save_csv(res.imputed, args.out, args.missing_token)
    if args.net_out:
        save_network(
            res.net,
            args.net_out,
            metadata={
                "tool": "ktbn",
                "tool_version": __version__,
                "k": args.k,
                "t": args.t,
                "alpha": args.alpha,
                "mode": args.mode,
                "seed": args.seed,
            },
        )
    print(f"iterations\t{res.iterations}")
    print(f"converged\t{res.converged}")
    print(f"wrote\t{args.out}")
    return 0


def _cmd_bench(args) -> int:
    datasets = []
    import os

    for path in args.data:
        name = os.path.splitext(os.path.basename(path))[0]
        datasets.append((name, load_csv(path, args.missing_token)))
    report = bench_compare(
        datasets,
        algorithms=args.algos.split(","),
        ks=_int_list(args.ks),
        time_budget=args.time,
        seeds=_int_list(args.seeds),
        max_iterations=args.max_iter,
        cache_time=args.cache_time,
        max_explored=args.max_explored,
        workers=args.workers,
    )
    report.to_tsv(args.out)
    if args.long_out:
        report.to_long_tsv(args.long_out)
    print(report.describe())
    print(f"wrote\t{args.out}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ktbn",
        description="Bounded-treewidth Bayesian networks: learn, query, impute.",
    )
    parser.add_argument("--version", action="version", version=f"ktbn {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, data=True):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--missing-token", default="?")
        if data:
            p.add_argument("--data", required=True)

    p = sub.add_parser("parentsets", help="build and save a parent-set cache")
    add_common(p)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--time", type=float, default=None)
    p.add_argument("--max-explored", type=int, default=1000)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_parentsets)

    p = sub.add_parser("learn", help="learn a bounded-treewidth network")
    add_common(p)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--algo", choices=["kmax", "kgreedy"], default="kmax")
    p.add_argument("--time", type=float, default=None)
    p.add_argument("--max-iter", type=int, default=None)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--cache", default=None)
    p.add_argument("--cache-time", type=float, default=None)
    p.add_argument("--max-explored", type=int, default=1000)
    p.add_argument("--out", required=True)
    p.add_argument("--report", default=None)
    p.set_defaults(fn=_cmd_learn)

    p = sub.add_parser("score", help="score a network against a dataset")
    add_common(p)
    p.add_argument("--net", required=True)
    p.set_defaults(fn=_cmd_score)

    p = sub.add_parser("infer", help="query a network")
    p.add_argument("--net", required=True)
    p.add_argument("--evidence", default="")
    p.add_argument("--target", default=None)
    p.add_argument("--prob", action="store_true")
    p.add_argument("--mpe", action="store_true")
    p.set_defaults(fn=_cmd_infer)

    p = sub.add_parser("sample", help="draw rows from a network")
    p.add_argument("--net", required=True)
    p.add_argument("--rows", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--missing-token", default="?")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_sample)

    p = sub.add_parser("gen-net", help="generate a random bounded-treewidth network")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--max-arity", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_gen_net)

    p = sub.add_parser("inject-missing", help="hide observed cells at random")
    add_common(p)
    p.add_argument("--rate", type=float, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--mask-out", default=None)
    p.set_defaults(fn=_cmd_inject_missing)

    p = sub.add_parser("sem-impute", help="impute missing cells by structural EM")
    add_common(p)
    p.add_argument("--k", type=int, default=6)
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--mode", choices=["joint", "independent"], default="joint")
    p.add_argument("--max-sem-iter", type=int, default=20)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--max-explored", type=int, default=1000)
    p.add_argument("--out", required=True)
    p.add_argument("--net-out", default=None)
    p.set_defaults(fn=_cmd_sem_impute)

    p = sub.add_parser("bench", help="compare learners on shared caches")
    p.add_argument("--data", nargs="+", required=True)
    p.add_argument("--missing-token", default="?")
    p.add_argument("--algos", default="kmax,kgreedy")
    p.add_argument("--ks", required=True)
    p.add_argument("--time", type=float, default=None)
    p.add_argument("--max-iter", type=int, default=None)
    p.add_argument("--seeds", default="0")
    p.add_argument("--cache-time", type=float, default=None)
    p.add_argument("--max-explored", type=int, default=1000)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", required=True)
    p.add_argument("--long-out", default=None)
    p.set_defaults(fn=_cmd_bench)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ValueError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
