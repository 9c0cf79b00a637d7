"""Synthetic generators, evaluation metrics, and the benchmark harness.

Score differences between two candidate structures on the same data are
read on the conventional evidence scale: a gap above 10 is extreme
evidence for the better model, above 6 strong, above 2 positive, and
anything within 2 is treated as a tie. Boundaries fall to the weaker
class and the scale is antisymmetric.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .dataset import MISSING, CategoricalDataset
from .inference import BayesNet, build_junction_tree
from .ktree import Dag, init_ktree
from .learners import LearnerConfig, learn
from .scoring import ParentSetCache, build_cache

RngLike = Union[int, np.random.Generator]


def _as_rng(rng: RngLike) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


# ----------------------------------------------------------------------
# score-difference classification

DELTA_BIC_CLASSES = (
    "extremely positive",
    "strongly positive",
    "positive",
    "neutral",
    "negative",
    "strongly negative",
    "extremely negative",
)


def delta_bic_classify(delta: float) -> str:
    """Evidence class of a score difference; boundaries go to the weaker
    class, so 10 is strongly (not extremely) positive and 2 is neutral."""
    if delta > 10:
        return "extremely positive"
    if delta > 6:
        return "strongly positive"
    if delta > 2:
        return "positive"
    if delta >= -2:
        return "neutral"
    if delta >= -6:
        return "negative"
    if delta >= -10:
        return "strongly negative"
    return "extremely negative"


# ----------------------------------------------------------------------
# synthetic models and data

def generate_synthetic_net(
    n: int, k_true: int, max_arity: int, rng: RngLike
) -> BayesNet:
    """Random network whose moral graph lives inside a random k-tree.

    The k-tree grows by uniform random attachment; arcs point from
    earlier-inserted to later-inserted variables, each new variable's
    parents are a random subset of its hosting k-clique, and CPT rows
    are drawn from a flat Dirichlet. Treewidth is at most k_true by
    construction.
    """
    rng = _as_rng(rng)
    if n < k_true + 1:
        raise ValueError(f"need at least k_true+1={k_true + 1} variables, got {n}")
    if max_arity < 2:
        raise ValueError(f"max_arity must be >= 2, got {max_arity}")
    arities = [int(a) for a in rng.integers(2, max_arity + 1, size=n)]
    order = [int(v) for v in rng.permutation(n)]
    core = order[: k_true + 1]
    parents: Dict[int, Tuple[int, ...]] = {}
    for i, v in enumerate(core):
        take = rng.random(i) < 0.5
        parents[v] = tuple(sorted(core[j] for j in range(i) if take[j]))
    kt = init_ktree(core, k_true)
    for v in order[k_true + 1 :]:
        hosts = kt.kcliques()
        host = sorted(hosts[int(rng.integers(len(hosts)))])
        take = rng.random(len(host)) < 0.5
        parents[v] = tuple(sorted(host[j] for j in range(len(host)) if take[j]))
        kt.add(v, host)
    cpts = []
    for v in range(n):
        space = 1
        for p in parents[v]:
            space *= arities[p]
        cpts.append(rng.dirichlet(np.ones(arities[v]), size=space))
    return BayesNet(
        variables=tuple(f"X{v}" for v in range(n)),
        states=tuple(tuple(f"s{i}" for i in range(arities[v])) for v in range(n)),
        parents=parents,
        cpts=cpts,
        ktree=kt,
    )


def sample_from_network(net: BayesNet, d: int, rng: RngLike) -> CategoricalDataset:
    """Ancestral sampling of d rows; a fixed seed gives identical data."""
    rng = _as_rng(rng)
    if d < 0:
        raise ValueError(f"row count must be >= 0, got {d}")
    n = net.n_variables
    dag = Dag(parents=dict(net.parents), score=0.0, family_scores={})
    order = dag.topological_order()
    assert order is not None
    cells = np.zeros((d, n), dtype=np.int32)
    for v in order:
        cfg = np.zeros(d, dtype=np.int64)
        for p in net.parents[v]:
            cfg = cfg * net.arity(p) + cells[:, p]
        probs = net.cpts[v][cfg]
        cum = np.cumsum(probs, axis=1)
        u = rng.random(d)
        idx = (cum < u[:, None]).sum(axis=1)
        cells[:, v] = np.minimum(idx, net.arity(v) - 1)
    return CategoricalDataset(net.variables, net.states, cells)


# ----------------------------------------------------------------------
# evaluation metrics

def _state_maps(net: BayesNet, ds: CategoricalDataset) -> Tuple[List[int], List[np.ndarray]]:
    """Column and state-label alignment of a dataset against a network."""
    if set(ds.variables) != set(net.variables):
        raise ValueError("dataset and network variables differ")
    col_of = [ds.variables.index(name) for name in net.variables]
    maps = []
    for v, name in enumerate(net.variables):
        lookup = {label: i for i, label in enumerate(net.states[v])}
        ds_states = ds.states[col_of[v]]
        m = np.zeros(len(ds_states), dtype=np.int64)
        for i, label in enumerate(ds_states):
            if label not in lookup:
                raise ValueError(f"state {label!r} of {name!r} is unknown to the network")
            m[i] = lookup[label]
        maps.append(m)
    return col_of, maps


def testset_ll(net: BayesNet, ds: CategoricalDataset) -> float:
    """Total log-likelihood of a complete test set under the network."""
    if not ds.is_complete():
        raise ValueError("testset_ll needs complete data")
    col_of, maps = _state_maps(net, ds)
    n = net.n_variables
    cells = np.zeros((ds.n_rows, n), dtype=np.int64)
    for v in range(n):
        cells[:, v] = maps[v][ds.cells[:, col_of[v]]]
    total = 0.0
    with np.errstate(divide="ignore"):
        for v in range(n):
            cfg = np.zeros(ds.n_rows, dtype=np.int64)
            for p in net.parents[v]:
                cfg = cfg * net.arity(p) + cells[:, p]
            total += float(np.log(net.cpts[v][cfg, cells[:, v]]).sum())
    return total


def mae_eval(
    truth: BayesNet,
    learned: BayesNet,
    q: int,
    evidence_size: int = 5,
    rng: RngLike = 0,
) -> float:
    """Mean absolute difference of evidence probabilities over q random
    queries, each observing evidence_size random variables."""
    rng = _as_rng(rng)
    n = truth.n_variables
    if learned.n_variables != n:
        raise ValueError("networks must share a variable set")
    for v in range(n):
        if truth.arity(v) != learned.arity(v):
            raise ValueError(f"variable {v} has different arities in the two networks")
    size = min(evidence_size, n)
    jt_t = build_junction_tree(truth)
    jt_l = build_junction_tree(learned)
    diffs = []
    for _ in range(q):
        chosen = sorted(int(v) for v in rng.choice(n, size=size, replace=False))
        evidence = {v: int(rng.integers(truth.arity(v))) for v in chosen}
        diffs.append(abs(jt_t.prob_evidence(evidence) - jt_l.prob_evidence(evidence)))
    return float(np.mean(diffs))


def imputation_accuracy(
    original: CategoricalDataset, imputed: CategoricalDataset, mask: np.ndarray
) -> float:
    """Per-instance imputation accuracy, averaged over incomplete rows.

    Each row with hidden cells contributes the fraction of its hidden
    cells restored to the original value; rows without hidden cells do
    not contribute.
    """
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != original.cells.shape or mask.shape != imputed.cells.shape:
        raise ValueError("mask and datasets must share a shape")
    rows = np.nonzero(mask.any(axis=1))[0]
    if len(rows) == 0:
        raise ValueError("mask hides no cells")
    hit = imputed.cells == original.cells
    per_row = [float(hit[r][mask[r]].mean()) for r in rows]
    return float(np.mean(per_row))


def imputation_accuracy_micro(
    original: CategoricalDataset, imputed: CategoricalDataset, mask: np.ndarray
) -> float:
    """Fraction of all hidden cells restored to their original value."""
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        raise ValueError("mask hides no cells")
    hit = imputed.cells == original.cells
    return float(hit[mask].mean())


# ----------------------------------------------------------------------
# benchmark harness

@dataclass
class BenchReport:
    """Per-run records plus win/tie/loss pairing against the baseline
    algorithm (the first one given)."""

    baseline: str
    runs: List[Dict] = field(default_factory=list)
    pairs: List[Dict] = field(default_factory=list)
    summary: Dict[str, Dict[str, int]] = field(default_factory=dict)

    def to_tsv(self, path: str) -> None:
        cols = [
            "dataset", "k", "algorithm", "seed", "score", "iterations",
            "elapsed", "median_iteration_score", "delta_vs_baseline",
            "delta_class", "outcome",
        ]
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("\t".join(cols) + "\n")
            for row in self.runs:
                fh.write("\t".join(str(row.get(c, "")) for c in cols) + "\n")

    def to_long_tsv(self, path: str) -> None:
        cols = ["dataset", "k", "algorithm", "seed", "iteration", "score"]
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("\t".join(cols) + "\n")
            for row in self.runs:
                for i, score in enumerate(row["per_iteration_scores"]):
                    rec = [row["dataset"], row["k"], row["algorithm"], row["seed"], i, score]
                    fh.write("\t".join(str(x) for x in rec) + "\n")

    def describe(self) -> str:
        lines = []
        for algo, s in self.summary.items():
            lines.append(
                f"{self.baseline} vs {algo}: "
                f"{s['wins']} wins, {s['ties']} ties, {s['losses']} losses"
            )
        return "\n".join(lines)


def _bench_cell(
    cache: ParentSetCache,
    name: str,
    k: int,
    algorithm: str,
    seed: int,
    time_budget: Optional[float],
    max_iterations: Optional[int],
) -> Dict:
    config = LearnerConfig(
        k=k, time_budget=time_budget, max_iterations=max_iterations, seed=seed
    )
    res = learn(cache, config, algorithm)
    return {
        "dataset": name,
        "k": k,
        "algorithm": algorithm,
        "seed": seed,
        "score": res.score,
        "iterations": res.iterations,
        "elapsed": round(res.elapsed, 3),
        "median_iteration_score": float(np.median(res.per_iteration_scores)),
        "per_iteration_scores": res.per_iteration_scores,
        "delta_vs_baseline": "",
        "delta_class": "",
        "outcome": "",
    }


def bench_compare(
    datasets: Sequence[Tuple[str, CategoricalDataset]],
    algorithms: Sequence[str],
    ks: Sequence[int],
    time_budget: Optional[float],
    seeds: Sequence[int],
    max_iterations: Optional[int] = None,
    cache_time: Optional[float] = None,
    max_explored: int = 1000,
    workers: int = 1,
) -> BenchReport:
    """Run every algorithm on every dataset, treewidth bound, and seed.

    Each (dataset, k) pair gets one shared parent-set cache, so the
    algorithms compete on identical inputs with equal budgets. The
    first algorithm is the baseline: every other algorithm's runs are
    paired with it per (dataset, k, seed), scored as win, tie, or loss
    for the baseline with differences inside 2 counting as ties.
    """
    if len(datasets) < 1:
        raise ValueError("need at least one dataset")
    if len(algorithms) < 1:
        raise ValueError("need at least one algorithm")
    unknown = [a for a in algorithms if a not in ("kmax", "kgreedy")]
    if unknown:
        raise ValueError(f"unknown algorithms: {unknown}")
    if len(ks) < 1:
        raise ValueError("need at least one treewidth bound")
    if len(seeds) < 1:
        raise ValueError("need at least one seed")
    report = BenchReport(baseline=algorithms[0])
    caches: Dict[Tuple[str, int], ParentSetCache] = {}
    for name, ds in datasets:
        for k in ks:
            caches[(name, k)] = build_cache(
                ds, k, time_budget=cache_time, max_explored=max_explored
            )
    cells = [
        (name, k, algo, seed)
        for name, _ in datasets
        for k in ks
        for algo in algorithms
        for seed in seeds
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(
                    _bench_cell, caches[(name, k)], name, k, algo, seed,
                    time_budget, max_iterations,
                )
                for name, k, algo, seed in cells
            ]
            report.runs = [f.result() for f in futures]
    else:
        report.runs = [
            _bench_cell(
                caches[(name, k)], name, k, algo, seed, time_budget, max_iterations
            )
            for name, k, algo, seed in cells
        ]

    by_key = {
        (r["dataset"], r["k"], r["algorithm"], r["seed"]): r for r in report.runs
    }
    for algo in algorithms[1:]:
        report.summary[algo] = {"wins": 0, "ties": 0, "losses": 0}
    for name, _ in datasets:
        for k in ks:
            for seed in seeds:
                base = by_key[(name, k, algorithms[0], seed)]
                for algo in algorithms[1:]:
                    other = by_key[(name, k, algo, seed)]
                    delta = base["score"] - other["score"]
                    if delta >= 2:
                        outcome = "win"
                    elif delta <= -2:
                        outcome = "loss"
                    else:
                        outcome = "tie"
                    report.summary[algo][outcome + ("s" if outcome != "loss" else "es")] += 1
                    cls = delta_bic_classify(delta)
                    report.pairs.append(
                        {
                            "dataset": name,
                            "k": k,
                            "seed": seed,
                            "baseline": algorithms[0],
                            "algorithm": algo,
                            "delta": delta,
                            "delta_class": cls,
                            "outcome": outcome,
                        }
                    )
                    other["delta_vs_baseline"] = -delta
                    other["delta_class"] = delta_bic_classify(-delta)
                    other["outcome"] = "win" if outcome == "loss" else ("loss" if outcome == "win" else "tie")
    return report
