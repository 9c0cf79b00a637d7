"""Anytime learning of bounded-treewidth structures over a k-tree.

Both learners run independent randomized restarts. One restart builds a
full network: an initial clique of k+1 variables is structured exactly
by dynamic programming, and the remaining variables are inserted one at
a time. Each insertion picks the best cached parent set that fits
inside some k-clique of the current tree and attaches the variable to a
uniformly random k-clique containing those parents, so the moral graph
stays inside the k-tree and the treewidth bound holds by construction.

The two algorithms differ only in the insertion policy:

- kgreedy inserts variables in a uniformly random order;
- kmax inserts the variable with the highest normalized potential
  m = (scC - scW) / (scB - scW), where scC is its best feasible score
  and scB, scW are the best and worst scores in its cache. Variables
  whose currently reachable score is close to their ceiling are placed
  first; badly placed ones are deferred until the tree offers better
  hosts. kmax also seeds its initial clique from the candidate parents
  of the variables already chosen, instead of uniformly.

learn() repeats restarts until a time or iteration budget is exhausted,
optionally across worker processes. Restart j always draws its seed
from (seed, j) regardless of the worker that runs it, so a fixed
iteration count gives identical results for any worker count.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Set, Tuple

import numpy as np

from .exactlearn import exact_learn
from .ktree import Dag, KTree, init_ktree
from .scoring import ParentSetCache


@dataclass
class LearnerConfig:
    """Budget and reproducibility knobs for learn().

    At least one of time_budget (seconds) and max_iterations must be
    set. The first restart always runs to completion, so a result is
    returned even when the budget is tiny.
    """

    k: int
    time_budget: Optional[float] = None
    max_iterations: Optional[int] = None
    seed: int = 0
    workers: int = 1


@dataclass
class LearnResult:
    dag: Dag
    ktree: KTree
    score: float
    iterations: int
    per_iteration_scores: List[float] = field(default_factory=list)
    elapsed: float = 0.0


def derive_seed(*parts: int) -> int:
    """Stable child seed from a tuple of integers."""
    return int(np.random.SeedSequence(list(parts)).generate_state(1, np.uint64)[0])


def m_score(sc_c: float, sc_b: float, sc_w: float) -> float:
    """Normalized position of the current best feasible score within the
    cache's score range; 1 when the range is degenerate."""
    if not (sc_w <= sc_c <= sc_b):
        raise ValueError(f"expected scW <= scC <= scB, got {sc_w}, {sc_c}, {sc_b}")
    if sc_b == sc_w:
        return 1.0
    return (sc_c - sc_w) / (sc_b - sc_w)


class _Growth:
    """Shared insertion machinery for both learners.

    Tracks, for every unplaced variable, the best cache entry whose
    parents fit inside some k-clique of the current tree. Caches are
    sorted by score, so each new clique is folded in by scanning a
    variable's entries from the top and stopping as soon as scores drop
    to the incumbent: anything below cannot improve it.
    """

    def __init__(self, cache: ParentSetCache, k: int, dag: Dag, kt: KTree,
                 parent_sets: List[List[frozenset]]):
        self.cache = cache
        self.k = k
        self.kt = kt
        self.parent_sets = parent_sets
        self.parents: Dict[int, Tuple[int, ...]] = dict(dag.parents)
        self.family_scores: Dict[int, float] = dict(dag.family_scores)
        self.unplaced: List[int] = sorted(set(range(cache.n_variables)) - kt.nodes)
        self.best_score: Dict[int, float] = {}
        self.best_entry: Dict[int, Tuple[int, ...]] = {}
        for v in self.unplaced:
            for clique in kt.cliques:
                self._fold_clique(v, clique)

    def _fold_clique(self, v: int, clique: frozenset) -> None:
        incumbent = self.best_score.get(v, -np.inf)
        entries = self.cache.entries[v]
        sets = self.parent_sets[v]
        for i in range(len(entries)):
            score = entries[i].score
            if score <= incumbent:
                break
            if sets[i] <= clique:
                self.best_score[v] = score
                self.best_entry[v] = entries[i].parents
                break

    def insert(self, v: int, rng: np.random.Generator) -> None:
        """Place v with its best feasible parents at a random valid host."""
        parents = self.best_entry[v]
        hosts = self.kt.kclique_supersets(parents)
        host = hosts[int(rng.integers(len(hosts)))]
        new_clique = self.kt.add(v, host)
        self.parents[v] = parents
        self.family_scores[v] = self.best_score[v]
        self.unplaced.remove(v)
        self.best_score.pop(v)
        self.best_entry.pop(v)
        for u in self.unplaced:
            self._fold_clique(u, new_clique)

    def result_dag(self) -> Dag:
        total = float(sum(self.family_scores.values()))
        return Dag(parents=self.parents, score=total, family_scores=self.family_scores)


def _parent_frozensets(cache: ParentSetCache) -> List[List[frozenset]]:
    return [[frozenset(e.parents) for e in lst] for lst in cache.entries]


def kmax_init(cache: ParentSetCache, k: int, rng: np.random.Generator) -> Tuple[Dag, KTree]:
    """Initial clique for kmax: grow a set of k+1 variables along the
    candidate parents of its members, then structure it exactly.

    The first variable is uniform. Each next one is uniform over the
    variables appearing in any stored parent set of the chosen ones;
    when that pool is exhausted the draw falls back to uniform over the
    rest.
    """
    n = cache.n_variables
    if n < k + 1:
        raise ValueError(f"need at least k+1={k + 1} variables, got {n}")
    first = int(rng.integers(n))
    chosen: List[int] = [first]
    chosen_set: Set[int] = {first}
    candidates: Set[int] = set()

    def absorb(v: int) -> None:
        for e in cache.entries[v]:
            candidates.update(e.parents)

    absorb(first)
    while len(chosen) < k + 1:
        pool = sorted(candidates - chosen_set)
        if not pool:
            pool = sorted(set(range(n)) - chosen_set)
        v = pool[int(rng.integers(len(pool)))]
        chosen.append(v)
        chosen_set.add(v)
        absorb(v)
    dag = exact_learn(cache, chosen)
    return dag, init_ktree(chosen, k)


def _finish_growth(growth: _Growth, rng: np.random.Generator, by_m: bool) -> Dag:
    while growth.unplaced:
        if by_m:
            best_m = -1.0
            ties: List[int] = []
            for v in growth.unplaced:
                m = m_score(
                    growth.best_score[v],
                    growth.cache.best_score(v),
                    growth.cache.worst_score(v),
                )
                if m > best_m:
                    best_m = m
                    ties = [v]
                elif m == best_m:
                    ties.append(v)
            v = ties[int(rng.integers(len(ties)))]
        else:
            v = growth.unplaced[0]
        growth.insert(v, rng)
    return growth.result_dag()


def kmax_iteration(
    cache: ParentSetCache,
    k: int,
    rng: np.random.Generator,
    parent_sets: Optional[List[List[frozenset]]] = None,
) -> LearnResult:
    """One kmax restart: seeded init clique, then highest-m insertions."""
    start = time.monotonic()
    if parent_sets is None:
        parent_sets = _parent_frozensets(cache)
    dag, kt = kmax_init(cache, k, rng)
    growth = _Growth(cache, k, dag, kt, parent_sets)
    final = _finish_growth(growth, rng, by_m=True)
    return LearnResult(
        dag=final,
        ktree=kt,
        score=final.score,
        iterations=1,
        per_iteration_scores=[final.score],
        elapsed=time.monotonic() - start,
    )


def kgreedy_iteration(
    cache: ParentSetCache,
    k: int,
    rng: np.random.Generator,
    parent_sets: Optional[List[List[frozenset]]] = None,
) -> LearnResult:
    """One kgreedy restart: uniform variable order, exact first clique,
    then one best-feasible insertion per position."""
    start = time.monotonic()
    n = cache.n_variables
    if n < k + 1:
        raise ValueError(f"need at least k+1={k + 1} variables, got {n}")
    if parent_sets is None:
        parent_sets = _parent_frozensets(cache)
    order = [int(v) for v in rng.permutation(n)]
    core = order[: k + 1]
    dag = exact_learn(cache, core)
    kt = init_ktree(core, k)
    growth = _Growth(cache, k, dag, kt, parent_sets)
    for v in order[k + 1 :]:
        growth.insert(v, rng)
    final = growth.result_dag()
    return LearnResult(
        dag=final,
        ktree=kt,
        score=final.score,
        iterations=1,
        per_iteration_scores=[final.score],
        elapsed=time.monotonic() - start,
    )


_ALGORITHMS = {"kmax": kmax_iteration, "kgreedy": kgreedy_iteration}


def _trivial_result(cache: ParentSetCache, start: float) -> LearnResult:
    dag = Dag(parents={0: ()}, score=cache.best_score(0),
              family_scores={0: cache.best_score(0)})
    return LearnResult(
        dag=dag,
        ktree=init_ktree([0], 0),
        score=dag.score,
        iterations=1,
        per_iteration_scores=[dag.score],
        elapsed=time.monotonic() - start,
    )


def _run_stream(
    cache: ParentSetCache,
    k: int,
    algorithm: str,
    seed: int,
    first: int,
    step: int,
    deadline: Optional[float],
    max_iterations: Optional[int],
) -> List[Tuple[int, LearnResult]]:
    """Run restarts first, first+step, ... until a budget trips.

    Restart j is seeded from (seed, j), so the assignment of restarts
    to streams cannot change any individual result.
    """
    iterate = _ALGORITHMS[algorithm]
    parent_sets = _parent_frozensets(cache)
    out: List[Tuple[int, LearnResult]] = []
    j = first
    while True:
        if max_iterations is not None and j >= max_iterations:
            break
        if out and deadline is not None and time.monotonic() >= deadline:
            break
        rng = np.random.default_rng(derive_seed(seed, j))
        out.append((j, iterate(cache, k, rng, parent_sets)))
        j += step
    return out


def learn(cache: ParentSetCache, config: LearnerConfig, algorithm: str = "kmax") -> LearnResult:
    """Best network over repeated randomized restarts.

    Runs restarts until the time budget or the iteration cap is hit,
    whichever comes first; at least one restart always completes. With
    workers > 1 the restart indices are dealt round-robin to worker
    processes. The best score wins; ties prefer the lowest restart
    index. Effective treewidth is capped at n-1, which turns problems
    with n <= k+1 variables into a single exact optimization.
    """
    if algorithm not in _ALGORITHMS:
        raise ValueError(f"unknown algorithm {algorithm!r}; expected one of {sorted(_ALGORITHMS)}")
    if config.time_budget is None and config.max_iterations is None:
        raise ValueError("config needs a time budget or an iteration cap")
    if config.max_iterations is not None and config.max_iterations < 1:
        raise ValueError("max_iterations must be at least 1")
    if config.workers < 1:
        raise ValueError("workers must be at least 1")
    start = time.monotonic()
    n = cache.n_variables
    if n == 1:
        return _trivial_result(cache, start)
    k = min(config.k, n - 1)
    if config.k < 1:
        raise ValueError(f"k must be >= 1, got {config.k}")
    deadline = None if config.time_budget is None else start + config.time_budget

    workers = config.workers
    if workers == 1:
        streams = [
            _run_stream(cache, k, algorithm, config.seed, 0, 1, deadline, config.max_iterations)
        ]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(
                    _run_stream,
                    cache,
                    k,
                    algorithm,
                    config.seed,
                    w,
                    workers,
                    deadline,
                    config.max_iterations,
                )
                for w in range(workers)
            ]
            streams = [f.result() for f in futures]

    runs = sorted((j, res) for stream in streams for j, res in stream)
    best_j, best = min(runs, key=lambda jr: (-jr[1].score, jr[0]))
    return LearnResult(
        dag=best.dag,
        ktree=best.ktree,
        score=best.score,
        iterations=len(runs),
        per_iteration_scores=[res.score for _, res in runs],
        elapsed=time.monotonic() - start,
    )
