"""BIC scoring of families and construction of parent-set caches.

Scores are natural-log BIC values, always to be maximized. For a child
X with parent set Pi the score decomposes as

    score(X, Pi) = LL(X | Pi) + Pen(X, Pi)

where LL is the maximized multinomial log-likelihood of the family and
Pen = -(log N / 2) * (|X| - 1) * |Pi|, with |X| the child arity, |Pi|
the size of the Cartesian product of the parent state spaces, and N
the number of rows used for counting. Rows missing any family member
are dropped before counting.

A parent-set cache stores, for every variable, a list of scored parent
sets sorted by decreasing score. Candidate sets beyond the singletons
are explored best-first, ranked by a constant-time approximation of
the score of the union of two already-scored disjoint sets. Dominated
sets (a strict superset scoring no better than one of its subsets) are
pruned, which provably preserves the optimal assignment.

The cache has a plain text representation: the first line holds the
variable count n; then for each variable a block with a header line
"index count" followed by count lines "score parent_count id...".
Scores are printed with full round-trip precision so that a save/load
cycle is bit-exact.
"""

from __future__ import annotations

import heapq
import math
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .dataset import CategoricalDataset, counts


@dataclass(frozen=True)
class FamilyScore:
    """Exact BIC evaluation of one family (child plus parent set)."""

    child: int
    parents: Tuple[int, ...]
    score: float
    loglik: float
    penalty: float
    parent_space: int
    rows_used: int


@dataclass(frozen=True)
class CacheEntry:
    """One stored parent set with its exact score."""

    parents: Tuple[int, ...]
    score: float


@dataclass
class CacheDiagnostics:
    explored: List[int] = field(default_factory=list)
    elapsed: float = 0.0
    warnings: List[str] = field(default_factory=list)


@dataclass
class ParentSetCache:
    """Per-variable lists of scored parent sets, sorted by score.

    entries[i] is sorted by decreasing score; ties are ordered by the
    lexicographically smaller sorted parent tuple. The empty set is
    always present, so every variable has at least one entry.
    """

    n_variables: int
    entries: List[List[CacheEntry]]
    diagnostics: CacheDiagnostics = field(default_factory=CacheDiagnostics)

    def best_score(self, i: int) -> float:
        return self.entries[i][0].score

    def worst_score(self, i: int) -> float:
        return self.entries[i][-1].score

    def score_of(self, i: int, parents: Sequence[int]) -> Optional[float]:
        key = tuple(sorted(parents))
        for e in self.entries[i]:
            if e.parents == key:
                return e.score
        return None

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"{self.n_variables}\n")
            for i, lst in enumerate(self.entries):
                fh.write(f"{i} {len(lst)}\n")
                for e in lst:
                    ids = " ".join(str(p) for p in e.parents)
                    line = f"{e.score!r} {len(e.parents)}"
                    fh.write(line + (" " + ids if ids else "") + "\n")

    @classmethod
    def load(cls, path: str) -> "ParentSetCache":
        with open(path, "r", encoding="utf-8") as fh:
            tokens = fh.read().split("\n")
        pos = 0

        def next_line() -> str:
            nonlocal pos
            while pos < len(tokens) and tokens[pos] == "":
                pos += 1
            if pos >= len(tokens):
                raise ValueError(f"{path}: truncated cache file")
            line = tokens[pos]
            pos += 1
            return line

        n = int(next_line())
        entries: List[List[CacheEntry]] = [[] for _ in range(n)]
        for _ in range(n):
            head = next_line().split()
            idx, count = int(head[0]), int(head[1])
            if not 0 <= idx < n:
                raise ValueError(f"{path}: variable index {idx} out of range")
            lst = []
            for _ in range(count):
                parts = next_line().split()
                score = float(parts[0])
                m = int(parts[1])
                parents = tuple(int(t) for t in parts[2 : 2 + m])
                if len(parents) != m:
                    raise ValueError(f"{path}: truncated parent list")
                lst.append(CacheEntry(parents=parents, score=score))
            entries[idx] = lst
        return cls(n_variables=n, entries=entries)


def bic_family(ds: CategoricalDataset, child: int, parents: Sequence[int]) -> FamilyScore:
    """Exact BIC score of a family, counting fully observed rows only."""
    table = counts(ds, child, parents)
    n_rows = table.rows_used
    if n_rows == 0:
        raise ValueError(
            f"no fully observed rows for child {child} with parents {tuple(parents)}"
        )
    c = table.counts
    n_cfg = c.sum(axis=1, keepdims=True)
    nz = c > 0
    ratios = np.divide(c, n_cfg, out=np.ones_like(c, dtype=np.float64), where=nz)
    loglik = float((c[nz] * np.log(ratios[nz])).sum())
    parent_space = 1
    for a in table.parent_arities:
        parent_space *= a
    penalty = -(math.log(n_rows) / 2.0) * (table.child_arity - 1) * parent_space
    return FamilyScore(
        child=child,
        parents=tuple(sorted(table.parents)),
        score=loglik + penalty,
        loglik=loglik,
        penalty=penalty,
        parent_space=parent_space,
        rows_used=n_rows,
    )


def bic_star(sc1: FamilyScore, sc2: FamilyScore, ll_empty: float) -> float:
    """Constant-time approximation of the score of a union of parent sets.

    For disjoint parent sets of the same child, approximates
    score(X, Pi1 | Pi2) as score(Pi1) + score(Pi2) + inter, where inter
    corrects the double-counted marginal log-likelihood and replaces
    the two penalties with the exact penalty of the union. When the
    data factorizes over the two sets the approximation is exact; its
    penalty component always is.
    """
    if sc1.child != sc2.child:
        raise ValueError("parent sets must score the same child")
    if set(sc1.parents) & set(sc2.parents):
        raise ValueError("parent sets must be disjoint")
    # Pen(union) = -(log N / 2)(|X|-1) ps1*ps2 = penalty1 * ps2.
    pen_union = sc1.penalty * sc2.parent_space
    inter = pen_union - sc1.penalty - sc2.penalty - ll_empty
    return sc1.score + sc2.score + inter


def prune_dominated(entries: Sequence[CacheEntry]) -> List[CacheEntry]:
    """Drop entries that a strict subset matches or beats.

    A parent set scoring no better than one of its strict subsets can
    never appear in an optimal assignment, because replacing it with
    the subset keeps the graph valid and does not lower the score. The
    empty set has no strict subset and is always kept.
    """
    by_parents: Dict[Tuple[int, ...], float] = {}
    for e in entries:
        key = tuple(sorted(e.parents))
        if key not in by_parents or e.score > by_parents[key]:
            by_parents[key] = e.score
    kept = []
    for parents, score in by_parents.items():
        dominated = False
        for r in range(len(parents)):
            for sub in _subsets_of_size(parents, r):
                other = by_parents.get(sub)
                if other is not None and other >= score:
                    dominated = True
                    break
            if dominated:
                break
        if not dominated:
            kept.append(CacheEntry(parents=parents, score=score))
    kept.sort(key=lambda e: (-e.score, e.parents))
    return kept


def _subsets_of_size(parents: Tuple[int, ...], r: int):
    from itertools import combinations

    return combinations(parents, r)


def build_cache(
    ds: CategoricalDataset,
    k: int,
    time_budget: Optional[float] = None,
    max_explored: int = 1000,
) -> ParentSetCache:
    """Score candidate parent sets of size up to k for every variable.

    The empty set and all singletons are scored exactly first. Larger
    sets are then explored best-first: candidate unions of two scored
    disjoint sets are kept in a priority queue ranked by the
    constant-time union approximation, and popped candidates get their
    exact score before being combined further. Exploration of a
    variable stops when the queue empties, when max_explored exact
    scores have been spent on it, or when its share of the time budget
    runs out. The time budget is split evenly over the variables.

    Every returned list is dominance-pruned and sorted by decreasing
    score with lexicographic tie-breaks. If even the singletons do not
    fit the budget, the finished prefix is kept and a warning is
    recorded in the diagnostics.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if time_budget is not None and time_budget <= 0:
        raise ValueError(f"time_budget must be positive, got {time_budget}")
    if max_explored < 0:
        raise ValueError(f"max_explored must be >= 0, got {max_explored}")
    n = ds.n_variables
    start = time.monotonic()
    slice_budget = None if time_budget is None else time_budget / n
    diag = CacheDiagnostics(explored=[0] * n)
    entries: List[List[CacheEntry]] = []

    for child in range(n):
        var_start = time.monotonic()
        deadline = None if slice_budget is None else var_start + slice_budget

        def expired() -> bool:
            return deadline is not None and time.monotonic() >= deadline

        empty = bic_family(ds, child, ())
        ll_empty = empty.loglik
        scored: Dict[Tuple[int, ...], FamilyScore] = {(): empty}

        singles: List[FamilyScore] = []
        unfinished = False
        for y in range(n):
            if y == child:
                continue
            if expired():
                unfinished = True
                break
            sc = bic_family(ds, child, (y,))
            scored[(y,)] = sc
            singles.append(sc)
        if unfinished:
            diag.warnings.append(
                f"variable {child}: time budget expired before all singletons were scored"
            )

        explored = 0
        if k >= 2 and not unfinished:
            # Seed the queue with every disjoint singleton pair, then grow
            # popped sets one scored singleton at a time. Heap order is
            # (-approximation, parent tuple), so ties break lexicographically.
            heap: List[Tuple[float, Tuple[int, ...], Tuple[int, ...], Tuple[int, ...]]] = []
            pushed = set()
            for a in range(len(singles)):
                for b in range(a + 1, len(singles)):
                    s1, s2 = singles[a], singles[b]
                    union = tuple(sorted(s1.parents + s2.parents))
                    prio = bic_star(s1, s2, ll_empty)
                    heapq.heappush(heap, (-prio, union, s1.parents, s2.parents))
                    pushed.add(union)
            while heap and explored < max_explored and not expired():
                _, parents, _, _ = heapq.heappop(heap)
                if parents in scored:
                    continue
                sc = bic_family(ds, child, parents)
                scored[parents] = sc
                explored += 1
                if len(parents) >= k:
                    continue
                for sy in singles:
                    y = sy.parents[0]
                    if y in parents:
                        continue
                    union = tuple(sorted(parents + (y,)))
                    if union in pushed or union in scored:
                        continue
                    prio = bic_star(sc, sy, ll_empty)
                    heapq.heappush(heap, (-prio, union, parents, sy.parents))
                    pushed.add(union)

        diag.explored[child] = len(scored) - 1
        raw = [CacheEntry(parents=key, score=sc.score) for key, sc in scored.items()]
        entries.append(prune_dominated(raw))

    diag.elapsed = time.monotonic() - start
    return ParentSetCache(n_variables=n, entries=entries, diagnostics=diag)
