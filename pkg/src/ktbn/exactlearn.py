"""Exact structure optimization over small variable subsets.

Finds the highest-scoring DAG over a subset S of variables, with every
parent set drawn from a parent-set cache restricted to S. The search is
the classic dynamic program over subsets: the best network over W ends
in some sink s whose parents come from W minus s, so

    opt(W) = max over s in W of best(s, W \\ {s}) + opt(W \\ {s}).

Scores are decomposable, so this is exact. Runtime is O(2^|S| |S|) plus
the cache propagation; subsets are capped at 16 variables.

brute_force_btw_opt is the slow oracle used to validate the learners:
it enumerates every assignment of cache entries, keeps the acyclic
ones, and filters by the exact treewidth of the moral graph.
"""

from __future__ import annotations

from itertools import product
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .ktree import Dag, exact_treewidth, moral_graph
from .scoring import ParentSetCache

EXACT_LEARN_LIMIT = 16


def _best_by_mask(cache: ParentSetCache, v: int, positions: Dict[int, int], m: int) -> np.ndarray:
    """best[mask] = best cached score for v among parent sets inside mask."""
    size = 1 << m
    best = np.full(size, -np.inf)
    for e in cache.entries[v]:
        mask = 0
        ok = True
        for p in e.parents:
            pos = positions.get(p)
            if pos is None:
                ok = False
                break
            mask |= 1 << pos
        if ok and e.score > best[mask]:
            best[mask] = e.score
    # Propagate: a set inherits the best score of its subsets.
    masks = np.arange(size)
    for b in range(m):
        idx = masks[(masks >> b) & 1 == 1]
        best[idx] = np.maximum(best[idx], best[idx ^ (1 << b)])
    return best


def _best_entry_within(cache: ParentSetCache, v: int, allowed: frozenset) -> Tuple[Tuple[int, ...], float]:
    """First cache entry of v whose parents fit in allowed; entries are
    sorted by score, so the first hit is the best one."""
    for e in cache.entries[v]:
        if allowed.issuperset(e.parents):
            return e.parents, e.score
    raise ValueError(f"cache for variable {v} has no entry inside {sorted(allowed)}")


def exact_learn(cache: ParentSetCache, variables: Sequence[int]) -> Dag:
    """Optimal DAG over the given variables using cached parent sets.

    Only cache entries whose parents all lie inside the subset are
    considered. The empty parent set is always cached, so a solution
    always exists. Ties are broken deterministically: the smallest sink
    variable, then the cache order of its entries.
    """
    subset = tuple(sorted(set(int(v) for v in variables)))
    m = len(subset)
    if m == 0:
        raise ValueError("exact_learn needs at least one variable")
    if m > EXACT_LEARN_LIMIT:
        raise ValueError(f"exact_learn supports at most {EXACT_LEARN_LIMIT} variables, got {m}")
    for v in subset:
        if not 0 <= v < cache.n_variables:
            raise ValueError(f"variable {v} is not covered by the cache")
    positions = {v: i for i, v in enumerate(subset)}
    best = [_best_by_mask(cache, v, positions, m) for v in subset]

    size = 1 << m
    opt = np.full(size, -np.inf)
    opt[0] = 0.0
    sink = np.full(size, -1, dtype=np.int8)
    for mask in range(1, size):
        best_val = -np.inf
        best_sink = -1
        rest = mask
        while rest:
            bit = rest & -rest
            pos = bit.bit_length() - 1
            rest ^= bit
            prev = mask ^ bit
            cand = opt[prev] + best[pos][prev]
            if cand > best_val:
                best_val = cand
                best_sink = pos
        opt[mask] = best_val
        sink[mask] = best_sink

    parents: Dict[int, Tuple[int, ...]] = {}
    family_scores: Dict[int, float] = {}
    mask = size - 1
    while mask:
        pos = int(sink[mask])
        v = subset[pos]
        mask ^= 1 << pos
        allowed = frozenset(subset[i] for i in range(m) if mask >> i & 1)
        ps, sc = _best_entry_within(cache, v, allowed)
        parents[v] = ps
        family_scores[v] = sc
    total = float(sum(family_scores.values()))
    return Dag(parents=parents, score=total, family_scores=family_scores)


BRUTE_FORCE_LIMIT = 7


def brute_force_btw_opt(cache: ParentSetCache, k: int) -> Dag:
    """Exhaustive oracle: best acyclic cache assignment whose moral graph
    has exact treewidth at most k.

    Enumerates the full Cartesian product of cache entries, so it is
    only usable on small problems (at most 7 variables). Ties keep the
    first assignment found in enumeration order, which is deterministic.
    """
    n = cache.n_variables
    if n > BRUTE_FORCE_LIMIT:
        raise ValueError(f"brute force oracle supports at most {BRUTE_FORCE_LIMIT} variables")
    best_dag: Optional[Dag] = None
    best_score = -np.inf
    for combo in product(*cache.entries):
        total = sum(e.score for e in combo)
        if total <= best_score:
            continue
        parents = {v: e.parents for v, e in enumerate(combo)}
        if not _is_acyclic(parents, n):
            continue
        dag = Dag(
            parents=parents,
            score=float(total),
            family_scores={v: e.score for v, e in enumerate(combo)},
        )
        if exact_treewidth(moral_graph(dag)) > k:
            continue
        best_dag = dag
        best_score = total
    assert best_dag is not None  # the all-empty assignment is always valid
    return best_dag


def _is_acyclic(parents: Dict[int, Tuple[int, ...]], n: int) -> bool:
    indeg = {v: len(ps) for v, ps in parents.items()}
    children: Dict[int, List[int]] = {v: [] for v in parents}
    for v, ps in parents.items():
        for p in ps:
            children[p].append(v)
    ready = [v for v, d in indeg.items() if d == 0]
    seen = 0
    while ready:
        v = ready.pop()
        seen += 1
        for c in children[v]:
            indeg[c] -= 1
            if indeg[c] == 0:
                ready.append(c)
    return seen == n
