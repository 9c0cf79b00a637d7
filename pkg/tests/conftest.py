"""Shared brute-force oracles and dataset builders for the test suite.

Everything here is deliberately naive: dict-based tallies, full-joint
tables, exhaustive enumeration over parent assignments. The library is
tested against these, never against itself.
"""

from __future__ import annotations

import itertools
from typing import Dict, List, Sequence, Tuple

import numpy as np

from ktbn import CategoricalDataset
from ktbn.inference import BayesNet


def make_dataset(cells, arities=None, names=None) -> CategoricalDataset:
    cells = np.asarray(cells, dtype=np.int32)
    n = cells.shape[1]
    if arities is None:
        arities = [max(2, int(cells[:, j].max()) + 1) for j in range(n)]
    if names is None:
        names = [f"V{j}" for j in range(n)]
    states = [[f"s{i}" for i in range(a)] for a in arities]
    return CategoricalDataset(list(names), states, cells)


def random_dataset(rng, n, d, max_arity=3, missing_rate=0.0) -> CategoricalDataset:
    arities = [int(rng.integers(2, max_arity + 1)) for _ in range(n)]
    cols = [rng.integers(0, a, size=d) for a in arities]
    cells = np.stack(cols, axis=1).astype(np.int32)
    if missing_rate > 0:
        mask = rng.random(cells.shape) < missing_rate
        # keep at least one observed value per column
        for j in range(n):
            if mask[:, j].all():
                mask[0, j] = False
        cells[mask] = -1
    return make_dataset(cells, arities)


def oracle_family_score(ds: CategoricalDataset, child: int, parents: Sequence[int]):
    """Dict-tally BIC: drop rows missing any family member, tally child
    and parent configurations, apply the closed-form penalty."""
    tall: Dict[Tuple[int, ...], int] = {}
    ptall: Dict[Tuple[int, ...], int] = {}
    used = 0
    for row in ds.cells:
        fam = [int(row[child])] + [int(row[p]) for p in parents]
        if any(v < 0 for v in fam):
            continue
        used += 1
        key = tuple(fam)
        tall[key] = tall.get(key, 0) + 1
        ptall[key[1:]] = ptall.get(key[1:], 0) + 1
    if used == 0:
        raise ValueError("no observed family rows")
    ll = 0.0
    for key, c in tall.items():
        ll += c * np.log(c / ptall[key[1:]])
    space = 1
    for p in parents:
        space *= ds.arity(p)
    pen = -(np.log(used) / 2.0) * (ds.arity(child) - 1) * space
    return ll + pen, ll, pen, used


def best_dag_by_enumeration(cache) -> float:
    """Max total score over every acyclic combination of cache entries."""
    n = cache.n_variables
    options = [[(e.parents, e.score) for e in cache.entries[v]] for v in range(n)]
    best = -np.inf
    for combo in itertools.product(*options):
        pend = {v: set(combo[v][0]) for v in range(n)}
        placed = 0
        while pend:
            free = [v for v, ps in pend.items() if not ps]
            if not free:
                break
            for v in free:
                del pend[v]
                for ps in pend.values():
                    ps.discard(v)
            placed += len(free)
        if placed != n:
            continue
        best = max(best, sum(s for _, s in combo))
    return best


def joint_table(net: BayesNet) -> np.ndarray:
    """Full joint distribution by multiplying CPT entries cell by cell."""
    n = len(net.variables)
    shapes = [len(s) for s in net.states]
    full = np.zeros(shapes)
    for idx in itertools.product(*[range(a) for a in shapes]):
        p = 1.0
        for v in range(n):
            cfg = 0
            for pa in net.parents[v]:
                cfg = cfg * shapes[pa] + idx[pa]
            p *= net.cpts[v][cfg, idx[v]]
        full[idx] = p
    return full


def evidence_slice(full: np.ndarray, evidence: Dict[int, int]):
    n = full.ndim
    sl = tuple(evidence.get(v, slice(None)) for v in range(n))
    return np.asarray(full[sl])
