"""Exact structure optimization against exhaustive enumeration."""

from __future__ import annotations

import numpy as np
import pytest

from ktbn import brute_force_btw_opt, build_cache, exact_learn, exact_treewidth, moral_graph

from conftest import best_dag_by_enumeration, random_dataset


def test_exact_learn_matches_enumeration_randomized():
    rng = np.random.default_rng(40)
    for trial in range(40):
        n = int(rng.integers(2, 6))
        ds = random_dataset(rng, n, int(rng.integers(30, 200)))
        cache = build_cache(ds, max(1, n - 1))
        dag = exact_learn(cache, list(range(n)))
        want = best_dag_by_enumeration(cache)
        assert dag.score == pytest.approx(want, abs=1e-9)


def test_exact_learn_score_decomposes():
    rng = np.random.default_rng(41)
    ds = random_dataset(rng, 5, 120)
    cache = build_cache(ds, 4)
    dag = exact_learn(cache, list(range(5)))
    assert dag.score == pytest.approx(sum(dag.family_scores.values()), abs=1e-12)
    for v, ps in dag.parents.items():
        assert dag.family_scores[v] == pytest.approx(cache.score_of(v, ps), abs=1e-12)


def test_exact_learn_on_subset_of_variables():
    rng = np.random.default_rng(42)
    ds = random_dataset(rng, 6, 100)
    cache = build_cache(ds, 3)
    subset = [1, 3, 5]
    dag = exact_learn(cache, subset)
    assert sorted(dag.parents) == subset
    for v, ps in dag.parents.items():
        assert set(ps) <= set(subset) - {v}


def test_exact_learn_single_variable():
    rng = np.random.default_rng(43)
    ds = random_dataset(rng, 3, 50)
    cache = build_cache(ds, 2)
    dag = exact_learn(cache, [2])
    assert dag.parents == {2: ()}
    assert dag.score == pytest.approx(cache.score_of(2, ()), abs=1e-12)


def test_exact_learn_is_order_invariant():
    rng = np.random.default_rng(44)
    ds = random_dataset(rng, 5, 80)
    cache = build_cache(ds, 4)
    a = exact_learn(cache, [0, 1, 2, 3, 4])
    b = exact_learn(cache, [4, 2, 0, 3, 1])
    assert a.score == pytest.approx(b.score, abs=1e-12)
    assert a.parents == b.parents


def test_exact_learn_rejects_bad_input():
    rng = np.random.default_rng(45)
    ds = random_dataset(rng, 3, 50)
    cache = build_cache(ds, 2)
    with pytest.raises(ValueError):
        exact_learn(cache, [])
    with pytest.raises(ValueError):
        exact_learn(cache, [0, 7])
    with pytest.raises(ValueError):
        exact_learn(cache, list(range(17)))


def test_brute_force_agrees_with_exact_learn_when_unconstrained():
    # with k >= n-1 every DAG over the cache is treewidth-feasible
    rng = np.random.default_rng(46)
    for trial in range(12):
        n = int(rng.integers(2, 5))
        ds = random_dataset(rng, n, 100)
        cache = build_cache(ds, max(1, n - 1))
        a = exact_learn(cache, list(range(n))).score
        b = brute_force_btw_opt(cache, max(1, n - 1)).score
        assert a == pytest.approx(b, abs=1e-9)


def test_brute_force_emits_bounded_treewidth_structure():
    rng = np.random.default_rng(47)
    for trial in range(8):
        n = int(rng.integers(3, 6))
        ds = random_dataset(rng, n, 120)
        cache = build_cache(ds, 2)
        dag = brute_force_btw_opt(cache, 1)
        assert exact_treewidth(moral_graph(dag)) <= 1
        unconstrained = exact_learn(cache, list(range(n))).score
        assert dag.score <= unconstrained + 1e-9


def test_brute_force_respects_limit():
    rng = np.random.default_rng(48)
    ds = random_dataset(rng, 8, 60)
    cache = build_cache(ds, 2, max_explored=2)
    with pytest.raises(ValueError):
        brute_force_btw_opt(cache, 2)
