"""k-tree construction, coverage queries, moral graphs, treewidth oracle."""

from __future__ import annotations

import numpy as np
import pytest

from ktbn import (
    CacheEntry,
    Dag,
    KTree,
    UGraph,
    add_node,
    exact_treewidth,
    feasible_parent_sets,
    init_ktree,
    is_moral_subgraph,
    moral_graph,
)


def _tw(nodes, edges):
    return exact_treewidth(UGraph.build(nodes, edges))


# -----------------------------------------------------------------------
# exact treewidth on graphs with known answers
# -----------------------------------------------------------------------

def test_treewidth_known_graphs():
    assert _tw(list(range(4)), []) == 0
    assert _tw([0, 1, 2], [(0, 1), (1, 2)]) == 1
    assert _tw(list(range(7)),
               [(0, 1), (0, 2), (1, 3), (1, 4), (2, 5), (2, 6)]) == 1
    assert _tw([0, 1, 2, 3], [(0, 1), (1, 2), (2, 3), (3, 0)]) == 2
    assert _tw(list(range(6)), [(i, (i + 1) % 6) for i in range(6)]) == 2
    assert _tw(list(range(5)),
               [(i, j) for i in range(5) for j in range(i + 1, 5)]) == 4


def test_treewidth_petersen_graph():
    edges = [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0),
             (5, 7), (7, 9), (9, 6), (6, 8), (8, 5),
             (0, 5), (1, 6), (2, 7), (3, 8), (4, 9)]
    assert _tw(list(range(10)), edges) == 4


def test_treewidth_grid_3x3_is_3():
    edges = []
    for r in range(3):
        for c in range(3):
            v = 3 * r + c
            if c < 2:
                edges.append((v, v + 1))
            if r < 2:
                edges.append((v, v + 3))
    assert _tw(list(range(9)), edges) == 3


def test_treewidth_rejects_large_graphs():
    nodes = list(range(20))
    with pytest.raises(ValueError):
        exact_treewidth(UGraph.build(nodes, [(0, 1)]))


def test_treewidth_of_random_ktree_is_k():
    # a k-tree has treewidth exactly k by construction
    rng = np.random.default_rng(3)
    for k in (1, 2, 3):
        for n in (k + 1, k + 3, min(k + 6, 10)):
            kt = init_ktree(list(range(k + 1)), k)
            for v in range(k + 1, n):
                hosts = kt.kcliques()
                kt.add(v, hosts[int(rng.integers(len(hosts)))])
            edges = set()
            for clique in kt.cliques:
                cl = sorted(clique)
                for i in range(len(cl)):
                    for j in range(i + 1, len(cl)):
                        edges.add((cl[i], cl[j]))
            assert _tw(list(range(n)), sorted(edges)) == k


# -----------------------------------------------------------------------
# k-tree construction
# -----------------------------------------------------------------------

def test_init_ktree_single_clique():
    kt = init_ktree([0, 1, 2], 2)
    assert kt.k == 2
    assert kt.cliques == [frozenset({0, 1, 2})]
    assert sorted(map(sorted, kt.kcliques())) == [[0, 1], [0, 2], [1, 2]]


def test_init_rejects_wrong_base():
    with pytest.raises(ValueError):
        init_ktree([0, 1], 2)
    with pytest.raises(ValueError):
        init_ktree([0, 0, 1], 2)


def test_add_node_creates_clique_and_registers_kcliques():
    kt = init_ktree([0, 1, 2], 2)
    new = add_node(kt, 3, frozenset({0, 1}))
    assert new == frozenset({0, 1, 3})
    assert kt.cliques == [frozenset({0, 1, 2}), frozenset({0, 1, 3})]
    assert kt.parent_clique == [-1, 0]
    assert frozenset({0, 3}) in kt.kcliques()
    assert frozenset({1, 3}) in kt.kcliques()


def test_add_rejects_bad_hosts():
    kt = init_ktree([0, 1, 2], 2)
    with pytest.raises(ValueError):
        kt.add(3, frozenset({0}))  # not a k-clique
    with pytest.raises(ValueError):
        kt.add(3, frozenset({0, 9}))  # unknown k-clique
    with pytest.raises(ValueError):
        kt.add(0, frozenset({1, 2}))  # already present


def test_covers_and_feasible_sets():
    kt = init_ktree([0, 1, 2], 2)
    kt.add(3, frozenset({0, 1}))
    assert kt.covers(())
    assert kt.covers((0,))
    assert kt.covers((0, 1))
    assert kt.covers((1, 3))
    assert not kt.covers((2, 3))  # 2 and 3 never share a clique
    assert not kt.covers((0, 1, 2))  # size k+1 exceeds the bound
    entries = [CacheEntry(parents=p, score=-float(i))
               for i, p in enumerate([(0, 1), (2, 3), (), (3,)])]
    feas = feasible_parent_sets(kt, entries)
    assert [e.parents for e in feas] == [(0, 1), (), (3,)]


def test_kclique_supersets_order_and_empty_set():
    kt = init_ktree([0, 1, 2], 2)
    kt.add(3, frozenset({0, 1}))
    hosts = kt.kclique_supersets((0,))
    assert hosts[0] == frozenset({0, 1})  # first-appearance order
    assert frozenset({0, 2}) in hosts and frozenset({0, 3}) in hosts
    assert list(kt.kclique_supersets(())) == list(kt.kcliques())


def test_parent_clique_is_earliest_superset_of_host():
    kt = init_ktree([0, 1, 2], 2)
    kt.add(3, frozenset({0, 1}))  # clique 1 = {0,1,3}
    kt.add(4, frozenset({0, 1}))  # host {0,1} first appears in clique 0
    assert kt.parent_clique[2] == 0
    kt.add(5, frozenset({0, 3}))  # {0,3} only inside clique 1
    assert kt.parent_clique[3] == 1


def test_from_cliques_roundtrip_and_validation():
    kt = init_ktree([0, 1, 2], 2)
    kt.add(3, frozenset({0, 1}))
    kt.add(4, frozenset({1, 3}))
    back = KTree.from_cliques(2, [sorted(c) for c in kt.cliques],
                              list(kt.parent_clique))
    assert back.cliques == kt.cliques
    assert back.parent_clique == kt.parent_clique
    assert sorted(map(sorted, back.kcliques())) == sorted(map(sorted, kt.kcliques()))
    with pytest.raises(ValueError):
        KTree.from_cliques(2, [[0, 1, 2], [3, 4, 5]], [-1, 0])
    with pytest.raises(ValueError):
        KTree.from_cliques(2, [[0, 1, 2], [0, 1, 3]], [-1, 1])


# -----------------------------------------------------------------------
# DAGs, moral graphs, membership
# -----------------------------------------------------------------------

def test_dag_validation():
    Dag(parents={0: (), 1: (0,)}, score=0.0, family_scores={0: 0.0, 1: 0.0})
    with pytest.raises(ValueError):
        Dag(parents={0: (0,)}, score=0.0, family_scores={0: 0.0})
    with pytest.raises(ValueError):
        Dag(parents={0: (1,), 1: (0,)}, score=0.0,
            family_scores={0: 0.0, 1: 0.0})
    with pytest.raises(ValueError):
        Dag(parents={0: (7,)}, score=0.0, family_scores={0: 0.0})


def test_topological_order_is_deterministic():
    dag = Dag(parents={0: (), 1: (), 2: (0, 1), 3: (2,)}, score=0.0,
              family_scores={v: 0.0 for v in range(4)})
    assert dag.topological_order() == [0, 1, 2, 3]


def test_moral_graph_marries_coparents():
    dag = Dag(parents={0: (), 1: (), 2: (0, 1)}, score=0.0,
              family_scores={0: 0.0, 1: 0.0, 2: 0.0})
    g = moral_graph(dag)
    assert (0, 1) in g.edges  # marriage edge
    assert (0, 2) in g.edges and (1, 2) in g.edges


def test_is_moral_subgraph():
    kt = init_ktree([0, 1, 2], 2)
    kt.add(3, frozenset({0, 1}))
    good = Dag(parents={0: (), 1: (0,), 2: (0, 1), 3: (0, 1)}, score=0.0,
               family_scores={v: 0.0 for v in range(4)})
    assert is_moral_subgraph(good, kt)
    bad = Dag(parents={0: (), 1: (), 2: (), 3: (2,)}, score=0.0,
              family_scores={v: 0.0 for v in range(4)})
    assert not is_moral_subgraph(bad, kt)  # arc 2->3 outside every clique


def test_moral_treewidth_of_covered_dag_is_bounded():
    rng = np.random.default_rng(21)
    for trial in range(20):
        k = int(rng.integers(1, 4))
        n = int(rng.integers(k + 2, 10))
        kt = init_ktree(list(range(k + 1)), k)
        parents = {v: () for v in range(k + 1)}
        for v in range(k + 1, n):
            hosts = kt.kcliques()
            host = hosts[int(rng.integers(len(hosts)))]
            kt.add(v, host)
            sub = sorted(host)
            take = rng.random(len(sub)) < 0.7
            parents[v] = tuple(s for s, t in zip(sub, take) if t)
        dag = Dag(parents=parents, score=0.0,
                  family_scores={v: 0.0 for v in range(n)})
        assert is_moral_subgraph(dag, kt)
        assert exact_treewidth(moral_graph(dag)) <= k
