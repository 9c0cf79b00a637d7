"""Incrementally grown k-trees and the DAG structures built on them.

A k-tree is a maximal graph of treewidth k. It is built constructively:
the base is a clique over k+1 nodes, and every further node is attached
to an existing k-clique, forming one new (k+1)-clique. The cliques and
their attachment order are kept, so the structure doubles as a ready
junction tree and is never re-triangulated.

A DAG whose moral graph is a subgraph of a k-tree has treewidth at most
k. The learners in this package keep that invariant by construction;
the exact treewidth routine here is the independent check used to
verify it on small graphs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple


@dataclass
class Dag:
    """Directed acyclic graph given as per-variable sorted parent tuples.

    parents maps each covered variable to its sorted parent tuple;
    family_scores holds the score of each chosen family, and score is
    their sum.
    """

    parents: Dict[int, Tuple[int, ...]]
    score: float
    family_scores: Dict[int, float]

    def __post_init__(self) -> None:
        self.parents = {v: tuple(sorted(ps)) for v, ps in self.parents.items()}
        for v, ps in self.parents.items():
            if v in ps:
                raise ValueError(f"variable {v} cannot be its own parent")
            for p in ps:
                if p not in self.parents:
                    raise ValueError(f"parent {p} of {v} is not a covered variable")
        if self.topological_order() is None:
            raise ValueError("parent assignment contains a directed cycle")

    @property
    def nodes(self) -> Tuple[int, ...]:
        return tuple(sorted(self.parents))

    def topological_order(self) -> Optional[List[int]]:
        """Kahn's algorithm; smallest ready variable first. None on a cycle."""
        import heapq

        children: Dict[int, List[int]] = {v: [] for v in self.parents}
        indeg = {v: len(ps) for v, ps in self.parents.items()}
        for v, ps in self.parents.items():
            for p in ps:
                children[p].append(v)
        ready = [v for v, d in indeg.items() if d == 0]
        heapq.heapify(ready)
        order = []
        while ready:
            v = heapq.heappop(ready)
            order.append(v)
            for c in children[v]:
                indeg[c] -= 1
                if indeg[c] == 0:
                    heapq.heappush(ready, c)
        return order if len(order) == len(self.parents) else None


class KTree:
    """A k-tree grown one node at a time from a base clique.

    Cliques are stored in insertion order; cliques[0] is the base. Each
    later clique records the earliest existing clique that contains its
    hosting k-clique as its tree parent, which makes the clique list a
    valid junction tree (separators are exactly the hosting k-cliques).
    k-cliques are indexed as they appear so that attachment candidates
    can be enumerated cheaply and deterministically.
    """

    def __init__(self, base: Iterable[int], k: int):
        base = tuple(sorted(int(v) for v in base))
        if k < 0:
            raise ValueError(f"k must be >= 0, got {k}")
        if len(set(base)) != len(base) or len(base) != k + 1:
            raise ValueError(f"base clique needs exactly {k + 1} distinct nodes, got {base}")
        self.k = k
        self.nodes: Set[int] = set(base)
        self.cliques: List[FrozenSet[int]] = [frozenset(base)]
        self.parent_clique: List[int] = [-1]
        self._cliques_by_var: Dict[int, List[int]] = {v: [0] for v in base}
        self._kcliques: List[FrozenSet[int]] = []
        self._kclique_set: Set[FrozenSet[int]] = set()
        self._kcliques_by_var: Dict[int, List[int]] = {v: [] for v in base}
        self._register_kcliques(self.cliques[0])

    def _register_kcliques(self, clique: FrozenSet[int]) -> None:
        if self.k == 0:
            return
        for sub in combinations(sorted(clique), self.k):
            fs = frozenset(sub)
            if fs in self._kclique_set:
                continue
            self._kclique_set.add(fs)
            idx = len(self._kcliques)
            self._kcliques.append(fs)
            for v in sub:
                self._kcliques_by_var.setdefault(v, []).append(idx)

    @property
    def n_cliques(self) -> int:
        return len(self.cliques)

    def kcliques(self) -> Tuple[FrozenSet[int], ...]:
        """All k-cliques, in first-appearance order."""
        return tuple(self._kcliques)

    def is_kclique(self, nodes: Iterable[int]) -> bool:
        return frozenset(nodes) in self._kclique_set

    def cliques_containing(self, v: int) -> Tuple[int, ...]:
        return tuple(self._cliques_by_var.get(v, ()))

    def covers(self, parents: Iterable[int]) -> bool:
        """True if the given set is contained in some k-clique."""
        ps = tuple(sorted(set(parents)))
        if not ps:
            return True
        if len(ps) > self.k:
            return False
        # Contained in a k-clique iff contained in a clique, since every
        # k-subset of a clique is a k-clique.
        for ci in self._cliques_by_var.get(ps[0], ()):
            if self.cliques[ci].issuperset(ps):
                return True
        return False

    def kclique_supersets(self, parents: Iterable[int]) -> List[FrozenSet[int]]:
        """All k-cliques containing the given set, in appearance order."""
        ps = set(parents)
        if not ps:
            return list(self._kcliques)
        if len(ps) > self.k:
            return []
        first = min(ps)
        return [
            self._kcliques[i]
            for i in self._kcliques_by_var.get(first, ())
            if self._kcliques[i].issuperset(ps)
        ]

    def add(self, node: int, kclique: Iterable[int]) -> FrozenSet[int]:
        """Attach a new node to an existing k-clique; returns the new clique."""
        node = int(node)
        host = frozenset(int(v) for v in kclique)
        if node in self.nodes:
            raise ValueError(f"node {node} is already in the k-tree")
        if host not in self._kclique_set:
            raise ValueError(f"{tuple(sorted(host))} is not a k-clique of the tree")
        new_clique = host | {node}
        # Earliest clique containing the host is the tree parent.
        parent = min(
            ci for ci in self._cliques_by_var[min(host)] if self.cliques[ci] >= host
        )
        idx = len(self.cliques)
        self.cliques.append(new_clique)
        self.parent_clique.append(parent)
        self.nodes.add(node)
        self._cliques_by_var.setdefault(node, [])
        for v in new_clique:
            self._cliques_by_var.setdefault(v, [])
            self._cliques_by_var[v].append(idx)
        self._register_kcliques(new_clique)
        return new_clique

    @classmethod
    def from_cliques(
        cls,
        k: int,
        cliques: Sequence[Sequence[int]],
        parent_links: Optional[Sequence[int]] = None,
    ) -> "KTree":
        """Rebuild a k-tree from its serialized clique list.

        Replays the construction, which validates the k-tree property.
        Explicit parent links, when given, override the derived ones.
        """
        if not cliques:
            raise ValueError("a k-tree has at least one clique")
        kt = cls(cliques[0], k)
        for i, cl in enumerate(cliques[1:], start=1):
            cl = frozenset(int(v) for v in cl)
            new = cl - kt.nodes
            if len(new) != 1:
                raise ValueError(f"clique {i} must introduce exactly one new node")
            kt.add(next(iter(new)), cl - new)
        if parent_links is not None:
            links = [int(p) for p in parent_links]
            if len(links) != len(kt.cliques) or links[0] != -1:
                raise ValueError("malformed parent links")
            for i, p in enumerate(links[1:], start=1):
                sep = kt.cliques[i] & kt.cliques[kt.parent_clique[i]]
                if not 0 <= p < i or not kt.cliques[p] >= sep:
                    raise ValueError(f"parent link {p} of clique {i} is invalid")
            kt.parent_clique = links
        return kt


def init_ktree(variables: Sequence[int], k: int) -> KTree:
    """Base k-tree: one clique over exactly k+1 distinct variables."""
    return KTree(variables, k)


def add_node(kt: KTree, node: int, kclique: Iterable[int]) -> FrozenSet[int]:
    """Attach node to an existing k-clique of kt; returns the new clique."""
    return kt.add(node, kclique)


def feasible_parent_sets(kt: KTree, entries: Sequence) -> List:
    """Filter cache entries whose parent set fits inside some k-clique."""
    return [e for e in entries if kt.covers(e.parents)]


@dataclass(frozen=True)
class UGraph:
    """Small undirected graph: sorted node tuple and normalized edge pairs."""

    nodes: Tuple[int, ...]
    edges: FrozenSet[Tuple[int, int]]

    @staticmethod
    def build(nodes: Iterable[int], edges: Iterable[Tuple[int, int]]) -> "UGraph":
        node_t = tuple(sorted(set(int(v) for v in nodes)))
        node_set = set(node_t)
        norm = set()
        for a, b in edges:
            a, b = int(a), int(b)
            if a == b:
                continue
            if a not in node_set or b not in node_set:
                raise ValueError(f"edge ({a},{b}) uses an unknown node")
            norm.add((a, b) if a < b else (b, a))
        return UGraph(nodes=node_t, edges=frozenset(norm))


def moral_graph(dag: Dag) -> UGraph:
    """Undirected graph linking each child to its parents and the parents
    of a common child to each other."""
    edges = set()
    for v, ps in dag.parents.items():
        for p in ps:
            edges.add((min(v, p), max(v, p)))
        for a, b in combinations(ps, 2):
            edges.add((min(a, b), max(a, b)))
    return UGraph.build(dag.parents.keys(), edges)


def is_moral_subgraph(dag: Dag, kt: KTree) -> bool:
    """True if every node of the DAG is in kt and every moral edge lies
    inside some clique of kt."""
    g = moral_graph(dag)
    for v in g.nodes:
        if v not in kt.nodes:
            return False
    for a, b in g.edges:
        inside = False
        for ci in kt.cliques_containing(a):
            if b in kt.cliques[ci]:
                inside = True
                break
        if not inside:
            return False
    return True


def _greedy_width_bound(adj: List[int], m: int) -> int:
    """Width of a min-degree elimination order; an upper bound on treewidth."""
    adj = list(adj)
    alive = (1 << m) - 1
    width = 0
    for _ in range(m):
        best_v, best_d = -1, m + 1
        rest = alive
        while rest:
            bit = rest & -rest
            v = bit.bit_length() - 1
            rest ^= bit
            d = (adj[v] & alive).bit_count()
            if d < best_d:
                best_v, best_d = v, d
        width = max(width, best_d)
        vbit = 1 << best_v
        neigh = adj[best_v] & alive & ~vbit
        rest = neigh
        while rest:
            bit = rest & -rest
            u = bit.bit_length() - 1
            rest ^= bit
            adj[u] |= neigh & ~bit
        alive ^= vbit
    return width


def _reach_outside(adj: List[int], smask: int, v: int) -> int:
    """Count nodes outside smask+{v} reachable from v through smask."""
    vbit = 1 << v
    visited = vbit
    frontier = adj[v] & ~visited
    out = 0
    while frontier:
        visited |= frontier
        out |= frontier & ~smask
        thru = frontier & smask
        nxt = 0
        while thru:
            bit = thru & -thru
            u = bit.bit_length() - 1
            thru ^= bit
            nxt |= adj[u]
        frontier = nxt & ~visited
    return (out & ~vbit).bit_count()


def exact_treewidth(g: UGraph, limit: int = 14) -> int:
    """Exact treewidth by dynamic programming over elimination prefixes.

    The state is the set S of already-eliminated nodes; eliminating S in
    any order yields the same fill effect on the rest, so the minimal
    width of a prefix is well defined. Values that reach a greedy upper
    bound are discarded early, which keeps the search fast on the small
    graphs this oracle is meant for. Intended for up to `limit` nodes;
    larger graphs should be checked structurally against their k-tree
    via is_moral_subgraph instead.
    """
    m = len(g.nodes)
    if m > limit:
        raise ValueError(
            f"exact treewidth supports at most {limit} nodes, got {m}; "
            "use is_moral_subgraph for larger graphs"
        )
    if m == 0:
        return 0
    index = {v: i for i, v in enumerate(g.nodes)}
    adj = [0] * m
    for a, b in g.edges:
        ia, ib = index[a], index[b]
        adj[ia] |= 1 << ib
        adj[ib] |= 1 << ia

    ub = _greedy_width_bound(adj, m)
    if ub <= 1:
        return ub  # the greedy order is optimal for width 0 or 1
    size = 1 << m
    INF = m + 1
    f = [INF] * size
    f[0] = -1
    for smask in range(1, size):
        best = ub  # values >= ub can never improve on the greedy order
        rest = smask
        while rest:
            bit = rest & -rest
            v = bit.bit_length() - 1
            rest ^= bit
            prev = f[smask ^ bit]
            if prev >= best:
                continue
            qv = _reach_outside(adj, smask ^ bit, v)
            w = prev if prev > qv else qv
            if w < best:
                best = w
        f[smask] = best if best < ub else INF
    return f[size - 1] if f[size - 1] < ub else ub
