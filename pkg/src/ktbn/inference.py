"""Exact inference on networks whose structure lives inside a k-tree.

The junction tree is taken directly from the learner's k-tree: cliques
and their attachment links are already a valid clique tree, so nothing
is re-triangulated. Each family (a variable with its parents) is folded
into the earliest clique that covers it. Messages are passed in log
space to stay safe on long chains and small probabilities.

Two structural facts keep queries cheap. First, every clique introduces
exactly one new variable, and the cliques containing a given variable
form a connected subtree rooted at the clique that introduced it; a
family is therefore always assigned inside the subtree of its child's
introducing clique. Second, summing a subtree's potentials over the
variables introduced in it telescopes to one. Together these mean that
a sum-product message toward the root from a subtree containing no
evidence is identically one, so only cliques on paths between evidence,
target, and root need any work. Max-product (MPE) has no such shortcut
and always sweeps the whole tree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Set, Tuple

import numpy as np
from scipy.special import logsumexp

from .dataset import MISSING, CategoricalDataset, counts
from .ktree import Dag, KTree, is_moral_subgraph


@dataclass
class BayesNet:
    """Discrete Bayesian network with tabular CPTs.

    cpts[v] has shape (number of parent configurations, arity of v);
    parent configurations are indexed row-major over the sorted parent
    tuple with the last parent varying fastest. ktree, when present, is
    the k-tree the structure was grown in and doubles as the junction
    tree for inference.
    """

    variables: Tuple[str, ...]
    states: Tuple[Tuple[str, ...], ...]
    parents: Dict[int, Tuple[int, ...]]
    cpts: List[np.ndarray]
    ktree: Optional[KTree] = None
    score: Optional[float] = None

    def __post_init__(self) -> None:
        n = len(self.variables)
        self.states = tuple(tuple(s) for s in self.states)
        if set(self.parents) != set(range(n)):
            raise ValueError("parents must cover every variable exactly once")
        self.parents = {v: tuple(sorted(ps)) for v, ps in self.parents.items()}
        if len(self.cpts) != n:
            raise ValueError("one CPT required per variable")
        for v in range(n):
            space = 1
            for p in self.parents[v]:
                space *= len(self.states[p])
            cpt = np.asarray(self.cpts[v], dtype=np.float64)
            if cpt.shape != (space, len(self.states[v])):
                raise ValueError(
                    f"CPT of variable {v} has shape {cpt.shape}, "
                    f"expected {(space, len(self.states[v]))}"
                )
            self.cpts[v] = cpt

    @property
    def n_variables(self) -> int:
        return len(self.variables)

    def arity(self, v: int) -> int:
        return len(self.states[v])


def estimate_parameters(
    ds: CategoricalDataset,
    dag: Dag,
    alpha: float = 1.0,
    ktree: Optional[KTree] = None,
) -> BayesNet:
    """Maximum-likelihood CPTs with symmetric Dirichlet smoothing.

    theta = (N_xpi + alpha) / (N_pi + alpha * arity). With alpha = 0 a
    parent configuration never seen in the data gets a uniform row.
    Requires complete data; inside EM it always runs on hard-completed
    datasets.
    """
    if alpha < 0:
        raise ValueError(f"alpha must be >= 0, got {alpha}")
    if not ds.is_complete():
        raise ValueError("estimate_parameters needs complete data")
    if set(dag.parents) != set(range(ds.n_variables)):
        raise ValueError("DAG must cover every dataset variable")
    cpts = []
    for v in range(ds.n_variables):
        table = counts(ds, v, dag.parents[v])
        c = table.counts.astype(np.float64)
        r = table.child_arity
        denom = c.sum(axis=1, keepdims=True) + alpha * r
        with np.errstate(invalid="ignore"):
            theta = (c + alpha) / denom
        unseen = denom[:, 0] == 0
        if unseen.any():
            theta[unseen] = 1.0 / r
        cpts.append(theta)
    return BayesNet(
        variables=ds.variables,
        states=ds.states,
        parents=dict(dag.parents),
        cpts=cpts,
        ktree=ktree,
    )


def _lse(arr: np.ndarray, axes: Tuple[int, ...]) -> np.ndarray:
    if not axes:
        return arr
    return logsumexp(arr, axis=axes)


class JunctionTree:
    """Calibrated-query engine over the cliques of a k-tree.

    Potentials are stored in log space; queries never mutate shared
    state, so one tree can serve concurrent queries. Each query reports
    the number of potential cells it touched via the *_with_cost
    variants, which is how the linear-cost property is asserted.
    """

    def __init__(self, net: BayesNet, kt: KTree):
        n = net.n_variables
        dag = Dag(parents=dict(net.parents), score=0.0, family_scores={})
        if not is_moral_subgraph(dag, kt):
            raise ValueError("network structure does not fit inside the k-tree")
        self.net = net
        self.kt = kt
        self.n_cliques = len(kt.cliques)
        self.clique_vars: List[Tuple[int, ...]] = [tuple(sorted(c)) for c in kt.cliques]
        self.parent: List[int] = list(kt.parent_clique)
        self.children: List[List[int]] = [[] for _ in range(self.n_cliques)]
        for ci in range(1, self.n_cliques):
            self.children[self.parent[ci]].append(ci)

        # Earliest clique covering each family; evidence and marginal
        # reads for a variable happen there.
        self.family_clique: List[int] = [-1] * n
        for v in range(n):
            fam = set(net.parents[v]) | {v}
            for ci in kt.cliques_containing(v):
                if kt.cliques[ci] >= fam:
                    self.family_clique[v] = ci
                    break
            if self.family_clique[v] < 0:
                raise ValueError(f"no clique covers the family of variable {v}")

        self.axis_of: List[Dict[int, int]] = [
            {v: i for i, v in enumerate(vs)} for vs in self.clique_vars
        ]
        self.shapes: List[Tuple[int, ...]] = [
            tuple(net.arity(v) for v in vs) for vs in self.clique_vars
        ]

        # Separator bookkeeping, all keyed by the child clique.
        self.sep_vars: List[Tuple[int, ...]] = [()] * self.n_cliques
        self.up_axes: List[Tuple[int, ...]] = [()] * self.n_cliques
        self.up_shape_in_parent: List[Tuple[int, ...]] = [()] * self.n_cliques
        self.down_axes: List[Tuple[int, ...]] = [()] * self.n_cliques
        self.down_shape_in_child: List[Tuple[int, ...]] = [()] * self.n_cliques
        for ci in range(1, self.n_cliques):
            p = self.parent[ci]
            sep = tuple(sorted(kt.cliques[ci] & kt.cliques[p]))
            self.sep_vars[ci] = sep
            sep_set = set(sep)
            self.up_axes[ci] = tuple(
                i for i, v in enumerate(self.clique_vars[ci]) if v not in sep_set
            )
            self.up_shape_in_parent[ci] = tuple(
                net.arity(v) if v in sep_set else 1 for v in self.clique_vars[p]
            )
            self.down_axes[ci] = tuple(
                i for i, v in enumerate(self.clique_vars[p]) if v not in sep_set
            )
            self.down_shape_in_child[ci] = tuple(
                net.arity(v) if v in sep_set else 1 for v in self.clique_vars[ci]
            )

        # Base log potentials: product of the assigned family CPTs.
        self.base_pots: List[np.ndarray] = [np.zeros(s) for s in self.shapes]
        with np.errstate(divide="ignore"):
            for v in range(n):
                ci = self.family_clique[v]
                ps = net.parents[v]
                labels = ps + (v,)
                arr = net.cpts[v].reshape(
                    tuple(net.arity(p) for p in ps) + (net.arity(v),)
                )
                order = tuple(int(i) for i in np.argsort(labels))
                arr = arr.transpose(order)
                labels_sorted = set(labels)
                shape = tuple(
                    net.arity(u) if u in labels_sorted else 1
                    for u in self.clique_vars[ci]
                )
                self.base_pots[ci] = self.base_pots[ci] + np.log(arr).reshape(shape)

    # ------------------------------------------------------------------
    # query plumbing

    def _validate_evidence(self, evidence: Dict[int, int]) -> None:
        for v, s in evidence.items():
            if not 0 <= v < self.net.n_variables:
                raise ValueError(f"evidence variable {v} out of range")
            if not 0 <= s < self.net.arity(v):
                raise ValueError(f"evidence state {s} out of range for variable {v}")

    def _masked_pots(self, evidence: Dict[int, int]) -> Tuple[Dict[int, np.ndarray], Set[int]]:
        """Copy-on-write evidence masking, plus the ancestor-closed set of
        cliques whose upward messages must actually be computed."""
        masked: Dict[int, np.ndarray] = {}
        for v, s in evidence.items():
            ci = self.family_clique[v]
            pot = masked.get(ci)
            if pot is None:
                pot = self.base_pots[ci].copy()
                masked[ci] = pot
            axis = self.axis_of[ci][v]
            keep = np.full(pot.shape[axis], -np.inf)
            keep[s] = 0.0
            shape = [1] * pot.ndim
            shape[axis] = pot.shape[axis]
            pot += keep.reshape(shape)
        dirty: Set[int] = set()
        for ci in masked:
            c = ci
            while c != -1 and c not in dirty:
                dirty.add(c)
                c = self.parent[c]
        return masked, dirty

    def _up_messages(
        self,
        masked: Dict[int, np.ndarray],
        dirty: Set[int],
        cost: List[int],
    ) -> Dict[int, np.ndarray]:
        """Sum-product messages toward clique 0 for the dirty set only;
        every other subtree's message is identically one."""
        ups: Dict[int, np.ndarray] = {}
        for ci in sorted(dirty, reverse=True):
            if ci == 0:
                continue
            total = masked.get(ci, self.base_pots[ci])
            for ch in self.children[ci]:
                if ch in ups:
                    total = total + ups[ch]
            cost[0] += total.size
            msg = _lse(total, self.up_axes[ci])
            ups[ci] = msg.reshape(self.up_shape_in_parent[ci])
            cost[0] += msg.size
        return ups

    def _belief_at(
        self,
        target_clique: int,
        masked: Dict[int, np.ndarray],
        dirty: Set[int],
        ups: Dict[int, np.ndarray],
        cost: List[int],
    ) -> np.ndarray:
        """Belief (log, unnormalized) at a clique: its potential, upward
        messages from its children, and the downward message along the
        path from the root."""
        path = [target_clique]
        while path[-1] != 0:
            path.append(self.parent[path[-1]])
        path.reverse()
        down: Optional[np.ndarray] = None
        for p, c in zip(path, path[1:]):
            total = masked.get(p, self.base_pots[p])
            if down is not None:
                total = total + down
            for ch in self.children[p]:
                if ch != c and ch in ups:
                    total = total + ups[ch]
            cost[0] += total.size
            msg = _lse(total, self.down_axes[c])
            down = msg.reshape(self.down_shape_in_child[c])
            cost[0] += msg.size
        total = masked.get(target_clique, self.base_pots[target_clique])
        if down is not None:
            total = total + down
        for ch in self.children[target_clique]:
            if ch in ups:
                total = total + ups[ch]
        cost[0] += total.size
        return total

    # ------------------------------------------------------------------
    # public queries

    def marginal_with_cost(
        self, evidence: Dict[int, int], target: int
    ) -> Tuple[np.ndarray, int]:
        if not 0 <= target < self.net.n_variables:
            raise ValueError(f"target variable {target} out of range")
        self._validate_evidence(evidence)
        cost = [0]
        masked, dirty = self._masked_pots(evidence)
        ups = self._up_messages(masked, dirty, cost)
        tc = self.family_clique[target]
        belief = self._belief_at(tc, masked, dirty, ups, cost)
        axis = self.axis_of[tc][target]
        other = tuple(i for i in range(belief.ndim) if i != axis)
        marg = _lse(belief, other)
        log_z = logsumexp(marg)
        if log_z == -np.inf:
            raise ValueError("impossible evidence: the observed states have probability zero")
        return np.exp(marg - log_z), cost[0]

    def marginal(self, evidence: Dict[int, int], target: int) -> np.ndarray:
        return self.marginal_with_cost(evidence, target)[0]

    def log_prob_evidence(self, evidence: Dict[int, int]) -> float:
        self._validate_evidence(evidence)
        cost = [0]
        masked, dirty = self._masked_pots(evidence)
        ups = self._up_messages(masked, dirty, cost)
        total = masked.get(0, self.base_pots[0])
        for ch in self.children[0]:
            if ch in ups:
                total = total + ups[ch]
        return float(logsumexp(total))

    def prob_evidence(self, evidence: Dict[int, int]) -> float:
        return float(math.exp(self.log_prob_evidence(evidence)))

    def mpe_with_cost(self, evidence: Dict[int, int]) -> Tuple[Dict[int, int], int]:
        """Most probable completion of the evidence, over all variables.

        Max-product sweep toward clique 0 with memoized argmaxes, then a
        root-to-leaves backtrack. Ties always take the lowest state
        index (first argmax occurrence in sorted variable order).
        """
        self._validate_evidence(evidence)
        cost = [0]
        masked, _ = self._masked_pots(evidence)
        msgs: Dict[int, np.ndarray] = {}
        arg: Dict[int, Tuple[np.ndarray, Tuple[int, ...]]] = {}
        for ci in range(self.n_cliques - 1, 0, -1):
            total = masked.get(ci, self.base_pots[ci])
            for ch in self.children[ci]:
                total = total + msgs.pop(ch)
            cost[0] += total.size
            sep_set = set(self.sep_vars[ci])
            sep_axes = tuple(
                i for i, v in enumerate(self.clique_vars[ci]) if v in sep_set
            )
            elim_axes = self.up_axes[ci]
            perm = sep_axes + elim_axes
            moved = total.transpose(perm)
            sep_shape = moved.shape[: len(sep_axes)]
            elim_shape = moved.shape[len(sep_axes):]
            flat = moved.reshape(sep_shape + (-1,))
            msgs[ci] = flat.max(axis=-1).reshape(self.up_shape_in_parent[ci])
            arg[ci] = (flat.argmax(axis=-1), elim_shape)
            cost[0] += flat.size

        total = masked.get(0, self.base_pots[0])
        for ch in self.children[0]:
            total = total + msgs.pop(ch)
        cost[0] += total.size
        if np.max(total) == -np.inf:
            raise ValueError("impossible evidence: the observed states have probability zero")
        assignment: Dict[int, int] = {}
        flat_idx = int(np.argmax(total))
        for v, s in zip(self.clique_vars[0], np.unravel_index(flat_idx, total.shape)):
            assignment[v] = int(s)
        for ci in range(1, self.n_cliques):
            sep_idx = tuple(assignment[v] for v in self.sep_vars[ci])
            table, elim_shape = arg[ci]
            flat_idx = int(table[sep_idx])
            elim_vars = tuple(
                self.clique_vars[ci][a] for a in self.up_axes[ci]
            )
            for v, s in zip(elim_vars, np.unravel_index(flat_idx, elim_shape)):
                assignment[v] = int(s)
        return assignment, cost[0]

    def mpe(self, evidence: Dict[int, int]) -> Dict[int, int]:
        return self.mpe_with_cost(evidence)[0]


def build_junction_tree(net: BayesNet, kt: Optional[KTree] = None) -> JunctionTree:
    """Junction tree straight from the k-tree the structure was grown in."""
    if kt is None:
        kt = net.ktree
    if kt is None:
        raise ValueError("network has no companion k-tree; pass one explicitly")
    return JunctionTree(net, kt)


def marginal(jt: JunctionTree, evidence: Dict[int, int], target: int) -> np.ndarray:
    """Posterior distribution of target given the evidence."""
    return jt.marginal(evidence, target)


def prob_evidence(jt: JunctionTree, evidence: Dict[int, int]) -> float:
    """Probability of the evidence; 0.0 when it is impossible."""
    return jt.prob_evidence(evidence)


def log_prob_evidence(jt: JunctionTree, evidence: Dict[int, int]) -> float:
    """Natural log of the evidence probability; -inf when impossible."""
    return jt.log_prob_evidence(evidence)


def mpe(jt: JunctionTree, evidence: Dict[int, int]) -> Dict[int, int]:
    """Most probable joint completion of the evidence, for all variables."""
    return jt.mpe(evidence)
