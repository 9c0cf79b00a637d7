"""Categorical datasets with missing values.

A dataset is a rectangular table of categorical observations. Cells are
stored as integer state indices into per-variable state dictionaries;
missing cells hold the sentinel ``MISSING``. Datasets are treated as
immutable once built: every transformation returns a new instance.

The on-disk format is plain CSV (UTF-8, comma separated) with a header
row of variable names. Missing cells are written as a configurable
token, ``"?"`` by default. State dictionaries are rebuilt on load in
first-occurrence order, so a load/save cycle of a file is lossless.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

# Sentinel for an unobserved cell. All state indices are >= 0.
MISSING: int = -1


@dataclass
class CategoricalDataset:
    """Immutable table of categorical observations.

    variables: one name per column.
    states: per variable, the tuple of state labels; its length is the
        variable's arity and cell values index into it.
    cells: int32 array of shape (n_rows, n_variables); MISSING for
        unobserved cells.
    """

    variables: Tuple[str, ...]
    states: Tuple[Tuple[str, ...], ...]
    cells: np.ndarray

    def __post_init__(self) -> None:
        self.variables = tuple(self.variables)
        self.states = tuple(tuple(s) for s in self.states)
        cells = np.asarray(self.cells, dtype=np.int32)
        if cells.ndim != 2:
            raise ValueError("cells must be a 2-d array")
        if cells.shape[1] != len(self.variables):
            raise ValueError(
                f"cells have {cells.shape[1]} columns but "
                f"{len(self.variables)} variables are declared"
            )
        if len(self.states) != len(self.variables):
            raise ValueError("one state dictionary required per variable")
        if len(set(self.variables)) != len(self.variables):
            raise ValueError("duplicate variable names")
        for i, labels in enumerate(self.states):
            if len(labels) < 1:
                raise ValueError(f"variable {self.variables[i]!r} has no states")
            col = cells[:, i]
            observed = col[col != MISSING]
            if observed.size and (observed.min() < 0 or observed.max() >= len(labels)):
                raise ValueError(f"cell out of range for variable {self.variables[i]!r}")
        cells.flags.writeable = False
        self.cells = cells

    @property
    def n_variables(self) -> int:
        return len(self.variables)

    @property
    def n_rows(self) -> int:
        return int(self.cells.shape[0])

    def arity(self, i: int) -> int:
        return len(self.states[i])

    @property
    def arities(self) -> np.ndarray:
        return np.array([len(s) for s in self.states], dtype=np.int64)

    def is_complete(self) -> bool:
        return not bool((self.cells == MISSING).any())

    def with_cells(self, cells: np.ndarray) -> "CategoricalDataset":
        """New dataset with the same dictionaries and different cells."""
        return CategoricalDataset(self.variables, self.states, np.array(cells))


@dataclass
class ContingencyTable:
    """Joint counts of a child variable against its parent configurations.

    counts[cfg, x] is the number of rows where the parents take the
    configuration with index cfg and the child takes state x. The
    configuration index is row-major over the parent tuple with the
    last parent varying fastest. rows_used counts the rows where the
    whole family was observed; rows with any missing family cell are
    dropped before counting.
    """

    child: int
    parents: Tuple[int, ...]
    child_arity: int
    parent_arities: Tuple[int, ...]
    counts: np.ndarray
    rows_used: int

    @property
    def n_configs(self) -> int:
        return int(self.counts.shape[0])


def counts(ds: CategoricalDataset, child: int, parents: Sequence[int]) -> ContingencyTable:
    """Contingency table of child against a tuple of parent variables.

    Only rows where the child and every parent are observed contribute.
    """
    parents = tuple(int(p) for p in parents)
    n = ds.n_variables
    if not 0 <= child < n:
        raise ValueError(f"child index {child} out of range")
    for p in parents:
        if not 0 <= p < n:
            raise ValueError(f"parent index {p} out of range")
    if len(set(parents)) != len(parents):
        raise ValueError("duplicate parent indices")
    if child in parents:
        raise ValueError("child cannot be its own parent")

    cols = (child,) + parents
    sub = ds.cells[:, cols]
    observed = (sub != MISSING).all(axis=1)
    sub = sub[observed]

    child_arity = ds.arity(child)
    parent_arities = tuple(ds.arity(p) for p in parents)
    n_configs = 1
    for a in parent_arities:
        n_configs *= a

    # Config index: row-major over parents, last parent fastest.
    cfg = np.zeros(sub.shape[0], dtype=np.int64)
    for j, a in enumerate(parent_arities):
        cfg = cfg * a + sub[:, 1 + j]
    flat = cfg * child_arity + sub[:, 0]
    table = np.bincount(flat, minlength=n_configs * child_arity)
    table = table.reshape(n_configs, child_arity)
    return ContingencyTable(
        child=child,
        parents=parents,
        child_arity=child_arity,
        parent_arities=parent_arities,
        counts=table,
        rows_used=int(sub.shape[0]),
    )


def load_csv(path: str, missing_token: str = "?") -> CategoricalDataset:
    """Load a dataset from a CSV file with a header row.

    State dictionaries are built in first-occurrence order per column.
    A column whose cells are all missing is rejected: it has no states.
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        if not header or all(not h for h in header):
            raise ValueError(f"{path}: empty header row")
        if len(set(header)) != len(header):
            raise ValueError(f"{path}: duplicate variable names in header")
        n = len(header)
        lookups: List[dict] = [dict() for _ in range(n)]
        rows: List[List[int]] = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != n:
                raise ValueError(
                    f"{path}: row at line {lineno} has {len(row)} fields, expected {n}"
                )
            enc = []
            for j, tok in enumerate(row):
                if tok == missing_token:
                    enc.append(MISSING)
                else:
                    idx = lookups[j].setdefault(tok, len(lookups[j]))
                    enc.append(idx)
            rows.append(enc)
    for j, lk in enumerate(lookups):
        if not lk:
            raise ValueError(f"{path}: variable {header[j]!r} has no observed states")
    cells = np.array(rows, dtype=np.int32) if rows else np.zeros((0, n), dtype=np.int32)
    states = tuple(tuple(lk.keys()) for lk in lookups)
    return CategoricalDataset(tuple(header), states, cells)


def save_csv(ds: CategoricalDataset, path: str, missing_token: str = "?") -> None:
    """Write a dataset as CSV, encoding missing cells as missing_token."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(ds.variables)
        for row in ds.cells:
            writer.writerow(
                [
                    missing_token if v == MISSING else ds.states[j][v]
                    for j, v in enumerate(row)
                ]
            )


def inject_mcar(
    ds: CategoricalDataset, rate: float, seed: int
) -> Tuple[CategoricalDataset, np.ndarray]:
    """Hide observed cells independently with the given probability.

    Returns the degraded dataset and a boolean mask of the newly hidden
    cells. Cells that were already missing are never part of the mask,
    so the original values can be recovered as ds.cells[mask].
    """
    if not 0.0 <= rate <= 1.0:
        raise ValueError(f"rate must be in [0, 1], got {rate}")
    rng = np.random.default_rng(seed)
    draw = rng.random(ds.cells.shape)
    mask = (draw < rate) & (ds.cells != MISSING)
    cells = np.where(mask, MISSING, ds.cells)
    return ds.with_cells(cells), mask
