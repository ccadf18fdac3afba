"""The NM transformation: hit target margins while keeping every cut-wise LL.

For an R x C seed, each of the (R-1)(C-1) row/column cuts dichotomizes the
table into a 2x2. The 2x2 closed form fixes the top-left cumulative mass of
the result at that cut; cells follow by inclusion-exclusion over the grid of
cumulative masses. Merging two adjacent categories only deletes one cut, so
the construction commutes with merging.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, InfeasibleResult, NotTwoByTwo
from .table import (
    AssociationMatrix,
    ContingencyTable,
    MarginSpec,
    generalized_ll,
    liu_lu,
    ll_from_cells,
    n11_from_ll,
)

FLOAT_SLACK = 1e-9


@dataclass(frozen=True)
class NmReport:
    result: ContingencyTable
    preserved_ll: AssociationMatrix
    achieved_ll: AssociationMatrix


def _fill_2x2(n11, r1, c1, total):
    return np.array([[n11, r1 - n11], [c1 - n11, total - r1 - c1 + n11]])


def _clean(cells: np.ndarray) -> np.ndarray:
    neg = np.argwhere(cells < -FLOAT_SLACK)
    if neg.size:
        i, j = neg[0]
        raise InfeasibleResult((int(i), int(j)), float(cells[i, j]))
    return np.where(cells < 0, 0.0, cells)


def nm_transform_2x2(seed: ContingencyTable, target: MarginSpec) -> ContingencyTable:
    if seed.shape != (2, 2) or target.shape != (2, 2):
        raise NotTwoByTwo("nm_transform_2x2 needs a 2x2 seed and 2x2 margins")
    lam = liu_lu(seed)
    r1, c1, total = target.row_sums[0], target.col_sums[0], target.total
    n11 = n11_from_ll(lam, r1, c1, total)
    return seed.with_values(_clean(_fill_2x2(n11, r1, c1, total)))


def nm_cells(seed: ContingencyTable, target: MarginSpec) -> np.ndarray:
    """Raw NM cells before the feasibility check (may contain negatives)."""
    if seed.shape != target.shape:
        raise DimensionMismatch(
            f"seed is {seed.shape[0]}x{seed.shape[1]}, margins are {target.shape[0]}x{target.shape[1]}"
        )
    v = seed.values
    n_rows, n_cols = v.shape
    seed_cum = v.cumsum(axis=0).cumsum(axis=1)
    seed_rows, seed_cols, seed_total = v.sum(axis=1).cumsum(), v.sum(axis=0).cumsum(), v.sum()
    rows_cum = target.row_sums.cumsum()
    cols_cum = target.col_sums.cumsum()
    total = target.total

    # cum[i, j]: mass of rows < i and cols < j in the result
    cum = np.zeros((n_rows + 1, n_cols + 1))
    cum[1:, n_cols] = rows_cum
    cum[n_rows, 1:] = cols_cum
    cum[n_rows, n_cols] = total
    for i in range(n_rows - 1):
        for j in range(n_cols - 1):
            lam = ll_from_cells(seed_cum[i, j], seed_rows[i], seed_cols[j], seed_total)
            cum[i + 1, j + 1] = n11_from_ll(lam, rows_cum[i], cols_cum[j], total)
    return cum[1:, 1:] - cum[:-1, 1:] - cum[1:, :-1] + cum[:-1, :-1]


def nm_transform(seed: ContingencyTable, target: MarginSpec) -> NmReport:
    """Transform ``seed`` to ``target`` margins preserving its generalized LL.

    Raises :class:`InfeasibleResult` when inclusion-exclusion yields a
    negative cell; clipping it would break LL preservation.
    """
    cells = _clean(nm_cells(seed, target))
    result = seed.with_values(cells)
    return NmReport(result, generalized_ll(seed), generalized_ll(result))
