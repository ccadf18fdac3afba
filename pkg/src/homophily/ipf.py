"""Iterative proportional fitting of a seed table to target margins."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    MaxIterationsExceeded,
    ZeroColWithPositiveTarget,
    ZeroRowWithPositiveTarget,
)
from .table import ContingencyTable, MarginSpec

DEFAULT_TOLERANCE = 1e-10
DEFAULT_MAX_ITERATIONS = 10_000


@dataclass(frozen=True)
class IpfConfig:
    """How long to iterate.

    With ``iterations`` set, exactly that many row+column passes are run and
    ``tolerance`` is ignored. Otherwise iteration stops once the largest
    absolute margin residual is at most ``tolerance``.
    """

    iterations: int | None = None
    tolerance: float = DEFAULT_TOLERANCE
    max_iterations: int = DEFAULT_MAX_ITERATIONS
    start: str = "rows"

    def __post_init__(self):
        if self.iterations is not None and self.iterations < 1:
            raise ValueError("fixed iteration count must be >= 1")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.start not in ("rows", "cols"):
            raise ValueError("start must be 'rows' or 'cols'")

    @classmethod
    def fixed(cls, n: int) -> "IpfConfig":
        return cls(iterations=n)

    @classmethod
    def converge(cls, tolerance: float = DEFAULT_TOLERANCE, max_iterations: int = DEFAULT_MAX_ITERATIONS) -> "IpfConfig":
        return cls(tolerance=tolerance, max_iterations=max_iterations)


@dataclass(frozen=True)
class IpfReport:
    result: ContingencyTable
    iterations_used: int
    max_margin_residual: float


def _check_shape(t: ContingencyTable, target: MarginSpec):
    if t.shape != target.shape:
        raise DimensionMismatch(f"table is {t.shape[0]}x{t.shape[1]}, margins are {target.shape[0]}x{target.shape[1]}")


def _scale_rows(v: np.ndarray, target: np.ndarray) -> np.ndarray:
    current = v.sum(axis=1)
    zero = np.flatnonzero((current == 0) & (target > 0))
    if zero.size:
        raise ZeroRowWithPositiveTarget(int(zero[0]))
    return v * (target / current)[:, None]


def _scale_cols(v: np.ndarray, target: np.ndarray) -> np.ndarray:
    current = v.sum(axis=0)
    zero = np.flatnonzero((current == 0) & (target > 0))
    if zero.size:
        raise ZeroColWithPositiveTarget(int(zero[0]))
    return v * (target / current)[None, :]


def ipf_step_rows(t: ContingencyTable, target: MarginSpec) -> ContingencyTable:
    """Rescale each row of ``t`` to its target sum."""
    _check_shape(t, target)
    return t.with_values(_scale_rows(t.values, target.row_sums))


def ipf_step_cols(t: ContingencyTable, target: MarginSpec) -> ContingencyTable:
    """Rescale each column of ``t`` to its target sum."""
    _check_shape(t, target)
    return t.with_values(_scale_cols(t.values, target.col_sums))


def margin_residual(v: np.ndarray, target: MarginSpec) -> float:
    return float(
        max(
            np.max(np.abs(v.sum(axis=1) - target.row_sums)),
            np.max(np.abs(v.sum(axis=0) - target.col_sums)),
        )
    )


def ipf_transform(seed: ContingencyTable, target: MarginSpec, cfg: IpfConfig | None = None) -> IpfReport:
    """Alternate row and column rescaling of ``seed`` towards ``target``.

    One iteration is a row step followed by a column step (or the reverse
    when ``cfg.start == "cols"``). Structural zeros stay zero.
    """
    cfg = cfg or IpfConfig()
    _check_shape(seed, target)
    steps = [(_scale_rows, target.row_sums), (_scale_cols, target.col_sums)]
    if cfg.start == "cols":
        steps.reverse()

    v = seed.values
    limit = cfg.iterations if cfg.iterations is not None else cfg.max_iterations
    residual = margin_residual(v, target)
    used = 0
    for used in range(1, limit + 1):
        for step, goal in steps:
            v = step(v, goal)
        residual = margin_residual(v, target)
        if cfg.iterations is None and residual <= cfg.tolerance:
            break
    else:
        if cfg.iterations is None:
            raise MaxIterationsExceeded(used, residual)
    return IpfReport(seed.with_values(v), used, residual)
