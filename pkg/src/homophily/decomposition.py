"""Additive decomposition, with interaction, of the change in a table statistic.

The change between an early and a late table is split using counterfactual
tables that combine one table's association ("preferences") with the other
table's margins ("availability").
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

from .errors import DimensionMismatch, NotSquare
from .ipf import IpfConfig, ipf_transform
from .nm import nm_transform
from .table import ContingencyTable, apply_merges, homogamy_share, margins_of

METHODS = ("ipf", "nm")

Statistic = Callable[[ContingencyTable], float]


@dataclass(frozen=True)
class CounterfactualSpec:
    preferences_from: ContingencyTable
    margins_from: ContingencyTable
    method: str
    ipf_config: IpfConfig | None = None


@dataclass(frozen=True)
class DecompositionResult:
    total: float
    preference_effect: float
    availability_effect: float
    interaction: float
    method: str
    statistic: str
    base: str = "early"

    def as_row(self) -> dict[str, float | str]:
        return {
            "method": self.method,
            "statistic": self.statistic,
            "base": self.base,
            "total": self.total,
            "preference_effect": self.preference_effect,
            "availability_effect": self.availability_effect,
            "interaction": self.interaction,
        }


def counterfactual(spec: CounterfactualSpec) -> ContingencyTable:
    """Seed ``preferences_from`` transformed to the margins of ``margins_from``."""
    seed, other = spec.preferences_from, spec.margins_from
    if seed.shape != other.shape:
        raise DimensionMismatch(f"tables are {seed.shape} and {other.shape}")
    target = margins_of(other)
    if spec.method == "ipf":
        return ipf_transform(seed, target, spec.ipf_config).result
    if spec.method == "nm":
        return nm_transform(seed, target).result
    raise ValueError(f"unknown method {spec.method!r}; expected one of {METHODS}")


def _stat_name(statistic) -> str:
    return getattr(statistic, "__name__", "statistic")


def _decompose(f, early, late, method, statistic, base) -> DecompositionResult:
    ee, ll = f(early, early), f(late, late)
    total = ll - ee
    if base == "early":
        pref = f(late, early) - ee
        avail = f(early, late) - ee
    elif base == "late":
        pref = ll - f(early, late)
        avail = ll - f(late, early)
    else:
        raise ValueError("base must be 'early' or 'late'")
    return DecompositionResult(
        total=total,
        preference_effect=pref,
        availability_effect=avail,
        interaction=total - pref - avail,
        method=method,
        statistic=_stat_name(statistic),
        base=base,
    )


def decompose_change(
    early: ContingencyTable,
    late: ContingencyTable,
    method: str,
    statistic: Statistic = homogamy_share,
    *,
    base: str = "early",
    ipf_config: IpfConfig | None = None,
    round_tables: bool = False,
) -> DecompositionResult:
    """Split ``statistic(late) - statistic(early)`` into three components.

    ``f(prefs, margins)`` is the statistic of the counterfactual table. With
    the early base, the preference effect is ``f(late, early) - f(early, early)``
    and the availability effect ``f(early, late) - f(early, early)``; the
    interaction is whatever remains of the total. ``round_tables`` rounds
    every counterfactual to integers before the statistic is taken.
    """
    if early.shape != late.shape:
        raise DimensionMismatch(f"tables are {early.shape} and {late.shape}")
    if early.shape[0] != early.shape[1]:
        raise NotSquare("decomposition needs square tables")

    def f(prefs, margins):
        t = counterfactual(CounterfactualSpec(prefs, margins, method, ipf_config))
        return statistic(t.rounded() if round_tables else t)

    return _decompose(f, early, late, method, statistic, base)


def granularity_sensitivity(
    early: ContingencyTable,
    late: ContingencyTable,
    method: str,
    merge_plan: Sequence[tuple[str, int]],
    statistic: Statistic = homogamy_share,
    *,
    base: str = "early",
    ipf_config: IpfConfig | None = None,
    round_tables: bool = False,
) -> tuple[DecompositionResult, DecompositionResult]:
    """Decompose with categories merged before vs after the transformation.

    Returns ``(merge_before, merge_after)``. When ``round_tables`` is set the
    unmerged counterfactuals are rounded before merging, as a published
    rounded table would be.
    """
    before = decompose_change(
        apply_merges(early, merge_plan),
        apply_merges(late, merge_plan),
        method,
        statistic,
        base=base,
        ipf_config=ipf_config,
        round_tables=round_tables,
    )

    def f(prefs, margins):
        t = counterfactual(CounterfactualSpec(prefs, margins, method, ipf_config))
        if round_tables:
            t = t.rounded()
        return statistic(apply_merges(t, merge_plan))

    if early.shape != late.shape:
        raise DimensionMismatch(f"tables are {early.shape} and {late.shape}")
    after = _decompose(f, early, late, method, statistic, base)
    return before, after
