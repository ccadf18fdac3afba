"""Pseudo-panel inference on "very important" survey shares.

Population shares are Agresti-Coull estimates. A generation effect (GE)
compares a late and an early generation in the same wave, an age effect (AE)
follows one generation across two waves, and the net generation effect
(NGE = GE + scale * AE) puts both generations at the same age. All
quantities are fractions internally; :func:`pp` converts for display.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from scipy.special import ndtri

from .errors import (
    AlphaMismatch,
    KindMismatch,
    OutOfDomain,
    RhoOutOfRange,
    ValidationError,
    ZeroSigma,
)

DEFAULT_ALPHA = 0.4
DEFAULT_SCALE = 10 / 7
DEFAULT_LEVEL = 0.20

GENDERS = ("male", "female")
GENERATIONS = ("early_boomer", "late_boomer", "boomer_pooled", "early_genx", "late_genx", "genx_pooled")

# pair -> (late generation, early generation, pooled generation)
PAIRS = {
    "boomer": ("late_boomer", "early_boomer", "boomer_pooled"),
    "genx": ("late_genx", "early_genx", "genx_pooled"),
}
FIRST_WAVE, SECOND_WAVE = 2010, 2017

REJECT_NEGATIVE, ACCEPT_NULL, REJECT_POSITIVE = "reject_negative", "accept_null", "reject_positive"
NM, IPF, NEITHER = "NM", "IPF", "neither"


def normal_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def normal_quantile(p: float) -> float:
    if not 0.0 < p < 1.0:
        raise OutOfDomain(f"quantile level must lie in (0, 1), got {p!r}")
    return float(ndtri(p))


def z_for_alpha(alpha: float) -> float:
    if not 0.0 < alpha < 1.0:
        raise OutOfDomain(f"alpha must lie in (0, 1), got {alpha!r}")
    return normal_quantile(1.0 - alpha / 2.0)


def pp(x: float) -> float:
    """Fraction to percentage points."""
    return 100.0 * x


@dataclass(frozen=True)
class GroupCount:
    gender: str
    generation: str
    survey_year: int
    n: int
    x: int

    def __post_init__(self):
        if self.n < 1:
            raise ValidationError(f"{self.key}: n must be >= 1, got {self.n}")
        if not 0 <= self.x <= self.n:
            raise ValidationError(f"{self.key}: need 0 <= x <= n, got x={self.x}, n={self.n}")

    @property
    def key(self) -> tuple[str, str, int]:
        return self.gender, self.generation, self.survey_year

    @property
    def sample_share(self) -> float:
        return self.x / self.n


@dataclass(frozen=True)
class EstimateCI:
    point: float
    sigma: float
    ci_low: float
    ci_high: float
    alpha: float
    z: float

    @classmethod
    def symmetric(cls, point, sigma, alpha, z):
        return cls(point, sigma, point - z * sigma, point + z * sigma, alpha, z)


@dataclass(frozen=True)
class EffectEstimate:
    kind: str
    point: float
    sigma: float
    ci_low: float
    ci_high: float
    alpha: float
    z: float
    rho: float | None = None
    scale: float | None = None

    @classmethod
    def symmetric(cls, kind, point, sigma, alpha, z, **extra):
        return cls(kind, point, sigma, point - z * sigma, point + z * sigma, alpha, z, **extra)


def agresti_coull(g: GroupCount, alpha: float = DEFAULT_ALPHA) -> EstimateCI:
    z = z_for_alpha(alpha)
    z2 = z * z
    ps = (g.x + z2 / 2) / (g.n + z2)
    sigma = math.sqrt(ps * (1 - ps) / (g.n + z2))
    return EstimateCI.symmetric(ps, sigma, alpha, z)


def _same_alpha(a, b):
    if a.alpha != b.alpha:
        raise AlphaMismatch(f"estimates use different alphas: {a.alpha} vs {b.alpha}")


def generation_effect(late: EstimateCI, early: EstimateCI) -> EffectEstimate:
    _same_alpha(late, early)
    sigma = math.hypot(late.sigma, early.sigma)
    return EffectEstimate.symmetric("GE", late.point - early.point, sigma, late.alpha, late.z)


def age_effect(at_t: EstimateCI, at_t_plus: EstimateCI, rho: float = 0.0) -> EffectEstimate:
    """Change of one generation's share between waves.

    ``rho`` is the assumed correlation of the two wave estimates; it only
    enters the standard error.
    """
    _same_alpha(at_t, at_t_plus)
    if not 0.0 <= rho <= 1.0:
        raise RhoOutOfRange(f"rho must lie in [0, 1], got {rho!r}")
    s1, s2 = at_t.sigma, at_t_plus.sigma
    var = s1 * s1 + s2 * s2 - 2 * rho * s1 * s2
    sigma = math.sqrt(max(var, 0.0))
    return EffectEstimate.symmetric(
        "AE", at_t_plus.point - at_t.point, sigma, at_t.alpha, at_t.z, rho=rho
    )


def net_generation_effect(ge: EffectEstimate, ae: EffectEstimate, scale: float = DEFAULT_SCALE) -> EffectEstimate:
    if ge.kind != "GE" or ae.kind != "AE":
        raise KindMismatch(f"expected GE and AE, got {ge.kind} and {ae.kind}")
    _same_alpha(ge, ae)
    sigma = math.sqrt(ge.sigma ** 2 + scale ** 2 * ae.sigma ** 2)
    return EffectEstimate.symmetric(
        "NGE", ge.point + scale * ae.point, sigma, ge.alpha, ge.z, rho=ae.rho, scale=scale
    )


def one_sided_p(e: EffectEstimate, alternative: str) -> float:
    """Normal z-test p-value of ``effect == 0`` against a one-sided alternative."""
    if e.sigma <= 0:
        raise ZeroSigma(f"{e.kind} has zero standard error")
    zstat = e.point / e.sigma
    if alternative == "negative":
        return normal_cdf(zstat)
    if alternative == "positive":
        return normal_cdf(-zstat)
    raise ValueError("alternative must be 'negative' or 'positive'")


def decide(e: EffectEstimate, level: float = DEFAULT_LEVEL, alternatives: Sequence[str] = ("negative", "positive")) -> str:
    """Outcome of the one-sided test(s) of ``e`` at significance ``level``."""
    if "negative" in alternatives and one_sided_p(e, "negative") < level:
        return REJECT_NEGATIVE
    if "positive" in alternatives and one_sided_p(e, "positive") < level:
        return REJECT_POSITIVE
    return ACCEPT_NULL


# Rows: female outcome; columns: male outcome (negative, null, positive).
_BOOMER_GRID = {
    REJECT_NEGATIVE: {REJECT_NEGATIVE: NM, ACCEPT_NULL: NM, REJECT_POSITIVE: NEITHER},
    ACCEPT_NULL: {REJECT_NEGATIVE: NM, ACCEPT_NULL: NEITHER, REJECT_POSITIVE: IPF},
    REJECT_POSITIVE: {REJECT_NEGATIVE: NEITHER, ACCEPT_NULL: IPF, REJECT_POSITIVE: IPF},
}
# GenX only has a positive alternative; a negative rejection backs neither method.
_GENX_GRID = {
    ACCEPT_NULL: {ACCEPT_NULL: IPF, REJECT_POSITIVE: NM},
    REJECT_POSITIVE: {ACCEPT_NULL: NM, REJECT_POSITIVE: NM},
}


@dataclass(frozen=True)
class VerdictInput:
    male_boomer: str
    female_boomer: str
    male_genx: str
    female_genx: str


def boomer_verdict(male: str, female: str) -> str:
    return _BOOMER_GRID[female][male]


def genx_verdict(male: str, female: str) -> str:
    return _GENX_GRID.get(female, {}).get(male, NEITHER)


def method_verdict(v: VerdictInput) -> str:
    boomer = boomer_verdict(v.male_boomer, v.female_boomer)
    genx = genx_verdict(v.male_genx, v.female_genx)
    return boomer if boomer == genx and boomer != NEITHER else NEITHER


# -- pipeline ------------------------------------------------------------------


@dataclass(frozen=True)
class PairAnalysis:
    """Everything computed for one gender and one generation pair."""

    gender: str
    pair: str
    late: EstimateCI
    early: EstimateCI
    pooled_t: EstimateCI
    pooled_t_plus: EstimateCI
    ge: EffectEstimate
    ae: EffectEstimate
    nge: EffectEstimate
    counts: tuple[GroupCount, ...] = field(repr=False, default=())

    def p_value(self, alternative: str) -> float:
        return one_sided_p(self.nge, alternative)


def index_counts(counts: Iterable[GroupCount]) -> dict[tuple[str, str, int], GroupCount]:
    out = {}
    for g in counts:
        if g.key in out:
            raise ValidationError(f"duplicate count row for {g.key}")
        out[g.key] = g
    return out


def pair_counts(counts, gender: str, pair: str) -> tuple[GroupCount, GroupCount, GroupCount, GroupCount]:
    """The (late, early, pooled@t, pooled@t+dt) rows for one comparison."""
    idx = counts if isinstance(counts, dict) else index_counts(counts)
    late, early, pooled = PAIRS[pair]
    keys = [
        (gender, late, FIRST_WAVE),
        (gender, early, FIRST_WAVE),
        (gender, pooled, FIRST_WAVE),
        (gender, pooled, SECOND_WAVE),
    ]
    missing = [k for k in keys if k not in idx]
    if missing:
        raise ValidationError(f"missing count rows: {missing}")
    return tuple(idx[k] for k in keys)


def analyze_pair(
    counts,
    gender: str,
    pair: str,
    *,
    rho: float = 0.0,
    alpha: float = DEFAULT_ALPHA,
    scale: float = DEFAULT_SCALE,
) -> PairAnalysis:
    rows = pair_counts(counts, gender, pair)
    late, early, pooled_t, pooled_tp = (agresti_coull(g, alpha) for g in rows)
    ge = generation_effect(late, early)
    ae = age_effect(pooled_t, pooled_tp, rho)
    nge = net_generation_effect(ge, ae, scale)
    return PairAnalysis(gender, pair, late, early, pooled_t, pooled_tp, ge, ae, nge, rows)


def verdict_from_analyses(analyses: dict[tuple[str, str], PairAnalysis], level: float = DEFAULT_LEVEL) -> tuple[VerdictInput, str]:
    """Test all four NGEs at ``level`` and combine the decisions."""
    v = VerdictInput(
        male_boomer=decide(analyses["male", "boomer"].nge, level),
        female_boomer=decide(analyses["female", "boomer"].nge, level),
        male_genx=decide(analyses["male", "genx"].nge, level, ("positive",)),
        female_genx=decide(analyses["female", "genx"].nge, level, ("positive",)),
    )
    return v, method_verdict(v)


def parse_scale(text: str) -> float:
    """Accept ``10/7`` as well as plain decimals."""
    try:
        return float(Fraction(text.strip()))
    except (ValueError, ZeroDivisionError):
        raise ValueError(f"cannot parse scale {text!r}") from None
