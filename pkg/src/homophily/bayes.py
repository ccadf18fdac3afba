"""Monte-Carlo NGE distributions, Bayes factors and crossover error rates.

Each replication draws four binomial counts (late and early generation in
the first wave, the pooled generation in both waves), runs them through the
Agresti-Coull point estimates and records the resulting NGE in pp.

Randomness comes from NumPy's Philox counter-based generator. Replications
are cut into fixed-size blocks and block ``b`` always uses the stream
``SeedSequence(seed, spawn_key=(b,))``, so results do not depend on how
blocks are spread over workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import NoOverlap, ValidationError, ZeroDensity
from .survey import (
    DEFAULT_ALPHA,
    DEFAULT_SCALE,
    GroupCount,
    age_effect,
    agresti_coull,
    generation_effect,
    net_generation_effect,
    z_for_alpha,
)

BLOCK_SIZE = 8192
DEFAULT_REPLICATIONS = 200_000
INCONCLUSIVE_LOW, INCONCLUSIVE_HIGH = 1 / 3, 3.0

ROLES = ("late_t", "early_t", "pooled_t", "pooled_t_plus")


@dataclass(frozen=True)
class SimGroup:
    n: int
    p: float

    def __post_init__(self):
        if self.n < 1:
            raise ValidationError(f"group size must be >= 1, got {self.n}")
        if not 0.0 <= self.p <= 1.0:
            raise ValidationError(f"success rate must lie in [0, 1], got {self.p}")


@dataclass(frozen=True)
class SimGroupSpec:
    late_t: SimGroup
    early_t: SimGroup
    pooled_t: SimGroup
    pooled_t_plus: SimGroup

    def groups(self) -> tuple[SimGroup, ...]:
        return tuple(getattr(self, r) for r in ROLES)

    @classmethod
    def from_counts(cls, rows: tuple[GroupCount, ...], alpha: float = DEFAULT_ALPHA) -> "SimGroupSpec":
        """H1 spec: sample sizes from ``rows``, rates at their estimated shares."""
        return cls(*(SimGroup(g.n, agresti_coull(g, alpha).point) for g in rows))


@dataclass(frozen=True)
class SimDistribution:
    samples: np.ndarray  # sorted NGE values, pp
    replications: int
    seed: int
    hypothesis: str

    @property
    def mean(self) -> float:
        return float(self.samples.mean())

    @property
    def mc_standard_error(self) -> float:
        if self.replications < 2:
            return math.nan
        return float(self.samples.std(ddof=1) / math.sqrt(self.replications))


@dataclass(frozen=True)
class BayesReport:
    k: float
    cer: float
    verdict: str
    observed: float
    h0_mean: float
    h1_mean: float
    replications: int
    seed: int
    warnings: tuple[str, ...] = ()


def _pooled_rate(a: SimGroup, b: SimGroup) -> float:
    return (a.n * a.p + b.n * b.p) / (a.n + b.n)


def null_rates(spec: SimGroupSpec) -> SimGroupSpec:
    """Equalize rates within each directly compared pair (GE = AE = 0)."""
    gen = _pooled_rate(spec.late_t, spec.early_t)
    age = _pooled_rate(spec.pooled_t, spec.pooled_t_plus)
    return SimGroupSpec(
        SimGroup(spec.late_t.n, gen),
        SimGroup(spec.early_t.n, gen),
        SimGroup(spec.pooled_t.n, age),
        SimGroup(spec.pooled_t_plus.n, age),
    )


def _block(spec: SimGroupSpec, seed: int, block: int, size: int, z2: float, scale: float) -> np.ndarray:
    ss = np.random.SeedSequence(seed, spawn_key=(block,))
    rng = np.random.Generator(np.random.Philox(ss))
    shares = []
    for g in spec.groups():
        x = rng.binomial(g.n, g.p, size)
        shares.append((x + z2 / 2) / (g.n + z2))
    late, early, p_t, p_tp = shares
    return 100.0 * ((late - early) + scale * (p_tp - p_t))


def simulate_nge(
    spec: SimGroupSpec,
    replications: int = DEFAULT_REPLICATIONS,
    seed: int = 0,
    scale: float = DEFAULT_SCALE,
    *,
    alpha: float = DEFAULT_ALPHA,
    hypothesis: str = "H1",
    workers: int = 1,
) -> SimDistribution:
    if replications < 1:
        raise ValueError("replications must be >= 1")
    z = z_for_alpha(alpha)
    z2 = z * z
    n_blocks = -(-replications // BLOCK_SIZE)
    sizes = [min(BLOCK_SIZE, replications - b * BLOCK_SIZE) for b in range(n_blocks)]

    def run(b):
        return _block(spec, seed, b, sizes[b], z2, scale)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, range(n_blocks)))
    else:
        parts = [run(b) for b in range(n_blocks)]
    samples = np.sort(np.concatenate(parts))
    samples.setflags(write=False)
    return SimDistribution(samples, replications, seed, hypothesis)


# -- density and error rates -----------------------------------------------------


def fd_bin_width(x: np.ndarray) -> float:
    q75, q25 = np.percentile(x, [75, 25])
    return float(2.0 * (q75 - q25) * x.size ** (-1.0 / 3.0))


def _kde(x: np.ndarray, at: float) -> float:
    # Silverman's rule of thumb
    sd = x.std(ddof=1) if x.size > 1 else 0.0
    iqr = np.subtract(*np.percentile(x, [75, 25]))
    spread = min(sd, iqr / 1.349) if iqr > 0 else sd
    if spread <= 0:
        return 0.0
    h = 0.9 * spread * x.size ** (-0.2)
    u = (at - x) / h
    return float(np.exp(-0.5 * u * u).sum() / (x.size * h * math.sqrt(2 * math.pi)))


def bayes_factor(observed: float, h0: SimDistribution, h1: SimDistribution) -> float:
    """Ratio of H0 to H1 sample densities at ``observed``.

    Densities are read from a shared Freedman-Diaconis histogram over the
    pooled samples. If either bin is empty, both densities switch to a
    Gaussian kernel estimate instead. If only one hypothesis has density
    there, K is ``inf`` (only H0) or ``0.0`` (only H1).
    """
    a, b = h0.samples, h1.samples
    if a.size < 2 or b.size < 2:
        raise ValidationError("Bayes factor needs at least two samples per hypothesis")
    pooled = np.concatenate([a, b])
    width = fd_bin_width(pooled)
    if width > 0:
        lo = pooled.min()
        k = math.floor((observed - lo) / width)
        left, right = lo + k * width, lo + (k + 1) * width
        c0 = int(np.searchsorted(a, right, "left") - np.searchsorted(a, left, "left"))
        c1 = int(np.searchsorted(b, right, "left") - np.searchsorted(b, left, "left"))
        if c0 > 0 and c1 > 0:
            return (c0 * b.size) / (c1 * a.size)
    d0, d1 = _kde(a, observed), _kde(b, observed)
    if d0 == 0.0 and d1 == 0.0:
        raise ZeroDensity(f"observed value {observed} lies outside the support of both hypotheses")
    if d1 == 0.0:
        return math.inf
    return d0 / d1


def histogram(h0: SimDistribution, h1: SimDistribution) -> list[tuple[float, float, float, float]]:
    """(bin_left, bin_right, h0_density, h1_density) on the shared FD grid."""
    pooled = np.concatenate([h0.samples, h1.samples])
    width = fd_bin_width(pooled) or 1.0
    lo, hi = pooled.min(), pooled.max()
    n_bins = max(1, math.ceil((hi - lo) / width) + 1)
    edges = lo + width * np.arange(n_bins + 1)
    d0, _ = np.histogram(h0.samples, bins=edges)
    d1, _ = np.histogram(h1.samples, bins=edges)
    d0 = d0 / (h0.samples.size * width)
    d1 = d1 / (h1.samples.size * width)
    return [(float(edges[i]), float(edges[i + 1]), float(d0[i]), float(d1[i])) for i in range(n_bins)]


def crossover_error_rate(h0: SimDistribution, h1: SimDistribution, direction: str) -> float:
    """Rate at which the one-sided test's size equals its beta under H1.

    For ``direction == "negative"`` H0 is rejected when NGE <= c; the
    threshold c is scanned over all sample values, and the rate is taken at
    the point where size and beta cross.
    """
    if direction == "negative":
        a, b = h0.samples, h1.samples
    elif direction == "positive":
        a, b = -h0.samples[::-1], -h1.samples[::-1]
    else:
        raise ValueError("direction must be 'negative' or 'positive'")
    cand = np.unique(np.concatenate([a, b]))
    size = np.searchsorted(a, cand, "right") / a.size
    beta = 1.0 - np.searchsorted(b, cand, "right") / b.size
    gap = size - beta  # non-decreasing in the threshold
    if np.any((size == 0) & (beta == 0)):
        raise NoOverlap("H0 and H1 samples do not overlap")
    i = int(np.searchsorted(gap, 0.0, "left"))
    if i == 0:
        return float(size[0] + beta[0]) / 2
    if i == cand.size:
        return float(size[-1] + beta[-1]) / 2
    lo_pt, hi_pt = i - 1, i
    # linear interpolation of the crossing between the bracketing thresholds
    g0, g1 = gap[lo_pt], gap[hi_pt]
    w = 0.0 if g1 == g0 else -g0 / (g1 - g0)
    s = size[lo_pt] + w * (size[hi_pt] - size[lo_pt])
    be = beta[lo_pt] + w * (beta[hi_pt] - beta[lo_pt])
    return float((s + be) / 2)


def verdict_for(k: float) -> str:
    if k <= INCONCLUSIVE_LOW:
        return "favors_H1"
    if k >= INCONCLUSIVE_HIGH:
        return "favors_H0"
    return "inconclusive"


def bayes_test(
    rows: tuple[GroupCount, ...],
    *,
    replications: int = DEFAULT_REPLICATIONS,
    seed: int = 0,
    alpha: float = DEFAULT_ALPHA,
    scale: float = DEFAULT_SCALE,
    workers: int = 1,
) -> tuple[BayesReport, SimDistribution, SimDistribution]:
    """Full H0-vs-H1 comparison for one gender/pair from its four count rows.

    The H0 and H1 runs use distinct seeds derived from ``seed``.
    """
    est = [agresti_coull(g, alpha) for g in rows]
    observed = 100.0 * net_generation_effect(
        generation_effect(est[0], est[1]), age_effect(est[2], est[3]), scale
    ).point
    h1_spec = SimGroupSpec.from_counts(rows, alpha)
    h1 = simulate_nge(h1_spec, replications, 2 * seed + 1, scale, alpha=alpha, hypothesis="H1", workers=workers)
    h0 = simulate_nge(null_rates(h1_spec), replications, 2 * seed, scale, alpha=alpha, hypothesis="H0", workers=workers)
    k = bayes_factor(observed, h0, h1)
    direction = "negative" if h1.mean < h0.mean else "positive"
    cer = crossover_error_rate(h0, h1, direction)
    notes = ("single replication: distribution is degenerate",) if replications == 1 else ()
    report = BayesReport(k, cer, verdict_for(k), observed, h0.mean, h1.mean, replications, seed, notes)
    return report, h0, h1
