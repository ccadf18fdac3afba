"""Regenerate the published worked numbers and compare them with fixtures.

Each check function returns a list of :class:`Check` records for one
acceptance criterion. ``run_repro`` runs any subset of them; the CLI and the
acceptance tests both go through here.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .bayes import DEFAULT_REPLICATIONS, bayes_test
from .decomposition import decompose_change, granularity_sensitivity
from .errors import InfeasibleResult
from .io import bundled_counts, bundled_table
from .ipf import IpfConfig, ipf_step_cols, ipf_step_rows, ipf_transform
from .nm import nm_cells, nm_transform
from .survey import (
    ACCEPT_NULL,
    IPF,
    NEITHER,
    NM,
    REJECT_NEGATIVE,
    REJECT_POSITIVE,
    VerdictInput,
    analyze_pair,
    index_counts,
    method_verdict,
    pair_counts,
    pp,
    verdict_from_analyses,
)
from .table import (
    COL,
    ROW,
    generalized_ll,
    homogamy_share,
    make_table,
    margins_of,
    merge_adjacent,
    odds_ratio,
)

DEFAULT_SEED = 20100217
WORKED_EXAMPLES = "numerical examples, IPF/NM comparison"


@dataclass(frozen=True)
class Check:
    criterion: int
    name: str
    expected: object
    actual: object
    passed: bool
    source: str
    tolerance: float | None = None

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        tol = f" (tol {self.tolerance:g})" if self.tolerance is not None else ""
        return f"{tag} [{self.criterion}] {self.name}: expected {_fmt(self.expected)}, got {_fmt(self.actual)}{tol}  <{self.source}>"


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.6g}"
    if isinstance(v, np.ndarray):
        return np.array2string(v, precision=4, separator=", ", max_line_width=10_000).replace("\n", "")
    return str(v)


def _close(criterion, name, expected, actual, tol, source) -> Check:
    ok = abs(actual - expected) <= tol + 1e-12
    return Check(criterion, name, expected, actual, bool(ok), source, tol)


def _cells_close(criterion, name, expected, actual, tol, source) -> Check:
    expected, actual = np.asarray(expected, float), np.asarray(actual, float)
    ok = expected.shape == actual.shape and np.max(np.abs(expected - actual)) <= tol + 1e-12
    return Check(criterion, name, expected, actual, bool(ok), source, tol)


def _cells_equal(criterion, name, expected, actual, source) -> Check:
    expected, actual = np.asarray(expected, float), np.asarray(actual, float)
    ok = expected.shape == actual.shape and np.array_equal(expected, actual)
    return Check(criterion, name, expected, actual, bool(ok), source)


def _tables():
    return {k: bundled_table(k) for k in ("P_num1", "Q_num1", "P_num2", "Q_num2")}


# -- 1. IPF fixtures ---------------------------------------------------------------


def check_ipf_fixtures() -> list[Check]:
    t = _tables()
    p1 = margins_of(t["P_num1"])
    q1 = ipf_step_rows(t["Q_num1"], p1)
    q2 = ipf_step_cols(q1, p1)
    four1 = ipf_transform(t["Q_num1"], p1, IpfConfig.fixed(4)).result.rounded()
    four2 = ipf_transform(t["Q_num2"], margins_of(t["P_num2"]), IpfConfig.fixed(4)).result.rounded()
    return [
        _cells_equal(1, "Q' after row step", [[600, 600], [80, 720]], q1.values, WORKED_EXAMPLES),
        _cells_close(1, "Q'' after column step", [[529.41, 636.36], [70.59, 763.64]], q2.values, 0.005, WORKED_EXAMPLES),
        _cells_equal(1, "IPF num1, 4 iterations, rounded", [[534, 665], [66, 735]], four1.values, WORKED_EXAMPLES),
        _cells_equal(1, "IPF num2, 4 iterations, rounded", [[528, 475, 197], [72, 325, 403]], four2.values, WORKED_EXAMPLES),
    ]


# -- 2. IPF non-commutativity ---------------------------------------------------------


def check_ipf_noncommutativity() -> list[Check]:
    t = _tables()
    cfg = IpfConfig.fixed(4)
    direct = ipf_transform(t["Q_num1"], margins_of(t["P_num1"]), cfg).result
    merged_after = merge_adjacent(ipf_transform(t["Q_num2"], margins_of(t["P_num2"]), cfg).result, COL, 1)
    gap = float(np.max(np.abs(direct.values - merged_after.values)))

    conv = IpfConfig.converge()
    direct_c = ipf_transform(t["Q_num1"], margins_of(t["P_num1"]), conv).result
    after_c = merge_adjacent(ipf_transform(t["Q_num2"], margins_of(t["P_num2"]), conv).result, COL, 1)
    gap_c = float(np.max(np.abs(direct_c.values - after_c.values)))

    before, after = granularity_sensitivity(
        t["P_num2"], t["Q_num2"], "ipf", [(COL, 1)], ipf_config=cfg, round_tables=True
    )
    src = f"{WORKED_EXAMPLES}; 3.45 pp vs 2.8 pp"
    return [
        Check(2, "merged-after differs from merged-before (4 iterations), max cell gap >= 5", ">= 5", gap, gap >= 5, WORKED_EXAMPLES),
        Check(2, "gap persists at convergence", "> 1", gap_c, gap_c > 1, WORKED_EXAMPLES),
        _close(2, "IPF preference effect, merged before", 0.0345, before.preference_effect, 0.0005, src),
        _close(2, "IPF preference effect, merged after", 0.028, after.preference_effect, 0.0005, src),
    ]


# -- 3. NM fixtures --------------------------------------------------------------------


def check_nm_fixtures() -> list[Check]:
    t = _tables()
    nm1 = nm_transform(t["Q_num1"], margins_of(t["P_num1"])).result
    nm2 = merge_adjacent(nm_transform(t["Q_num2"], margins_of(t["P_num2"])).result, COL, 1)
    dec = decompose_change(t["P_num1"], t["Q_num1"], "nm")
    expected = [[520, 680], [80, 720]]
    return [
        _cells_close(3, "NM num1", expected, nm1.values, 1e-9, WORKED_EXAMPLES),
        _cells_close(3, "NM num2 merged after", expected, nm2.values, 1e-9, WORKED_EXAMPLES),
        _close(3, "NM preference effect", 0.02, dec.preference_effect, 1e-12, "footnote: 2 pp"),
    ]


# -- 4. NM commutativity -----------------------------------------------------------------


def random_table_pair(rng: np.random.Generator, max_dim: int = 4):
    n_rows, n_cols = rng.integers(2, max_dim + 1, size=2)
    seed = make_table(rng.uniform(1, 100, size=(n_rows, n_cols)))
    other = make_table(rng.uniform(1, 100, size=(n_rows, n_cols)) * rng.uniform(0.2, 5))
    return seed, margins_of(other)


def all_merges(shape):
    return [(ROW, k) for k in range(shape[0] - 1)] + [(COL, k) for k in range(shape[1] - 1)]


@dataclass
class SweepResult:
    feasible: int = 0
    merges: int = 0
    max_gap: float = 0.0
    skipped: int = 0
    raw_gap: float = 0.0
    # merges where exactly one of the two paths raised InfeasibleResult
    asymmetric_failures: int = 0
    merged_failed_only: int = 0


def nm_commutativity_sweep(n_pairs: int = 1000, seed: int = DEFAULT_SEED, max_dim: int = 4, max_draws: int = 200_000) -> SweepResult:
    """Compare merge-then-transform with transform-then-merge on random pairs.

    Pairs whose unmerged transform is infeasible are not counted as feasible;
    for those, the unchecked cells of both paths are still compared, and
    every merge where only one path raises is tallied.
    """
    rng = np.random.default_rng(seed)
    out = SweepResult()
    draws = 0
    while out.feasible < n_pairs and draws < max_draws:
        draws += 1
        s, target = random_table_pair(rng, max_dim)
        try:
            full = nm_transform(s, target).result
        except InfeasibleResult:
            full = None
        raw = nm_cells(s, target)
        if full is None:
            out.skipped += 1
        else:
            out.feasible += 1
        for axis, k in all_merges(s.shape):
            ms, mt = merge_adjacent(s, axis, k), target.merged(axis, k)
            out.raw_gap = max(out.raw_gap, float(np.max(np.abs(_merge_raw(raw, axis, k) - nm_cells(ms, mt)))))
            try:
                rhs = nm_transform(ms, mt).result.values
            except InfeasibleResult:
                rhs = None
            if (full is None) != (rhs is None):
                out.asymmetric_failures += 1
                out.merged_failed_only += rhs is None
            if full is None or rhs is None:
                continue
            out.merges += 1
            out.max_gap = max(out.max_gap, float(np.max(np.abs(merge_adjacent(full, axis, k).values - rhs))))
    return out


def _merge_raw(cells: np.ndarray, axis: str, k: int) -> np.ndarray:
    if axis == ROW:
        return np.vstack([cells[:k], cells[k] + cells[k + 1], cells[k + 2:]])
    return np.hstack([cells[:, :k], (cells[:, k] + cells[:, k + 1])[:, None], cells[:, k + 2:]])


def check_nm_commutativity(n_pairs: int = 1000, seed: int = DEFAULT_SEED) -> list[Check]:
    r = nm_commutativity_sweep(n_pairs, seed)
    src = "NM commutes with merging neighboring categories"
    return [
        Check(4, f"feasible random pairs drawn (skipped {r.skipped} infeasible)", n_pairs, r.feasible, r.feasible == n_pairs, src),
        Check(4, f"merge/transform commute on {r.merges} merges, max gap", "<= 1e-9", r.max_gap, r.max_gap <= 1e-9, src, 1e-9),
        Check(4, "unchecked cells commute on every draw, max gap", "<= 1e-9", r.raw_gap, r.raw_gap <= 1e-9, src, 1e-9),
        Check(
            4,
            f"infeasible draws fail identically on both paths ({r.merged_failed_only} merged-only failures)",
            0,
            r.asymmetric_failures,
            r.asymmetric_failures == 0,
            src,
        ),
    ]


# -- 5. survey tables --------------------------------------------------------------------

# (late, early, pooled@2010, pooled@2017): (sample share, PS, PS low, PS high)
_GROUPS = {
    ("male", "boomer"): [(33.3, 33.5, 28.9, 38.1), (44.6, 44.7, 39.2, 50.3), (38.4, 38.4, 35.9, 40.9), (29.3, 29.3, 27.9, 30.7)],
    ("female", "boomer"): [(34.8, 34.9, 30.7, 39.1), (38.1, 38.2, 33.8, 42.6), (38.4, 38.4, 36.1, 40.8), (36.1, 36.1, 34.7, 37.5)],
    ("male", "genx"): [(44.4, 44.5, 38.3, 50.7), (31.1, 31.4, 26.4, 36.3), (38.1, 38.1, 35.0, 41.2), (35.7, 35.7, 34.3, 37.2)],
    ("female", "genx"): [(45.3, 45.3, 39.6, 51.1), (40.0, 40.1, 34.8, 45.4), (41.5, 41.5, 38.5, 44.5), (39.7, 39.7, 38.2, 41.3)],
}
_GE = {
    ("male", "boomer"): (-11.2, -18.4, -4.0),
    ("female", "boomer"): (-3.3, -9.4, 2.8),
    ("male", "genx"): (13.2, 5.2, 21.1),
    ("female", "genx"): (5.2, -2.6, 13.0),
}
# rho -> (AE, NGE) each as (point, low, high)
_EFFECTS = {
    0.0: {
        ("male", "boomer"): ((-9.1, -11.9, -6.2), (-24.2, -32.5, -15.9)),
        ("female", "boomer"): ((-2.3, -5.1, 0.0), (-6.6, -13.9, 0.0)),
        ("male", "genx"): ((-2.4, -5.8, 0.0), (9.8, 0.4, 19.1)),
        ("female", "genx"): ((-1.8, -5.2, 1.6), (2.7, -6.5, 11.8)),
    },
    1.0: {
        ("male", "boomer"): ((-9.1, -10.2, -8.0), (-24.2, -31.5, -16.8)),
        ("female", "boomer"): ((-2.3, -3.3, -1.4), (-6.6, -12.9, -0.4)),
        ("male", "genx"): ((-2.4, -4.0, -0.8), (9.8, 1.5, 18.0)),
        ("female", "genx"): ((-1.8, -3.3, -0.3), (2.7, -5.4, 10.7)),
    },
}
_TABLE_NO = {(0.0, "boomer"): 3, (0.0, "genx"): 4, (1.0, "boomer"): 5, (1.0, "genx"): 6}
_ROLE_NAMES = ("late", "early", "pooled 2010", "pooled 2017")
POINT_TOL, CI_TOL = 0.05, 0.1


def survey_table_checks(counts=None) -> list[Check]:
    idx = index_counts(counts or bundled_counts())
    out = []
    for rho in (0.0, 1.0):
        for (gender, pair), groups in _GROUPS.items():
            src = f"appendix table {_TABLE_NO[rho, pair]}"
            a = analyze_pair(idx, gender, pair, rho=rho)
            rows = pair_counts(idx, gender, pair)
            ests = (a.late, a.early, a.pooled_t, a.pooled_t_plus)
            label = f"t{_TABLE_NO[rho, pair]} {gender} {pair}"
            for role, g, est, (share, ps, lo, hi) in zip(_ROLE_NAMES, rows, ests, groups):
                out.append(_close(5, f"{label} {role} sample share", share, pp(g.sample_share), POINT_TOL, src))
                out.append(_close(5, f"{label} {role} PS", ps, pp(est.point), POINT_TOL, src))
                out.append(_close(5, f"{label} {role} PS CI low", lo, pp(est.ci_low), CI_TOL, src))
                out.append(_close(5, f"{label} {role} PS CI high", hi, pp(est.ci_high), CI_TOL, src))
            ae_exp, nge_exp = _EFFECTS[rho][gender, pair]
            for kind, eff, (pt, lo, hi) in (("GE", a.ge, _GE[gender, pair]), ("AE", a.ae, ae_exp), ("NGE", a.nge, nge_exp)):
                out.append(_close(5, f"{label} {kind}", pt, pp(eff.point), POINT_TOL, src))
                out.append(_close(5, f"{label} {kind} CI low", lo, pp(eff.ci_low), CI_TOL, src))
                out.append(_close(5, f"{label} {kind} CI high", hi, pp(eff.ci_high), CI_TOL, src))
    return out


# -- 6. p-values -----------------------------------------------------------------------

# (gender, pair) -> alternative and p-values in % for rho = 0 and rho = 1
P_VALUES = {
    ("male", "boomer"): ("negative", 0.7, 0.2),
    ("female", "boomer"): ("negative", 22.0, 18.5),
    ("male", "genx"): ("positive", 18.9, 16.1),
    ("female", "genx"): ("positive", 40.0, 38.8),
}
P_TOL = 0.15


def check_p_values(counts=None) -> list[Check]:
    idx = index_counts(counts or bundled_counts())
    out = []
    for (gender, pair), (alt, p0, p1) in P_VALUES.items():
        src = "decision tables, " + ("Boomers" if pair == "boomer" else "GenX")
        for rho, exp in ((0.0, p0), (1.0, p1)):
            got = pp(analyze_pair(idx, gender, pair, rho=rho).p_value(alt))
            out.append(_close(6, f"p {gender} {pair} rho={rho:g} ({alt})", exp, got, P_TOL, src))
    return out


# -- 7. verdict matrix -------------------------------------------------------------------


def check_verdicts(counts=None) -> list[Check]:
    idx = index_counts(counts or bundled_counts())
    out = []
    src = "decision tables"
    for rho, level, fb in ((0.0, 0.20, ACCEPT_NULL), (0.0, 0.25, REJECT_NEGATIVE), (1.0, 0.20, REJECT_NEGATIVE)):
        analyses = {(g, p): analyze_pair(idx, g, p, rho=rho) for g in ("male", "female") for p in ("boomer", "genx")}
        v, verdict = verdict_from_analyses(analyses, level)
        expected = VerdictInput(REJECT_NEGATIVE, fb, REJECT_POSITIVE, ACCEPT_NULL)
        out.append(Check(7, f"observed outcomes rho={rho:g} level={level:g}", expected, v, v == expected, src))
        out.append(Check(7, f"verdict rho={rho:g} level={level:g}", NM, verdict, verdict == NM, src))
    cases = [
        ((REJECT_NEGATIVE, ACCEPT_NULL, REJECT_POSITIVE, ACCEPT_NULL), NM),
        ((REJECT_NEGATIVE, REJECT_NEGATIVE, REJECT_POSITIVE, ACCEPT_NULL), NM),
        ((REJECT_POSITIVE, ACCEPT_NULL, ACCEPT_NULL, ACCEPT_NULL), IPF),
        ((ACCEPT_NULL, REJECT_POSITIVE, ACCEPT_NULL, ACCEPT_NULL), IPF),
        ((REJECT_POSITIVE, REJECT_POSITIVE, ACCEPT_NULL, ACCEPT_NULL), IPF),
        ((REJECT_NEGATIVE, REJECT_POSITIVE, ACCEPT_NULL, ACCEPT_NULL), NEITHER),
        ((REJECT_POSITIVE, REJECT_NEGATIVE, ACCEPT_NULL, ACCEPT_NULL), NEITHER),
        ((REJECT_NEGATIVE, REJECT_POSITIVE, REJECT_POSITIVE, ACCEPT_NULL), NEITHER),
    ]
    for decisions, expected in cases:
        got = method_verdict(VerdictInput(*decisions))
        out.append(Check(7, "grid " + "/".join(decisions), expected, got, got == expected, src))
    return out


# -- 8. Monte-Carlo ----------------------------------------------------------------------

CER_EXPECTED = {("female", "boomer"): 0.30, ("male", "genx"): 0.34}
CER_TOL = 0.03
MEAN_TOL = 0.5
BAYES_EXPECTED = {
    ("male", "boomer"): "favors_H1",
    ("female", "boomer"): "inconclusive",
    ("male", "genx"): "inconclusive",
    ("female", "genx"): "inconclusive",
}


def check_monte_carlo(replications: int = DEFAULT_REPLICATIONS, seed: int = DEFAULT_SEED, counts=None) -> list[Check]:
    idx = index_counts(counts or bundled_counts())
    out = []
    src = "NGE distributions under H0 and H1"
    for key, verdict in BAYES_EXPECTED.items():
        gender, pair = key
        report, _, _ = bayes_test(pair_counts(idx, gender, pair), replications=replications, seed=seed)
        label = f"{gender} {pair}"
        out.append(_close(8, f"{label} H1 mean vs analytic NGE", report.observed, report.h1_mean, MEAN_TOL, src))
        out.append(Check(8, f"{label} Bayes verdict (K={report.k:.3g})", verdict, report.verdict, report.verdict == verdict, src))
        if key in CER_EXPECTED:
            out.append(_close(8, f"{label} crossover error rate", CER_EXPECTED[key], report.cer, CER_TOL, src))
    return out


# -- 9. property suite -------------------------------------------------------------------


def check_properties(n: int = 200, seed: int = DEFAULT_SEED, counts=None) -> list[Check]:
    rng = np.random.default_rng(seed)
    add_gap = self_gap = or_gap = ll_gap = 0.0
    for _ in range(n):
        k = int(rng.integers(2, 5))
        early = make_table(rng.uniform(1, 100, size=(k, k)))
        late = make_table(rng.uniform(1, 100, size=(k, k)))
        for method in ("ipf", "nm"):
            try:
                d = decompose_change(early, late, method)
                s = decompose_change(early, early, method)
            except InfeasibleResult:
                continue
            add_gap = max(add_gap, abs(d.preference_effect + d.availability_effect + d.interaction - d.total))
            self_gap = max(self_gap, abs(s.total), abs(s.preference_effect), abs(s.availability_effect), abs(s.interaction))
        seed2 = make_table(rng.uniform(1, 100, size=(2, 2)))
        target = margins_of(make_table(rng.uniform(1, 100, size=(2, 2))))
        for iters in (1, 2, 5):
            r = ipf_transform(seed2, target, IpfConfig.fixed(iters)).result
            or_gap = max(or_gap, abs(odds_ratio(r) / odds_ratio(seed2) - 1))
        try:
            rep = nm_transform(early, margins_of(late))
        except InfeasibleResult:
            continue
        if rep.preserved_ll.values.size:
            ll_gap = max(ll_gap, float(np.max(np.abs(rep.preserved_ll.values - rep.achieved_ll.values))))

    idx = index_counts(counts or bundled_counts())
    rho_gap = 0.0
    monotone = True
    for g in ("male", "female"):
        for p in ("boomer", "genx"):
            res = [analyze_pair(idx, g, p, rho=r).nge for r in (0.0, 0.25, 0.5, 0.75, 1.0)]
            rho_gap = max(rho_gap, max(abs(e.point - res[0].point) for e in res))
            monotone &= all(b.sigma <= a.sigma + 1e-15 for a, b in zip(res, res[1:]))

    src = "invariants"
    return [
        Check(9, "decomposition additivity", "<= 1e-12", add_gap, add_gap <= 1e-12, src, 1e-12),
        Check(9, "self-decomposition is zero", "<= 1e-12", self_gap, self_gap <= 1e-12, src, 1e-12),
        Check(9, "NGE point invariant to rho", "<= 1e-15", rho_gap, rho_gap <= 1e-15, src),
        Check(9, "NGE sigma non-increasing in rho", True, monotone, monotone, src),
        Check(9, "IPF keeps the odds ratio (relative)", "<= 1e-9", or_gap, or_gap <= 1e-9, src, 1e-9),
        Check(9, "NM keeps the generalized LL", "<= 1e-9", ll_gap, ll_gap <= 1e-9, src, 1e-9),
    ]


CRITERIA: dict[str, tuple[int, Callable[..., list[Check]]]] = {
    "ipf": (1, check_ipf_fixtures),
    "ipf-noncommutativity": (2, check_ipf_noncommutativity),
    "nm": (3, check_nm_fixtures),
    "nm-commutativity": (4, check_nm_commutativity),
    "survey": (5, survey_table_checks),
    "pvalues": (6, check_p_values),
    "verdict": (7, check_verdicts),
    "bayes": (8, check_monte_carlo),
    "properties": (9, check_properties),
}


def run_repro(only=None, *, replications: int = DEFAULT_REPLICATIONS, seed: int = DEFAULT_SEED) -> list[Check]:
    """Run the selected criteria (all by default); ``only`` matches name prefixes."""
    out = []
    for name, (_, fn) in CRITERIA.items():
        if only and not any(name.startswith(o) for o in only):
            continue
        if fn is check_monte_carlo:
            out.extend(fn(replications=replications, seed=seed))
        elif fn in (check_nm_commutativity, check_properties):
            out.extend(fn(seed=seed))
        else:
            out.extend(fn())
    return out


def all_passed(checks) -> bool:
    return all(c.passed for c in checks)


def summarize(checks) -> dict[int, bool]:
    out: dict[int, bool] = {}
    for c in checks:
        out[c.criterion] = out.get(c.criterion, True) and c.passed
    return out


