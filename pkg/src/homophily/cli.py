"""Command-line entry point: ``homophily <subcommand> ...``.

Exit codes: 0 success, 1 fixture failure, 2 usage error, 3 input error.
"""

from __future__ import annotations

import argparse
import csv
import io
import os
import sys

from . import __version__
from .bayes import DEFAULT_REPLICATIONS, bayes_test, histogram
from .decomposition import decompose_change, granularity_sensitivity
from .errors import HomophilyError
from .io import bundled_counts, load_counts_csv, load_table_csv, table_to_csv
from .ipf import DEFAULT_TOLERANCE, IpfConfig, ipf_transform
from .nm import nm_transform
from .repro import CRITERIA, DEFAULT_SEED, run_repro, summarize
from .survey import (
    DEFAULT_ALPHA,
    DEFAULT_LEVEL,
    PAIRS,
    analyze_pair,
    index_counts,
    pair_counts,
    parse_scale,
    pp,
    verdict_from_analyses,
)
from .table import COL, ROW, margins_of

EXIT_OK, EXIT_FIXTURE, EXIT_USAGE, EXIT_INPUT = 0, 1, 2, 3
SEED_ENV = "HOMOPHILY_SEED"


class UsageError(Exception):
    pass


def parse_merge(text: str) -> list[tuple[str, int]]:
    """``"col:2+3"`` -> ``[("col", 1)]``. Indices are 1-based on the command line.

    Several merges can be given separated by commas; they are applied in order.
    """
    plan = []
    for part in text.split(","):
        try:
            axis, rest = part.strip().split(":")
            a, b = (int(v) for v in rest.split("+"))
        except ValueError:
            raise UsageError(f"bad merge {part!r}; expected e.g. col:2+3") from None
        if axis not in (ROW, COL):
            raise UsageError(f"merge axis must be {ROW!r} or {COL!r}, got {axis!r}")
        if b != a + 1 or a < 1:
            raise UsageError(f"can only merge neighboring categories, got {a}+{b}")
        plan.append((axis, a - 1))
    return plan


def resolve_seed(arg: int | None) -> tuple[int, str]:
    if arg is not None:
        return arg, "--seed"
    env = os.environ.get(SEED_ENV)
    if env is not None:
        try:
            return int(env), SEED_ENV
        except ValueError:
            raise UsageError(f"{SEED_ENV} must be an integer, got {env!r}") from None
    return DEFAULT_SEED, "default"


def _pct(x: float) -> str:
    return f"{pp(x):.1f}"


def _csv_line(row) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerow(row)
    return buf.getvalue()


# -- subcommands -------------------------------------------------------------------------


def cmd_transform(args, out) -> int:
    seed = load_table_csv(args.seed)
    target = margins_of(load_table_csv(args.margins_from))
    if args.method == "ipf":
        cfg = IpfConfig.fixed(args.iterations) if args.iterations else IpfConfig.converge(args.tol)
        rep = ipf_transform(seed, target, cfg)
        result = rep.result
        note = f"# ipf iterations={rep.iterations_used} residual={rep.max_margin_residual!r}\n"
    else:
        if args.iterations or args.tol is not None:
            raise UsageError("--iterations/--tol only apply to --method ipf")
        result = nm_transform(seed, target).result
        note = "# nm\n"
    if args.round:
        result = result.rounded()
    if args.format == "text":
        out.write(note)
    out.write(table_to_csv(result))
    return EXIT_OK


_DEC_FIELDS = ("total", "preference_effect", "availability_effect", "interaction")


def _write_decomposition(results, fmt, out):
    if fmt == "text":
        width = max(len(label) for label, _ in results)
        out.write(f"{'':<{width}}  " + "  ".join(f"{f:>19}" for f in _DEC_FIELDS) + "\n")
        for label, r in results:
            cells = "  ".join(f"{pp(getattr(r, f)):>16.1f} pp" for f in _DEC_FIELDS)
            out.write(f"{label:<{width}}  {cells}\n")
        out.write("\n")
    out.write(_csv_line(("label", "method", "statistic", "base", *_DEC_FIELDS)))
    for label, r in results:
        out.write(_csv_line((label, r.method, r.statistic, r.base, *(repr(getattr(r, f)) for f in _DEC_FIELDS))))


def cmd_decompose(args, out) -> int:
    early, late = load_table_csv(args.early), load_table_csv(args.late)
    cfg = IpfConfig.fixed(args.iterations) if args.iterations else None
    if args.merge:
        plan = parse_merge(args.merge)
        before, after = granularity_sensitivity(
            early, late, args.method, plan, base=args.base, ipf_config=cfg, round_tables=args.round
        )
        results = [("merged_before", before), ("merged_after", after)]
    else:
        r = decompose_change(early, late, args.method, base=args.base, ipf_config=cfg, round_tables=args.round)
        results = [("unmerged", r)]
    _write_decomposition(results, args.format, out)
    return EXIT_OK


def cmd_survey(args, out) -> int:
    counts = load_counts_csv(args.counts) if args.counts else bundled_counts()
    scale = parse_scale(args.scale)
    idx = index_counts(counts)
    analyses = {
        (g, p): analyze_pair(idx, g, p, rho=args.rho, alpha=args.alpha, scale=scale)
        for p in PAIRS
        for g in ("male", "female")
    }
    decisions, verdict = verdict_from_analyses(analyses, args.level)
    if args.format == "csv":
        out.write(_csv_line(("gender", "pair", "quantity", "point", "sigma", "ci_low", "ci_high", "p_negative", "p_positive")))
        for (g, p), a in analyses.items():
            for name, e in (("late", a.late), ("early", a.early), ("pooled_t", a.pooled_t), ("pooled_t_plus", a.pooled_t_plus)):
                out.write(_csv_line((g, p, name, repr(e.point), repr(e.sigma), repr(e.ci_low), repr(e.ci_high), "", "")))
            for e in (a.ge, a.ae, a.nge):
                pn = repr(a.p_value("negative")) if e is a.nge else ""
                pq = repr(a.p_value("positive")) if e is a.nge else ""
                out.write(_csv_line((g, p, e.kind, repr(e.point), repr(e.sigma), repr(e.ci_low), repr(e.ci_high), pn, pq)))
        out.write(_csv_line(("verdict", verdict)))
        return EXIT_OK

    conf = round(100 * (1 - args.alpha))
    out.write(f"# rho={args.rho:g} alpha={args.alpha:g} scale={args.scale} level={args.level:g}\n")
    for (g, p), a in analyses.items():
        out.write(f"\n{g} {p}\n")
        for row, e in zip(a.counts, (a.late, a.early, a.pooled_t, a.pooled_t_plus)):
            label = f"{row.generation} {row.survey_year}"
            out.write(
                f"  {label:<20} n={row.n:<4d} x={row.x:<4d} share {_pct(row.sample_share):>5}  "
                f"PS {_pct(e.point):>5}  [{_pct(e.ci_low)}, {_pct(e.ci_high)}]\n"
            )
        for e in (a.ge, a.ae, a.nge):
            out.write(f"  {e.kind:<20} {_pct(e.point):>6} pp  {conf}% CI [{_pct(e.ci_low)}, {_pct(e.ci_high)}]\n")
        out.write(f"  p (NGE < 0) {_pct(a.p_value('negative'))}%   p (NGE > 0) {_pct(a.p_value('positive'))}%\n")
    out.write(
        f"\ndecisions: male boomer {decisions.male_boomer}, female boomer {decisions.female_boomer}, "
        f"male genx {decisions.male_genx}, female genx {decisions.female_genx}\n"
    )
    out.write(f"verdict: {verdict}\n")
    return EXIT_OK


def cmd_bayes(args, out) -> int:
    seed, origin = resolve_seed(args.seed)
    counts = load_counts_csv(args.counts) if args.counts else bundled_counts()
    rows = pair_counts(index_counts(counts), args.gender, args.pair)
    report, h0, h1 = bayes_test(
        rows, replications=args.reps, seed=seed, alpha=args.alpha, scale=parse_scale(args.scale), workers=args.workers
    )
    out.write(f"# seed={seed} ({origin}) replications={report.replications}\n")
    out.write(f"{args.gender} {args.pair}\n")
    out.write(f"  observed NGE  {report.observed:.1f} pp\n")
    out.write(f"  H0 mean       {report.h0_mean:.1f} pp\n")
    out.write(f"  H1 mean       {report.h1_mean:.1f} pp\n")
    out.write(f"  K             {report.k:.4g}\n")
    out.write(f"  CER           {report.cer:.3f}\n")
    out.write(f"  verdict       {report.verdict}\n")
    for w in report.warnings:
        out.write(f"  warning: {w}\n")
    if args.histogram:
        with open(args.histogram, "w", encoding="utf-8", newline="") as fh:
            fh.write(_csv_line(("bin_left", "bin_right", "h0_density", "h1_density")))
            for row in histogram(h0, h1):
                fh.write(_csv_line(tuple(repr(v) for v in row)))
    return EXIT_OK


def cmd_repro(args, out) -> int:
    seed, origin = resolve_seed(args.seed)
    out.write(f"# seed={seed} ({origin}) replications={args.reps}\n")
    checks = run_repro(args.only, replications=args.reps, seed=seed)
    for c in checks:
        out.write(c.line() + "\n")
    summary = summarize(checks)
    n_fail = sum(not c.passed for c in checks)
    out.write(f"\n{len(checks) - n_fail}/{len(checks)} fixtures passed\n")
    for crit, ok in sorted(summary.items()):
        out.write(f"criterion {crit}: {'PASS' if ok else 'FAIL'}\n")
    return EXIT_OK if n_fail == 0 else EXIT_FIXTURE


# -- parser ------------------------------------------------------------------------------


def _probability(text: str) -> float:
    v = float(text)
    if not 0.0 < v < 1.0:
        raise argparse.ArgumentTypeError(f"must lie in (0, 1), got {text}")
    return v


def _rho(text: str) -> float:
    v = float(text)
    if not 0.0 <= v <= 1.0:
        raise argparse.ArgumentTypeError(f"rho must lie in [0, 1], got {text}")
    return v


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {text}")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="homophily", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("transform", help="fit a seed table to another table's margins")
    t.add_argument("--method", choices=("ipf", "nm"), required=True)
    t.add_argument("--seed", required=True, help="table CSV whose association is kept")
    t.add_argument("--margins-from", required=True, help="table CSV supplying the target margins")
    g = t.add_mutually_exclusive_group()
    g.add_argument("--iterations", type=_positive_int, help="fixed number of IPF row+column passes")
    g.add_argument("--tol", type=float, help=f"IPF convergence tolerance (default {DEFAULT_TOLERANCE:g})")
    t.add_argument("--round", action="store_true", help="round cells half away from zero")
    t.add_argument("--format", choices=("text", "csv"), default="text")
    t.set_defaults(func=cmd_transform)

    d = sub.add_parser("decompose", help="split the change in homogamy share")
    d.add_argument("--early", required=True)
    d.add_argument("--late", required=True)
    d.add_argument("--method", choices=("ipf", "nm"), required=True)
    d.add_argument("--base", choices=("early", "late"), default="early")
    d.add_argument("--merge", help='merge neighboring categories before vs after, e.g. "col:2+3"')
    d.add_argument("--iterations", type=_positive_int, help="fixed IPF passes (default: converge)")
    d.add_argument("--round", action="store_true", help="round counterfactual tables before the statistic")
    d.add_argument("--format", choices=("text", "csv"), default="text")
    d.set_defaults(func=cmd_decompose)

    s = sub.add_parser("survey", help="generation, age and net generation effects")
    s.add_argument("--counts", help="survey counts CSV (default: bundled counts)")
    s.add_argument("--rho", type=_rho, default=0.0)
    s.add_argument("--alpha", type=_probability, default=DEFAULT_ALPHA)
    s.add_argument("--scale", default="10/7")
    s.add_argument("--level", type=_probability, default=DEFAULT_LEVEL, help="one-sided significance level")
    s.add_argument("--format", choices=("text", "csv"), default="text")
    s.set_defaults(func=cmd_survey)

    b = sub.add_parser("bayes", help="Monte-Carlo Bayes factor and crossover error rate")
    b.add_argument("--counts")
    b.add_argument("--pair", choices=tuple(PAIRS), required=True)
    b.add_argument("--gender", choices=("male", "female"), required=True)
    b.add_argument("--reps", type=_positive_int, default=DEFAULT_REPLICATIONS)
    b.add_argument("--seed", type=int, help=f"default: ${SEED_ENV} or {DEFAULT_SEED}")
    b.add_argument("--alpha", type=_probability, default=DEFAULT_ALPHA)
    b.add_argument("--scale", default="10/7")
    b.add_argument("--workers", type=_positive_int, default=1)
    b.add_argument("--histogram", help="write histogram CSV to this path")
    b.set_defaults(func=cmd_bayes)

    r = sub.add_parser("repro", help="regenerate the published numbers and compare")
    r.add_argument("--only", action="append", choices=tuple(CRITERIA), help="run only this group (repeatable)")
    r.add_argument("--seed", type=int)
    r.add_argument("--reps", type=_positive_int, default=DEFAULT_REPLICATIONS)
    r.set_defaults(func=cmd_repro)
    return p


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args, out)
    except UsageError as exc:
        print(f"homophily: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (HomophilyError, OSError, ValueError) as exc:
        print(f"homophily: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
