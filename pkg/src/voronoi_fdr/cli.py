"""Command-line interface.

Exit codes: 0 success, 2 invalid input, 3 numerical failure,
4 configuration error.
"""

from __future__ import annotations

import argparse
import contextlib
import logging
import sys
from dataclasses import replace
from datetime import datetime, timezone

from . import __version__
from .analysis import ANALYSIS_METHODS, analyze
from .csvio import (
    read_pvectors,
    read_records,
    read_time_courses,
    write_gtest,
    write_records,
    write_study,
    write_tessellation,
)
from .errors import ConfigError, ConstantSeries, VoronoiFdrError
from .geometry import voronoi_tessellate
from .ordering import DEFAULT_SCHEME, OrderingScheme
from .periodicity import fisher_g
from .simulate import CONVENTIONS, StudyConfig, THREADS_ENV, config_from_mapping, load_study_config, run_sweep

log = logging.getLogger("voronoi_fdr")

DESCRIPTION = """\
Voronoi-area p-value combination for the disjunction hypothesis: a
hypothesis is rejected only when ALL of its component p-values show
evidence against their nulls (not merely one of them)."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(ConfigError.exit_code, f"{self.prog}: error: {message}\n")


@contextlib.contextmanager
def _output(path):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            yield fh


def _add_seed(p):
    p.add_argument("--seed", type=int, default=0, help="seed for jitter and mixture rescue (default 0)")


def _add_jitter(p):
    p.add_argument("--jitter-duplicates", action="store_true",
                   help="perturb exactly repeated p-vectors by <=1e-12 instead of failing")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="voronoi-fdr", description=DESCRIPTION)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    a = sub.add_parser("analyze", help="combine p-vectors and declare significance")
    a.add_argument("--in", dest="input", required=True, help="CSV with header id,p1,p2[,p3]")
    a.add_argument("--out", help="per-hypothesis report CSV (default stdout)")
    a.add_argument("--dims", type=int, choices=(2, 3), default=2)
    a.add_argument("--ordering", default=DEFAULT_SCHEME.value,
                   choices=[s.value for s in OrderingScheme])
    a.add_argument("--method", default="bh", choices=ANALYSIS_METHODS)
    a.add_argument("--alpha", type=float, default=0.05, help="BH level (default 0.05)")
    a.add_argument("--fdr-cutoff", type=float, default=0.05,
                   help="reject when left-tail FDR is below this (default 0.05)")
    a.add_argument("--null-J", dest="null_j", type=int, choices=(2, 3), default=2,
                   help="mixture components for the empirical null")
    a.add_argument("--null-P", dest="null_p", type=float, default=None,
                   help="null pseudo-count penalty (default: a quarter of the hypotheses)")
    _add_seed(a)
    _add_jitter(a)

    s = sub.add_parser("simulate", help="run a seeded power/FDR study")
    s.add_argument("--config", help="TOML study configuration")
    s.add_argument("--out", help="results CSV (default stdout)")
    s.add_argument("--reps", type=int, help="override replicate count")
    s.add_argument("--seed", type=int, help="override study seed")
    s.add_argument("--pvalue-convention", choices=CONVENTIONS, help="override p-value convention")
    s.add_argument("--workers", type=int, help=f"worker processes (default ${THREADS_ENV} or 1)")

    v = sub.add_parser("voronoi", help="dump clipped Voronoi cells and areas")
    v.add_argument("--in", dest="input", required=True, help="CSV with header id,p1,p2")
    v.add_argument("--out")
    _add_seed(v)
    _add_jitter(v)

    g = sub.add_parser("gtest", help="Fisher's G periodicity p-values per series")
    g.add_argument("--in", dest="input", required=True,
                   help="CSV: id column then one column per evenly spaced time point")
    g.add_argument("--out")
    g.add_argument("--spacing", type=float, help="minutes between time points (recorded only)")

    r = sub.add_parser("report", help="summarise a saved analysis table")
    r.add_argument("--in", dest="input", required=True)
    r.add_argument("--out")
    r.add_argument("--top", type=int, default=10, help="list this many top-ranked rejections")
    return parser


def cmd_analyze(args) -> int:
    pvectors = read_pvectors(args.input, dims=args.dims)
    report = analyze(
        pvectors, scheme=args.ordering, method=args.method, alpha=args.alpha,
        fdr_cutoff=args.fdr_cutoff, null_j=args.null_j, null_p=args.null_p,
        seed=args.seed, jitter=args.jitter_duplicates, source=args.input,
    )
    stamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
    with _output(args.out) as fh:
        write_records(report.records, fh, report.header(timestamp=stamp))
    log.info("%d of %d hypotheses rejected (%s)", report.decision.k, len(report.records), report.decision.rule)
    return 0


def cmd_simulate(args) -> int:
    if args.config:
        cfg, mus, rhos = load_study_config(args.config)
    else:
        cfg, mus, rhos = config_from_mapping({})
    overrides = {k: v for k, v in (("reps", args.reps), ("seed", args.seed),
                                   ("pvalue_convention", args.pvalue_convention)) if v is not None}
    cfg = replace(cfg, **overrides)
    results = run_sweep(cfg, mus, rhos, workers=args.workers)
    with _output(args.out) as fh:
        write_study([row for res in results for row in res.rows], fh)
    return 0


def cmd_voronoi(args) -> int:
    pvectors = read_pvectors(args.input, dims=2)
    t = voronoi_tessellate(pvectors, jitter=args.jitter_duplicates, seed=args.seed)
    if t.jittered:
        log.warning("jittered %d duplicated p-vectors", len(t.jittered_indices))
    with _output(args.out) as fh:
        write_tessellation(t, [p.id for p in pvectors], fh)
    return 0


def cmd_gtest(args) -> int:
    series, skipped = read_time_courses(args.input, spacing=args.spacing)
    rows = []
    for s in series:
        try:
            g, p = fisher_g(s)
        except ConstantSeries:
            log.warning("skipping constant series %s", s.gene_id)
            continue
        rows.append((s.gene_id, g, p))
    with _output(args.out) as fh:
        write_gtest(rows, fh)
    return 0


def cmd_report(args) -> int:
    header, records = read_records(args.input)
    rejected = [r for r in records if r.reject]
    rejected.sort(key=lambda r: r.rank)
    with _output(args.out) as fh:
        fh.write(f"input: {header.get('input', args.input)}\n")
        fh.write(f"ordering: {header.get('ordering', '?')}  method: {header.get('method', '?')}\n")
        fh.write(f"rule: {header.get('rule', '?')}  level: {header.get('level', '?')}\n")
        if "mixture" in header:
            fh.write(f"mixture: {header['mixture']}\n")
        fh.write(f"hypotheses: {len(records)}\n")
        fh.write(f"rejections: {len(rejected)}\n")
        for r in rejected[: args.top]:
            fh.write(f"  {r.rank:>6}  {r.id}  T={r.T:.6g}  Z={r.Z:.4f}\n")
    return 0


COMMANDS = {
    "analyze": cmd_analyze,
    "simulate": cmd_simulate,
    "voronoi": cmd_voronoi,
    "gtest": cmd_gtest,
    "report": cmd_report,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return COMMANDS[args.command](args)
    except VoronoiFdrError as exc:
        print(f"voronoi-fdr {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
