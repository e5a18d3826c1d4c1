"""Benchmark harness for Stagger Thompson sampling: run, score, diagnose, ablate, sweep-m.

Exit codes: 0 on success, 1 for configuration errors, 2 when any trace failed.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .harness import io
from .harness.diagnostics import DEFAULT_SAMPLERS, run_diagnostics
from .harness.experiment import run_experiment
from .harness.methods import UnknownMethodError
from .harness.scoring import ScoreError, rank_scores
from .harness.studies import ablate, sweep_M
from .testbed import UnknownFunctionError

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2

log = logging.getLogger("stagger")


def _print_scores(table) -> None:
    width = max(len(m) for m in table.methods)
    for m, s, e in sorted(table.rows(), key=lambda r: -r[1]):
        print(f"{m:<{width}}  score={s:.3f}  se={e:.3f}")


def _finish(traces, args) -> int:
    io.write_traces(traces, args.traces)
    failed = [t for t in traces if t.error]
    for t in failed:
        log.error("%s / %s / repeat %d failed: %s", t.method, t.function, t.repeat, t.error)
    try:
        table = rank_scores(traces)
    except ScoreError as exc:
        log.warning("not scoring: %s", exc)
        table = None
    if table is not None:
        io.write_scores(table, args.scores)
        _print_scores(table)
    if getattr(args, "svg", None):
        io.write_svg(traces, args.svg)
    return EXIT_RUNTIME if failed else EXIT_OK


def cmd_run(args) -> int:
    cfg = io.read_config(args.config)
    return _finish(run_experiment(cfg, jobs=args.jobs), args)


def cmd_ablate(args) -> int:
    cfg = io.read_config(args.config)
    traces, _ = ablate(cfg, jobs=args.jobs)
    return _finish(traces, args)


def cmd_sweep(args) -> int:
    cfg = io.read_config(args.config)
    Ms = [int(v) for v in args.m.split(",") if v.strip()]
    traces, table = sweep_M(cfg, Ms, jobs=args.jobs)
    io.write_traces(traces, args.traces)
    io.write_scores(table, args.scores)
    _print_scores(table)
    return EXIT_RUNTIME if any(t.error for t in traces) else EXIT_OK


def cmd_score(args) -> int:
    traces = io.read_traces(*args.trace_files)
    table = rank_scores(traces)
    io.write_scores(table, args.scores)
    _print_scores(table)
    if args.svg:
        io.write_svg(traces, args.svg)
    return EXIT_OK


def cmd_diagnose(args) -> int:
    samplers = tuple(s.strip() for s in args.samplers.split(",") if s.strip())
    rows = run_diagnostics(samplers, range(args.seeds), num_dim=args.dim, num_rounds=args.rounds,
                           base_seed=args.seed)
    io.write_rows(rows, args.out)
    final = [r for r in rows if r.round == args.rounds - 1]
    for name in samplers:
        mine = [r for r in final if r.sampler == name]
        n = len(mine)
        print(f"{name:<9} rmse={sum(r.rmse for r in mine) / n:.4g}  scale={sum(r.scale for r in mine) / n:.4g}  "
              f"std_p_max={sum(r.std_p_max for r in mine) / n:.4g}  "
              f"duration={sum(r.duration for r in rows if r.sampler == name) / (n * args.rounds):.4g}s")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stagger", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def outputs(p, svg=True):
        p.add_argument("--traces", default="traces.csv", help="trace CSV to write")
        p.add_argument("--scores", default="scores.csv", help="score CSV to write")
        p.add_argument("--jobs", type=int, default=1, help="worker processes")
        if svg:
            p.add_argument("--svg", help="also write a best-so-far chart")

    p = sub.add_parser("run", help="run an experiment from a key=value config file")
    p.add_argument("config")
    outputs(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("ablate", help="run STS against its ablations")
    p.add_argument("config")
    outputs(p)
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("sweep-m", help="score STS over a range of walk lengths M")
    p.add_argument("config")
    p.add_argument("--m", default="0,3,10,30,100", help="comma-separated M values")
    outputs(p, svg=False)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("score", help="rank-score one or more trace CSVs")
    p.add_argument("trace_files", nargs="+")
    p.add_argument("--scores", default="scores.csv")
    p.add_argument("--svg")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("diagnose", help="sampler diagnostics on the shifted sphere")
    p.add_argument("--samplers", default=",".join(DEFAULT_SAMPLERS))
    p.add_argument("--seeds", type=int, default=5)
    p.add_argument("--rounds", type=int, default=30)
    p.add_argument("--dim", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="diagnostics.csv")
    p.set_defaults(func=cmd_diagnose)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (io.ConfigError, UnknownMethodError, UnknownFunctionError, ScoreError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
