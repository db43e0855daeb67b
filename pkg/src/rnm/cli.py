"""Command-line interface: ``rnm {run,trace,diagnose,certify}``."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from . import certifier
from .frame import BASE_POLICIES, BASE_WORST, diagnose_run, diagnostics_csv
from .objectives import PRESETS, parse_objective
from .simplex import DomainError, EvaluationError, RunConfig, Simplex, run

WORKERS_ENV = "RNM_WORKERS"

QUAD_HELP = (
    "objective: 'mckinnon' or 'quad:a11,a12,a22,b1,b2,c' meaning "
    "f(x,y) = 0.5*(a11*x^2 + 2*a12*x*y + a22*y^2) + b1*x + b2*y + c "
    "(so quad:4,1,6,-3,5,0 is 2x^2 + 3y^2 + xy - 3x + 5y)"
)


class UsageError(Exception):
    pass


def _parse_simplex(text: str) -> np.ndarray:
    rows = []
    pos = 0
    for chunk in text.split(";"):
        try:
            rows.append([float(v) for v in chunk.split(",")])
        except ValueError:
            raise UsageError(f"bad vertex {chunk!r} at position {pos} in --simplex {text!r}") from None
        pos += len(chunk) + 1
    if len(rows) != 3 or any(len(r) != 2 for r in rows):
        raise UsageError(f"--simplex needs three 'x,y' vertices separated by ';', got {text!r}")
    return np.array(rows)


def _run_parser(sub, name: str, help_text: str, formats: Sequence[str], default_format: str):
    p = sub.add_parser(name, help=help_text, formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("--objective", required=True, help=QUAD_HELP)
    start = p.add_mutually_exclusive_group(required=True)
    start.add_argument("--preset", choices=sorted(PRESETS), help="named starting triangle")
    start.add_argument("--simplex", help="starting triangle as 'x1,y1;x2,y2;x3,y3'")
    p.add_argument("--variant", choices=["rnm", "nm"], default="rnm", help="nm adds expansion steps")
    p.add_argument("--chi", type=float, default=2.0, help="expansion coefficient (nm only)")
    p.add_argument("--iters", type=int, default=1000, help="iteration cap")
    p.add_argument("--diameter-tol", type=float, default=0.0, help="stop when the diameter drops below this")
    p.add_argument("--value-tol", type=float, default=0.0, help="stop when the value spread drops below this")
    p.add_argument("--format", choices=list(formats), default=default_format, help="output format")
    p.add_argument("-o", "--output", default="-", help="output path ('-' for stdout)")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rnm",
        description="Nelder-Mead runs, traces, frame diagnostics and the move-sequence certification.",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)
    _run_parser(sub, "run", "run the method and print the final best vertex", ["text", "json"], "text")
    _run_parser(sub, "trace", "write the per-iteration move trace", ["csv", "json"], "csv")
    d = _run_parser(sub, "diagnose", "write per-iteration width, height and flatness", ["csv", "json"], "csv")
    d.add_argument(
        "--base", choices=list(BASE_POLICIES), default=BASE_WORST,
        help="frame: normal form at the worst vertex or at the left-right edge midpoint, or plain axes",
    )

    c = sub.add_parser(
        "certify",
        help="enumerate possible move sequences and compare with the bundled reference",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    c.add_argument("--depth", type=int, default=14, help="maximum sequence length searched")
    c.add_argument("--precision", default="1e-7", help="endpoint refinement width")
    c.add_argument("--tolerance", type=float, default=1e-5, help="allowed endpoint deviation from the reference")
    c.add_argument("--report", default=None, help="also write a JSON report to this path")
    c.add_argument(
        "--workers", type=int, default=None,
        help=f"worker processes (default: ${WORKERS_ENV} or 1)",
    )
    c.add_argument("-o", "--output", default="-", help="path for the sequence list ('-' for stdout)")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    return parser


def _write(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


def _initial(args, objective) -> Simplex:
    pts = PRESETS[args.preset]() if args.preset else _parse_simplex(args.simplex)
    return Simplex.from_points(pts, objective)


def _config(args) -> RunConfig:
    try:
        return RunConfig(args.variant, args.chi, args.iters, args.diameter_tol, args.value_tol)
    except DomainError as exc:
        raise UsageError(str(exc)) from None


def _cmd_run_like(args) -> int:
    try:
        objective = parse_objective(args.objective)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    config = _config(args)
    initial = _initial(args, objective)
    trace = run(objective, initial, config)
    if args.command == "run":
        best = trace.final.best
        if args.format == "json":
            text = json.dumps(
                {
                    "iterations": len(trace.records),
                    "stop_reason": trace.stop_reason,
                    "best": best.to_json(),
                    "diameter": trace.final.diameter(),
                },
                indent=2,
            ) + "\n"
        else:
            text = (
                f"iterations: {len(trace.records)} ({trace.stop_reason})\n"
                f"best vertex: ({best.coords[0]:.6g}, {best.coords[1]:.6g})\n"
                f"best value: {best.value:.12g}\n"
                f"diameter: {trace.final.diameter():.6g}\n"
            )
    elif args.command == "trace":
        text = trace.dumps_csv() if args.format == "csv" else trace.dumps_json() + "\n"
    else:
        diags = diagnose_run(trace, objective, args.base)
        if args.format == "csv":
            text = diagnostics_csv(diags)
        else:
            rows = []
            for dg in diags:
                hb, fl = dg.predicates()
                m = dg.metrics
                rows.append({
                    "iteration": dg.iteration,
                    "code2d": dg.code2d,
                    "w": m.width if m else None,
                    "h": m.height if m else None,
                    "area": m.area if m else None,
                    "flatness": m.flatness if m else None,
                    "h_over_w": dg.h_over_w if m else None,
                    "h_over_w2": dg.h_over_w2 if m else None,
                    "h_bound_ok": hb,
                    "flatness_ok": fl,
                    "frame_error": dg.frame_error,
                })
            text = json.dumps(rows, indent=2) + "\n"
    _write(args.output, text)
    return 0


def _workers(args) -> int:
    if args.workers is not None:
        n = args.workers
    else:
        env = os.environ.get(WORKERS_ENV, "1")
        try:
            n = int(env)
        except ValueError:
            raise UsageError(f"${WORKERS_ENV} must be an integer, got {env!r}") from None
    if n < 1:
        raise UsageError("worker count must be at least 1")
    return n


def _cmd_certify(args) -> int:
    if args.depth < 1:
        raise UsageError("--depth must be at least 1")
    try:
        precision = Fraction(args.precision)
    except ValueError:
        raise UsageError(f"bad --precision {args.precision!r}") from None
    if precision <= 0:
        raise UsageError("--precision must be positive")
    report = certifier.verify_proposition(args.depth, args.tolerance, workers=_workers(args))
    _write(args.output, "".join(r.format(precision) + "\n" for r in report.results))
    if args.report:
        with open(args.report, "w") as fh:
            fh.write(report.dumps() + "\n")
    for line in report.summary():
        print(line, file=sys.stderr)
    return 0 if report.passed else 1


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        if args.command == "certify":
            return _cmd_certify(args)
        return _cmd_run_like(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"rnm: error: {exc}", file=sys.stderr)
        return 2
    except (EvaluationError, DomainError) as exc:
        where = f" at iteration {exc.iteration}" if getattr(exc, "iteration", None) else ""
        print(f"rnm: error{where}: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        # frame or objective failures surfacing outside the per-row diagnostics
        print(f"rnm: error: {exc}", file=sys.stderr)
        return 1
    except BrokenPipeError:
        # downstream reader (e.g. head) closed early; keep the interpreter from complaining at exit
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return 1


if __name__ == "__main__":
    sys.exit(main())
