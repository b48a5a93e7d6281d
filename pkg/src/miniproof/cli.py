"""Command-line interface.

Standard output carries the report and nothing else; diagnostics and
usage errors go to standard error. Exit codes: 0 all verified, 1 at
least one failed or timed-out routine, 2 invalid input, 3 usage,
configuration, or solver errors. When several apply the highest wins.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from dataclasses import dataclass
from typing import Optional, Sequence

from miniproof.diagnostics import ConfigurationError
from miniproof.driver import Driver, RunOptions
from miniproof.report import machine_report, text_report

PROG = "miniproof"


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class CliInvocation:
    paths: tuple[str, ...]
    options: RunOptions
    format: str  # "text" | "machine"
    dump_ivl: Optional[str]
    out: Optional[str]


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        raise UsageError(message)


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return value


def _positive_float(text: str) -> float:
    value = float(text)
    if value <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return value


def build_parser() -> _Parser:
    parser = _Parser(
        prog=PROG,
        description="Verify contract-annotated classes with an SMT solver.",
    )
    parser.add_argument("paths", nargs="*", metavar="FILE",
                        help="source files to verify")
    mode = parser.add_mutually_exclusive_group()
    mode.add_argument("--bulk", dest="mode", action="store_const", const="bulk",
                      help="solve everything, then report together (default)")
    mode.add_argument("--forked", dest="mode", action="store_const", const="forked",
                      help="deliver each outcome as its solver run completes")
    parser.set_defaults(mode="bulk")
    parser.add_argument("--two-step", dest="two_step",
                        action=argparse.BooleanOptionalAction, default=True,
                        help="retry failing routines with loops unrolled")
    parser.add_argument("--unroll-depth", type=_positive_int, default=3,
                        metavar="N", help="iterations unrolled in step two")
    parser.add_argument("--timeout", type=_positive_float, default=None,
                        metavar="SECONDS",
                        help="solver budget per query (default 30, "
                             "or MINIPROOF_TIMEOUT)")
    parser.add_argument("--seed", type=int, default=0, metavar="N",
                        help="random seed passed to the solver")
    parser.add_argument("--jobs", type=_positive_int, default=1, metavar="N",
                        help="concurrent solver processes")
    parser.add_argument("--solver", default=None, metavar="COMMAND",
                        help="solver command reading SMT-LIB2 on stdin "
                             "(default: autodetect, or MINIPROOF_SOLVER)")
    parser.add_argument("--theory-path", action="append", default=[],
                        metavar="DIR", help="directory searched for theory files")
    parser.add_argument("--filter", action="append", default=[], metavar="C[.R]",
                        help="verify only this class or routine (repeatable)")
    parser.add_argument("--format", action="append", choices=["text", "machine"],
                        default=None, help="report format (default text)")
    parser.add_argument("--out", default=None, metavar="FILE",
                        help="write the report here instead of stdout")
    parser.add_argument("--dump-ivl", default=None, metavar="FILE",
                        help="write the translated intermediate program here")
    parser.add_argument("--no-defaults", dest="defaults", action="store_false",
                        help="disable default class-invariant obligations")
    return parser


def parse_args(argv: Sequence[str]) -> CliInvocation:
    parser = build_parser()
    ns = parser.parse_args(argv)

    if not ns.paths:
        raise UsageError("at least one source file is required")
    if ns.format is not None and len(ns.format) > 1:
        raise UsageError("--format given more than once")

    timeout = ns.timeout
    if timeout is None:
        env = os.environ.get("MINIPROOF_TIMEOUT")
        if env is not None:
            try:
                timeout = float(env)
            except ValueError:
                raise UsageError(
                    f"MINIPROOF_TIMEOUT is not a number: {env!r}"
                ) from None
            if timeout <= 0:
                raise UsageError("MINIPROOF_TIMEOUT must be positive")
        else:
            timeout = 30.0

    options = RunOptions(
        mode=ns.mode,
        two_step=ns.two_step,
        unroll_depth=ns.unroll_depth,
        timeout=timeout,
        seed=ns.seed,
        jobs=ns.jobs,
        solver=ns.solver,
        theory_path=tuple(ns.theory_path),
        filters=tuple(ns.filter),
        invariant_defaults=ns.defaults,
    )
    return CliInvocation(
        paths=tuple(ns.paths),
        options=options,
        format=(ns.format or ["text"])[0],
        dump_ivl=ns.dump_ivl,
        out=ns.out,
    )


_EXIT_BY_STATUS = {
    "verified": 0,
    "skipped": 0,
    "failed": 1,
    "timeout": 1,
    "invalid": 2,
    "error": 3,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    try:
        invocation = parse_args(argv)
    except UsageError as exc:
        print(f"{PROG}: error: {exc}", file=sys.stderr)
        print(build_parser().format_usage().rstrip(), file=sys.stderr)
        return 3

    driver = Driver(invocation.options)
    started = time.monotonic()
    try:
        outcomes = driver.verify(paths=invocation.paths)
    except ConfigurationError as exc:
        print(f"{PROG}: error: {exc}", file=sys.stderr)
        return 3
    wall = time.monotonic() - started

    if invocation.dump_ivl is not None:
        _dump_ivl(driver, invocation.dump_ivl)

    if invocation.format == "machine":
        document = machine_report(outcomes, invocation.options, wall)
    else:
        color = invocation.out is None and sys.stdout.isatty()
        document = text_report(outcomes, invocation.options, wall, color=color)

    if invocation.out is not None:
        try:
            with open(invocation.out, "w", encoding="utf-8") as handle:
                handle.write(document)
        except OSError as exc:
            print(f"{PROG}: error: cannot write report: {exc}", file=sys.stderr)
            return 3
    else:
        sys.stdout.write(document)

    return max(
        (_EXIT_BY_STATUS[o.status] for o in outcomes),
        default=0,
    )


def _dump_ivl(driver: Driver, path: str) -> None:
    from miniproof.ivl.printer import print_program

    translation = getattr(driver, "translation", None)
    if translation is None:
        print(f"{PROG}: nothing was translated; no dump written", file=sys.stderr)
        return
    try:
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(print_program(translation.ivl))
    except OSError as exc:
        print(f"{PROG}: error: cannot write dump: {exc}", file=sys.stderr)
