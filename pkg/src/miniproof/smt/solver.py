"""Running one query against the external prover.

Each query is a fresh subprocess in its own process group: a hung or
over-budget solver is killed as a group (WASM builds fork helpers) and
always reaped. The verdict is the last sat/unsat/unknown token on
stdout; anything else is an error carrying enough of the solver's
output to diagnose a broken installation.
"""

from __future__ import annotations

import os
import signal
import subprocess
import time
from dataclasses import dataclass

from miniproof.smt.config import SolverConfig

_VERDICTS = ("unsat", "sat", "unknown")


@dataclass(frozen=True)
class SolverResult:
    status: str  # "unsat" | "sat" | "unknown" | "timeout" | "error"
    elapsed: float
    detail: str = ""


def _kill_group(proc: subprocess.Popen) -> None:
    try:
        os.killpg(os.getpgid(proc.pid), signal.SIGKILL)
    except (ProcessLookupError, PermissionError):
        try:
            proc.kill()
        except ProcessLookupError:
            pass


def run_solver(
    config: SolverConfig, query: str, timeout: float
) -> SolverResult:
    start = time.monotonic()
    try:
        proc = subprocess.Popen(
            config.command,
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            stderr=subprocess.PIPE,
            start_new_session=True,
        )
    except OSError as exc:
        return SolverResult(
            "error",
            time.monotonic() - start,
            f"cannot start solver '{config.describe()}': {exc}",
        )
    try:
        stdout, stderr = proc.communicate(query.encode(), timeout=timeout)
    except subprocess.TimeoutExpired:
        _kill_group(proc)
        proc.communicate()
        return SolverResult("timeout", time.monotonic() - start)
    elapsed = time.monotonic() - start

    verdict = None
    broken = False
    for line in stdout.decode(errors="replace").splitlines():
        token = line.strip()
        if token in _VERDICTS:
            verdict = token
        elif token.startswith("(error"):
            # A verdict after a parse error would be over the wrong
            # formula; never trust it.
            broken = True
    if verdict is not None and not broken:
        return SolverResult(verdict, elapsed)

    text = (stdout + b"\n" + stderr).decode(errors="replace").strip()
    tail = "\n".join(text.splitlines()[-8:])
    return SolverResult(
        "error",
        elapsed,
        f"solver '{config.describe()}' (exit {proc.returncode}) gave no "
        f"verdict:\n{tail}" if tail else
        f"solver '{config.describe()}' (exit {proc.returncode}) "
        "produced no output",
    )
