"""Solver selection.

The prover is an external SMT-LIB2 process reading the query on stdin.
Selection order: an explicit command (the --solver flag or the
MINIPROOF_SOLVER variable, parsed shell-style), a `z3` binary on PATH, a
`cvc5` binary on PATH, and finally the bundled node shim around the
z3 WASM distribution. The family tag decides solver-specific preamble
options; an unrecognized command gets no options beyond the logic.
"""

from __future__ import annotations

import os
import shlex
import shutil
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from miniproof.diagnostics import ConfigurationError

_SHIM = Path(__file__).resolve().parent / "z3_stdio.js"


@dataclass(frozen=True)
class SolverConfig:
    command: tuple[str, ...]
    family: str  # "z3" | "cvc5" | "generic"

    def describe(self) -> str:
        return " ".join(self.command)


def _family_of(argv0: str) -> str:
    base = Path(argv0).name.lower()
    if "cvc5" in base:
        return "cvc5"
    if "z3" in base or base in ("node", "nodejs"):
        return "z3"
    return "generic"


def discover_solver(explicit: Optional[str] = None) -> SolverConfig:
    """Resolve the prover command; raises ConfigurationError with a
    remediation hint when nothing usable is found."""
    spec = explicit or os.environ.get("MINIPROOF_SOLVER")
    if spec:
        argv = tuple(shlex.split(spec))
        if not argv:
            raise ConfigurationError(
                "solver command is empty; pass e.g. --solver 'z3 -in'"
            )
        return SolverConfig(argv, _family_of(argv[0]))

    z3 = shutil.which("z3")
    if z3:
        return SolverConfig((z3, "-in"), "z3")
    cvc5 = shutil.which("cvc5")
    if cvc5:
        return SolverConfig((cvc5, "--lang=smt2"), "cvc5")
    node = shutil.which("node")
    if node and _SHIM.is_file():
        return SolverConfig((node, str(_SHIM)), "z3")
    raise ConfigurationError(
        "no SMT solver found: install z3 or cvc5 on PATH, or point "
        "MINIPROOF_SOLVER (or --solver) at a command that reads SMT-LIB2 "
        "on stdin, e.g. MINIPROOF_SOLVER='z3 -in'"
    )


def solver_preamble(
    config: SolverConfig,
    seed: Optional[int] = None,
    timeout: Optional[float] = None,
) -> list[str]:
    """Per-family (set-option ...) lines placed after (set-logic ...)."""
    out: list[str] = []
    if config.family == "z3":
        # E-matching only: refutations follow the axiom patterns, and a
        # non-theorem comes back "unknown" quickly instead of diverging
        # in model search.
        out.append("(set-option :auto_config false)")
        out.append("(set-option :smt.mbqi false)")
        if timeout is not None:
            out.append(f"(set-option :timeout {int(timeout * 1000)})")
        if seed is not None:
            out.append(f"(set-option :smt.random_seed {seed})")
            out.append(f"(set-option :sat.random_seed {seed})")
    elif config.family == "cvc5":
        if seed is not None:
            out.append(f"(set-option :seed {seed})")
    return out
