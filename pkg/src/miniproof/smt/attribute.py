"""Discharging one verification condition and attributing failures.

The first query checks the whole condition; unsat means every assertion
holds and nothing else is spent on it. Otherwise each labeled check is
re-queried alone: its label stays asserted while every other labeled
position is masked to `true` (still assumed downstream, no longer
checked). A check whose solo query is unsat passed; the rest are the
failing checks, ordered by source line. If every solo query passes but
the whole condition was refuted, the answers are inconsistent and the
condition is reported as an internal error rather than trusted either
way.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from miniproof.ivl.ast import CheckAttribution, Vc
from miniproof.smt.config import SolverConfig, solver_preamble
from miniproof.smt.emit import emit_query, mask_labels
from miniproof.smt.solver import run_solver


@dataclass(frozen=True)
class CheckResult:
    label: str
    attribution: CheckAttribution
    status: str  # "failed" | "unknown"


@dataclass
class DischargeResult:
    status: str  # "verified" | "failed" | "timeout" | "error"
    failing: list[CheckResult] = field(default_factory=list)
    queries: int = 0
    elapsed: float = 0.0
    message: Optional[str] = None


def _label_order(vc: Vc) -> list[str]:
    def key(label: str) -> tuple[int, int]:
        attr = vc.labels[label]
        _, _, suffix = label.rpartition("#")
        return (attr.line, int(suffix) if suffix.isdigit() else 0)

    return sorted(vc.labels, key=key)


def discharge_vc(
    vc: Vc,
    config: SolverConfig,
    timeout: float = 30.0,
    seed: Optional[int] = None,
    theory_path: tuple[str, ...] = (),
) -> DischargeResult:
    preamble = solver_preamble(config, seed, timeout)
    # The solver gets the budget as its own soft limit so it can answer
    # "unknown" gracefully; the hard kill allows startup and reporting
    # slack on top.
    wall = timeout * 1.5 + 2.0

    whole = run_solver(
        config,
        emit_query(vc, mask_labels(vc.goal), preamble, theory_path),
        wall,
    )
    result = DischargeResult(status="", queries=1, elapsed=whole.elapsed)
    if whole.status == "unsat":
        result.status = "verified"
        return result
    if whole.status == "timeout":
        result.status = "timeout"
        return result
    if whole.status == "error":
        result.status = "error"
        result.message = whole.detail
        return result

    # Refuted or unknown: attribute per label.
    for label in _label_order(vc):
        solo = run_solver(
            config,
            emit_query(
                vc,
                mask_labels(vc.goal, frozenset((label,))),
                preamble,
                theory_path,
            ),
            wall,
        )
        result.queries += 1
        result.elapsed += solo.elapsed
        if solo.status == "unsat":
            continue
        if solo.status == "error":
            result.status = "error"
            result.message = solo.detail
            return result
        status = "failed" if solo.status == "sat" else "unknown"
        result.failing.append(CheckResult(label, vc.labels[label], status))

    if not result.failing:
        result.status = "error"
        result.message = (
            "inconsistent solver answers: every check passes alone but "
            "the whole condition is refuted"
        )
        return result
    result.status = "failed"
    return result
