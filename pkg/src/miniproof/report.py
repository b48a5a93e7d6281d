"""Rendering verification outcomes.

Two formats: a human-oriented text report grouped by class, and a
machine-readable JSON document with a versioned schema. The JSON form is
canonical: outcomes are ordered by (class, routine) regardless of
delivery order, keys are emitted in a fixed order, and re-emitting a
parsed document reproduces it byte for byte. Timing fields are the only
values that vary between otherwise identical runs.
"""

from __future__ import annotations

import json
import sys
from typing import Optional, Sequence

from miniproof.driver import RunOptions, VerificationOutcome

SCHEMA_VERSION = 1

_GLYPHS = {
    "verified": "ok",
    "failed": "FAILED",
    "invalid": "INVALID",
    "skipped": "skipped",
    "timeout": "TIMEOUT",
    "error": "ERROR",
}

_COLORS = {
    "verified": "\x1b[32m",  # green
    "failed": "\x1b[31m",  # red
    "invalid": "\x1b[33m",  # yellow
    "skipped": "\x1b[2m",  # dim
    "timeout": "\x1b[31m",
    "error": "\x1b[31m",
}
_RESET = "\x1b[0m"


def _ordered(outcomes: Sequence[VerificationOutcome]) -> list[VerificationOutcome]:
    return sorted(outcomes, key=lambda o: (o.class_name, o.routine))


def _totals(outcomes: Sequence[VerificationOutcome]) -> dict[str, int]:
    counts = {
        "outcomes": len(outcomes),
        "verified": 0,
        "failed": 0,
        "invalid": 0,
        "skipped": 0,
        "timeout": 0,
        "error": 0,
    }
    for o in outcomes:
        counts[o.status] += 1
    return counts


# -- machine format ------------------------------------------------------------


def machine_report(
    outcomes: Sequence[VerificationOutcome],
    options: RunOptions,
    wall_time: float,
) -> str:
    totals: dict[str, object] = dict(_totals(outcomes))
    totals["wall_time"] = round(wall_time, 3)
    doc = {
        "schema_version": SCHEMA_VERSION,
        "run": {
            "options": {
                "mode": options.mode,
                "two_step": options.two_step,
                "unroll_depth": options.unroll_depth,
                "timeout": options.timeout,
                "seed": options.seed,
                "jobs": options.jobs,
                "solver": options.solver,
                "theory_path": list(options.theory_path),
                "filters": list(options.filters),
                "invariant_defaults": options.invariant_defaults,
            },
            "totals": totals,
            "outcomes": [_outcome_doc(o) for o in _ordered(outcomes)],
        },
    }
    return json.dumps(doc, indent=2) + "\n"


def _outcome_doc(o: VerificationOutcome) -> dict:
    doc: dict[str, object] = {
        "class": o.class_name,
        "routine": o.routine,
        "status": o.status,
        "checks": [_check_doc(c) for c in o.checks],
        "suggestions": list(o.suggestions),
        "times": {
            "translation": round(o.translation_time, 3),
            "solving": round(o.solving_time, 3),
        },
    }
    if o.diagnostics:
        doc["diagnostics"] = [str(d) for d in o.diagnostics]
    return doc


def _check_doc(c) -> dict:
    attr = c.attribution
    doc: dict[str, object] = {
        "kind": attr.kind,
        "tag": attr.tag,
        "line": attr.line,
    }
    if attr.callee is not None:
        doc["callee"] = attr.callee
    doc["generated"] = attr.generated
    doc["message"] = c.message
    return doc


def reemit(document: str) -> str:
    """Parse a machine report and print it back in canonical form."""
    return json.dumps(json.loads(document), indent=2) + "\n"


# -- text format ---------------------------------------------------------------


def text_report(
    outcomes: Sequence[VerificationOutcome],
    options: RunOptions,
    wall_time: float,
    color: Optional[bool] = None,
) -> str:
    if color is None:
        color = sys.stdout.isatty()

    def paint(text: str, status: str) -> str:
        if not color:
            return text
        return f"{_COLORS[status]}{text}{_RESET}"

    lines: list[str] = []
    ordered = _ordered(outcomes)
    if not ordered:
        lines.append("nothing to verify")
    current_class = None
    for o in ordered:
        if o.class_name != current_class:
            current_class = o.class_name
            lines.append(current_class)
        glyph = paint(f"[{_GLYPHS[o.status]}]", o.status)
        name = o.routine or "(unit)"
        timing = ""
        if o.status in ("verified", "failed", "timeout"):
            timing = f"  ({o.translation_time + o.solving_time:.2f}s)"
        suffix = ""
        if o.status == "failed":
            n = len(o.checks)
            suffix = f"  {n} check{'s' if n != 1 else ''} failed"
        elif o.detail:
            suffix = f"  {o.detail}"
        lines.append(f"  {glyph} {name}{suffix}{timing}")
        for c in o.checks:
            tag = f" '{c.attribution.tag}'" if c.attribution.tag else ""
            lines.append(
                f"      line {c.attribution.line}, {c.attribution.kind}{tag}: "
                f"{c.message}"
            )
        for s in o.suggestions:
            lines.append(f"      hint: {s}")
        for d in o.diagnostics:
            lines.append(f"      {d}")
    counts = _totals(outcomes)
    noun = "outcome" if counts["outcomes"] == 1 else "outcomes"
    lines.append(
        f"totals: {counts['outcomes']} {noun}: "
        f"{counts['verified']} verified, {counts['failed']} failed, "
        f"{counts['invalid']} invalid, {counts['skipped']} skipped, "
        f"{counts['timeout']} timeout, {counts['error']} error "
        f"({wall_time:.2f}s)"
    )
    return "\n".join(lines) + "\n"
