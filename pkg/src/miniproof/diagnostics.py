"""Diagnostics shared by every pipeline stage.

A diagnostic is always tied to a source position. Stages raise
InputError for problems that make their input unusable (parse errors,
type errors, ill-formed annotations); the driver catches these and turns
them into `invalid` outcomes rather than crashing the run.
"""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class Position:
    """1-based line/column with the originating file (or '<input>')."""

    line: int
    column: int = 0
    path: str = "<input>"

    def __str__(self) -> str:
        if self.column:
            return f"{self.path}:{self.line}:{self.column}"
        return f"{self.path}:{self.line}"


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" | "warning"
    message: str
    position: Position

    def __str__(self) -> str:
        return f"{self.position}: {self.severity}: {self.message}"


class InputError(Exception):
    """Raised when a stage cannot make sense of its input.

    Carries one or more diagnostics; the first one is the headline.
    """

    def __init__(self, diagnostics: list[Diagnostic] | Diagnostic):
        if isinstance(diagnostics, Diagnostic):
            diagnostics = [diagnostics]
        if not diagnostics:
            raise ValueError("InputError needs at least one diagnostic")
        self.diagnostics = diagnostics
        super().__init__(str(diagnostics[0]))


class InternalError(Exception):
    """A bug in the verifier itself (inconsistent solver answers, broken
    pipeline invariants). Never raised for bad user input."""


class ConfigurationError(Exception):
    """The run cannot start: no usable solver, unreadable theory path,
    contradictory options. The message includes what to change."""


def error(message: str, position: Position) -> Diagnostic:
    return Diagnostic("error", message, position)


def warning(message: str, position: Position) -> Diagnostic:
    return Diagnostic("warning", message, position)


@dataclass
class DiagnosticSink:
    """Collects warnings emitted while a unit is processed.

    Errors are raised as InputError immediately; warnings accumulate here
    so they can be shown once at the end of a run.
    """

    warnings: list[Diagnostic] = field(default_factory=list)

    def warn(self, message: str, position: Position) -> None:
        self.warnings.append(warning(message, position))
