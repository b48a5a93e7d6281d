"""miniproof: an auto-active verifier for a small contract-annotated OO language.

The pipeline is frontend (lex/parse/typecheck/annotations) -> translate
(intermediate verification language) -> ivl (loop cutting, passification,
weakest preconditions) -> smt (query emission, solver subprocess, failure
attribution) -> driver (scheduling, two-step retry, outcome delivery).
"""

__version__ = "0.1.0"

from miniproof.driver import (  # noqa: E402
    Driver,
    FailedCheck,
    RunOptions,
    StepTwoEvidence,
    VerificationOutcome,
    suggest,
)
from miniproof.report import machine_report, text_report  # noqa: E402

__all__ = [
    "Driver",
    "FailedCheck",
    "RunOptions",
    "StepTwoEvidence",
    "VerificationOutcome",
    "machine_report",
    "suggest",
    "text_report",
    "__version__",
]
