"""SMT-LIB2 backend: query emission, solver processes, attribution."""

from miniproof.smt.attribute import CheckResult, DischargeResult, discharge_vc
from miniproof.smt.config import SolverConfig, discover_solver, solver_preamble
from miniproof.smt.emit import emit_query, mask_labels, print_smt
from miniproof.smt.solver import SolverResult, run_solver

__all__ = [
    "CheckResult",
    "DischargeResult",
    "SolverConfig",
    "SolverResult",
    "discharge_vc",
    "discover_solver",
    "emit_query",
    "mask_labels",
    "print_smt",
    "run_solver",
    "solver_preamble",
]
