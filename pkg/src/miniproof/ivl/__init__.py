"""Boogie-style intermediate verification language.

Pipeline: check_wellformed -> cut_loops (or unroll_loops for the second
verification step) -> passify -> wp, producing a Vc per procedure.
"""

from miniproof.ivl.ast import (
    CheckAttribution,
    IvlProcedure,
    IvlProgram,
    Vc,
)
from miniproof.ivl.wellformed import check_wellformed
from miniproof.ivl.loops import cut_loops, unroll_loops
from miniproof.ivl.passify import passify
from miniproof.ivl.wp import wp

__all__ = [
    "CheckAttribution",
    "IvlProcedure",
    "IvlProgram",
    "Vc",
    "check_wellformed",
    "cut_loops",
    "unroll_loops",
    "passify",
    "wp",
]
