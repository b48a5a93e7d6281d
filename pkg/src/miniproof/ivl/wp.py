"""Weakest preconditions over passive procedures.

Input must be passified and loop-free: assert/assume/if only. Each
assert contributes `Labeled(L, P) and (Labeled(L, P) => rest)`: the
full goal checks P and reasons past it, while an attribution query
that masks L to `true` loses both the check and the assumption, so
sibling obligations are judged independently of each other. Ensures
clauses run as final asserts, requires clauses wrap the goal as
assumptions.

Subformulas are shared (the same immutable node appears in both if
branches), so the goal is a DAG; the query emitter reuses shared nodes
with `let` rather than duplicating text.
"""

from __future__ import annotations

from miniproof.diagnostics import InternalError
from miniproof.ivl.ast import (
    Expr,
    IvlProcedure,
    IvlProgram,
    Labeled,
    SAssert,
    SAssume,
    SIf,
    Stmt,
    TRUE,
    Vc,
    and_,
    implies,
    not_,
)


def wp_stmts(stmts: list[Stmt], post: Expr) -> Expr:
    goal = post
    for s in reversed(stmts):
        if isinstance(s, SAssert):
            tagged = Labeled(s.label, s.expr)
            goal = and_(tagged, implies(tagged, goal))
        elif isinstance(s, SAssume):
            goal = implies(s.expr, goal)
        elif isinstance(s, SIf):
            goal = and_(
                implies(s.cond, wp_stmts(s.then, goal)),
                implies(not_(s.cond), wp_stmts(s.els, goal)),
            )
        else:
            raise InternalError(f"{type(s).__name__} in wp input (not passive)")
    return goal


def wp(proc: IvlProcedure, program: IvlProgram | None = None) -> Vc:
    tail: list[Stmt] = [SAssert(label, e) for label, e in proc.ensures]
    goal = wp_stmts(list(proc.body) + tail, TRUE)
    for r in reversed(proc.requires):
        goal = implies(r, goal)
    if program is not None:
        return Vc(
            goal=goal,
            labels=dict(proc.labels),
            background=list(program.theories),
            consts=list(program.consts),
            funs=list(program.funs),
            axioms=list(program.axioms),
        )
    return Vc(goal=goal, labels=dict(proc.labels), background=[])
