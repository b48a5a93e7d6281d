"""Structural checks on IVL procedures.

These are internal sanity checks: a translation bug should fail here,
loudly, rather than surface as a malformed solver query. Raises
InternalError on the first violation.
"""

from __future__ import annotations

from miniproof.diagnostics import InternalError
from miniproof.ivl.ast import (
    App,
    CHECK_KINDS,
    Expr,
    IvlProcedure,
    IvlProgram,
    Labeled,
    Quant,
    SAssert,
    SAssign,
    SAssume,
    SCall,
    SHavoc,
    SIf,
    SLoop,
    Var,
    expr_sort,
    iter_stmts,
)


def check_wellformed(proc: IvlProcedure, program: IvlProgram | None = None) -> None:
    declared: dict[str, str] = {}
    for v in proc.params + proc.locals:
        if v.name in declared:
            raise InternalError(f"{proc.name}: duplicate declaration of {v.name}")
        declared[v.name] = v.sort
    param_names = {v.name for v in proc.params}
    consts = {c.name for c in (program.consts if program else [])}

    seen_labels: set[str] = set()

    def check_label(label: str) -> None:
        if label in seen_labels:
            raise InternalError(f"{proc.name}: duplicate check label {label!r}")
        seen_labels.add(label)
        attr = proc.labels.get(label)
        if attr is None:
            raise InternalError(f"{proc.name}: label {label!r} has no attribution")
        if attr.kind not in CHECK_KINDS:
            raise InternalError(f"{proc.name}: unknown check kind {attr.kind!r}")

    def check_expr(e: Expr, bound: frozenset[str]) -> None:
        if isinstance(e, Var):
            if e.name not in bound and e.name not in declared and e.name not in consts:
                raise InternalError(f"{proc.name}: undeclared variable {e.name!r}")
        elif isinstance(e, App):
            for a in e.args:
                check_expr(a, bound)
        elif isinstance(e, Quant):
            inner = bound | {n for n, _ in e.bound}
            check_expr(e.body, inner)
        elif isinstance(e, Labeled):
            check_label(e.label)
            check_expr(e.expr, bound)

    def check_bool(e: Expr, what: str) -> None:
        if expr_sort(e) != "Bool":
            raise InternalError(
                f"{proc.name}: {what} has sort {expr_sort(e)}, expected Bool"
            )

    def check_stmts(stmts: list) -> None:
        for s in stmts:
            if isinstance(s, SAssign):
                if s.name not in declared:
                    raise InternalError(
                        f"{proc.name}: assignment to undeclared {s.name!r}"
                    )
                if s.name in param_names:
                    raise InternalError(f"{proc.name}: assignment to parameter {s.name!r}")
                check_expr(s.expr, frozenset())
                if expr_sort(s.expr) != declared[s.name]:
                    raise InternalError(
                        f"{proc.name}: sort mismatch assigning {s.name!r}: "
                        f"{declared[s.name]} := {expr_sort(s.expr)}"
                    )
            elif isinstance(s, SHavoc):
                if s.name not in declared:
                    raise InternalError(f"{proc.name}: havoc of undeclared {s.name!r}")
                if s.name in param_names:
                    raise InternalError(f"{proc.name}: havoc of parameter {s.name!r}")
            elif isinstance(s, SAssert):
                check_label(s.label)
                check_expr(s.expr, frozenset())
                check_bool(s.expr, f"assert {s.label}")
            elif isinstance(s, SAssume):
                check_expr(s.expr, frozenset())
                check_bool(s.expr, "assume")
            elif isinstance(s, SIf):
                check_expr(s.cond, frozenset())
                check_bool(s.cond, "branch condition")
                check_stmts(s.then)
                check_stmts(s.els)
            elif isinstance(s, SCall):
                if program is not None and s.callee not in program.contracts:
                    raise InternalError(
                        f"{proc.name}: call to unknown contract {s.callee!r}"
                    )
                for a in s.args:
                    check_expr(a, frozenset())
            elif isinstance(s, SLoop):
                for inv in s.invariants:
                    check_label(inv.entry_label)
                    check_label(inv.maint_label)
                    check_expr(inv.expr, frozenset())
                    check_bool(inv.expr, "loop invariant")
                check_stmts(s.head)
                check_expr(s.exit, frozenset())
                check_bool(s.exit, "exit condition")
                if s.variant is not None:
                    check_expr(s.variant, frozenset())
                    if expr_sort(s.variant) != "Int":
                        raise InternalError(f"{proc.name}: variant is not integer")
                    if s.variant_labels is None:
                        raise InternalError(
                            f"{proc.name}: loop variant without labels"
                        )
                    check_label(s.variant_labels[0])
                    check_label(s.variant_labels[1])
                elif s.missing_variant_label is not None:
                    check_label(s.missing_variant_label)
                for name in s.targets:
                    if name not in declared:
                        raise InternalError(
                            f"{proc.name}: loop target undeclared {name!r}"
                        )
                for fa in s.frame_assumes:
                    check_expr(fa, frozenset())
                check_stmts(s.body)
            else:
                raise InternalError(f"{proc.name}: unknown statement {type(s).__name__}")

    check_stmts(proc.body)
    for e in proc.requires:
        check_expr(e, frozenset())
    for label, e in proc.ensures:
        check_label(label)
        check_expr(e, frozenset())

    unused = set(proc.labels) - seen_labels
    if unused:
        raise InternalError(
            f"{proc.name}: attributions without obligations: {sorted(unused)}"
        )


def assigned_names(stmts: list) -> set[str]:
    """Names any statement in `stmts` may write (loop targets included)."""
    out: set[str] = set()
    for s in iter_stmts(stmts):
        if isinstance(s, SAssign):
            out.add(s.name)
        elif isinstance(s, SHavoc):
            out.add(s.name)
        elif isinstance(s, SLoop):
            out.update(s.targets)
    return out
