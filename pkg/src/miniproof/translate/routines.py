"""Routine translation: contracts, entry assumptions, exit obligations.

A routine `C.r` becomes one IVL procedure. Its `requires` list carries
everything assumed at entry, in order: attachment and typing of Current,
well-formedness of the formals (machine-integer range for INTEGER,
attachment plus class invariant for references), the routine's own class
invariant when the default schema applies, the equations binding the
`$old.*` state to the entry state, default values for locals and Result,
and finally the declared precondition clauses. The `ensures` list
carries the labeled exit obligations: declared postconditions, the
function-consistency equation when the body is definitional, and the
class invariant clause by clause under the default schema.
"""

from __future__ import annotations

from typing import Optional

from miniproof.frontend import ast
from miniproof.ivl.ast import (
    App,
    BOOL,
    CheckAttribution,
    Const,
    Expr,
    IvlProcedure,
    REF,
    Var,
    and_,
    eq,
    heap_sort,
    not_,
    select,
)
from miniproof.translate.context import (
    TranslationContext,
    TranslationOptions,
    fun_symbol,
    inv_symbol,
    sort_of_type,
    type_const,
)
from miniproof.translate.expressions import (
    DEFAULT_VALUES,
    VOID,
    is_integer,
    tr,
)
from miniproof.translate.statements import StatementTranslator, invariant_app


def apply_invariant_defaults(
    r: ast.RoutineDecl,
    options: TranslationOptions,
    cls_decl: ast.ClassDecl,
) -> ast.RoutineDecl:
    """Fill the default-contract flags: public non-ghost routines assume
    the class invariant on entry and assert it on exit; creation routines
    assert it on exit only. Suppressed per class by `explicit: contracts`
    and globally by options."""
    r.inv_assume_entry = False
    r.inv_assert_exit = False
    if not options.invariant_defaults or cls_decl.explicit_contracts:
        return r
    if r.is_ghost or r.is_lemma:
        return r
    if r.is_creator:
        r.inv_assert_exit = True
        return r
    r.inv_assume_entry = True
    r.inv_assert_exit = True
    return r


def reference_wellformed(
    ctx: TranslationContext, value: Expr, class_name: str, include_alloc: bool = True
) -> Expr:
    """Attachment of a reference entering a routine: non-Void, allocated,
    of a conforming type, and satisfying its declared type's invariant."""
    conjuncts = [
        not_(eq(value, VOID)),
    ]
    if include_alloc:
        conjuncts.append(select(ctx.alloc(), value, BOOL))
    conjuncts.append(
        App(
            "subtype",
            (App("typeof", (value,), "ClassId"),
             Const(type_const(class_name), "ClassId")),
            BOOL,
        )
    )
    conjuncts.append(invariant_app(ctx, class_name, value))
    return and_(*conjuncts)


def entry_assumptions(ctx: TranslationContext, owner: str,
                      r: ast.RoutineDecl) -> list[Expr]:
    out = [reference_wellformed(ctx, ctx.self_expr, owner)
           if r.inv_assume_entry
           else reference_wellformed_no_inv(ctx, ctx.self_expr, owner)]
    for f in r.formals:
        sort = sort_of_type(f.ty)
        value = ctx.env[f.name]
        if sort == "Int":
            out.append(is_integer(value))
        elif sort == REF:
            out.append(reference_wellformed(ctx, value, f.ty.name))
    return out


def reference_wellformed_no_inv(
    ctx: TranslationContext, value: Expr, class_name: str
) -> Expr:
    return and_(
        not_(eq(value, VOID)),
        select(ctx.alloc(), value, BOOL),
        App(
            "subtype",
            (App("typeof", (value,), "ClassId"),
             Const(type_const(class_name), "ClassId")),
            BOOL,
        ),
    )


def old_state_equations(ctx: TranslationContext) -> list[Expr]:
    out = []
    for s in ctx.used_sorts:
        cur = ctx.heap(s)
        out.append(eq(Var(ctx.old_heap_names[s], cur.sort), cur))
    out.append(eq(Var(ctx.old_alloc_name, "Alloc"), ctx.alloc()))
    return out


def flattened_invariant_clauses(ctx: TranslationContext, owner: str):
    """Invariant clauses of `owner` and its ancestors, root first."""
    info = ctx.class_info(owner)
    out: list[tuple[str, ast.Clause]] = []
    for name in list(reversed(info.ancestors)) + [owner]:
        for clause in ctx.class_info(name).decl.invariants:
            out.append((name, clause))
    return out


def invariant_exit_obligations(
    ctx: TranslationContext, owner: str, line: int
) -> list[tuple[str, Expr]]:
    """Per-clause class-invariant asserts plus the generated range
    conjuncts for integer attributes; together they add up to the
    invariant predicate's definition, so callers may assume it."""
    out: list[tuple[str, Expr]] = []
    for _, clause in flattened_invariant_clauses(ctx, owner):
        attr = CheckAttribution(
            kind="class-invariant",
            line=clause.position.line,
            tag=clause.tag,
            generated=True,
        )
        with ctx.spec_mode():
            out.append((ctx.fresh_label("inv.exit", attr), tr(clause.expr, ctx)))
    from miniproof.translate.expressions import heap_read

    info = ctx.class_info(owner)
    for name, attr_decl in sorted(info.attributes.items()):
        if sort_of_type(attr_decl.ty) != "Int":
            continue
        attr = CheckAttribution(kind="class-invariant", line=line, generated=True)
        read = heap_read(ctx, ctx.self_expr, attr_decl.owner or owner, name, "Int")
        out.append((ctx.fresh_label("inv.range", attr), is_integer(read)))
    return out


def translate_routine(
    ctx: TranslationContext,
    owner: str,
    r: ast.RoutineDecl,
    body_mode: bool = True,
) -> IvlProcedure:
    """Translate `owner.r` into an IVL procedure. With body_mode False
    (or a contract-only declaration) the body and exit obligations are
    omitted; the result only documents the interface."""
    info = ctx.class_info(owner)
    ctx.begin_routine(info, r)

    params = [Var("Current", REF)]
    for f in r.formals:
        v = Var(f.name, sort_of_type(f.ty))
        params.append(v)
        ctx.env[f.name] = v

    locals_: list[Var] = []
    defaults: list[Expr] = []
    for lv in r.locals:
        v = Var(lv.name, sort_of_type(lv.ty))
        locals_.append(v)
        ctx.env[lv.name] = v
        defaults.append(eq(v, DEFAULT_VALUES[v.sort]))
    if r.is_function:
        result = Var("Result", sort_of_type(r.return_type))
        locals_.append(result)
        ctx.env["Result"] = result
        defaults.append(eq(result, DEFAULT_VALUES[result.sort]))

    ctx.modify_set = []
    for m in r.frame or []:
        if isinstance(m, ast.CurrentExpr):
            ctx.modify_set.append(ctx.self_expr)
        else:
            assert isinstance(m, ast.Ident)
            ctx.modify_set.append(ctx.env[m.name])

    requires = entry_assumptions(ctx, owner, r)
    requires.extend(old_state_equations(ctx))
    requires.extend(defaults)
    for clause in r.preconditions():
        with ctx.spec_mode():
            requires.append(tr(clause.expr, ctx))

    ensures: list[tuple[str, Expr]] = []
    body = []
    has_body = body_mode and r.body is not None
    if has_body:
        body = StatementTranslator(ctx).translate(r.body)
        for clause in r.ensure:
            attr = CheckAttribution(
                kind="postcondition", line=clause.position.line, tag=clause.tag
            )
            with ctx.spec_mode():
                ensures.append((ctx.fresh_label("post", attr), tr(clause.expr, ctx)))
        if r.inv_assert_exit:
            ensures.extend(
                invariant_exit_obligations(ctx, owner, r.position.line)
            )

    heap_locals = [Var(n, heap_sort(s)) for s, n in ctx.heap_names.items()]
    old_heap_locals = [Var(n, heap_sort(s)) for s, n in ctx.old_heap_names.items()]
    state = (
        heap_locals
        + old_heap_locals
        + [Var(ctx.alloc_name, "Alloc"), Var(ctx.old_alloc_name, "Alloc")]
    )

    return IvlProcedure(
        name=f"{owner}.{r.name}",
        params=params,
        locals=locals_ + state + list(ctx.extra_locals),
        requires=requires,
        ensures=ensures,
        body=body,
        labels=dict(ctx.labels),
    )


def consistency_obligation(
    ctx: TranslationContext, owner: str, r: ast.RoutineDecl
) -> tuple[str, Expr]:
    """Exit equation tying the procedure's Result to the logic function
    over the entry state."""
    old_heaps = tuple(
        Var(ctx.old_heap_names[s], heap_sort(s)) for s in ctx.used_sorts
    )
    args = tuple(ctx.env[f.name] for f in r.formals)
    application = App(
        fun_symbol(owner, r.name),
        old_heaps + (ctx.self_expr,) + args,
        sort_of_type(r.return_type),
    )
    attr = CheckAttribution(
        kind="postcondition", line=r.position.line, generated=True
    )
    return (ctx.fresh_label("post.fun", attr), eq(ctx.env["Result"], application))
