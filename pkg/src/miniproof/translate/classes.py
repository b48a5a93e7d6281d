"""Per-class declarations: type constants, field constants, logic
functions, and the class invariant predicate.

Class identity constants share one distinctness group, as do the field
constants of each field sort; emission turns a group into a single
`(assert (distinct ...))`. The invariant predicate `$inv.C` is defined
by an unguarded equation over all heaps and an object reference; its
body is the conjunction of the declared invariant clauses (inherited
ones first) and, for every INTEGER attribute, the machine-integer range
of the stored value. Routine translation asserts exactly these conjuncts
at public exits, which is what justifies assuming `$inv.C` whole at
entries and after calls.
"""

from __future__ import annotations

from miniproof.frontend import ast
from miniproof.frontend.typecheck import ClassInfo
from miniproof.ivl.ast import (
    App,
    BOOL,
    Const,
    ConstDecl,
    Expr,
    FunDecl,
    Quant,
    REF,
    Var,
    and_,
    eq,
    field_sort,
    heap_sort,
)
from miniproof.translate.context import (
    TranslationContext,
    field_const,
    fun_symbol,
    inv_symbol,
    sort_of_type,
    type_const,
)
from miniproof.translate.expressions import heap_read, is_integer, tr


def heap_params(ctx: TranslationContext) -> tuple[tuple[str, str], ...]:
    """(name, sort) pairs of the heap state, in canonical sort order."""
    return tuple(
        (ctx.heap_names[s], heap_sort(s)) for s in ctx.used_sorts
    )


def program_declarations(ctx: TranslationContext) -> list[ConstDecl]:
    """Declarations independent of any class: the root class identity."""
    return [ConstDecl("$type.ANY", "ClassId", distinct_group="ClassId")]


def class_declarations(
    ctx: TranslationContext, info: ClassInfo
) -> tuple[list[ConstDecl], list[FunDecl], list[Expr]]:
    """Constants, uninterpreted functions and axioms for one class."""
    decl = info.decl
    consts = [ConstDecl(type_const(decl.name), "ClassId", distinct_group="ClassId")]
    parent = decl.parent or "ANY"
    axioms: list[Expr] = [
        App(
            "subtype",
            (Const(type_const(decl.name), "ClassId"),
             Const(type_const(parent), "ClassId")),
            BOOL,
        )
    ]

    for attr in decl.attributes:
        vs = sort_of_type(attr.ty)
        consts.append(
            ConstDecl(
                field_const(decl.name, attr.name),
                field_sort(vs),
                distinct_group=field_sort(vs),
            )
        )

    heap_sorts = tuple(heap_sort(s) for s in ctx.used_sorts)
    funs: list[FunDecl] = []
    for r in decl.routines:
        if not r.is_function:
            continue
        arg_sorts = heap_sorts + (REF,) + tuple(
            sort_of_type(f.ty) for f in r.formals
        )
        funs.append(
            FunDecl(fun_symbol(decl.name, r.name), arg_sorts,
                    sort_of_type(r.return_type))
        )

    funs.append(FunDecl(inv_symbol(decl.name), heap_sorts + (REF,), BOOL))
    axioms.append(invariant_definition(ctx, info))
    return consts, funs, axioms


def invariant_definition(ctx: TranslationContext, info: ClassInfo) -> Expr:
    """forall heaps, Current: $inv.C(heaps, Current) = <clauses and ranges>."""
    bound = heap_params(ctx) + (("Current", REF),)
    current = Var("Current", REF)
    application = App(
        inv_symbol(info.name),
        tuple(Var(n, s) for n, s in heap_params(ctx)) + (current,),
        BOOL,
    )

    conjuncts: list[Expr] = []
    with ctx.frame(cls=info, self_expr=current, env={}):
        with ctx.spec_mode():
            for name in list(reversed(info.ancestors)) + [info.name]:
                for clause in ctx.class_info(name).decl.invariants:
                    conjuncts.append(tr(clause.expr, ctx))
        for name, attr in sorted(info.attributes.items()):
            if sort_of_type(attr.ty) != "Int":
                continue
            conjuncts.append(
                is_integer(
                    heap_read(ctx, current, attr.owner or info.name, name, "Int")
                )
            )

    return Quant(
        "forall",
        bound,
        eq(application, and_(*conjuncts)),
        patterns=((application,),),
    )
