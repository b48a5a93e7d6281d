"""Logic-function axioms.

Every query routine `C.f` has an uninterpreted function `fun.C.f` over
the heaps, the receiver, and the arguments. What a verification
condition may assume about it depends on where the knowledge would come
from:

* In the conditions of other routines, only the declared contract: the
  postcondition axiom states that inputs satisfying the precondition
  yield results satisfying the postcondition. A caller's verdict can
  then only depend on the callee's contract, never on its body.
* In the condition of `C.f` itself, the contract axiom would be
  circular, so it is dropped. When the body is branch-and-assignment
  only, it is replayed symbolically into a defining equation instead,
  and the procedure proves the consistency postcondition
  `Result = fun.C.f(...)` against it.
* Between routines that recurse into each other, the contract axiom is
  admitted only for arguments whose declared measure is non-negative
  and strictly below the verified routine's entry measure; together
  with the call-site checks that the measure decreases, this is the
  usual well-founded induction argument.
"""

from __future__ import annotations

from typing import Optional

from miniproof.frontend import ast
from miniproof.frontend.typecheck import ClassInfo
from miniproof.ivl.ast import (
    App,
    BOOL,
    Const,
    Expr,
    INT,
    IntConst,
    IvlProcedure,
    Quant,
    REF,
    SAssert,
    SAssign,
    SIf,
    Stmt,
    Var,
    and_,
    eq,
    implies,
    ite,
    not_,
    subst,
)
from miniproof.translate.context import (
    TranslationContext,
    fun_symbol,
    sort_of_type,
    type_const,
)
from miniproof.translate.expressions import DEFAULT_VALUES, VOID, is_integer, tr
from miniproof.translate.statements import invariant_app


def symbolic_result(proc: IvlProcedure, r: ast.RoutineDecl) -> Optional[Expr]:
    """Replay a straight-line body into the expression it computes for
    Result, or None when the body is not definitional (loops, calls,
    havoc). Assertions carry no value and are skipped."""
    local_names = {lv.name for lv in r.locals} | {"Result"}
    env: dict[str, Expr] = {
        v.name: DEFAULT_VALUES[v.sort]
        for v in proc.locals
        if v.name in local_names
    }
    final = _execute(proc.body, env)
    if final is None:
        return None
    return final.get("Result")


def _execute(
    stmts: list[Stmt], env: dict[str, Expr]
) -> Optional[dict[str, Expr]]:
    for s in stmts:
        if isinstance(s, SAssert):
            continue
        if isinstance(s, SAssign):
            env = dict(env)
            env[s.name] = subst(s.expr, env)
        elif isinstance(s, SIf):
            cond = subst(s.cond, env)
            then_env = _execute(s.then, dict(env))
            else_env = _execute(s.els, dict(env))
            if then_env is None or else_env is None:
                return None
            merged = dict(env)
            for name in sorted(set(then_env) | set(else_env)):
                if name not in then_env or name not in else_env:
                    return None
                t, e = then_env[name], else_env[name]
                merged[name] = t if t == e else ite(cond, t, e)
            env = merged
        else:
            return None
    return env


def function_application(
    ctx: TranslationContext, owner: str, r: ast.RoutineDecl,
    heaps: tuple[Expr, ...], current: Expr, args: tuple[Expr, ...]
) -> App:
    return App(
        fun_symbol(owner, r.name),
        heaps + (current,) + args,
        sort_of_type(r.return_type),
    )


def _axiom_frame(ctx: TranslationContext, r: ast.RoutineDecl, freshen: bool):
    """Bound variables of an axiom. The heap names coincide with the
    canonical translation names so contract clauses translate without
    renaming. When the axiom body will embed caller-side terms (a
    measure cap), the receiver and formal names are freshened so those
    terms cannot be captured."""
    from miniproof.translate.classes import heap_params

    cur_name = ctx.fresh_bound("Current") if freshen else "Current"
    formal_names = [
        ctx.fresh_bound(f.name) if freshen else f.name for f in r.formals
    ]
    bound = heap_params(ctx) + ((cur_name, REF),) + tuple(
        (n, sort_of_type(f.ty)) for n, f in zip(formal_names, r.formals)
    )
    current = Var(cur_name, REF)
    heaps = tuple(Var(n, s) for n, s in heap_params(ctx))
    args = tuple(
        Var(n, sort_of_type(f.ty)) for n, f in zip(formal_names, r.formals)
    )
    return bound, current, heaps, args


def _wellformedness_guard(
    ctx: TranslationContext, owner: str, r: ast.RoutineDecl,
    current: Expr, args: tuple[Expr, ...]
) -> list[Expr]:
    """Entry assumptions restated over the bound state. Allocatedness is
    not expressible here (the axiom ranges over all heaps), so the guard
    keeps attachment, typing, ranges, and invariants only."""
    guard: list[Expr] = [
        not_(eq(current, VOID)),
        App(
            "subtype",
            (App("typeof", (current,), "ClassId"),
             Const(type_const(owner), "ClassId")),
            BOOL,
        ),
    ]
    if r.inv_assume_entry:
        guard.append(invariant_app(ctx, owner, current))
    for f, a in zip(r.formals, args):
        sort = sort_of_type(f.ty)
        if sort == INT:
            guard.append(is_integer(a))
        elif sort == REF:
            guard.append(not_(eq(a, VOID)))
            guard.append(
                App(
                    "subtype",
                    (App("typeof", (a,), "ClassId"),
                     Const(type_const(f.ty.name), "ClassId")),
                    BOOL,
                )
            )
            guard.append(invariant_app(ctx, f.ty.name, a))
    return guard


def contract_axiom(
    ctx: TranslationContext,
    info: ClassInfo,
    r: ast.RoutineDecl,
    measure_cap: Optional[Expr] = None,
) -> Optional[Expr]:
    """`forall state: pre => post[Result := fun.C.f(state)]`. With a
    measure cap, the guard further restricts the axiom to arguments
    whose declared measure is non-negative and below the cap."""
    if not r.ensure:
        return None
    owner = info.name
    bound, current, heaps, args = _axiom_frame(ctx, r, freshen=measure_cap is not None)
    application = function_application(ctx, owner, r, heaps, current, args)

    env: dict[str, Expr] = {f.name: a for f, a in zip(r.formals, args)}
    env["Result"] = application

    guard = _wellformedness_guard(ctx, owner, r, current, args)
    with ctx.frame(
        cls=info,
        self_expr=current,
        env=env,
        old_heap_names=dict(ctx.heap_names),
        old_alloc_name=ctx.alloc_name,
    ):
        with ctx.spec_mode():
            if measure_cap is not None:
                dec = tr(r.decreases, ctx)
                guard.append(App("<=", (IntConst(0), dec), BOOL))
                guard.append(App("<", (dec, measure_cap), BOOL))
            for clause in r.preconditions():
                guard.append(tr(clause.expr, ctx))
            post = and_(*[tr(c.expr, ctx) for c in r.ensure])

    body = implies(and_(*guard), post)
    return Quant("forall", bound, body, patterns=((application,),))


def defining_axiom(
    ctx: TranslationContext,
    info: ClassInfo,
    r: ast.RoutineDecl,
    definition: Expr,
) -> Expr:
    """`forall state: fun.C.f(state) = <replayed body>`; used only inside
    the verification condition of C.f itself."""
    bound, current, heaps, args = _axiom_frame(ctx, r, freshen=False)
    application = function_application(ctx, info.name, r, heaps, current, args)
    return Quant(
        "forall", bound, eq(application, definition),
        patterns=((application,),),
    )
