"""Expression translation: the default handler chain.

Three extension points nest like the node shapes they serve: `across`
for the bounded quantifier, `call` for routine and theory-operation
applications, `expression` for everything. Dispatch starts at the most
specific point and falls outward, so a custom call handler sees a call
before the default does, and the default expression handler is total.

Executable contexts thread an ObligationSink through the context; the
sink turns implicit proof obligations (Void dereference, arithmetic
overflow, nonzero divisor, callee preconditions) into labeled asserts
placed before the statement that evaluates the expression. In
specification contexts the sink is absent and the same expressions
translate obligation-free.
"""

from __future__ import annotations

from contextlib import contextmanager
from typing import Optional

from miniproof.diagnostics import InputError, InternalError, error
from miniproof.frontend import ast
from miniproof.ivl.ast import (
    App,
    BOOL,
    BoolConst,
    CheckAttribution,
    Const,
    Expr,
    INT,
    IntConst,
    Quant,
    REF,
    SAssert,
    Stmt,
    Var,
    and_,
    eq,
    field_sort,
    implies,
    not_,
    or_,
    select,
)

INT_MIN = -(2**31)
INT_MAX = 2**31 - 1

VOID = Const("Void", REF)

# (container type, operation) -> (theory symbol, result sort)
THEORY_OPS: dict[tuple[str, str], tuple[str, str]] = {
    ("SEQ", "count"): ("sq.len", INT),
    ("SEQ", "item"): ("sq.item", INT),
    ("SEQ", "has"): ("sq.has", BOOL),
    ("SEQ", "sorted"): ("sq.sorted", BOOL),
    ("SEQ", "slice"): ("sq.slice", "MSeq"),
    ("SEQ", "concat"): ("sq.cat", "MSeq"),
    ("SEQ", "updated"): ("sq.upd", "MSeq"),
    ("SEQ", "extended"): ("sq.ext", "MSeq"),
    ("SEQ", "occurrences"): ("sq.occ", INT),
    ("SEQ", "is_perm"): ("sq.perm", BOOL),
    ("SEQ", "to_bag"): ("bg.of_seq", "MBag"),
    ("SET", "count"): ("st.card", INT),
    ("SET", "has"): ("st.has", BOOL),
    ("SET", "united"): ("st.union", "MSet"),
    ("SET", "extended"): ("st.add", "MSet"),
    ("SET", "removed"): ("st.remove", "MSet"),
    ("BAG", "count"): ("bg.size", INT),
    ("BAG", "has"): ("bg.has", BOOL),
    ("BAG", "occurrences"): ("bg.occ", INT),
    ("BAG", "extended"): ("bg.add", "MBag"),
    ("BAG", "added"): ("bg.plus", "MBag"),
    ("MAP", "item"): ("mp.get", INT),
    ("MAP", "has_key"): ("mp.has", BOOL),
    ("MAP", "updated"): ("mp.set", "MMap"),
    ("MAP", "removed"): ("mp.remove", "MMap"),
}

DEFAULT_VALUES = {
    INT: IntConst(0),
    BOOL: BoolConst(False),
    REF: VOID,
    "MSeq": Const("sq.empty", "MSeq"),
    "MSet": Const("st.empty", "MSet"),
    "MBag": Const("bg.empty", "MBag"),
    "MMap": Const("mp.empty", "MMap"),
}


def is_integer(e: Expr) -> Expr:
    return App("is_integer", (e,), BOOL)


class ObligationSink:
    """Collects implicit-check asserts raised while translating the
    expressions of one statement. Short-circuit operators guard the
    checks of their right operand with the left operand's value."""

    def __init__(self, ctx) -> None:
        self.ctx = ctx
        self.stmts: list[Stmt] = []
        self.guards: list[Expr] = []

    def emit(self, base: str, attr: CheckAttribution, check: Expr) -> None:
        for g in reversed(self.guards):
            check = implies(g, check)
        label = self.ctx.fresh_label(base, attr)
        self.stmts.append(SAssert(label, check))

    @contextmanager
    def guard(self, condition: Expr):
        self.guards.append(condition)
        try:
            yield
        finally:
            self.guards.pop()

    def take(self) -> list[Stmt]:
        out, self.stmts = self.stmts, []
        return out


def tr(e: ast.Expr, ctx) -> Expr:
    return ctx.registry.dispatch(e, ctx)


# ---------------------------------------------------------------------------
# Implicit checks


def check_void(ctx, target: Expr, node: ast.Expr) -> None:
    """Void-target obligation for a qualified access. A literal Current
    target is non-Void by the entry assumption and emits nothing."""
    if ctx.checks is None:
        return
    attr = CheckAttribution(kind="void-target", line=node.position.line)
    ctx.checks.emit("void", attr, not_(eq(target, VOID)))


def check_overflow(ctx, result: Expr, node: ast.Expr) -> None:
    if ctx.checks is None:
        return
    attr = CheckAttribution(kind="overflow", line=node.position.line)
    ctx.checks.emit("overflow", attr, is_integer(result))


def check_divisor(ctx, divisor: Expr, node: ast.Expr) -> None:
    if ctx.checks is None:
        return
    attr = CheckAttribution(kind="overflow", line=node.position.line)
    ctx.checks.emit("divisor", attr, not_(eq(divisor, IntConst(0))))


# ---------------------------------------------------------------------------
# Heap access


def heap_read(ctx, ref: Expr, owner: str, attr_name: str, value_sort: str) -> Expr:
    row_sort = f"(Array {field_sort(value_sort)} {value_sort})"
    row = select(ctx.heap(value_sort), ref, row_sort)
    from miniproof.translate.context import field_const

    tag = Const(field_const(owner, attr_name), field_sort(value_sort))
    return select(row, tag, value_sort)


# ---------------------------------------------------------------------------
# Default handlers


# Heads that may not lead a trigger: the solver's E-matcher refuses
# boolean structure and has no use for bare arithmetic.
_TRIGGER_OPAQUE = frozenset(
    ("+", "-", "*", "=", "<", "<=", ">", ">=", "and", "or", "not", "=>", "xor", "ite")
)


def _trigger_terms(body: Expr, bound: str) -> tuple[tuple[Expr, ...], ...]:
    """Maximal uninterpreted applications mentioning the bound variable.

    A quantifier whose bound variable occurs only under arithmetic (a
    common shape: `sequence [x + k - 1]`) gets no automatic trigger from
    the solver and then never instantiates; naming the application
    ourselves keeps such clauses usable as assumptions."""

    def mentions(x: Expr) -> bool:
        if isinstance(x, Var):
            return x.name == bound
        if isinstance(x, App):
            return any(mentions(a) for a in x.args)
        return False

    groups: list[tuple[Expr, ...]] = []
    seen: set[int] = set()

    def walk(x: Expr) -> None:
        if isinstance(x, Quant):
            return  # inner binders may not leak into our patterns
        if not isinstance(x, App):
            return
        if x.fn not in _TRIGGER_OPAQUE and mentions(x):
            if id(x) not in seen:
                seen.add(id(x))
                groups.append((x,))
            return
        for a in x.args:
            walk(a)

    walk(body)
    return tuple(groups)


def default_across(e: ast.Expr, ctx) -> Optional[Expr]:
    if not isinstance(e, ast.AcrossExpr):
        return None
    lower = tr(e.lower, ctx)
    upper = tr(e.upper, ctx)
    name = ctx.fresh_bound(e.var)
    bv = Var(name, INT)
    with ctx.bind(e.var, bv), ctx.spec_mode():
        body = tr(e.body, ctx)
    in_range = and_(App("<=", (lower, bv), BOOL), App("<=", (bv, upper), BOOL))
    patterns = _trigger_terms(body, name)
    if e.quant == "all":
        return Quant("forall", ((name, INT),), implies(in_range, body), patterns)
    return Quant("exists", ((name, INT),), and_(in_range, body), patterns)


def default_call(e: ast.Expr, ctx) -> Optional[Expr]:
    if isinstance(e, ast.IndexExpr):
        target = tr(e.target, ctx)
        index = tr(e.index, ctx)
        if e.resolution == "seq_item":
            return App("sq.item", (target, index), INT)
        if e.resolution == "map_item":
            return App("mp.get", (target, index), INT)
        return None
    if isinstance(e, ast.FieldAccess) and e.resolution == "theory_op":
        target = tr(e.target, ctx)
        assert e.target.ty is not None
        symbol, sort = THEORY_OPS[(e.target.ty.name, e.name)]
        return App(symbol, (target,), sort)
    if isinstance(e, ast.CallExpr):
        if e.resolution == "theory_op":
            assert e.target is not None and e.target.ty is not None
            target = tr(e.target, ctx)
            args = tuple(tr(a, ctx) for a in e.args)
            symbol, sort = THEORY_OPS[(e.target.ty.name, e.name)]
            return App(symbol, (target,) + args, sort)
        if e.resolution == "routine":
            return translate_function_call(e, ctx)
    return None


def translate_function_call(e: ast.CallExpr, ctx) -> Expr:
    """Apply the logic function of a query routine. In executable
    contexts this also raises the call-site obligations: target
    attachment, the callee's precondition clause by clause, and the
    termination measure when the call closes a recursion cycle."""
    from miniproof.translate.context import fun_symbol, sort_of_type

    owner = e.routine_class
    assert owner is not None
    callee = ctx.class_info(owner).routines[e.name]
    if e.target is None:
        target = ctx.self_expr
    else:
        target = tr(e.target, ctx)
        if not isinstance(e.target, ast.CurrentExpr):
            check_void(ctx, target, e)
    args = tuple(tr(a, ctx) for a in e.args)

    if ctx.checks is not None:
        assert_callee_preconditions(ctx, callee, owner, target, args, e)
        assert_recursion_measure(ctx, callee, owner, target, args, e)

    heaps = tuple(ctx.heap(s) for s in ctx.used_sorts)
    assert e.ty is not None
    return App(
        fun_symbol(owner, e.name), heaps + (target,) + args, sort_of_type(e.ty)
    )


def callee_env(callee: ast.RoutineDecl, args: tuple[Expr, ...]) -> dict[str, Expr]:
    return {f.name: a for f, a in zip(callee.formals, args)}


def assert_callee_preconditions(
    ctx, callee: ast.RoutineDecl, owner: str, target: Expr, args, site: ast.Expr
) -> None:
    qualified = f"{owner}.{callee.name}"
    env = callee_env(callee, args)
    for clause in callee.preconditions():
        with ctx.frame(cls=ctx.class_info(owner), self_expr=target, env=env):
            with ctx.spec_mode():
                formula = tr(clause.expr, ctx)
        attr = CheckAttribution(
            kind="precondition-at-call",
            line=site.position.line,
            tag=clause.tag,
            callee=qualified,
        )
        ctx.checks.emit("pre", attr, formula)


def assert_recursion_measure(
    ctx, callee: ast.RoutineDecl, owner: str, target: Expr, args, site: ast.Expr
) -> None:
    """For a call within the current recursion cycle: the callee's
    measure, evaluated in the call-time state over the actuals, is
    nonnegative and strictly below the caller's measure at entry."""
    if ctx.routine is None or not ctx.routine.check_termination:
        return
    if not ctx.in_recursion_cycle(owner, callee.name):
        return
    if ctx.routine.decreases is None or callee.decreases is None:
        raise InputError(
            error(
                f"recursive call to '{owner}.{callee.name}' needs a decreases "
                "measure on both routines (or 'termination: false')",
                site.position,
            )
        )
    env = callee_env(callee, args)
    with ctx.frame(cls=ctx.class_info(owner), self_expr=target, env=env):
        with ctx.spec_mode():
            callee_measure = tr(callee.decreases, ctx)
    with ctx.spec_mode(), ctx.old_mode():
        entry_measure = tr(ctx.routine.decreases, ctx)
    qualified = f"{owner}.{callee.name}"
    nn = CheckAttribution(
        kind="variant-nonnegative", line=site.position.line, callee=qualified
    )
    dec = CheckAttribution(
        kind="variant-decreases", line=site.position.line, callee=qualified
    )
    ctx.checks.emit("rec.nn", nn, App(">=", (callee_measure, IntConst(0)), BOOL))
    ctx.checks.emit("rec.dec", dec, App("<", (callee_measure, entry_measure), BOOL))


def default_expression(e: ast.Expr, ctx) -> Optional[Expr]:
    if isinstance(e, ast.IntLit):
        if not (INT_MIN <= e.value <= INT_MAX):
            check_overflow(ctx, IntConst(e.value), e)
        return IntConst(e.value)
    if isinstance(e, ast.BoolLit):
        return BoolConst(e.value)
    if isinstance(e, ast.VoidLit):
        return VOID
    if isinstance(e, ast.CurrentExpr):
        return ctx.self_expr
    if isinstance(e, ast.ResultExpr):
        result = ctx.env.get("Result")
        if result is None:
            raise InternalError("Result translated outside a function")
        return result
    if isinstance(e, ast.Ident):
        if e.binding in ("local", "formal", "across"):
            bound = ctx.env.get(e.name)
            if bound is None:
                raise InternalError(f"name '{e.name}' missing from environment")
            return bound
        if e.binding == "attribute":
            assert e.ty is not None
            owner = ctx.attribute_owner(ctx.current_class.name, e.name)
            from miniproof.translate.context import sort_of_type

            return heap_read(ctx, ctx.self_expr, owner, e.name, sort_of_type(e.ty))
        raise InternalError(f"unresolved identifier '{e.name}'")
    if isinstance(e, ast.FieldAccess):
        if e.resolution == "attribute":
            target = tr(e.target, ctx)
            if not isinstance(e.target, ast.CurrentExpr):
                check_void(ctx, target, e)
            assert e.target.ty is not None and e.ty is not None
            owner = ctx.attribute_owner(e.target.ty.name, e.name)
            from miniproof.translate.context import sort_of_type

            return heap_read(ctx, target, owner, e.name, sort_of_type(e.ty))
        raise InternalError(f"unresolved field access '{e.name}'")
    if isinstance(e, ast.Binary):
        return translate_binary(e, ctx)
    if isinstance(e, ast.Unary):
        operand = tr(e.operand, ctx)
        if e.op == "-":
            if isinstance(operand, IntConst):
                folded = IntConst(-operand.value)
                if not (INT_MIN <= folded.value <= INT_MAX):
                    check_overflow(ctx, folded, e)
                return folded
            result = App("-", (operand,), INT)
            check_overflow(ctx, result, e)
            return result
        return not_(operand)
    if isinstance(e, ast.OldExpr):
        with ctx.old_mode():
            return tr(e.expr, ctx)
    if isinstance(e, ast.AcrossExpr):
        return default_across(e, ctx)
    if isinstance(e, (ast.CallExpr, ast.IndexExpr)):
        return default_call(e, ctx)
    raise InternalError(f"untranslatable expression {type(e).__name__}")


def translate_binary(e: ast.Binary, ctx) -> Expr:
    op = e.op
    if op in ("and then", "or else"):
        left = tr(e.left, ctx)
        if ctx.checks is not None:
            condition = left if op == "and then" else not_(left)
            with ctx.checks.guard(condition):
                right = tr(e.right, ctx)
        else:
            right = tr(e.right, ctx)
        return and_(left, right) if op == "and then" else or_(left, right)

    left = tr(e.left, ctx)
    right = tr(e.right, ctx)
    both_literal = isinstance(left, IntConst) and isinstance(right, IntConst)

    if op in ("+", "-"):
        if both_literal:
            value = left.value + right.value if op == "+" else left.value - right.value
            folded = IntConst(value)
            if not (INT_MIN <= value <= INT_MAX):
                check_overflow(ctx, folded, e)
            return folded
        result = App(op, (left, right), INT)
        check_overflow(ctx, result, e)
        return result
    if op == "*":
        if both_literal:
            folded = IntConst(left.value * right.value)
            if not (INT_MIN <= folded.value <= INT_MAX):
                check_overflow(ctx, folded, e)
            return folded
        # One literal factor keeps the term linear; two variable factors
        # go through the wrapped operator so the nonlinear axiom has a
        # trigger to fire on.
        if isinstance(left, IntConst) or isinstance(right, IntConst):
            result = App("*", (left, right), INT)
        else:
            result = App("ap.mul", (left, right), INT)
        check_overflow(ctx, result, e)
        return result
    if op in ("//", "\\\\"):
        if isinstance(right, IntConst) and right.value != 0:
            if isinstance(left, IntConst) and right.value > 0:
                if op == "//":
                    return IntConst(left.value // right.value)
                return IntConst(left.value % right.value)
        else:
            check_divisor(ctx, right, e)
        symbol = "ap.div" if op == "//" else "ap.mod"
        return App(symbol, (left, right), INT)
    if op in ("<", "<=", ">", ">="):
        return App(op, (left, right), BOOL)
    if op == "=":
        return eq(left, right)
    if op == "/=":
        return not_(eq(left, right))
    if op == "and":
        return and_(left, right)
    if op == "or":
        return or_(left, right)
    if op == "xor":
        return App("xor", (left, right), BOOL)
    if op == "implies":
        return implies(left, right)
    raise InternalError(f"untranslatable operator '{op}'")


def default_registry():
    from miniproof.translate.context import HandlerRegistry

    registry = HandlerRegistry()
    registry.register("expression", default_expression)
    registry.register("call", default_call)
    registry.register("across", default_across)
    return registry
