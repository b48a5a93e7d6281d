"""Statement translation.

Each statement becomes a list of IVL statements: the obligation asserts
raised while translating its expressions, then the statement's own
effect. Heap mutation goes through per-value-sort heap variables; a
store to `c.a` asserts the frame obligation (the target is in the
routine's modify set or was unallocated at entry) unless the target is
syntactically a modify-set member.

Procedure calls are handled modularly: assert the callee's precondition
clause by clause, snapshot the heaps, havoc them together with the
allocation set, then assume allocation monotonicity, the callee's frame
condition, its postcondition (with `old` reading the snapshots) and the
target's class invariant when the callee ends by asserting it.
"""

from __future__ import annotations

from miniproof.diagnostics import InternalError
from miniproof.frontend import ast
from miniproof.ivl.ast import (
    App,
    BOOL,
    BoolConst,
    CheckAttribution,
    Const,
    Expr,
    LoopInv,
    Quant,
    REF,
    SAssert,
    SAssign,
    SAssume,
    SHavoc,
    SIf,
    SLoop,
    Stmt,
    Var,
    and_,
    eq,
    field_sort,
    heap_sort,
    implies,
    not_,
    or_,
    select,
    store,
)
from miniproof.ivl.wellformed import assigned_names
from miniproof.translate.context import (
    TranslationContext,
    field_const,
    inv_symbol,
    sort_of_type,
    type_const,
)
from miniproof.translate.expressions import (
    DEFAULT_VALUES,
    ObligationSink,
    VOID,
    assert_recursion_measure,
    callee_env,
    heap_read,
    tr,
)


def row_sort(value_sort: str) -> str:
    return f"(Array {field_sort(value_sort)} {value_sort})"


def invariant_app(ctx: TranslationContext, owner: str, target: Expr) -> Expr:
    heaps = tuple(ctx.heap(s) for s in ctx.used_sorts)
    return App(inv_symbol(owner), heaps + (target,), BOOL)


def frame_conditions(
    ctx: TranslationContext,
    members: list[Expr],
    pre_heaps: dict[str, Var],
    pre_alloc: Var,
) -> list[Expr]:
    """Quantified state-change bound: objects allocated in the pre state
    and outside the modify set keep their field rows, per heap sort, and
    allocation only grows. Each quantifier carries select triggers for
    both states so a mention of either row instantiates it."""
    name = ctx.fresh_bound("o")
    o = Var(name, REF)
    pre_allocated = select(pre_alloc, o, BOOL)
    now_allocated = select(ctx.alloc(), o, BOOL)
    outside = [not_(eq(o, m)) for m in members]
    out: list[Expr] = [
        Quant(
            "forall",
            ((name, REF),),
            implies(pre_allocated, now_allocated),
            patterns=((pre_allocated,), (now_allocated,)),
        )
    ]
    for s in ctx.used_sorts:
        cur_row = select(ctx.heap(s), o, row_sort(s))
        pre_row = select(pre_heaps[s], o, row_sort(s))
        out.append(
            Quant(
                "forall",
                ((name, REF),),
                implies(and_(pre_allocated, *outside), eq(cur_row, pre_row)),
                patterns=((cur_row,), (pre_row,)),
            )
        )
    return out


class StatementTranslator:
    def __init__(self, ctx: TranslationContext) -> None:
        self.ctx = ctx

    # -- plumbing ------------------------------------------------------------

    def translated(self, e: ast.Expr) -> tuple[list[Stmt], Expr]:
        """Translate one executable expression; returns the obligation
        asserts it raised and its value."""
        ctx = self.ctx
        saved = ctx.checks
        ctx.checks = ObligationSink(ctx)
        try:
            value = tr(e, ctx)
            return ctx.checks.take(), value
        finally:
            ctx.checks = saved

    def spec(self, e: ast.Expr) -> Expr:
        with self.ctx.spec_mode():
            return tr(e, self.ctx)

    def translate(self, stmts: list[ast.Stmt]) -> list[Stmt]:
        out: list[Stmt] = []
        for s in stmts:
            out.extend(self.statement(s))
        return out

    def statement(self, s: ast.Stmt) -> list[Stmt]:
        if isinstance(s, ast.Assign):
            return self.assign(s)
        if isinstance(s, ast.If):
            return self.if_stmt(s)
        if isinstance(s, ast.Loop):
            return self.loop(s)
        if isinstance(s, ast.Check):
            return self.check(s)
        if isinstance(s, ast.CallStmt):
            return self.call(s)
        if isinstance(s, ast.Create):
            return self.create(s)
        raise InternalError(f"untranslatable statement {type(s).__name__}")

    # -- simple statements -----------------------------------------------------

    def assign(self, s: ast.Assign) -> list[Stmt]:
        ctx = self.ctx
        out, value = self.translated(s.value)
        target = s.target
        if isinstance(target, ast.ResultExpr):
            result = ctx.env["Result"]
            assert isinstance(result, Var)
            out.append(SAssign(result.name, value))
            return out
        if isinstance(target, ast.Ident) and target.binding == "local":
            bound = ctx.env[target.name]
            assert isinstance(bound, Var)
            out.append(SAssign(bound.name, value))
            return out
        if isinstance(target, ast.Ident) and target.binding == "attribute":
            ref: Expr = ctx.self_expr
            owner = ctx.attribute_owner(ctx.current_class.name, target.name)
        elif isinstance(target, ast.FieldAccess) and target.resolution == "attribute":
            stmts, ref = self.translated(target.target)
            out.extend(stmts)
            if not isinstance(target.target, ast.CurrentExpr):
                attr = CheckAttribution(kind="void-target", line=target.position.line)
                out.append(
                    SAssert(ctx.fresh_label("void", attr), not_(eq(ref, VOID)))
                )
            assert target.target.ty is not None
            owner = ctx.attribute_owner(target.target.ty.name, target.name)
        else:
            raise InternalError("unexpected assignment target")
        assert target.ty is not None
        out.extend(self.frame_check(ref, s.position.line))
        out.append(
            self.heap_store(ref, owner, target.name, sort_of_type(target.ty), value)
        )
        return out

    def frame_check(self, ref: Expr, line: int) -> list[Stmt]:
        """The store target must be in the modify set or freshly
        allocated; a target that syntactically IS a modify-set member is
        discharged statically."""
        ctx = self.ctx
        if ref in ctx.modify_set:
            return []
        fresh = not_(select(Var(ctx.old_alloc_name, "Alloc"), ref, BOOL))
        in_set = [eq(ref, m) for m in ctx.modify_set]
        attr = CheckAttribution(kind="frame", line=line)
        return [SAssert(ctx.fresh_label("frame", attr), or_(*in_set, fresh))]

    def heap_store(
        self, ref: Expr, owner: str, attr_name: str, value_sort: str, value: Expr
    ) -> Stmt:
        ctx = self.ctx
        heap = ctx.heap(value_sort)
        tag = Const(field_const(owner, attr_name), field_sort(value_sort))
        row = select(heap, ref, row_sort(value_sort))
        return SAssign(heap.name, store(heap, ref, store(row, tag, value)))

    def if_stmt(self, s: ast.If) -> list[Stmt]:
        def build(branches: list[ast.IfBranch]) -> list[Stmt]:
            if not branches:
                return self.translate(s.else_body)
            first, rest = branches[0], branches[1:]
            out, cond = self.translated(first.cond)
            out.append(SIf(cond, self.translate(first.body), build(rest)))
            return out

        return build(s.branches)

    def check(self, s: ast.Check) -> list[Stmt]:
        out: list[Stmt] = []
        for clause in s.clauses:
            attr = CheckAttribution(
                kind="check-assertion", line=clause.position.line, tag=clause.tag
            )
            out.append(SAssert(self.ctx.fresh_label("check", attr),
                               self.spec(clause.expr)))
        return out

    # -- loops -------------------------------------------------------------------

    def loop(self, s: ast.Loop) -> list[Stmt]:
        ctx = self.ctx
        out = self.translate(s.init)
        invariants = []
        for clause in s.invariants:
            entry = ctx.fresh_label(
                "inv.entry",
                CheckAttribution(
                    kind="loop-invariant-entry",
                    line=clause.position.line,
                    tag=clause.tag,
                ),
            )
            maint = ctx.fresh_label(
                "inv.maint",
                CheckAttribution(
                    kind="loop-invariant-maintained",
                    line=clause.position.line,
                    tag=clause.tag,
                ),
            )
            invariants.append(LoopInv(entry, maint, self.spec(clause.expr)))

        exit_cond = self.spec(s.exit)
        body = self.translate(s.body)

        variant = None
        variant_labels = None
        missing = None
        check_termination = ctx.routine is None or ctx.routine.check_termination
        if s.variant is not None and check_termination:
            variant = self.spec(s.variant)
            nn = ctx.fresh_label(
                "var.nn",
                CheckAttribution(
                    kind="variant-nonnegative", line=s.variant.position.line
                ),
            )
            dec = ctx.fresh_label(
                "var.dec",
                CheckAttribution(
                    kind="variant-decreases", line=s.variant.position.line
                ),
            )
            variant_labels = (nn, dec)
        elif s.variant is None and check_termination:
            missing = ctx.fresh_label(
                "var.missing",
                CheckAttribution(
                    kind="variant-decreases", line=s.position.line, generated=True
                ),
            )

        targets = sorted(assigned_names(body))
        frame_assumes: list[Expr] = []
        heapish = set(ctx.heap_names.values()) | {ctx.alloc_name}
        if heapish & set(targets):
            entry_heaps = {
                s_: Var(ctx.old_heap_names[s_], heap_sort(s_))
                for s_ in ctx.used_sorts
            }
            frame_assumes = frame_conditions(
                ctx, ctx.modify_set, entry_heaps, Var(ctx.old_alloc_name, "Alloc")
            )

        out.append(
            SLoop(
                invariants=invariants,
                head=[],
                exit=exit_cond,
                body=body,
                variant=variant,
                variant_labels=variant_labels,
                missing_variant_label=missing,
                targets=targets,
                frame_assumes=frame_assumes,
            )
        )
        return out

    # -- calls and creation ----------------------------------------------------

    def call(self, s: ast.CallStmt) -> list[Stmt]:
        ctx = self.ctx
        call = s.call
        owner = call.routine_class
        assert owner is not None
        callee = ctx.class_info(owner).routines[call.name]
        callee_cls = ctx.class_info(owner)
        qualified = f"{owner}.{call.name}"
        out: list[Stmt] = []

        # Evaluate target and arguments into stable temporaries; the
        # postcondition is assumed after the heaps are havocked, so it
        # must not re-read them through the argument expressions.
        if call.target is None or isinstance(call.target, ast.CurrentExpr):
            target: Expr = ctx.self_expr
        else:
            stmts, value = self.translated(call.target)
            out.extend(stmts)
            attr = CheckAttribution(kind="void-target", line=call.position.line)
            out.append(SAssert(ctx.fresh_label("void", attr), not_(eq(value, VOID))))
            temp = ctx.fresh_temp("target", REF)
            out.append(SAssign(temp.name, value))
            target = temp
        args: list[Expr] = []
        for formal, arg in zip(callee.formals, call.args):
            stmts, value = self.translated(arg)
            out.extend(stmts)
            temp = ctx.fresh_temp("arg", sort_of_type(formal.ty))
            out.append(SAssign(temp.name, value))
            args.append(temp)

        env = callee_env(callee, tuple(args))
        for clause in callee.preconditions():
            with ctx.frame(cls=callee_cls, self_expr=target, env=env):
                formula = self.spec(clause.expr)
            attr = CheckAttribution(
                kind="precondition-at-call",
                line=call.position.line,
                tag=clause.tag,
                callee=qualified,
            )
            out.append(SAssert(ctx.fresh_label("pre", attr), formula))

        sink = ObligationSink(ctx)
        saved = ctx.checks
        ctx.checks = sink
        try:
            assert_recursion_measure(ctx, callee, owner, target, tuple(args), call)
        finally:
            ctx.checks = saved
        out.extend(sink.take())

        members: list[Expr] = []
        for m in callee.frame or []:
            if isinstance(m, ast.CurrentExpr):
                members.append(target)
            elif isinstance(m, ast.Ident) and m.binding == "formal":
                members.append(env[m.name])
            else:
                raise InternalError("modify entry is neither Current nor a formal")
        for m in members:
            out.extend(self.frame_check(m, call.position.line))

        # Snapshot, havoc, then reconstitute what the contract promises.
        n = ctx.fresh_call_id()
        pre_heaps: dict[str, Var] = {}
        for sort in ctx.used_sorts:
            heap = ctx.heap(sort)
            snap = Var(f"$pre{n}.heap.{sort}", heap.sort)
            ctx.extra_locals.append(snap)
            out.append(SAssign(snap.name, heap))
            pre_heaps[sort] = snap
        pre_alloc = Var(f"$pre{n}.alloc", "Alloc")
        ctx.extra_locals.append(pre_alloc)
        out.append(SAssign(pre_alloc.name, ctx.alloc()))

        for sort in ctx.used_sorts:
            out.append(SHavoc(ctx.heap_names[sort]))
        out.append(SHavoc(ctx.alloc_name))

        for condition in frame_conditions(ctx, members, pre_heaps, pre_alloc):
            out.append(SAssume(condition))
        old_names = {s_: pre_heaps[s_].name for s_ in ctx.used_sorts}
        for clause in callee.ensure:
            with ctx.frame(
                cls=callee_cls,
                self_expr=target,
                env=env,
                old_heap_names=old_names,
                old_alloc_name=pre_alloc.name,
            ):
                out.append(SAssume(self.spec(clause.expr)))
        if callee.inv_assert_exit:
            out.append(SAssume(invariant_app(ctx, owner, target)))
        return out

    def create(self, s: ast.Create) -> list[Stmt]:
        ctx = self.ctx
        routine = ctx.routine
        assert routine is not None
        local = next((lv for lv in routine.locals if lv.name == s.target), None)
        if local is not None:
            created_type = local.ty
        else:
            created_type = ctx.current_class.attributes[s.target].ty
        info = ctx.class_info(created_type.name)

        fresh = ctx.fresh_temp("new", REF)
        out: list[Stmt] = [
            SHavoc(fresh.name),
            SAssume(
                and_(not_(eq(fresh, VOID)), not_(select(ctx.alloc(), fresh, BOOL)))
            ),
            SAssign(ctx.alloc_name, store(ctx.alloc(), fresh, BoolConst(True))),
            SAssume(
                eq(
                    App("typeof", (fresh,), "ClassId"),
                    Const(type_const(created_type.name), "ClassId"),
                )
            ),
        ]
        # Attribute rows start at the declared defaults.
        for name, attr_decl in sorted(info.attributes.items()):
            value_sort = sort_of_type(attr_decl.ty)
            owner = attr_decl.owner or created_type.name
            out.append(
                SAssume(
                    eq(
                        heap_read(ctx, fresh, owner, name, value_sort),
                        DEFAULT_VALUES[value_sort],
                    )
                )
            )

        if local is not None:
            bound = ctx.env[s.target]
            assert isinstance(bound, Var)
            out.append(SAssign(bound.name, fresh))
        else:
            attr_decl = ctx.current_class.attributes[s.target]
            owner = ctx.attribute_owner(ctx.current_class.name, s.target)
            out.extend(self.frame_check(ctx.self_expr, s.position.line))
            out.append(
                self.heap_store(
                    ctx.self_expr, owner, s.target,
                    sort_of_type(attr_decl.ty), fresh,
                )
            )
        return out
