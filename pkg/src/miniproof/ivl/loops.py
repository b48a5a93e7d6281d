"""Loop elimination: sound cutting and bounded unrolling.

`cut_loops` is the step-one transform: loops become havoc-and-assume
cuts with invariant entry/maintenance obligations and variant checks.
It is sound but incomplete (a too-weak invariant fails even when no
execution does). `unroll_loops` is the step-two transform: loops become
a fixed number of exit-check/body copies ending in `assume false`, an
under-approximation with loop-invariant obligations suspended.

Both also expand `SCall` statements against the program's contracts so
downstream passes see only assign/havoc/assert/assume/if.
"""

from __future__ import annotations

import itertools

from miniproof.diagnostics import InternalError
from miniproof.ivl.ast import (
    App,
    BOOL,
    CheckAttribution,
    Expr,
    FALSE,
    INT,
    IntConst,
    IvlProcedure,
    IvlProgram,
    Labeled,
    LoopInv,
    SAssert,
    SAssign,
    SAssume,
    SCall,
    SHavoc,
    SIf,
    SLoop,
    Stmt,
    Var,
    subst,
)


def cut_loops(proc: IvlProcedure, program: IvlProgram | None = None) -> IvlProcedure:
    """Replace every loop with its invariant cut.

    Shape per loop: assert each invariant clause on entry; havoc the
    loop targets; assume the invariants and the frame constraints;
    run the head obligations; then either the exit condition holds and
    control falls through, or one arbitrary iteration runs, re-asserts
    the invariants, checks the variant, and stops (`assume false`).
    """
    labels = dict(proc.labels)
    locals_ = list(proc.locals)
    fresh = itertools.count()
    expander = _CallExpander(program, labels, fresh) if program else None

    def transform(stmts: list[Stmt]) -> list[Stmt]:
        out: list[Stmt] = []
        for s in stmts:
            if isinstance(s, SLoop):
                out.extend(cut_one(s))
            elif isinstance(s, SIf):
                out.append(SIf(s.cond, transform(s.then), transform(s.els)))
            elif isinstance(s, SCall):
                if expander is None:
                    raise InternalError(
                        f"{proc.name}: call to {s.callee!r} with no contract table"
                    )
                out.extend(expander.expand(s))
            else:
                out.append(s)
        return out

    def cut_one(loop: SLoop) -> list[Stmt]:
        out: list[Stmt] = []
        for inv in loop.invariants:
            out.append(SAssert(inv.entry_label, inv.expr))
        for t in loop.targets:
            out.append(SHavoc(t))
        for inv in loop.invariants:
            out.append(SAssume(inv.expr))
        for fa in loop.frame_assumes:
            out.append(SAssume(fa))
        out.extend(transform(loop.head))

        iteration: list[Stmt] = []
        capture: Var | None = None
        if loop.variant is not None:
            capture = Var(f"$variant{next(fresh)}", INT)
            locals_.append(capture)
            iteration.append(SAssign(capture.name, loop.variant))
        iteration.extend(transform(loop.body))
        for inv in loop.invariants:
            iteration.append(SAssert(inv.maint_label, inv.expr))
        if loop.variant is not None:
            assert capture is not None and loop.variant_labels is not None
            nonneg, decreases = loop.variant_labels
            iteration.append(
                SAssert(nonneg, App(">=", (capture, IntConst(0)), BOOL))
            )
            iteration.append(
                SAssert(decreases, App("<", (loop.variant, capture), BOOL))
            )
        elif loop.missing_variant_label is not None:
            iteration.append(SAssert(loop.missing_variant_label, FALSE))
        iteration.append(SAssume(FALSE))

        out.append(SIf(loop.exit, [], iteration))
        return out

    return IvlProcedure(
        name=proc.name,
        params=list(proc.params),
        locals=locals_,
        requires=list(proc.requires),
        ensures=list(proc.ensures),
        body=transform(proc.body),
        labels=labels,
    )


def unroll_loops(
    proc: IvlProcedure, depth: int, program: IvlProgram | None = None
) -> IvlProcedure:
    """Replace every loop with `depth` copies of (exit-check, body),
    ending in `assume false`.

    Loop-invariant obligations are not emitted; variant checks run per
    copied iteration. Labels inside copies get an `@u<n>` suffix, all
    mapping back to the original attribution, so a report can merge
    verdicts across copies.
    """
    if depth < 1:
        raise InternalError(f"unroll depth must be positive, got {depth}")
    attributions = dict(proc.labels)
    locals_ = list(proc.locals)
    fresh = itertools.count(1)
    expander = _CallExpander(program, attributions, fresh) if program else None

    def relabel(stmts: list[Stmt], suffix: str) -> list[Stmt]:
        out: list[Stmt] = []
        for s in stmts:
            if isinstance(s, SAssert):
                renamed = s.label + suffix
                attributions[renamed] = attributions[s.label]
                out.append(SAssert(renamed, s.expr))
            elif isinstance(s, SIf):
                out.append(SIf(s.cond, relabel(s.then, suffix), relabel(s.els, suffix)))
            elif isinstance(s, SLoop):
                invs = []
                for inv in s.invariants:
                    invs.append(
                        LoopInv(inv.entry_label + suffix, inv.maint_label + suffix, inv.expr)
                    )
                    attributions[inv.entry_label + suffix] = attributions[inv.entry_label]
                    attributions[inv.maint_label + suffix] = attributions[inv.maint_label]
                vlabels = None
                if s.variant_labels is not None:
                    vlabels = (s.variant_labels[0] + suffix, s.variant_labels[1] + suffix)
                    attributions[vlabels[0]] = attributions[s.variant_labels[0]]
                    attributions[vlabels[1]] = attributions[s.variant_labels[1]]
                missing = None
                if s.missing_variant_label is not None:
                    missing = s.missing_variant_label + suffix
                    attributions[missing] = attributions[s.missing_variant_label]
                out.append(
                    SLoop(
                        invariants=invs,
                        head=relabel(s.head, suffix),
                        exit=s.exit,
                        body=relabel(s.body, suffix),
                        variant=s.variant,
                        variant_labels=vlabels,
                        missing_variant_label=missing,
                        targets=list(s.targets),
                        frame_assumes=list(s.frame_assumes),
                    )
                )
            else:
                out.append(s)
        return out

    def transform(stmts: list[Stmt]) -> list[Stmt]:
        out: list[Stmt] = []
        for s in stmts:
            if isinstance(s, SLoop):
                out.extend(expand(s, depth))
            elif isinstance(s, SIf):
                out.append(SIf(s.cond, transform(s.then), transform(s.els)))
            elif isinstance(s, SCall):
                if expander is None:
                    raise InternalError(
                        f"{proc.name}: call to {s.callee!r} with no contract table"
                    )
                out.extend(expander.expand(s))
            else:
                out.append(s)
        return out

    def expand(loop: SLoop, k: int) -> list[Stmt]:
        if k == 0:
            return [SAssume(FALSE)]
        n = next(fresh)
        suffix = f"@u{n}"
        head_copy = transform(relabel(loop.head, suffix))
        body_copy = transform(relabel(loop.body, suffix))

        iteration: list[Stmt] = []
        capture: Var | None = None
        if loop.variant is not None:
            capture = Var(f"$variant{n}", INT)
            locals_.append(capture)
            iteration.append(SAssign(capture.name, loop.variant))
        iteration.extend(body_copy)
        if loop.variant is not None:
            assert capture is not None and loop.variant_labels is not None
            nonneg, decreases = loop.variant_labels
            attributions[nonneg + suffix] = attributions[nonneg]
            attributions[decreases + suffix] = attributions[decreases]
            iteration.append(
                SAssert(nonneg + suffix, App(">=", (capture, IntConst(0)), BOOL))
            )
            iteration.append(
                SAssert(decreases + suffix, App("<", (loop.variant, capture), BOOL))
            )
        iteration.extend(expand(loop, k - 1))
        return head_copy + [SIf(loop.exit, [], iteration)]

    body = transform(proc.body)
    used = _assert_labels(body)
    labels = {lbl: attributions[lbl] for lbl in used}
    for lbl, _ in proc.ensures:
        labels[lbl] = attributions[lbl]
    return IvlProcedure(
        name=proc.name,
        params=list(proc.params),
        locals=locals_,
        requires=list(proc.requires),
        ensures=list(proc.ensures),
        body=body,
        labels=labels,
    )


def _assert_labels(stmts: list[Stmt]) -> list[str]:
    out: list[str] = []
    for s in stmts:
        if isinstance(s, SAssert):
            out.append(s.label)
        elif isinstance(s, SIf):
            out.extend(_assert_labels(s.then))
            out.extend(_assert_labels(s.els))
        elif isinstance(s, SLoop):
            raise InternalError("loop survived elimination")
    return out


class _CallExpander:
    """Desugars SCall into assert-requires / havoc-modifies / assume-ensures."""

    def __init__(self, program, labels: dict[str, CheckAttribution], fresh) -> None:
        self.program = program
        self.labels = labels
        self.fresh = fresh

    def expand(self, call: SCall) -> list[Stmt]:
        contract = self.program.contracts.get(call.callee)
        if contract is None:
            raise InternalError(f"call to unknown contract {call.callee!r}")
        if len(call.args) != len(contract.params):
            raise InternalError(
                f"call to {call.callee!r}: {len(call.args)} args for "
                f"{len(contract.params)} parameters"
            )
        binding = {p.name: a for p, a in zip(contract.params, call.args)}
        out: list[Stmt] = []
        for pre in contract.requires:
            label = f"{call.callee}.pre@c{next(self.fresh)}"
            self.labels[label] = CheckAttribution(
                kind="precondition-at-call", line=0, callee=call.callee, generated=False
            )
            out.append(SAssert(label, subst(pre, binding)))
        for name in contract.modifies:
            out.append(SHavoc(name))
        for post in contract.ensures:
            out.append(SAssume(subst(post, binding)))
        return out
