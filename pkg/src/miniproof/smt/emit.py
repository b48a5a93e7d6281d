"""Deterministic SMT-LIB2 emission of verification conditions.

The goal coming out of `wp` is a DAG: both branches of every join share
the continuation node. Printing it as a tree would square or worse the
text size, so App nodes referenced more than once become `let` bindings,
defined in dependency order. Quantified subformulas are printed inline:
anything under a binder may mention bound variables, which must not leak
into an enclosing `let`. Everything else about the emission is a stable
function of the condition: declarations keep their construction order,
free goal variables are sorted by name, and the final query is
byte-identical across runs.
"""

from __future__ import annotations

from typing import Iterable, Optional

from miniproof.diagnostics import InternalError
from miniproof.ivl.ast import (
    App,
    BoolConst,
    Const,
    Expr,
    IntConst,
    Labeled,
    Quant,
    Var,
    Vc,
    free_vars,
)
from miniproof.theories import (
    BUILTIN_ORDER,
    TheoryUnit,
    resolve_custom_theory,
    theories_for,
)


def mask_labels(e: Expr, keep: Optional[frozenset[str]] = None) -> Expr:
    """Strip Labeled wrappers: the wrapped formula survives where the
    label is kept (keep=None keeps all), `true` replaces it elsewhere.
    The wp encoding tags the downstream-assumption copy of each check
    with the same label, so masking an obligation erases it entirely:
    attribution queries judge each label without help from its
    siblings. Physical sharing is preserved so emission cost does not
    regress."""
    memo: dict[int, Expr] = {}

    def walk(x: Expr) -> Expr:
        hit = memo.get(id(x))
        if hit is not None:
            return hit
        if isinstance(x, Labeled):
            if keep is None or x.label in keep:
                out: Expr = walk(x.expr)
            else:
                out = BoolConst(True)
        elif isinstance(x, App):
            args = tuple(walk(a) for a in x.args)
            out = x if args == x.args else App(x.fn, args, x.sort)
        elif isinstance(x, Quant):
            body = walk(x.body)
            out = x if body is x.body else Quant(x.kind, x.bound, body, x.patterns)
        else:
            out = x
        memo[id(x)] = out
        return out

    return walk(e)


def _atom(e: Expr) -> Optional[str]:
    if isinstance(e, (Var, Const)):
        return e.name
    if isinstance(e, IntConst):
        return str(e.value) if e.value >= 0 else f"(- {-e.value})"
    if isinstance(e, BoolConst):
        return "true" if e.value else "false"
    return None


def _shared_nodes(root: Expr) -> list[Expr]:
    """App nodes above the quantifier line referenced more than once, in
    dependency (children-first) order."""
    counts: dict[int, int] = {}
    order: list[Expr] = []
    stack: list[tuple[Expr, bool]] = [(root, False)]
    while stack:
        node, done = stack.pop()
        if not isinstance(node, App):
            continue
        nid = id(node)
        if done:
            order.append(node)
            continue
        counts[nid] = counts.get(nid, 0) + 1
        if counts[nid] > 1:
            continue
        stack.append((node, True))
        for a in node.args:
            stack.append((a, False))
    return [n for n in order if counts[id(n)] > 1]


def _render(root: Expr, syms: dict[int, str], defined: set[int]) -> str:
    """Iterative printer; nodes in `defined` print as their symbol."""
    out: list[str] = []
    stack: list[object] = [root]
    while stack:
        item = stack.pop()
        if isinstance(item, str):
            out.append(item)
            continue
        node = item
        nid = id(node)
        if nid in defined:
            out.append(syms[nid])
            continue
        atom = _atom(node)
        if atom is not None:
            out.append(atom)
            continue
        if isinstance(node, App):
            out.append(f"({node.fn}")
            stack.append(")")
            for a in reversed(node.args):
                stack.append(a)
                stack.append(" ")
        elif isinstance(node, Quant):
            binders = " ".join(f"({n} {s})" for n, s in node.bound)
            out.append(f"({node.kind} ({binders}) ")
            if node.patterns:
                stack.append(")")
                stack.append(")")
                for group in reversed(node.patterns):
                    rendered = " ".join(
                        _render(p, syms, defined) for p in group
                    )
                    stack.append(f" :pattern ({rendered})")
                stack.append(node.body)
                out.append("(! ")
            else:
                stack.append(")")
                stack.append(node.body)
        elif isinstance(node, Labeled):
            raise InternalError("labeled node reached the query emitter")
        else:
            raise InternalError(f"cannot emit {type(node).__name__}")
    return "".join(out)


def print_smt(e: Expr) -> str:
    """One expression as SMT-LIB2 text, shared subterms let-bound."""
    shared = _shared_nodes(e)
    syms = {id(n): f"%t{i}" for i, n in enumerate(shared, start=1)}
    defined: set[int] = set()
    prefix: list[str] = []
    for n in shared:
        text = _render(n, syms, defined)
        prefix.append(f"(let (({syms[id(n)]} {text})) ")
        defined.add(id(n))
    body = _render(e, syms, defined)
    return "".join(prefix) + body + ")" * len(prefix)


def background_theories(
    names: Iterable[str], theory_path: Iterable[str] = ()
) -> list[TheoryUnit]:
    """Theory units for a condition's background list, dependency-closed.
    Names outside the builtin set are custom theory file names, looked
    up on the theory path."""
    builtin = [n for n in names if n in BUILTIN_ORDER]
    customs = [
        resolve_custom_theory(n, list(theory_path))
        for n in names
        if n not in BUILTIN_ORDER
    ]
    return theories_for(builtin + [u.name for u in customs], customs)


def emit_query(
    vc: Vc,
    goal: Optional[Expr] = None,
    preamble: Iterable[str] = (),
    theory_path: Iterable[str] = (),
) -> str:
    """The complete solver input for one condition: logic and options,
    background theories, declarations, axioms, the negated goal, and a
    single (check-sat)."""
    if goal is None:
        goal = mask_labels(vc.goal)
    lines: list[str] = ["(set-logic ALL)"]
    lines.extend(preamble)

    for unit in background_theories(vc.background, theory_path):
        lines.append(unit.text.rstrip())

    groups: dict[str, list[str]] = {}
    for c in vc.consts:
        lines.append(f"(declare-const {c.name} {c.sort})")
        if c.distinct_group is not None:
            groups.setdefault(c.distinct_group, []).append(c.name)
    for members in groups.values():
        if len(members) > 1:
            lines.append(f"(assert (distinct {' '.join(members)}))")

    for f in vc.funs:
        args = " ".join(f.arg_sorts)
        lines.append(f"(declare-fun {f.name} ({args}) {f.sort})")

    for axiom in vc.axioms:
        lines.append(f"(assert {print_smt(axiom)})")

    for name, sort in sorted(free_vars(goal).items()):
        lines.append(f"(declare-const {name} {sort})")

    lines.append(f"(assert (not {print_smt(goal)}))")
    lines.append("(check-sat)")
    return "\n".join(lines) + "\n"
