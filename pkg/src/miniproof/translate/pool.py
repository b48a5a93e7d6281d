"""Translation pools: which routines a verification run must translate,
and in which of two modes.

Starting from the requested entry routines, a worklist closes the set
under reference: a routine marked for body translation contributes the
routines reached from its implementation and its contracts, one marked
for specification only contributes those reached from its contracts.
Body marking subsumes specification marking. Class invariants of the
receiver and of reference formal types take part in entry and exit
conditions, so queries they mention join the pool too.

Recursion is detected on the body-marked part of the pool: routines in
one strongly connected call component check each other's measures at
call sites, and their contract axioms are only admitted below the
verified routine's entry measure. A routine outside the body-marked
part is trusted on its contract.
"""

from __future__ import annotations

import time
from collections import deque
from dataclasses import dataclass, field
from typing import Iterator, Optional

from miniproof.diagnostics import Diagnostic, InputError
from miniproof.frontend import ast
from miniproof.frontend.typecheck import TypedProgram
from miniproof.ivl.ast import Expr, IvlProgram
from miniproof.translate.classes import class_declarations, program_declarations
from miniproof.translate.context import (
    HandlerRegistry,
    TranslationContext,
    TranslationOptions,
)
from miniproof.translate.functions import (
    contract_axiom,
    defining_axiom,
    symbolic_result,
)
from miniproof.translate.routines import (
    apply_invariant_defaults,
    consistency_obligation,
    translate_routine,
)

Key = tuple[str, str]


@dataclass
class PoolEntry:
    owner: str
    name: str
    routine: ast.RoutineDecl
    body_marked: bool


@dataclass
class TranslationResult:
    ivl: IvlProgram
    pool: dict[Key, PoolEntry]
    targets: list[str] = field(default_factory=list)
    # routines whose translation was rejected: procedure name -> diagnostics
    errors: dict[str, list[Diagnostic]] = field(default_factory=dict)
    # per-procedure translation wall time, seconds
    times: dict[str, float] = field(default_factory=dict)


def _expr_references(e: ast.Expr) -> Iterator[Key]:
    for node in ast.walk_expr(e):
        if isinstance(node, ast.CallExpr) and node.resolution == "routine":
            yield (node.routine_class, node.name)


def _invariant_references(program: TypedProgram, class_name: str) -> Iterator[Key]:
    info = program.classes[class_name]
    for name in list(reversed(info.ancestors)) + [class_name]:
        for clause in program.classes[name].decl.invariants:
            yield from _expr_references(clause.expr)


def _contract_references(
    program: TypedProgram, owner: str, r: ast.RoutineDecl
) -> Iterator[Key]:
    for clause in r.preconditions() + r.ensure:
        yield from _expr_references(clause.expr)
    if r.decreases is not None:
        yield from _expr_references(r.decreases)
    yield from _invariant_references(program, owner)
    for f in r.formals:
        if program.is_reference(f.ty):
            yield from _invariant_references(program, f.ty.name)


def _body_references(r: ast.RoutineDecl) -> Iterator[Key]:
    if r.body is None:
        return
    for s in ast.walk_stmts(r.body):
        for e in ast.stmt_exprs(s):
            yield from _expr_references(e)


def build_pool(program: TypedProgram, entries: list[Key]) -> dict[Key, PoolEntry]:
    pool: dict[Key, PoolEntry] = {}
    work: deque[tuple[Key, bool]] = deque((k, True) for k in entries)
    while work:
        key, body_marked = work.popleft()
        existing = pool.get(key)
        if existing is not None and (existing.body_marked or not body_marked):
            continue
        owner, name = key
        r = program.classes[owner].routines[name]
        pool[key] = PoolEntry(owner, name, r, body_marked)
        for ref in _contract_references(program, owner, r):
            work.append((ref, False))
        if body_marked:
            for ref in _body_references(r):
                work.append((ref, False))
    return pool


def _call_graph(program: TypedProgram, pool: dict[Key, PoolEntry]) -> dict[Key, set[Key]]:
    """Body-level call edges between body-marked pool members."""
    nodes = {k for k, e in pool.items() if e.body_marked and e.routine.body is not None}
    edges: dict[Key, set[Key]] = {k: set() for k in nodes}
    for key in nodes:
        for ref in _body_references(pool[key].routine):
            if ref in nodes:
                edges[key].add(ref)
    return edges


def strongly_connected(edges: dict[Key, set[Key]]) -> dict[Key, frozenset[Key]]:
    """Tarjan's algorithm, iterative. Returns, for every node on a cycle
    (including self-loops), the member set of its component."""
    index: dict[Key, int] = {}
    low: dict[Key, int] = {}
    on_stack: set[Key] = set()
    stack: list[Key] = []
    counter = iter(range(len(edges) + 1))
    out: dict[Key, frozenset[Key]] = {}

    for root in sorted(edges):
        if root in index:
            continue
        frames: list[tuple[Key, Iterator[Key]]] = []
        index[root] = low[root] = next(counter)
        stack.append(root)
        on_stack.add(root)
        frames.append((root, iter(sorted(edges[root]))))
        while frames:
            node, it = frames[-1]
            advanced = False
            for succ in it:
                if succ not in index:
                    index[succ] = low[succ] = next(counter)
                    stack.append(succ)
                    on_stack.add(succ)
                    frames.append((succ, iter(sorted(edges[succ]))))
                    advanced = True
                    break
                if succ in on_stack:
                    low[node] = min(low[node], index[succ])
            if advanced:
                continue
            frames.pop()
            if frames:
                parent = frames[-1][0]
                low[parent] = min(low[parent], low[node])
            if low[node] == index[node]:
                component = []
                while True:
                    member = stack.pop()
                    on_stack.discard(member)
                    component.append(member)
                    if member == node:
                        break
                if len(component) > 1 or node in edges[node]:
                    members = frozenset(component)
                    for m in component:
                        out[m] = members
    return out


def default_entries(program: TypedProgram) -> list[Key]:
    return [
        (unit.name, r.name)
        for unit in program.user_units()
        for r in unit.routines
    ]


def translate_pool(
    program: TypedProgram,
    options: Optional[TranslationOptions] = None,
    registry: Optional[HandlerRegistry] = None,
    entries: Optional[list[Key]] = None,
) -> TranslationResult:
    """Translate everything one verification run needs into a single IVL
    program: shared declarations for every class, one procedure per pool
    member, and per-procedure background axioms threaded through the
    procedure's assumption list."""
    options = options or TranslationOptions()
    ctx = TranslationContext(program, options, registry)

    for unit in program.units:
        for r in unit.routines:
            apply_invariant_defaults(r, options, unit)

    if entries is None:
        entries = default_entries(program)
    pool = build_pool(program, entries)
    cycles = strongly_connected(_call_graph(program, pool))

    ivl = IvlProgram(theories=list(ctx.theories))
    ivl.consts.extend(program_declarations(ctx))
    for unit in program.units:
        consts, funs, axioms = class_declarations(ctx, program.classes[unit.name])
        ivl.consts.extend(consts)
        ivl.funs.extend(funs)
        ivl.axioms.extend(axioms)

    order = [
        (unit.name, r.name)
        for unit in program.units
        for r in unit.routines
        if (unit.name, r.name) in pool
    ]

    result = TranslationResult(ivl, pool)
    for key in order:
        entry = pool[key]
        owner, r = entry.owner, entry.routine
        qualified = f"{owner}.{r.name}"
        body_mode = entry.body_marked and r.body is not None and not r.is_skipped
        ctx.recursion_cycle = cycles.get(key, frozenset())
        started = time.perf_counter()
        try:
            proc = translate_routine(ctx, owner, r, body_mode)
            if body_mode:
                proc.requires = (
                    _background_axioms(ctx, pool, order, key, proc) + proc.requires
                )
                result.targets.append(proc.name)
        except InputError as failure:
            # Keep the run going: record the rejection, and fall back to a
            # contract-only procedure so dependents still see the contract.
            result.errors[qualified] = list(failure.diagnostics)
            try:
                ctx.recursion_cycle = frozenset()
                proc = translate_routine(ctx, owner, r, body_mode=False)
            except InputError:
                continue
        finally:
            result.times[qualified] = time.perf_counter() - started
        ivl.procedures.append(proc)

    return result


def _background_axioms(
    ctx: TranslationContext,
    pool: dict[Key, PoolEntry],
    order: list[Key],
    key: Key,
    proc,
) -> list[Expr]:
    """Axioms admissible while verifying `key`, in pool order: contract
    axioms of other queries, measure-capped ones inside the verified
    routine's recursion component, and the defining equation of the
    routine's own straight-line body."""
    from miniproof.translate.expressions import tr

    owner, name = key
    r = pool[key].routine
    cycle = ctx.recursion_cycle
    recursive = key in cycle

    measure_cap: Optional[Expr] = None
    if cycle and r.check_termination and r.decreases is not None:
        with ctx.spec_mode():
            with ctx.old_mode():
                measure_cap = tr(r.decreases, ctx)

    axioms: list[Expr] = []
    for other in order:
        g = pool[other].routine
        if not g.is_function:
            continue
        info = ctx.class_info(other[0])
        if other == key:
            if recursive:
                if measure_cap is not None and g.decreases is not None:
                    ax = contract_axiom(ctx, info, g, measure_cap)
                elif not r.check_termination:
                    ax = contract_axiom(ctx, info, g)
                else:
                    ax = None
            else:
                ax = None
        elif other in cycle:
            if measure_cap is not None and g.decreases is not None:
                ax = contract_axiom(ctx, info, g, measure_cap)
            elif not r.check_termination:
                ax = contract_axiom(ctx, info, g)
            else:
                ax = None
        else:
            ax = contract_axiom(ctx, info, g)
        if ax is not None:
            axioms.append(ax)

    if r.is_function and not recursive and r.body is not None:
        definition = symbolic_result(proc, r)
        if definition is not None:
            axioms.append(
                defining_axiom(ctx, ctx.class_info(owner), r, definition)
            )
            label, expr = consistency_obligation(ctx, owner, r)
            proc.ensures.append((label, expr))
            proc.labels = dict(ctx.labels)
    return axioms
