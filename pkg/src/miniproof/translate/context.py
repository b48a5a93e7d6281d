"""Shared state of one translation run.

Naming scheme for generated SMT symbols: `$`-prefixed names cannot
collide with source identifiers (the lexer accepts neither `$` nor `.`
in names), and the dotted suffix carries the source path:

    $type.C          class identity constant      (sort ClassId)
    $field.C.a       field constant of C.a        (sort Field<S>)
    $inv.C           class invariant predicate
    fun.C.f          logic function of query f
    $heap.<S>        heap for value sort S, e.g. $heap.Int
    $old.heap.<S>    routine-entry snapshot of the same
    $alloc, $old.alloc   allocation set and its snapshot

What the heap ranges over is decided once per program: every value sort
that appears as an attribute type gets a heap variable, and theory
selection follows the sorts and operations the source actually uses.
"""

from __future__ import annotations

import itertools
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Callable, Optional

from miniproof.diagnostics import InternalError
from miniproof.frontend import ast
from miniproof.frontend.typecheck import ClassInfo, TypedProgram
from miniproof.ivl.ast import (
    BOOL,
    CheckAttribution,
    Expr,
    INT,
    REF,
    HEAP_VALUE_SORTS,
    Var,
    heap_sort,
)

Handler = Callable[[ast.Expr, "TranslationContext"], Optional[Expr]]

EXTENSION_POINTS = ("across", "call", "expression")


def sort_of_type(ty: ast.Type) -> str:
    if ty.name == "INTEGER":
        return INT
    if ty.name == "BOOLEAN":
        return BOOL
    if ty.name == "SEQ":
        return "MSeq"
    if ty.name == "SET":
        return "MSet"
    if ty.name == "BAG":
        return "MBag"
    if ty.name == "MAP":
        return "MMap"
    return REF


def type_const(class_name: str) -> str:
    return f"$type.{class_name}"


def field_const(owner: str, attr: str) -> str:
    return f"$field.{owner}.{attr}"


def fun_symbol(owner: str, routine: str) -> str:
    return f"fun.{owner}.{routine}"


def inv_symbol(class_name: str) -> str:
    return f"$inv.{class_name}"


_THEORY_OF_SORT = {"MSeq": "seq", "MSet": "set", "MBag": "bag", "MMap": "map"}


def compute_used_sorts(program: TypedProgram) -> tuple[str, ...]:
    """Heap value sorts: one per attribute type present in the program."""
    used = set()
    for info in program.classes.values():
        for attr in info.attributes.values():
            used.add(sort_of_type(attr.ty))
    return tuple(s for s in HEAP_VALUE_SORTS if s in used)


def compute_theories(program: TypedProgram, used_sorts: tuple[str, ...]) -> list[str]:
    """Required builtin theories plus any custom per-class theory notes.

    Value sorts reach queries through attribute types and through typed
    expressions (a SET-valued operation needs the set theory even if no
    attribute holds one), so both are scanned.
    """
    names = {"ints", "heap"}
    for s in used_sorts:
        t = _THEORY_OF_SORT.get(s)
        if t:
            names.add(t)

    def visit_type(ty: Optional[ast.Type]) -> None:
        if ty is None:
            return
        t = _THEORY_OF_SORT.get(sort_of_type(ty))
        if t:
            names.add(t)

    for unit in program.units:
        for r in unit.routines:
            visit_type(r.return_type)
            for f in r.formals:
                visit_type(f.ty)
            for loc in r.locals:
                visit_type(loc.ty)
        for e in _all_exprs(unit):
            visit_type(e.ty)

    out = sorted(names)
    for info in program.classes.values():
        if info.decl.theory_file and info.decl.theory_file not in out:
            out.append(info.decl.theory_file)
    return out


def _all_exprs(unit: ast.ClassDecl):
    for r in unit.routines:
        for c in r.preconditions() + r.ensure:
            yield from ast.walk_expr(c.expr)
        if r.body is not None:
            for s in ast.walk_stmts(r.body):
                for e in ast.stmt_exprs(s):
                    yield from ast.walk_expr(e)
    for c in unit.invariants:
        yield from ast.walk_expr(c.expr)


@dataclass
class TranslationOptions:
    invariant_defaults: bool = True


class HandlerRegistry:
    """Chain-of-responsibility dispatch, most recently registered first.

    A handler takes (node, ctx) and returns an IVL expression or None to
    decline. Every point ends in a default handler; the expression
    default is total, so dispatch cannot fall through.
    """

    def __init__(self) -> None:
        self._chains: dict[str, list[Handler]] = {p: [] for p in EXTENSION_POINTS}

    def register(self, point: str, handler: Handler) -> None:
        if point not in self._chains:
            raise InternalError(f"unknown extension point {point!r}")
        self._chains[point].insert(0, handler)

    def dispatch(self, e: ast.Expr, ctx: "TranslationContext") -> Expr:
        for point in points_for(e):
            for handler in self._chains[point]:
                result = handler(e, ctx)
                if result is not None:
                    return result
        raise InternalError(
            f"no handler translated {type(e).__name__} at {e.position}"
        )


def points_for(e: ast.Expr) -> tuple[str, ...]:
    """Most specific chain first; unmatched nodes fall through outward."""
    if isinstance(e, ast.AcrossExpr):
        return ("across", "call", "expression")
    if isinstance(e, (ast.CallExpr, ast.IndexExpr)):
        return ("call", "expression")
    if isinstance(e, ast.FieldAccess) and e.resolution == "theory_op":
        return ("call", "expression")
    return ("expression",)


class TranslationContext:
    """Carries everything expression translation needs to know about the
    position it is working in: the class and routine, the names of the
    current and entry heaps, the environment binding source names to IVL
    expressions, and the obligation sink (None in specification
    contexts, where no checks are emitted)."""

    def __init__(
        self,
        program: TypedProgram,
        options: Optional[TranslationOptions] = None,
        registry: Optional[HandlerRegistry] = None,
    ) -> None:
        from miniproof.translate.expressions import default_registry

        self.program = program
        self.options = options or TranslationOptions()
        self.registry = registry or default_registry()
        self.used_sorts = compute_used_sorts(program)
        self.theories = compute_theories(program, self.used_sorts)

        self.current_class: Optional[ClassInfo] = None
        self.routine: Optional[ast.RoutineDecl] = None
        self.self_expr: Expr = Var("Current", REF)
        self.env: dict[str, Expr] = {}
        self.heap_names = {s: f"$heap.{s}" for s in self.used_sorts}
        self.old_heap_names = {s: f"$old.heap.{s}" for s in self.used_sorts}
        self.alloc_name = "$alloc"
        self.old_alloc_name = "$old.alloc"
        self.in_old = False
        self.modify_set: list[Expr] = []
        self.checks = None  # ObligationSink when translating executable code
        self.labels: dict[str, CheckAttribution] = {}
        self.extra_locals: list[Var] = []
        self.recursion_cycle: frozenset[tuple[str, str]] = frozenset()
        self._labels = itertools.count(1)
        self._temps = itertools.count(1)
        self._bounds = itertools.count(1)
        self._calls = itertools.count(1)

    def begin_routine(self, info: ClassInfo, r: ast.RoutineDecl) -> None:
        """Reset per-routine state. Counters restart so generated names
        depend only on the routine itself, not on translation order."""
        self.current_class = info
        self.routine = r
        self.env = {}
        self.modify_set = []
        self.checks = None
        self.in_old = False
        self.labels = {}
        self.extra_locals = []
        self.old_heap_names = {s: f"$old.heap.{s}" for s in self.used_sorts}
        self.old_alloc_name = "$old.alloc"
        self._labels = itertools.count(1)
        self._temps = itertools.count(1)
        self._bounds = itertools.count(1)
        self._calls = itertools.count(1)

    # -- naming ------------------------------------------------------------

    def heap(self, value_sort: str) -> Var:
        names = self.old_heap_names if self.in_old else self.heap_names
        if value_sort not in names:
            raise InternalError(f"no heap for value sort {value_sort}")
        return Var(names[value_sort], heap_sort(value_sort))

    def alloc(self) -> Var:
        name = self.old_alloc_name if self.in_old else self.alloc_name
        return Var(name, "Alloc")

    def fresh_label(self, base: str, attr: CheckAttribution) -> str:
        label = f"{base}#{next(self._labels)}"
        self.labels[label] = attr
        return label

    def fresh_temp(self, base: str, sort: str) -> Var:
        v = Var(f"${base}{next(self._temps)}", sort)
        self.extra_locals.append(v)
        return v

    def fresh_bound(self, base: str) -> str:
        """Quantifier-bound name, distinct from every program variable so
        substituting caller expressions under a callee's binder cannot
        capture anything."""
        return f"{base}!{next(self._bounds)}"

    def fresh_call_id(self) -> int:
        return next(self._calls)

    # -- frame switches ------------------------------------------------------

    @contextmanager
    def frame(
        self,
        cls: Optional[ClassInfo] = None,
        self_expr: Optional[Expr] = None,
        env: Optional[dict[str, Expr]] = None,
        old_heap_names: Optional[dict[str, str]] = None,
        old_alloc_name: Optional[str] = None,
    ):
        """Translate a foreign expression (a callee's contract clause, an
        invariant clause of another class) in its own naming frame."""
        saved = (
            self.current_class,
            self.self_expr,
            self.env,
            self.old_heap_names,
            self.old_alloc_name,
        )
        if cls is not None:
            self.current_class = cls
        if self_expr is not None:
            self.self_expr = self_expr
        if env is not None:
            self.env = env
        if old_heap_names is not None:
            self.old_heap_names = old_heap_names
        if old_alloc_name is not None:
            self.old_alloc_name = old_alloc_name
        try:
            yield self
        finally:
            (
                self.current_class,
                self.self_expr,
                self.env,
                self.old_heap_names,
                self.old_alloc_name,
            ) = saved

    @contextmanager
    def bind(self, name: str, value: Expr):
        """Temporarily bind a source name (a quantifier variable) in the
        current environment."""
        had = name in self.env
        saved = self.env.get(name)
        self.env[name] = value
        try:
            yield self
        finally:
            if had:
                self.env[name] = saved
            else:
                del self.env[name]

    @contextmanager
    def spec_mode(self):
        """Suppress proof obligations (specification context)."""
        saved = self.checks
        self.checks = None
        try:
            yield self
        finally:
            self.checks = saved

    @contextmanager
    def old_mode(self):
        saved = self.in_old
        self.in_old = True
        try:
            yield self
        finally:
            self.in_old = saved

    # -- lookups ---------------------------------------------------------------

    def class_info(self, name: str) -> ClassInfo:
        info = self.program.classes.get(name)
        if info is None:
            raise InternalError(f"unknown class {name}")
        return info

    def attribute_owner(self, class_name: str, attr: str) -> str:
        info = self.class_info(class_name)
        decl = info.attributes.get(attr)
        if decl is None:
            raise InternalError(f"{class_name} has no attribute {attr}")
        return decl.owner or class_name

    def in_recursion_cycle(self, owner: str, routine: str) -> bool:
        return (owner, routine) in self.recursion_cycle


def register_handler(
    registry: HandlerRegistry, point: str, handler: Handler
) -> None:
    """Prepend `handler` at `point`; later registrations win."""
    registry.register(point, handler)
