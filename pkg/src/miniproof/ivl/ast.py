"""IVL abstract syntax.

Expressions are immutable (hashable, shareable); statements are plain
mutable dataclasses. Sorts are strings; the operator vocabulary is the
SMT-LIB one plus the theory function names, so emission is a direct
mapping. `Labeled` marks a proof position inside a weakest-precondition
goal; it is semantically transparent.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

BOOL = "Bool"
INT = "Int"
REF = "Ref"

# Value sorts a heap exists for, in canonical emission order.
HEAP_VALUE_SORTS = ("Int", "Bool", "Ref", "MSeq", "MSet", "MBag", "MMap")


def heap_sort(value_sort: str) -> str:
    return f"Heap{_suffix(value_sort)}"


def field_sort(value_sort: str) -> str:
    return f"Field{_suffix(value_sort)}"


def _suffix(value_sort: str) -> str:
    return value_sort[1:] if value_sort.startswith("M") else value_sort


# ---------------------------------------------------------------------------
# Expressions


@dataclass(frozen=True)
class Expr:
    pass


@dataclass(frozen=True)
class Var(Expr):
    name: str
    sort: str


@dataclass(frozen=True)
class IntConst(Expr):
    value: int

    @property
    def sort(self) -> str:
        return INT


@dataclass(frozen=True)
class BoolConst(Expr):
    value: bool

    @property
    def sort(self) -> str:
        return BOOL


@dataclass(frozen=True)
class Const(Expr):
    """Reference to a declared program constant (field tag, class id, Void)."""

    name: str
    sort: str


@dataclass(frozen=True)
class App(Expr):
    """Operator or function application; `fn` is the SMT-LIB symbol."""

    fn: str
    args: tuple[Expr, ...]
    sort: str


@dataclass(frozen=True)
class Quant(Expr):
    kind: str  # "forall" | "exists"
    bound: tuple[tuple[str, str], ...]  # (name, sort)
    body: Expr
    patterns: tuple[tuple[Expr, ...], ...] = ()

    @property
    def sort(self) -> str:
        return BOOL


@dataclass(frozen=True)
class Labeled(Expr):
    """A labeled proof position inside a goal; semantically identity."""

    label: str
    expr: Expr

    @property
    def sort(self) -> str:
        return BOOL


TRUE = BoolConst(True)
FALSE = BoolConst(False)


# -- smart constructors ------------------------------------------------------


def and_(*args: Expr) -> Expr:
    flat: list[Expr] = []
    for a in args:
        if isinstance(a, BoolConst):
            if not a.value:
                return FALSE
            continue
        flat.append(a)
    if not flat:
        return TRUE
    if len(flat) == 1:
        return flat[0]
    return App("and", tuple(flat), BOOL)


def or_(*args: Expr) -> Expr:
    flat: list[Expr] = []
    for a in args:
        if isinstance(a, BoolConst):
            if a.value:
                return TRUE
            continue
        flat.append(a)
    if not flat:
        return FALSE
    if len(flat) == 1:
        return flat[0]
    return App("or", tuple(flat), BOOL)


def not_(a: Expr) -> Expr:
    if isinstance(a, BoolConst):
        return BoolConst(not a.value)
    return App("not", (a,), BOOL)


def implies(a: Expr, b: Expr) -> Expr:
    if isinstance(a, BoolConst):
        return b if a.value else TRUE
    if isinstance(b, BoolConst) and b.value:
        return TRUE
    return App("=>", (a, b), BOOL)


def eq(a: Expr, b: Expr) -> Expr:
    return App("=", (a, b), BOOL)


def ite(c: Expr, t: Expr, e: Expr) -> Expr:
    return App("ite", (c, t, e), _expr_sort(t))


def select(array: Expr, index: Expr, sort: str) -> Expr:
    return App("select", (array, index), sort)


def store(array: Expr, index: Expr, value: Expr) -> Expr:
    return App("store", (array, index, value), _expr_sort(array))


def _expr_sort(e: Expr) -> str:
    return e.sort  # type: ignore[union-attr]


def expr_sort(e: Expr) -> str:
    return _expr_sort(e)


def subst(e: Expr, mapping: dict[str, Expr]) -> Expr:
    """Capture-avoiding only in the trivial sense: bound names shadow the
    mapping. Callers use fresh bound names, so real capture cannot occur."""
    if isinstance(e, Var):
        return mapping.get(e.name, e)
    if isinstance(e, App):
        return App(e.fn, tuple(subst(a, mapping) for a in e.args), e.sort)
    if isinstance(e, Quant):
        inner = {k: v for k, v in mapping.items() if k not in {n for n, _ in e.bound}}
        if not inner:
            return e
        return Quant(
            e.kind,
            e.bound,
            subst(e.body, inner),
            tuple(tuple(subst(p, inner) for p in g) for g in e.patterns),
        )
    if isinstance(e, Labeled):
        return Labeled(e.label, subst(e.expr, mapping))
    return e


def free_vars(e: Expr, bound: frozenset[str] = frozenset()) -> dict[str, str]:
    """Free variables of `e` as name -> sort, in first-occurrence order."""
    out: dict[str, str] = {}

    def walk(x: Expr, bound_names: frozenset[str]) -> None:
        if isinstance(x, Var):
            if x.name not in bound_names and x.name not in out:
                out[x.name] = x.sort
        elif isinstance(x, App):
            for a in x.args:
                walk(a, bound_names)
        elif isinstance(x, Quant):
            inner = bound_names | {n for n, _ in x.bound}
            walk(x.body, inner)
            for group in x.patterns:
                for p in group:
                    walk(p, inner)
        elif isinstance(x, Labeled):
            walk(x.expr, bound_names)

    walk(e, bound)
    return out


# ---------------------------------------------------------------------------
# Check attribution


@dataclass(frozen=True)
class CheckAttribution:
    """What a labeled obligation checks and where it came from."""

    kind: str  # one of CHECK_KINDS
    line: int
    tag: Optional[str] = None
    callee: Optional[str] = None
    generated: bool = False


CHECK_KINDS = frozenset(
    {
        "precondition-at-call",
        "postcondition",
        "loop-invariant-entry",
        "loop-invariant-maintained",
        "variant-decreases",
        "variant-nonnegative",
        "overflow",
        "void-target",
        "class-invariant",
        "frame",
        "check-assertion",
    }
)


# ---------------------------------------------------------------------------
# Statements


@dataclass
class Stmt:
    pass


@dataclass
class SAssign(Stmt):
    name: str
    expr: Expr


@dataclass
class SHavoc(Stmt):
    name: str


@dataclass
class SAssert(Stmt):
    label: str
    expr: Expr


@dataclass
class SAssume(Stmt):
    expr: Expr


@dataclass
class SIf(Stmt):
    cond: Expr
    then: list[Stmt]
    els: list[Stmt]


@dataclass
class SCall(Stmt):
    """Call to a declared contract. The source translator inlines calls
    itself; this statement exists for IVL-level programs and tests."""

    callee: str
    args: list[Expr]


@dataclass
class LoopInv:
    entry_label: str
    maint_label: str
    expr: Expr


@dataclass
class SLoop(Stmt):
    """Invariant-annotated loop, pre-cut form.

    `head` holds per-iteration obligations evaluated at the loop head
    (e.g. well-definedness of the exit condition). `targets` are the
    names havocked at the cut; `frame_assumes` constrain havocked heaps
    to the routine's frame. `variant_labels` is the (nonnegative,
    decreases) label pair; `missing_variant_label` drives the synthetic
    always-failing obligation for loops that need but lack a variant.
    """

    invariants: list[LoopInv]
    head: list[Stmt]
    exit: Expr
    body: list[Stmt]
    variant: Optional[Expr] = None
    variant_labels: Optional[tuple[str, str]] = None
    missing_variant_label: Optional[str] = None
    targets: list[str] = field(default_factory=list)
    frame_assumes: list[Expr] = field(default_factory=list)


# ---------------------------------------------------------------------------
# Declarations


@dataclass
class ConstDecl:
    name: str
    sort: str
    distinct_group: Optional[str] = None  # members of a group are pairwise distinct


@dataclass
class FunDecl:
    name: str
    arg_sorts: tuple[str, ...]
    sort: str


@dataclass
class IvlContract:
    """Callable contract for IVL-level SCall statements (one-state;
    `modifies` lists global variable names havocked by a call)."""

    name: str
    params: list[Var]
    requires: list[Expr]
    ensures: list[Expr]
    modifies: list[str] = field(default_factory=list)


@dataclass
class IvlProcedure:
    name: str
    params: list[Var]
    locals: list[Var]
    requires: list[Expr]
    ensures: list[tuple[str, Expr]]  # (label, formula), labels in proc.labels
    body: list[Stmt]
    labels: dict[str, CheckAttribution] = field(default_factory=dict)


@dataclass
class IvlProgram:
    """Declarations shared by every procedure of one translation pool."""

    theories: list[str] = field(default_factory=list)
    consts: list[ConstDecl] = field(default_factory=list)
    funs: list[FunDecl] = field(default_factory=list)
    axioms: list[Expr] = field(default_factory=list)
    contracts: dict[str, IvlContract] = field(default_factory=dict)
    procedures: list[IvlProcedure] = field(default_factory=list)


@dataclass
class Vc:
    """A closed goal with labeled proof positions and its background."""

    goal: Expr
    labels: dict[str, CheckAttribution]
    background: list[str]  # ordered theory names
    consts: list[ConstDecl] = field(default_factory=list)
    funs: list[FunDecl] = field(default_factory=list)
    axioms: list[Expr] = field(default_factory=list)


def iter_stmts(stmts: list[Stmt]):
    """All statements, descending into branches and loop bodies."""
    for s in stmts:
        yield s
        if isinstance(s, SIf):
            yield from iter_stmts(s.then)
            yield from iter_stmts(s.els)
        elif isinstance(s, SLoop):
            yield from iter_stmts(s.head)
            yield from iter_stmts(s.body)
