"""Source-language AST.

Nodes are plain dataclasses. The parser fills in structure and positions;
the typechecker mutates nodes in place, setting `ty` on expressions and
`resolution` tags on names and calls. Annotation resolution then folds
note entries into flags on declarations.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional, Union

from miniproof.diagnostics import Position

# ---------------------------------------------------------------------------
# Types


@dataclass(frozen=True)
class Type:
    """A source type: INTEGER, BOOLEAN, a class name, or a container
    instantiation like ARRAY [INTEGER]. `args` holds element type names."""

    name: str
    args: tuple[str, ...] = ()

    def __str__(self) -> str:
        if self.args:
            return f"{self.name} [{', '.join(self.args)}]"
        return self.name


INTEGER = Type("INTEGER")
BOOLEAN = Type("BOOLEAN")

# Mathematical value types (model library); contrast with reference types,
# which are user classes plus ARRAY/LIST.
VALUE_TYPE_NAMES = frozenset({"SEQ", "SET", "BAG", "MAP"})


def is_value_type(t: Type) -> bool:
    return t.name in VALUE_TYPE_NAMES


def is_primitive(t: Type) -> bool:
    return t.name in ("INTEGER", "BOOLEAN")


# ---------------------------------------------------------------------------
# Expressions


@dataclass
class Expr:
    position: Position = field(init=False, default=Position(0))
    ty: Optional[Type] = field(init=False, default=None)

    def at(self, position: Position) -> "Expr":
        self.position = position
        return self


@dataclass
class IntLit(Expr):
    value: int


@dataclass
class BoolLit(Expr):
    value: bool


@dataclass
class VoidLit(Expr):
    pass


@dataclass
class CurrentExpr(Expr):
    pass


@dataclass
class ResultExpr(Expr):
    pass


@dataclass
class Ident(Expr):
    """Unqualified name. After typechecking, `binding` is one of
    "local", "formal", "attribute", "across"."""

    name: str
    binding: Optional[str] = None


@dataclass
class FieldAccess(Expr):
    """Qualified zero-argument access `target.name`. After typechecking,
    `resolution` is "attribute", "model_field", or "theory_op"."""

    target: Expr
    name: str
    resolution: Optional[str] = None


@dataclass
class CallExpr(Expr):
    """Routine or theory-operation call with arguments. `target` is None
    for unqualified calls (on Current). After typechecking, `resolution`
    is "routine" or "theory_op" and `routine_class` names the class that
    declares the routine."""

    target: Optional[Expr]
    name: str
    args: list[Expr]
    resolution: Optional[str] = None
    routine_class: Optional[str] = None


@dataclass
class IndexExpr(Expr):
    """Bracket sugar `target [i]`. Resolved to an `item` routine call on
    reference containers or a theory item operation on SEQ/MAP."""

    target: Expr
    index: Expr
    resolution: Optional[str] = None


@dataclass
class Binary(Expr):
    op: str  # + - * // \\ = /= < <= > >= and or xor implies "and then" "or else"
    left: Expr
    right: Expr


@dataclass
class Unary(Expr):
    op: str  # "-" | "not"
    operand: Expr


@dataclass
class OldExpr(Expr):
    expr: Expr


@dataclass
class AcrossExpr(Expr):
    """Bounded integer quantifier: across LO |..| HI as NAME all/some BODY end."""

    lower: Expr
    upper: Expr
    var: str
    quant: str  # "all" | "some"
    body: Expr


# ---------------------------------------------------------------------------
# Clauses and notes


@dataclass
class Clause:
    """A tagged assertion clause (require/ensure/invariant/check)."""

    tag: Optional[str]
    expr: Expr
    position: Position


@dataclass
class FrameClause:
    """A modify/read clause inside a require block."""

    kind: str  # "modify" | "read"
    exprs: list[Expr]
    position: Position


@dataclass
class NoteEntry:
    """One `key: value, value` note pair. Values are expressions (idents
    count) or string literals."""

    key: str
    values: list[Union[Expr, str]]
    position: Position


# ---------------------------------------------------------------------------
# Statements


@dataclass
class Stmt:
    position: Position


@dataclass
class Assign(Stmt):
    target: Expr  # Ident, ResultExpr, or FieldAccess
    value: Expr


@dataclass
class IfBranch:
    cond: Expr
    body: list[Stmt]


@dataclass
class If(Stmt):
    branches: list[IfBranch]
    else_body: list[Stmt]


@dataclass
class Loop(Stmt):
    init: list[Stmt]
    invariants: list[Clause]
    exit: Expr
    body: list[Stmt]
    variant: Optional[Expr]


@dataclass
class Check(Stmt):
    clauses: list[Clause]


@dataclass
class CallStmt(Stmt):
    call: CallExpr


@dataclass
class Create(Stmt):
    target: str


# ---------------------------------------------------------------------------
# Declarations


@dataclass
class Formal:
    name: str
    ty: Type
    position: Position


@dataclass
class Local:
    name: str
    ty: Type
    position: Position


@dataclass
class RoutineDecl:
    name: str
    formals: list[Formal]
    return_type: Optional[Type]
    notes: list[NoteEntry]
    require: list[Union[Clause, FrameClause]]
    locals: list[Local]
    body: Optional[list[Stmt]]  # None when contract-only (no do block)
    ensure: list[Clause]
    position: Position
    # Filled by resolve_annotations:
    is_ghost: bool = False
    is_lemma: bool = False
    is_skipped: bool = False
    check_termination: bool = True
    decreases: Optional[Expr] = None
    frame: Optional[list[Expr]] = None  # None means "use the default"
    reads: Optional[list[Expr]] = None
    # Filled by typecheck:
    owner: Optional[str] = None
    # Filled by apply_invariant_defaults at translation time:
    inv_assume_entry: bool = False
    inv_assert_exit: bool = False

    @property
    def is_function(self) -> bool:
        return self.return_type is not None

    @property
    def is_creator(self) -> bool:
        return self.name == "make" or self.name.startswith("make_")

    def preconditions(self) -> list[Clause]:
        return [c for c in self.require if isinstance(c, Clause)]

    def frame_clauses(self) -> list[FrameClause]:
        return [c for c in self.require if isinstance(c, FrameClause)]


@dataclass
class AttributeDecl:
    name: str
    ty: Type
    notes: list[NoteEntry]
    position: Position
    is_ghost: bool = False
    owner: Optional[str] = None


@dataclass
class ClassDecl:
    name: str
    parent: Optional[str]
    notes: list[NoteEntry]
    attributes: list[AttributeDecl]
    routines: list[RoutineDecl]
    invariants: list[Clause]
    position: Position
    # Filled by resolve_annotations:
    model_fields: list[str] = field(default_factory=list)
    theory_file: Optional[str] = None
    explicit_contracts: bool = False
    is_builtin: bool = False

    def routine(self, name: str) -> Optional[RoutineDecl]:
        for r in self.routines:
            if r.name == name:
                return r
        return None

    def attribute(self, name: str) -> Optional[AttributeDecl]:
        for a in self.attributes:
            if a.name == name:
                return a
        return None


# ---------------------------------------------------------------------------
# Traversal helpers


def child_exprs(e: Expr) -> Iterator[Expr]:
    """Direct subexpressions of `e`."""
    if isinstance(e, FieldAccess):
        yield e.target
    elif isinstance(e, CallExpr):
        if e.target is not None:
            yield e.target
        yield from e.args
    elif isinstance(e, IndexExpr):
        yield e.target
        yield e.index
    elif isinstance(e, Binary):
        yield e.left
        yield e.right
    elif isinstance(e, Unary):
        yield e.operand
    elif isinstance(e, OldExpr):
        yield e.expr
    elif isinstance(e, AcrossExpr):
        yield e.lower
        yield e.upper
        yield e.body


def walk_expr(e: Expr) -> Iterator[Expr]:
    """Pre-order traversal of `e` and all subexpressions."""
    yield e
    for c in child_exprs(e):
        yield from walk_expr(c)


def stmt_exprs(s: Stmt) -> Iterator[Expr]:
    """Direct expressions of a statement (not descending into substatements)."""
    if isinstance(s, Assign):
        yield s.target
        yield s.value
    elif isinstance(s, If):
        for b in s.branches:
            yield b.cond
    elif isinstance(s, Loop):
        for c in s.invariants:
            yield c.expr
        yield s.exit
        if s.variant is not None:
            yield s.variant
    elif isinstance(s, Check):
        for c in s.clauses:
            yield c.expr
    elif isinstance(s, CallStmt):
        yield s.call


def walk_stmts(stmts: list[Stmt]) -> Iterator[Stmt]:
    """Pre-order traversal of statements, descending into bodies."""
    for s in stmts:
        yield s
        if isinstance(s, If):
            for b in s.branches:
                yield from walk_stmts(b.body)
            yield from walk_stmts(s.else_body)
        elif isinstance(s, Loop):
            yield from walk_stmts(s.init)
            yield from walk_stmts(s.body)
