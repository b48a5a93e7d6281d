"""Name resolution and type checking.

Builds the class table (builtin library classes plus user units, with
single inheritance flattened), then checks every contract and body
expression in context. Expressions are annotated in place with their
type; name nodes get binding/resolution tags the translator relies on.
Bracket indexing on reference containers (ARRAY, LIST) is rewritten into
`item` calls here so later stages only see routine calls and theory
operations.

Context rules enforced here: `old` only in postconditions, loop
invariants and check assertions; `Result` only inside functions and not
in preconditions; procedure calls never appear in expression position;
formals are read-only; assignment targets are unqualified.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from miniproof.diagnostics import DiagnosticSink, InputError, Position, error
from miniproof.frontend import ast
from miniproof.frontend.ast import BOOLEAN, INTEGER, Type

SEQ = Type("SEQ", ("INTEGER",))
SET = Type("SET", ("INTEGER",))
BAG = Type("BAG", ("INTEGER",))
MAP = Type("MAP", ("INTEGER", "INTEGER"))

# Signatures of the mathematical operations on value types. Zero-argument
# entries are written as field accesses (s.count), the rest as calls.
VALUE_OPS: dict[str, dict[str, tuple[list[Type], Type]]] = {
    "SEQ": {
        "count": ([], INTEGER),
        "item": ([INTEGER], INTEGER),
        "has": ([INTEGER], BOOLEAN),
        "sorted": ([], BOOLEAN),
        "slice": ([INTEGER, INTEGER], SEQ),
        "concat": ([SEQ], SEQ),
        "updated": ([INTEGER, INTEGER], SEQ),
        "extended": ([INTEGER], SEQ),
        "occurrences": ([INTEGER], INTEGER),
        "is_perm": ([SEQ], BOOLEAN),
        "to_bag": ([], BAG),
    },
    "SET": {
        "count": ([], INTEGER),
        "has": ([INTEGER], BOOLEAN),
        "united": ([SET], SET),
        "extended": ([INTEGER], SET),
        "removed": ([INTEGER], SET),
    },
    "BAG": {
        "count": ([], INTEGER),
        "has": ([INTEGER], BOOLEAN),
        "occurrences": ([INTEGER], INTEGER),
        "extended": ([INTEGER], BAG),
        "added": ([BAG], BAG),
    },
    "MAP": {
        "item": ([INTEGER], INTEGER),
        "has_key": ([INTEGER], BOOLEAN),
        "updated": ([INTEGER, INTEGER], MAP),
        "removed": ([INTEGER], MAP),
    },
}

_CANONICAL_ARGS = {
    "ARRAY": ("INTEGER",),
    "LIST": ("INTEGER",),
    "SEQ": ("INTEGER",),
    "SET": ("INTEGER",),
    "BAG": ("INTEGER",),
    "MAP": ("INTEGER", "INTEGER"),
}

# Contexts in which `old` may appear.
_OLD_CONTEXTS = frozenset({"ensure", "loop_invariant", "check"})
# Contexts in which `Result` may not appear (besides procedures).
_NO_RESULT_CONTEXTS = frozenset({"require", "class_invariant"})


@dataclass
class ClassInfo:
    """A class with inheritance flattened."""

    decl: ast.ClassDecl
    ancestors: list[str] = field(default_factory=list)  # nearest first
    attributes: dict[str, ast.AttributeDecl] = field(default_factory=dict)
    routines: dict[str, ast.RoutineDecl] = field(default_factory=dict)

    @property
    def name(self) -> str:
        return self.decl.name


@dataclass
class TypedProgram:
    classes: dict[str, ClassInfo]
    units: list[ast.ClassDecl]  # builtins first, then user units
    sink: DiagnosticSink

    def user_units(self) -> list[ast.ClassDecl]:
        return [u for u in self.units if not u.is_builtin]

    def conforms(self, sub: Type, sup: Type) -> bool:
        """Assignment compatibility: identical, Void to a reference type,
        or class subtyping along declared parents."""
        if sub == sup:
            return True
        if sub.name == "NONE":
            return self.is_reference(sup)
        if sub.name in self.classes and sup.name in self.classes:
            return sup.name in self.classes[sub.name].ancestors
        return False

    def is_reference(self, t: Type) -> bool:
        return t.name in self.classes


def _canonical_type(t: Type, position: Position, program: TypedProgram) -> Type:
    """Validate type arguments and normalize container instantiations."""
    want = _CANONICAL_ARGS.get(t.name)
    if want is not None:
        if t.args not in ((), want):
            raise InputError(
                error(f"'{t.name}' takes element type {list(want)}", position)
            )
        return Type(t.name, want)
    if t.args:
        raise InputError(error(f"'{t.name}' is not a generic type", position))
    if t.name in ("INTEGER", "BOOLEAN"):
        return t
    if t.name not in program.classes:
        raise InputError(error(f"unknown type '{t.name}'", position))
    return t


class _RoutineChecker:
    """Checks one routine (or the class invariant) of one class."""

    def __init__(self, program: TypedProgram, cls: ClassInfo,
                 routine: ast.RoutineDecl | None):
        self.program = program
        self.cls = cls
        self.routine = routine
        self.formals: dict[str, Type] = {}
        self.locals: dict[str, Type] = {}
        self.across_vars: list[str] = []
        if routine is not None:
            for f in routine.formals:
                if f.name in self.formals:
                    raise InputError(error(f"duplicate formal '{f.name}'", f.position))
                self.formals[f.name] = f.ty
            for lv in routine.locals:
                if lv.name in self.locals or lv.name in self.formals:
                    raise InputError(error(f"duplicate local '{lv.name}'", lv.position))
                self.locals[lv.name] = lv.ty

    # -- helpers -----------------------------------------------------------

    def fail(self, message: str, position: Position) -> InputError:
        return InputError(error(message, position))

    def lookup_feature(self, cls_name: str, name: str):
        info = self.program.classes[cls_name]
        if name in info.attributes:
            return info.attributes[name]
        if name in info.routines:
            return info.routines[name]
        return None

    # -- expressions ---------------------------------------------------------

    def check_expr(self, e: ast.Expr, ctx: str | None) -> ast.Expr:
        """Type `e` in context `ctx` (None = executable body position).
        Returns the node, possibly rewritten."""
        if isinstance(e, ast.IntLit):
            e.ty = INTEGER
            return e
        if isinstance(e, ast.BoolLit):
            e.ty = BOOLEAN
            return e
        if isinstance(e, ast.VoidLit):
            e.ty = Type("NONE")
            return e
        if isinstance(e, ast.CurrentExpr):
            e.ty = Type(self.cls.name)
            return e
        if isinstance(e, ast.ResultExpr):
            if self.routine is None or self.routine.return_type is None:
                raise self.fail("'Result' outside a function", e.position)
            if ctx in _NO_RESULT_CONTEXTS:
                raise self.fail(f"'Result' is not allowed in a {ctx}", e.position)
            e.ty = self.routine.return_type
            return e
        if isinstance(e, ast.Ident):
            return self.check_ident(e, ctx)
        if isinstance(e, ast.FieldAccess):
            return self.check_field_access(e, ctx)
        if isinstance(e, ast.CallExpr):
            return self.check_call(e, ctx)
        if isinstance(e, ast.IndexExpr):
            return self.check_index(e, ctx)
        if isinstance(e, ast.Binary):
            return self.check_binary(e, ctx)
        if isinstance(e, ast.Unary):
            e.operand = self.check_expr(e.operand, ctx)
            if e.op == "-":
                self.require_type(e.operand, INTEGER)
                e.ty = INTEGER
            else:
                self.require_type(e.operand, BOOLEAN)
                e.ty = BOOLEAN
            return e
        if isinstance(e, ast.OldExpr):
            if ctx not in _OLD_CONTEXTS:
                raise self.fail("'old' is only allowed in postconditions, "
                                "loop invariants and check assertions", e.position)
            inner = self.check_expr(e.expr, ctx)
            for sub in ast.walk_expr(inner):
                if isinstance(sub, ast.OldExpr):
                    raise self.fail("nested 'old'", sub.position)
            e.expr = inner
            e.ty = inner.ty
            return e
        if isinstance(e, ast.AcrossExpr):
            e.lower = self.check_expr(e.lower, ctx)
            e.upper = self.check_expr(e.upper, ctx)
            self.require_type(e.lower, INTEGER)
            self.require_type(e.upper, INTEGER)
            if e.var in self.formals or e.var in self.locals or e.var in self.across_vars:
                raise self.fail(f"quantifier variable '{e.var}' shadows a name",
                                e.position)
            self.across_vars.append(e.var)
            try:
                e.body = self.check_expr(e.body, ctx)
            finally:
                self.across_vars.pop()
            self.require_type(e.body, BOOLEAN)
            e.ty = BOOLEAN
            return e
        raise self.fail(f"cannot type expression {type(e).__name__}", e.position)

    def check_ident(self, e: ast.Ident, ctx: str | None) -> ast.Expr:
        if e.name in self.across_vars:
            e.binding = "across"
            e.ty = INTEGER
            return e
        if e.name in self.locals:
            e.binding = "local"
            e.ty = self.locals[e.name]
            return e
        if e.name in self.formals:
            e.binding = "formal"
            e.ty = self.formals[e.name]
            return e
        feature = self.lookup_feature(self.cls.name, e.name)
        if isinstance(feature, ast.AttributeDecl):
            e.binding = "attribute"
            e.ty = feature.ty
            return e
        if isinstance(feature, ast.RoutineDecl) and not feature.formals:
            # Zero-argument feature call on Current.
            call = ast.CallExpr(None, e.name, [])
            call.position = e.position
            return self.check_call(call, ctx)
        raise self.fail(f"unknown name '{e.name}'", e.position)

    def check_field_access(self, e: ast.FieldAccess, ctx: str | None) -> ast.Expr:
        e.target = self.check_expr(e.target, ctx)
        t = e.target.ty
        assert t is not None
        if ast.is_value_type(t):
            sig = VALUE_OPS[t.name].get(e.name)
            if sig is None or sig[0]:
                raise self.fail(f"'{t}' has no operation '{e.name}'", e.position)
            e.resolution = "theory_op"
            e.ty = sig[1]
            return e
        if self.program.is_reference(t):
            feature = self.lookup_feature(t.name, e.name)
            if isinstance(feature, ast.AttributeDecl):
                e.resolution = "attribute"
                e.ty = feature.ty
                return e
            if isinstance(feature, ast.RoutineDecl) and not feature.formals:
                call = ast.CallExpr(e.target, e.name, [])
                call.position = e.position
                return self.check_call(call, ctx)
            raise self.fail(f"class {t.name} has no feature '{e.name}'", e.position)
        raise self.fail(f"'{t}' has no features", e.position)

    def check_call(self, e: ast.CallExpr, ctx: str | None) -> ast.Expr:
        if e.target is not None and e.target.ty is None:
            e.target = self.check_expr(e.target, ctx)
        if e.target is not None:
            t = e.target.ty
            assert t is not None
            if ast.is_value_type(t):
                sig = VALUE_OPS[t.name].get(e.name)
                if sig is None:
                    raise self.fail(f"'{t}' has no operation '{e.name}'", e.position)
                params, result = sig
                self.check_args(e, params, ctx)
                e.resolution = "theory_op"
                e.ty = result
                return e
            if not self.program.is_reference(t):
                raise self.fail(f"'{t}' has no features", e.position)
            cls_name = t.name
        else:
            cls_name = self.cls.name
        feature = self.lookup_feature(cls_name, e.name)
        if not isinstance(feature, ast.RoutineDecl):
            raise self.fail(f"class {cls_name} has no routine '{e.name}'", e.position)
        self.check_args(e, [f.ty for f in feature.formals], ctx)
        e.resolution = "routine"
        e.routine_class = feature.owner or cls_name
        e.ty = feature.return_type if feature.return_type is not None else Type("NONE")
        return e

    def check_args(self, e: ast.CallExpr, params: list[Type], ctx: str | None) -> None:
        if len(e.args) != len(params):
            raise self.fail(
                f"'{e.name}' expects {len(params)} argument(s), got {len(e.args)}",
                e.position,
            )
        for i, want in enumerate(params):
            e.args[i] = self.check_expr(e.args[i], ctx)
            got = e.args[i].ty
            assert got is not None
            if not self.program.conforms(got, want):
                raise self.fail(
                    f"argument {i + 1} of '{e.name}': expected {want}, got {got}",
                    e.args[i].position,
                )

    def check_index(self, e: ast.IndexExpr, ctx: str | None) -> ast.Expr:
        e.target = self.check_expr(e.target, ctx)
        e.index = self.check_expr(e.index, ctx)
        self.require_type(e.index, INTEGER)
        t = e.target.ty
        assert t is not None
        if t.name == "SEQ":
            e.resolution = "seq_item"
            e.ty = INTEGER
            return e
        if t.name == "MAP":
            e.resolution = "map_item"
            e.ty = INTEGER
            return e
        if self.program.is_reference(t):
            feature = self.lookup_feature(t.name, "item")
            if isinstance(feature, ast.RoutineDecl):
                call = ast.CallExpr(e.target, "item", [e.index])
                call.position = e.position
                return self.check_call(call, ctx)
        raise self.fail(f"'{t}' cannot be indexed", e.position)

    def check_binary(self, e: ast.Binary, ctx: str | None) -> ast.Expr:
        e.left = self.check_expr(e.left, ctx)
        e.right = self.check_expr(e.right, ctx)
        lt, rt = e.left.ty, e.right.ty
        assert lt is not None and rt is not None
        if e.op in ("+", "-", "*", "//", "\\\\"):
            self.require_type(e.left, INTEGER)
            self.require_type(e.right, INTEGER)
            e.ty = INTEGER
            return e
        if e.op in ("<", "<=", ">", ">="):
            self.require_type(e.left, INTEGER)
            self.require_type(e.right, INTEGER)
            e.ty = BOOLEAN
            return e
        if e.op in ("and", "or", "xor", "implies", "and then", "or else"):
            self.require_type(e.left, BOOLEAN)
            self.require_type(e.right, BOOLEAN)
            e.ty = BOOLEAN
            return e
        if e.op in ("=", "/="):
            ok = (
                lt == rt
                or self.program.conforms(lt, rt)
                or self.program.conforms(rt, lt)
            )
            if not ok:
                raise self.fail(f"cannot compare {lt} with {rt}", e.position)
            e.ty = BOOLEAN
            return e
        raise self.fail(f"unknown operator '{e.op}'", e.position)

    def require_type(self, e: ast.Expr, want: Type) -> None:
        if e.ty != want:
            raise self.fail(f"expected {want}, got {e.ty}", e.position)

    # -- statements ----------------------------------------------------------

    def check_stmts(self, stmts: list[ast.Stmt]) -> None:
        for s in stmts:
            self.check_stmt(s)

    def check_stmt(self, s: ast.Stmt) -> None:
        if isinstance(s, ast.Assign):
            s.target = self.check_expr(s.target, None)
            if isinstance(s.target, ast.Ident):
                if s.target.binding == "formal":
                    raise self.fail("formals are read-only", s.position)
                if s.target.binding == "across":
                    raise self.fail("quantifier variables are read-only", s.position)
            elif isinstance(s.target, ast.FieldAccess):
                if s.target.resolution != "attribute":
                    raise self.fail(
                        "only attributes can be assignment targets", s.position
                    )
            elif not isinstance(s.target, ast.ResultExpr):
                raise self.fail(
                    "assignment target must be a local, an attribute, or Result",
                    s.position,
                )
            s.value = self.check_expr(s.value, None)
            assert s.target.ty is not None and s.value.ty is not None
            if not self.program.conforms(s.value.ty, s.target.ty):
                raise self.fail(
                    f"cannot assign {s.value.ty} to {s.target.ty}", s.position
                )
        elif isinstance(s, ast.If):
            for b in s.branches:
                b.cond = self.check_expr(b.cond, None)
                self.require_type(b.cond, BOOLEAN)
                self.check_stmts(b.body)
            self.check_stmts(s.else_body)
        elif isinstance(s, ast.Loop):
            self.check_stmts(s.init)
            for c in s.invariants:
                c.expr = self.check_expr(c.expr, "loop_invariant")
                self.require_type(c.expr, BOOLEAN)
            s.exit = self.check_expr(s.exit, None)
            self.require_type(s.exit, BOOLEAN)
            self.check_stmts(s.body)
            if s.variant is not None:
                s.variant = self.check_expr(s.variant, "variant")
                self.require_type(s.variant, INTEGER)
        elif isinstance(s, ast.Check):
            for c in s.clauses:
                c.expr = self.check_expr(c.expr, "check")
                self.require_type(c.expr, BOOLEAN)
        elif isinstance(s, ast.CallStmt):
            self.check_call_stmt(s.call)
        elif isinstance(s, ast.Create):
            ty = self.locals.get(s.target)
            if ty is None:
                if s.target in self.formals:
                    raise self.fail("formals are read-only", s.position)
                feature = self.lookup_feature(self.cls.name, s.target)
                if isinstance(feature, ast.AttributeDecl):
                    ty = feature.ty
            if ty is None:
                raise self.fail(f"unknown name '{s.target}'", s.position)
            if not self.program.is_reference(ty):
                raise self.fail(f"cannot create a value of type {ty}", s.position)
        else:
            raise self.fail(f"cannot check statement {type(s).__name__}", s.position)

    def check_call_stmt(self, call: ast.CallExpr) -> None:
        if call.target is not None:
            call.target = self.check_expr(call.target, None)
            t = call.target.ty
            assert t is not None
            if not self.program.is_reference(t):
                raise self.fail(f"'{t}' has no routines", call.position)
            cls_name = t.name
        else:
            cls_name = self.cls.name
        feature = self.lookup_feature(cls_name, call.name)
        if not isinstance(feature, ast.RoutineDecl):
            raise self.fail(f"class {cls_name} has no routine '{call.name}'",
                            call.position)
        if feature.return_type is not None:
            raise self.fail(
                f"'{call.name}' is a function; its result must be used",
                call.position,
            )
        self.check_args(call, [f.ty for f in feature.formals], None)
        call.resolution = "routine"
        call.routine_class = feature.owner or cls_name
        call.ty = Type("NONE")

    # -- routine and invariant entry points -----------------------------------

    def check_routine(self) -> None:
        r = self.routine
        assert r is not None
        for c in r.require:
            if isinstance(c, ast.Clause):
                c.expr = self.check_expr(c.expr, "require")
                self.require_type(c.expr, BOOLEAN)
            else:
                for i, fe in enumerate(c.exprs):
                    fe = self.check_expr(fe, "require")
                    c.exprs[i] = fe
                    assert fe.ty is not None
                    if not self.program.is_reference(fe.ty):
                        raise self.fail(
                            f"{c.kind} clause entries must be references", fe.position
                        )
                    is_formal = isinstance(fe, ast.Ident) and fe.binding == "formal"
                    if not (isinstance(fe, ast.CurrentExpr) or is_formal):
                        raise self.fail(
                            f"{c.kind} clause entries must be Current or a formal",
                            fe.position,
                        )
        if r.body is not None:
            self.check_stmts(r.body)
        for c in r.ensure:
            c.expr = self.check_expr(c.expr, "ensure")
            self.require_type(c.expr, BOOLEAN)

    def check_class_invariant(self) -> None:
        for c in self.cls.decl.invariants:
            c.expr = self.check_expr(c.expr, "class_invariant")
            self.require_type(c.expr, BOOLEAN)


def _sweep_expression_calls(program: TypedProgram, cls: ClassInfo) -> None:
    """Reject procedure calls in expression position. The checker types a
    procedure call as NONE, which usually trips a type error at the use
    site; this pass gives a direct message for the remaining spots."""

    def sweep(e: ast.Expr, top_level_call: bool = False) -> None:
        if isinstance(e, ast.CallExpr) and e.resolution == "routine":
            callee = program.classes[e.routine_class or cls.name].routines[e.name]
            if callee.return_type is None and not top_level_call:
                raise InputError(
                    error(f"procedure '{e.name}' called in an expression", e.position)
                )
        for c in ast.child_exprs(e):
            sweep(c)

    for r in cls.decl.routines:
        for c in r.preconditions():
            sweep(c.expr)
        for c in r.ensure:
            sweep(c.expr)
        if r.body is not None:
            for s in ast.walk_stmts(r.body):
                if isinstance(s, ast.CallStmt):
                    sweep(s.call, top_level_call=True)
                else:
                    for e in ast.stmt_exprs(s):
                        sweep(e)
    for c in cls.decl.invariants:
        sweep(c.expr)


def build_class_table(units: list[ast.ClassDecl]) -> dict[str, ClassInfo]:
    """Link classes, flatten inheritance, reject duplicates and cycles."""
    table: dict[str, ClassInfo] = {}
    for unit in units:
        if unit.name in table:
            raise InputError(error(f"duplicate class '{unit.name}'", unit.position))
        table[unit.name] = ClassInfo(decl=unit)
    for unit in units:
        if unit.parent is not None and unit.parent not in table:
            raise InputError(
                error(f"unknown parent class '{unit.parent}'", unit.position)
            )
    for name, info in table.items():
        chain: list[str] = []
        cur = info.decl.parent
        while cur is not None:
            if cur == name or cur in chain:
                raise InputError(
                    error(f"inheritance cycle through '{name}'", info.decl.position)
                )
            chain.append(cur)
            cur = table[cur].decl.parent
        info.ancestors = chain
    # Own features: unique names, stamped with their owner.
    for name, info in table.items():
        seen: set[str] = set()
        for a in info.decl.attributes:
            if a.name in seen:
                raise InputError(error(f"duplicate feature '{a.name}'", a.position))
            seen.add(a.name)
            a.owner = name
        for r in info.decl.routines:
            if r.name in seen:
                raise InputError(error(f"duplicate feature '{r.name}'", r.position))
            seen.add(r.name)
            r.owner = name
    # Flatten root-first; a name arriving twice means a redeclaration,
    # which this language does not support.
    for name, info in table.items():
        for holder_name in list(reversed(info.ancestors)) + [name]:
            holder = table[holder_name]
            for a in holder.decl.attributes:
                if a.name in info.attributes or a.name in info.routines:
                    raise InputError(
                        error(f"'{a.name}' redeclares an inherited feature",
                              a.position if holder is info else info.decl.position)
                    )
                info.attributes[a.name] = a
            for r in holder.decl.routines:
                if r.name in info.attributes or r.name in info.routines:
                    raise InputError(
                        error(f"'{r.name}' redeclares an inherited feature",
                              r.position if holder is info else info.decl.position)
                    )
                info.routines[r.name] = r
    return table


def typecheck(units: list[ast.ClassDecl],
              sink: DiagnosticSink | None = None) -> TypedProgram:
    """Typecheck user units together with the builtin library classes.

    Returns a TypedProgram whose AST nodes carry types and resolutions.
    Raises InputError on the first error; warnings accumulate in the sink.
    """
    from miniproof.frontend.library import builtin_units

    sink = sink or DiagnosticSink()
    all_units = builtin_units() + list(units)
    table = build_class_table(all_units)
    program = TypedProgram(classes=table, units=all_units, sink=sink)

    # Normalize declared types before touching expressions.
    for info in table.values():
        for a in info.decl.attributes:
            a.ty = _canonical_type(a.ty, a.position, program)
        for r in info.decl.routines:
            for f in r.formals:
                f.ty = _canonical_type(f.ty, f.position, program)
            for lv in r.locals:
                lv.ty = _canonical_type(lv.ty, lv.position, program)
            if r.return_type is not None:
                r.return_type = _canonical_type(r.return_type, r.position, program)

    for info in table.values():
        _RoutineChecker(program, info, None).check_class_invariant()
        for r in info.decl.routines:
            _RoutineChecker(program, info, r).check_routine()
        _sweep_expression_calls(program, info)
    return program
