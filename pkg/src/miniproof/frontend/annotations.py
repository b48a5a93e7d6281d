"""Annotation resolution: fold note clauses into declaration flags and
enforce the status discipline that depends on them.

Recognized note keys:

  status: ghost | lemma | skip      (routines; attributes take ghost)
  termination: false                (suppress variant obligations)
  decreases: <integer expr>         (termination measure for recursion)
  model: <attribute names>          (class model fields)
  theory: "<file.thy>"              (extra background theory for the class)
  explicit: contracts               (suppress default contracts per class)

Unknown keys (and known keys with unusable values) produce warnings, not
errors, so stray annotations never block verification.

The discipline pass needs resolved flags for every class, so it runs
after all notes are folded: function bodies must be observably pure (no
creation, no attribute stores, calls only to lemma/ghost procedures),
and ghost state may be read only from specification positions, ghost
assignments, or lemma call arguments.
"""

from __future__ import annotations

from miniproof.diagnostics import InputError, error
from miniproof.frontend import ast
from miniproof.frontend.typecheck import ClassInfo, TypedProgram, _RoutineChecker

# The resolved program is the typed program with flags materialized.
AnnotatedProgram = TypedProgram

_ROUTINE_KEYS = frozenset({"status", "termination", "decreases"})
_CLASS_KEYS = frozenset({"model", "theory", "explicit", "status"})
_ATTRIBUTE_KEYS = frozenset({"status"})


def _value_name(v: ast.Expr | str) -> str | None:
    """Render a note value as a bare word when it is one."""
    if isinstance(v, str):
        return v
    if isinstance(v, ast.Ident):
        return v.name
    if isinstance(v, ast.BoolLit):
        return "true" if v.value else "false"
    return None


def _resolve_routine_notes(program: TypedProgram, cls: ClassInfo,
                           r: ast.RoutineDecl) -> None:
    for entry in r.notes:
        if entry.key == "status":
            for v in entry.values:
                name = _value_name(v)
                if name == "ghost":
                    r.is_ghost = True
                elif name == "lemma":
                    r.is_lemma = True
                elif name == "skip":
                    r.is_skipped = True
                else:
                    program.sink.warn(
                        f"unknown status '{name}' ignored", entry.position
                    )
        elif entry.key == "termination":
            name = _value_name(entry.values[0]) if entry.values else None
            if name == "false":
                r.check_termination = False
            elif name != "true":
                program.sink.warn(
                    f"termination note expects false, got '{name}'", entry.position
                )
        elif entry.key == "decreases":
            if len(entry.values) != 1 or isinstance(entry.values[0], str):
                program.sink.warn("decreases note expects one expression",
                                  entry.position)
                continue
            expr = entry.values[0]
            checker = _RoutineChecker(program, cls, r)
            checker.locals = {}  # entry state: formals and attributes only
            expr = checker.check_expr(expr, "variant")
            if expr.ty != ast.INTEGER:
                raise InputError(
                    error("decreases measure must be an INTEGER expression",
                          entry.position)
                )
            for sub in ast.walk_expr(expr):
                if isinstance(sub, ast.Ident) and sub.binding == "local":
                    raise InputError(
                        error("decreases measure cannot read locals", sub.position)
                    )
                if isinstance(sub, ast.ResultExpr):
                    raise InputError(
                        error("decreases measure cannot read Result", sub.position)
                    )
            r.decreases = expr
        else:
            program.sink.warn(f"unknown note key '{entry.key}' ignored",
                              entry.position)

    frames: list[ast.Expr] = []
    reads: list[ast.Expr] = []
    for c in r.frame_clauses():
        (frames if c.kind == "modify" else reads).extend(c.exprs)
        if c.kind == "modify" and r.is_function:
            raise InputError(
                error("functions cannot declare a modify clause", c.position)
            )
    if any(isinstance(c, ast.FrameClause) and c.kind == "modify"
           for c in r.require):
        r.frame = frames
    if any(isinstance(c, ast.FrameClause) and c.kind == "read"
           for c in r.require):
        r.reads = reads


def _resolve_class_notes(program: TypedProgram, cls: ClassInfo) -> None:
    decl = cls.decl
    for entry in decl.notes:
        if entry.key == "model":
            fields = []
            for v in entry.values:
                name = _value_name(v)
                if name is None or name not in cls.attributes:
                    program.sink.warn(
                        f"model note names no attribute: '{name}'", entry.position
                    )
                    continue
                fields.append(name)
            decl.model_fields = fields
        elif entry.key == "theory":
            if len(entry.values) == 1 and isinstance(entry.values[0], str):
                decl.theory_file = entry.values[0]
            else:
                program.sink.warn("theory note expects one file name string",
                                  entry.position)
        elif entry.key == "explicit":
            names = [_value_name(v) for v in entry.values]
            if "contracts" in names:
                decl.explicit_contracts = True
            else:
                program.sink.warn(
                    f"unrecognized explicit note value {names} ignored",
                    entry.position,
                )
        else:
            program.sink.warn(f"unknown note key '{entry.key}' ignored",
                              entry.position)

    for a in decl.attributes:
        for entry in a.notes:
            if entry.key == "status":
                names = [_value_name(v) for v in entry.values]
                if "ghost" in names:
                    a.is_ghost = True
                else:
                    program.sink.warn(
                        f"unknown attribute status {names} ignored", entry.position
                    )
            else:
                program.sink.warn(f"unknown note key '{entry.key}' ignored",
                                  entry.position)


class _Discipline:
    """Status-dependent legality checks for one class."""

    def __init__(self, program: TypedProgram, cls: ClassInfo):
        self.program = program
        self.cls = cls

    def attribute_of(self, e: ast.Expr) -> ast.AttributeDecl | None:
        if isinstance(e, ast.Ident) and e.binding == "attribute":
            return self.cls.attributes.get(e.name)
        if isinstance(e, ast.FieldAccess) and e.resolution == "attribute":
            assert e.target.ty is not None
            owner = self.program.classes.get(e.target.ty.name)
            return owner.attributes.get(e.name) if owner else None
        return None

    def routine_of(self, e: ast.CallExpr) -> ast.RoutineDecl | None:
        if e.resolution != "routine":
            return None
        return self.program.classes[e.routine_class or self.cls.name].routines[e.name]

    def forbid_ghost_reads(self, e: ast.Expr) -> None:
        """`e` sits in executable position: no ghost attributes or ghost
        function applications anywhere inside."""
        for sub in ast.walk_expr(e):
            attr = self.attribute_of(sub) if isinstance(
                sub, (ast.Ident, ast.FieldAccess)) else None
            if attr is not None and attr.is_ghost:
                raise InputError(
                    error(f"ghost attribute '{attr.name}' read in executable code",
                          sub.position)
                )
            if isinstance(sub, ast.CallExpr):
                callee = self.routine_of(sub)
                if callee is not None and (callee.is_ghost or callee.is_lemma):
                    raise InputError(
                        error(f"ghost routine '{callee.name}' called in "
                              "executable code", sub.position)
                    )

    def check_body(self, r: ast.RoutineDecl) -> None:
        if r.body is None:
            return
        ghost_context = r.is_ghost or r.is_lemma
        for s in ast.walk_stmts(r.body):
            if isinstance(s, ast.Assign):
                target_attr = self.attribute_of(s.target)
                if r.is_function and target_attr is not None:
                    raise InputError(
                        error("functions cannot assign to attributes", s.position)
                    )
                ghost_target = target_attr is not None and target_attr.is_ghost
                if not ghost_context and not ghost_target:
                    self.forbid_ghost_reads(s.value)
                    self.forbid_ghost_reads(s.target)
            elif isinstance(s, ast.If):
                if not ghost_context:
                    for b in s.branches:
                        self.forbid_ghost_reads(b.cond)
            elif isinstance(s, ast.Loop):
                if not ghost_context:
                    self.forbid_ghost_reads(s.exit)
            elif isinstance(s, ast.Create):
                if r.is_function:
                    raise InputError(
                        error("functions cannot create objects", s.position)
                    )
            elif isinstance(s, ast.CallStmt):
                callee = self.routine_of(s.call)
                assert callee is not None
                callee_ghostish = callee.is_ghost or callee.is_lemma
                if r.is_function and not callee_ghostish:
                    raise InputError(
                        error(f"function body calls procedure '{callee.name}'",
                              s.position)
                    )
                if not ghost_context and not callee_ghostish:
                    if s.call.target is not None:
                        self.forbid_ghost_reads(s.call.target)
                    for a in s.call.args:
                        self.forbid_ghost_reads(a)


def resolve_annotations(program: TypedProgram) -> AnnotatedProgram:
    """Fold notes into flags on the typed program, then run the
    status-discipline checks. Returns the same program object."""
    for info in program.classes.values():
        _resolve_class_notes(program, info)
        for r in info.decl.routines:
            _resolve_routine_notes(program, info, r)
    for info in program.classes.values():
        disc = _Discipline(program, info)
        for r in info.decl.routines:
            disc.check_body(r)
    return program
