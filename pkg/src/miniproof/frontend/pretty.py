"""Unparser: renders an AST back to parseable source text.

Used for dumps and for the parse/pretty round-trip tests. Output is
fully parenthesized inside expressions, so precedence never needs
reconstructing.
"""

from __future__ import annotations

from miniproof.frontend import ast


def pretty_expr(e: ast.Expr) -> str:
    if isinstance(e, ast.IntLit):
        return str(e.value)
    if isinstance(e, ast.BoolLit):
        return "True" if e.value else "False"
    if isinstance(e, ast.VoidLit):
        return "Void"
    if isinstance(e, ast.CurrentExpr):
        return "Current"
    if isinstance(e, ast.ResultExpr):
        return "Result"
    if isinstance(e, ast.Ident):
        return e.name
    if isinstance(e, ast.FieldAccess):
        return f"{_postfix_base(e.target)}.{e.name}"
    if isinstance(e, ast.CallExpr):
        args = ", ".join(pretty_expr(a) for a in e.args)
        if e.target is None:
            return f"{e.name} ({args})" if args else f"{e.name} ()"
        return f"{_postfix_base(e.target)}.{e.name} ({args})"
    if isinstance(e, ast.IndexExpr):
        return f"{_postfix_base(e.target)} [{pretty_expr(e.index)}]"
    if isinstance(e, ast.Binary):
        return f"({pretty_expr(e.left)} {e.op} {pretty_expr(e.right)})"
    if isinstance(e, ast.Unary):
        return f"({e.op} {pretty_expr(e.operand)})"
    if isinstance(e, ast.OldExpr):
        return f"(old {pretty_expr(e.expr)})"
    if isinstance(e, ast.AcrossExpr):
        return (
            f"across {pretty_expr(e.lower)} |..| {pretty_expr(e.upper)} "
            f"as {e.var} {e.quant} {pretty_expr(e.body)} end"
        )
    raise ValueError(f"cannot pretty-print {type(e).__name__}")


def _postfix_base(e: ast.Expr) -> str:
    """Postfix targets need parens unless they are themselves postfix/atomic."""
    s = pretty_expr(e)
    if isinstance(e, (ast.Binary, ast.Unary, ast.OldExpr, ast.AcrossExpr)):
        return f"({s})" if not s.startswith("(") else s
    return s


def _pretty_clause(c: ast.Clause, indent: str) -> str:
    tag = f"{c.tag}: " if c.tag else ""
    return f"{indent}{tag}{pretty_expr(c.expr)}"


def _pretty_notes(notes: list[ast.NoteEntry], indent: str) -> list[str]:
    if not notes:
        return []
    lines = [f"{indent}note"]
    for n in notes:
        values = ", ".join(
            f'"{v}"' if isinstance(v, str) else pretty_expr(v) for v in n.values
        )
        lines.append(f"{indent}  {n.key}: {values}")
    return lines


def _pretty_stmts(stmts: list[ast.Stmt], indent: str) -> list[str]:
    lines: list[str] = []
    for s in stmts:
        lines.extend(_pretty_stmt(s, indent))
    return lines


def _pretty_stmt(s: ast.Stmt, indent: str) -> list[str]:
    inner = indent + "  "
    if isinstance(s, ast.Assign):
        return [f"{indent}{pretty_expr(s.target)} := {pretty_expr(s.value)}"]
    if isinstance(s, ast.If):
        lines = []
        for i, b in enumerate(s.branches):
            kw = "if" if i == 0 else "elseif"
            lines.append(f"{indent}{kw} {pretty_expr(b.cond)} then")
            lines.extend(_pretty_stmts(b.body, inner))
        if s.else_body:
            lines.append(f"{indent}else")
            lines.extend(_pretty_stmts(s.else_body, inner))
        lines.append(f"{indent}end")
        return lines
    if isinstance(s, ast.Loop):
        lines = [f"{indent}from"]
        lines.extend(_pretty_stmts(s.init, inner))
        if s.invariants:
            lines.append(f"{indent}invariant")
            lines.extend(_pretty_clause(c, inner) for c in s.invariants)
        lines.append(f"{indent}until {pretty_expr(s.exit)}")
        lines.append(f"{indent}loop")
        lines.extend(_pretty_stmts(s.body, inner))
        if s.variant is not None:
            lines.append(f"{indent}variant {pretty_expr(s.variant)}")
        lines.append(f"{indent}end")
        return lines
    if isinstance(s, ast.Check):
        lines = [f"{indent}check"]
        lines.extend(_pretty_clause(c, inner) for c in s.clauses)
        lines.append(f"{indent}end")
        return lines
    if isinstance(s, ast.CallStmt):
        return [f"{indent}{pretty_expr(s.call)}"]
    if isinstance(s, ast.Create):
        return [f"{indent}create {s.target}"]
    raise ValueError(f"cannot pretty-print {type(s).__name__}")


def _pretty_routine(r: ast.RoutineDecl, indent: str) -> list[str]:
    inner = indent + "  "
    sig = r.name
    if r.formals:
        parts = "; ".join(f"{f.name}: {f.ty}" for f in r.formals)
        sig += f" ({parts})"
    if r.return_type is not None:
        sig += f": {r.return_type}"
    lines = [f"{indent}{sig}"]
    lines.extend(_pretty_notes(r.notes, inner))
    if r.require:
        lines.append(f"{inner}require")
        for c in r.require:
            if isinstance(c, ast.FrameClause):
                exprs = ", ".join(pretty_expr(x) for x in c.exprs)
                lines.append(f"{inner}  {c.kind} ({exprs})")
            else:
                lines.append(_pretty_clause(c, inner + "  "))
    if r.locals:
        lines.append(f"{inner}local")
        for lv in r.locals:
            lines.append(f"{inner}  {lv.name}: {lv.ty}")
    if r.body is not None:
        lines.append(f"{inner}do")
        lines.extend(_pretty_stmts(r.body, inner + "  "))
    if r.ensure:
        lines.append(f"{inner}ensure")
        lines.extend(_pretty_clause(c, inner + "  ") for c in r.ensure)
    lines.append(f"{inner}end")
    return lines


def pretty(unit: ast.ClassDecl) -> str:
    """Render one class declaration as source text."""
    lines: list[str] = []
    lines.extend(_pretty_notes(unit.notes, ""))
    header = f"class {unit.name}"
    if unit.parent:
        header += f" inherit {unit.parent}"
    lines.append(header + " feature")
    for a in unit.attributes:
        decl = f"  {a.name}: {a.ty}"
        if a.notes:
            note_bits = "; ".join(
                f"{n.key}: " + ", ".join(
                    f'"{v}"' if isinstance(v, str) else pretty_expr(v)
                    for v in n.values
                )
                for n in a.notes
            )
            decl += f" note {note_bits} end"
        lines.append(decl)
    for r in unit.routines:
        lines.append("")
        lines.extend(_pretty_routine(r, "  "))
    if unit.invariants:
        lines.append("invariant")
        lines.extend(_pretty_clause(c, "  ") for c in unit.invariants)
    lines.append("end")
    return "\n".join(lines) + "\n"
