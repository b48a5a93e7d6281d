"""Textual IVL dump (debug output).

Deterministic rendering, one declaration per line. Labels carry their
attribution inline as `{:tag "...", :line N, :kind K, :generated B}`
attributes; expressions print as s-expressions.
"""

from __future__ import annotations

from miniproof.ivl.ast import (
    App,
    BoolConst,
    CheckAttribution,
    Const,
    Expr,
    IntConst,
    IvlProcedure,
    IvlProgram,
    Labeled,
    Quant,
    SAssert,
    SAssign,
    SAssume,
    SCall,
    SHavoc,
    SIf,
    SLoop,
    Stmt,
    Var,
)


def print_expr(e: Expr) -> str:
    if isinstance(e, Var) or isinstance(e, Const):
        return e.name
    if isinstance(e, IntConst):
        return str(e.value) if e.value >= 0 else f"(- {-e.value})"
    if isinstance(e, BoolConst):
        return "true" if e.value else "false"
    if isinstance(e, App):
        inner = " ".join(print_expr(a) for a in e.args)
        return f"({e.fn} {inner})"
    if isinstance(e, Quant):
        bound = " ".join(f"({n} {s})" for n, s in e.bound)
        return f"({e.kind} ({bound}) {print_expr(e.body)})"
    if isinstance(e, Labeled):
        return f"(! {print_expr(e.expr)} :label {e.label})"
    raise TypeError(f"unprintable expression {type(e).__name__}")


def format_attribution(attr: CheckAttribution) -> str:
    parts = []
    if attr.tag is not None:
        parts.append(f':tag "{attr.tag}"')
    parts.append(f":line {attr.line}")
    parts.append(f":kind {attr.kind}")
    parts.append(f":generated {'true' if attr.generated else 'false'}")
    if attr.callee is not None:
        parts.append(f':callee "{attr.callee}"')
    return "{" + ", ".join(parts) + "}"


def print_procedure(proc: IvlProcedure) -> str:
    lines: list[str] = []
    params = ", ".join(f"{v.name}: {v.sort}" for v in proc.params)
    lines.append(f"procedure {proc.name}({params})")
    for r in proc.requires:
        lines.append(f"  requires {print_expr(r)};")
    for label, e in proc.ensures:
        lines.append(f"  ensures {_attr(proc, label)} {print_expr(e)};")
    lines.append("{")
    for v in proc.locals:
        lines.append(f"  var {v.name}: {v.sort};")
    _print_stmts(proc, proc.body, lines, "  ")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _attr(proc: IvlProcedure, label: str) -> str:
    return format_attribution(proc.labels[label])


def _print_stmts(proc: IvlProcedure, stmts: list[Stmt], lines: list[str], ind: str) -> None:
    for s in stmts:
        if isinstance(s, SAssign):
            lines.append(f"{ind}{s.name} := {print_expr(s.expr)};")
        elif isinstance(s, SHavoc):
            lines.append(f"{ind}havoc {s.name};")
        elif isinstance(s, SAssert):
            lines.append(f"{ind}assert {_attr(proc, s.label)} {print_expr(s.expr)};")
        elif isinstance(s, SAssume):
            lines.append(f"{ind}assume {print_expr(s.expr)};")
        elif isinstance(s, SIf):
            lines.append(f"{ind}if ({print_expr(s.cond)}) {{")
            _print_stmts(proc, s.then, lines, ind + "  ")
            if s.els:
                lines.append(f"{ind}}} else {{")
                _print_stmts(proc, s.els, lines, ind + "  ")
            lines.append(f"{ind}}}")
        elif isinstance(s, SCall):
            args = ", ".join(print_expr(a) for a in s.args)
            lines.append(f"{ind}call {s.callee}({args});")
        elif isinstance(s, SLoop):
            lines.append(f"{ind}loop {{")
            inner = ind + "  "
            for inv in s.invariants:
                lines.append(
                    f"{inner}invariant {_attr(proc, inv.entry_label)} "
                    f"{_attr(proc, inv.maint_label)} {print_expr(inv.expr)};"
                )
            if s.head:
                lines.append(f"{inner}head {{")
                _print_stmts(proc, s.head, lines, inner + "  ")
                lines.append(f"{inner}}}")
            lines.append(f"{inner}exit {print_expr(s.exit)};")
            if s.variant is not None and s.variant_labels is not None:
                lines.append(
                    f"{inner}variant {_attr(proc, s.variant_labels[0])} "
                    f"{_attr(proc, s.variant_labels[1])} {print_expr(s.variant)};"
                )
            elif s.missing_variant_label is not None:
                lines.append(f"{inner}variant {_attr(proc, s.missing_variant_label)} none;")
            if s.targets:
                lines.append(f"{inner}targets {', '.join(s.targets)};")
            for fa in s.frame_assumes:
                lines.append(f"{inner}frame {print_expr(fa)};")
            lines.append(f"{inner}body {{")
            _print_stmts(proc, s.body, lines, inner + "  ")
            lines.append(f"{inner}}}")
            lines.append(f"{ind}}}")
        else:
            raise TypeError(f"unprintable statement {type(s).__name__}")


def print_program(program: IvlProgram) -> str:
    lines: list[str] = []
    if program.theories:
        lines.append("theories " + ", ".join(program.theories) + ";")
    for c in program.consts:
        group = f" group {c.distinct_group}" if c.distinct_group else ""
        lines.append(f"const {c.name}: {c.sort}{group};")
    for f in program.funs:
        args = " ".join(f.arg_sorts)
        lines.append(f"function {f.name}({args}): {f.sort};")
    for a in program.axioms:
        lines.append(f"axiom {print_expr(a)};")
    out = "\n".join(lines)
    if lines:
        out += "\n"
    for proc in program.procedures:
        out += "\n" + print_procedure(proc)
    return out
