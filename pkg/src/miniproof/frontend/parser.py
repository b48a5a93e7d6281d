"""Recursive-descent parser for the source language.

Shape of a class:

    note
      model: sequence, count
    class NAME inherit PARENT feature
      attr: TYPE
      ghost_attr: TYPE note status: ghost end
      routine (a: T; b: U): R
        note status: ghost
        require
          modify (Current)
          tag: expr
        local
          x: T
        do
          stmts
        ensure
          tag: expr
        end
    invariant
      tag: expr
    end

Loops are `from init invariant ... until exit loop body variant v end`;
conditionals are `if c then ... elseif c then ... else ... end`; the
bounded quantifier is `across LO |..| HI as i all/some expr end`.
Semicolons are optional separators everywhere statements or clauses are
stacked. Operator precedence follows Eiffel: `implies` is lowest, then
`or`/`or else`/`xor`, `and`/`and then`, comparisons, additive,
multiplicative, unary, `old`, and postfix `.`/`[]` highest.
"""

from __future__ import annotations

from typing import Optional, Union

from miniproof.diagnostics import InputError, Position, error
from miniproof.frontend import ast
from miniproof.frontend.lexer import tokenize
from miniproof.frontend.tokens import Token

# Tokens that may terminate a clause list or a statement list.
_BLOCK_ENDERS = frozenset(
    {
        "end",
        "else",
        "elseif",
        "ensure",
        "require",
        "local",
        "do",
        "invariant",
        "variant",
        "until",
        "loop",
        "feature",
        "class",
        "eof",
    }
)


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.i = 0

    # -- token plumbing ----------------------------------------------------

    def peek(self, offset: int = 0) -> Token:
        j = min(self.i + offset, len(self.tokens) - 1)
        return self.tokens[j]

    def next(self) -> Token:
        t = self.tokens[self.i]
        if t.kind != "eof":
            self.i += 1
        return t

    def at(self, kind: str) -> bool:
        return self.peek().kind == kind

    def accept(self, kind: str) -> Optional[Token]:
        if self.at(kind):
            return self.next()
        return None

    def expect(self, kind: str) -> Token:
        t = self.peek()
        if t.kind != kind:
            raise InputError(error(f"expected '{kind}', found {t}", t.position))
        return self.next()

    def skip_separators(self) -> None:
        while self.accept(";"):
            pass

    # -- units -------------------------------------------------------------

    def parse_program(self) -> list[ast.ClassDecl]:
        classes = []
        while not self.at("eof"):
            classes.append(self.parse_class())
        return classes

    def parse_class(self) -> ast.ClassDecl:
        notes = self.parse_notes() if self.at("note") else []
        start = self.expect("class")
        name = self.expect("ident").text
        parent = None
        if self.accept("inherit"):
            parent = self.expect("ident").text
        self.expect("feature")
        attributes: list[ast.AttributeDecl] = []
        routines: list[ast.RoutineDecl] = []
        while not self.at("invariant") and not self.at("end"):
            self.skip_separators()
            if self.at("invariant") or self.at("end"):
                break
            feature = self.parse_feature()
            if isinstance(feature, ast.AttributeDecl):
                attributes.append(feature)
            else:
                routines.append(feature)
        invariants: list[ast.Clause] = []
        if self.accept("invariant"):
            invariants = self.parse_clause_list()
        self.expect("end")
        return ast.ClassDecl(
            name=name,
            parent=parent,
            notes=notes,
            attributes=attributes,
            routines=routines,
            invariants=invariants,
            position=start.position,
        )

    # -- notes ---------------------------------------------------------------

    def parse_notes(self) -> list[ast.NoteEntry]:
        self.expect("note")
        entries: list[ast.NoteEntry] = []
        while self.at("ident") and self.peek(1).kind == ":":
            key = self.next()
            self.expect(":")
            values: list[Union[ast.Expr, str]] = []
            while True:
                if self.at("string"):
                    values.append(self.next().text)
                else:
                    values.append(self.parse_expr())
                if not self.accept(","):
                    break
            entries.append(ast.NoteEntry(key.text, values, key.position))
        return entries

    # -- features ------------------------------------------------------------

    def parse_feature(self) -> Union[ast.AttributeDecl, ast.RoutineDecl]:
        name_tok = self.expect("ident")
        if self.at("("):
            return self.parse_routine_tail(name_tok, self.parse_formals())
        if self.at(":"):
            self.next()
            ty = self.parse_type()
            if self.at("note"):
                notes = self.parse_notes()
                if self.at("end"):
                    self.next()
                    return ast.AttributeDecl(
                        name_tok.text, ty, notes, name_tok.position
                    )
                return self.parse_routine_tail(name_tok, [], ty, notes)
            if self.peek().kind in ("require", "local", "do", "ensure"):
                return self.parse_routine_tail(name_tok, [], ty)
            return ast.AttributeDecl(name_tok.text, ty, [], name_tok.position)
        if self.peek().kind in ("note", "require", "local", "do", "ensure"):
            return self.parse_routine_tail(name_tok, [])
        t = self.peek()
        raise InputError(
            error(f"expected a feature declaration, found {t}", t.position)
        )

    def parse_formals(self) -> list[ast.Formal]:
        self.expect("(")
        formals: list[ast.Formal] = []
        while not self.at(")"):
            names = [self.expect("ident")]
            while self.accept(","):
                names.append(self.expect("ident"))
            self.expect(":")
            ty = self.parse_type()
            for n in names:
                formals.append(ast.Formal(n.text, ty, n.position))
            if not self.accept(";"):
                break
        self.expect(")")
        return formals

    def parse_routine_tail(
        self,
        name_tok: Token,
        formals: list[ast.Formal],
        return_type: Optional[ast.Type] = None,
        notes: Optional[list[ast.NoteEntry]] = None,
    ) -> ast.RoutineDecl:
        if return_type is None and self.accept(":"):
            return_type = self.parse_type()
        if notes is None:
            notes = self.parse_notes() if self.at("note") else []
        require: list[Union[ast.Clause, ast.FrameClause]] = []
        if self.accept("require"):
            require = self.parse_require_list()
        locals_: list[ast.Local] = []
        if self.accept("local"):
            while self.at("ident"):
                names = [self.expect("ident")]
                while self.accept(","):
                    names.append(self.expect("ident"))
                self.expect(":")
                ty = self.parse_type()
                for n in names:
                    locals_.append(ast.Local(n.text, ty, n.position))
                self.skip_separators()
        body: Optional[list[ast.Stmt]] = None
        if self.accept("do"):
            body = self.parse_stmts()
        ensure: list[ast.Clause] = []
        if self.accept("ensure"):
            ensure = self.parse_clause_list()
        self.expect("end")
        return ast.RoutineDecl(
            name=name_tok.text,
            formals=formals,
            return_type=return_type,
            notes=notes,
            require=require,
            locals=locals_,
            body=body,
            ensure=ensure,
            position=name_tok.position,
        )

    # -- clauses ---------------------------------------------------------------

    def parse_require_list(self) -> list[Union[ast.Clause, ast.FrameClause]]:
        out: list[Union[ast.Clause, ast.FrameClause]] = []
        while True:
            self.skip_separators()
            if self.peek().kind in ("modify", "read"):
                kw = self.next()
                self.expect("(")
                exprs = [self.parse_expr()]
                while self.accept(","):
                    exprs.append(self.parse_expr())
                self.expect(")")
                out.append(ast.FrameClause(kw.kind, exprs, kw.position))
                continue
            c = self.try_parse_clause()
            if c is None:
                return out
            out.append(c)

    def parse_clause_list(self) -> list[ast.Clause]:
        out: list[ast.Clause] = []
        while True:
            self.skip_separators()
            c = self.try_parse_clause()
            if c is None:
                return out
            out.append(c)

    def try_parse_clause(self) -> Optional[ast.Clause]:
        t = self.peek()
        if t.kind in _BLOCK_ENDERS:
            return None
        tag = None
        if t.kind == "ident" and self.peek(1).kind == ":":
            tag = self.next().text
            self.expect(":")
        expr = self.parse_expr()
        return ast.Clause(tag, expr, t.position)

    # -- statements --------------------------------------------------------------

    def parse_stmts(self) -> list[ast.Stmt]:
        stmts: list[ast.Stmt] = []
        while True:
            self.skip_separators()
            if self.peek().kind in _BLOCK_ENDERS:
                return stmts
            stmts.append(self.parse_stmt())

    def parse_stmt(self) -> ast.Stmt:
        t = self.peek()
        if t.kind == "if":
            return self.parse_if()
        if t.kind == "from":
            return self.parse_loop()
        if t.kind == "check":
            self.next()
            clauses = self.parse_clause_list()
            self.expect("end")
            return ast.Check(t.position, clauses)
        if t.kind == "create":
            self.next()
            name = self.expect("ident")
            return ast.Create(t.position, name.text)
        # Assignment or call: both start with a postfix expression.
        lhs = self.parse_postfix()
        if self.accept(":="):
            value = self.parse_expr()
            return ast.Assign(t.position, lhs, value)
        if isinstance(lhs, ast.CallExpr):
            return ast.CallStmt(t.position, lhs)
        raise InputError(
            error("expected ':=' or a call after this expression", t.position)
        )

    def parse_if(self) -> ast.If:
        start = self.expect("if")
        branches = []
        cond = self.parse_expr()
        self.expect("then")
        branches.append(ast.IfBranch(cond, self.parse_stmts()))
        while self.accept("elseif"):
            cond = self.parse_expr()
            self.expect("then")
            branches.append(ast.IfBranch(cond, self.parse_stmts()))
        else_body: list[ast.Stmt] = []
        if self.accept("else"):
            else_body = self.parse_stmts()
        self.expect("end")
        return ast.If(start.position, branches, else_body)

    def parse_loop(self) -> ast.Loop:
        start = self.expect("from")
        init = self.parse_stmts()
        invariants: list[ast.Clause] = []
        if self.accept("invariant"):
            invariants = self.parse_clause_list()
        self.expect("until")
        exit_cond = self.parse_expr()
        self.expect("loop")
        body = self.parse_stmts()
        variant = None
        if self.accept("variant"):
            if self.at("ident") and self.peek(1).kind == ":":
                self.next()
                self.next()
            variant = self.parse_expr()
        self.expect("end")
        return ast.Loop(start.position, init, invariants, exit_cond, body, variant)

    # -- types ------------------------------------------------------------------

    def parse_type(self) -> ast.Type:
        name = self.expect("ident").text
        args: tuple[str, ...] = ()
        if self.accept("["):
            parts = [self.expect("ident").text]
            while self.accept(","):
                parts.append(self.expect("ident").text)
            self.expect("]")
            args = tuple(parts)
        return ast.Type(name, args)

    # -- expressions --------------------------------------------------------------

    def parse_expr(self) -> ast.Expr:
        return self.parse_implies()

    def parse_implies(self) -> ast.Expr:
        left = self.parse_or()
        if self.at("implies"):
            op = self.next()
            right = self.parse_implies()  # right-associative
            return ast.Binary("implies", left, right).at(op.position)
        return left

    def parse_or(self) -> ast.Expr:
        left = self.parse_and()
        while self.peek().kind in ("or", "xor"):
            op = self.next()
            kind = op.kind
            if kind == "or" and self.accept("else"):
                kind = "or else"
            right = self.parse_and()
            left = ast.Binary(kind, left, right).at(op.position)
        return left

    def parse_and(self) -> ast.Expr:
        left = self.parse_comparison()
        while self.at("and"):
            op = self.next()
            kind = "and"
            if self.accept("then"):
                kind = "and then"
            right = self.parse_comparison()
            left = ast.Binary(kind, left, right).at(op.position)
        return left

    def parse_comparison(self) -> ast.Expr:
        left = self.parse_additive()
        while self.peek().kind in ("=", "/=", "<", "<=", ">", ">="):
            op = self.next()
            right = self.parse_additive()
            left = ast.Binary(op.kind, left, right).at(op.position)
        return left

    def parse_additive(self) -> ast.Expr:
        left = self.parse_multiplicative()
        while self.peek().kind in ("+", "-"):
            op = self.next()
            right = self.parse_multiplicative()
            left = ast.Binary(op.kind, left, right).at(op.position)
        return left

    def parse_multiplicative(self) -> ast.Expr:
        left = self.parse_unary()
        while self.peek().kind in ("*", "//", "\\\\"):
            op = self.next()
            right = self.parse_unary()
            left = ast.Binary(op.kind, left, right).at(op.position)
        return left

    def parse_unary(self) -> ast.Expr:
        t = self.peek()
        if t.kind == "not":
            self.next()
            return ast.Unary("not", self.parse_unary()).at(t.position)
        if t.kind == "-":
            self.next()
            return ast.Unary("-", self.parse_unary()).at(t.position)
        if t.kind == "old":
            self.next()
            return ast.OldExpr(self.parse_unary()).at(t.position)
        return self.parse_postfix()

    def parse_postfix(self) -> ast.Expr:
        e = self.parse_primary()
        while True:
            if self.at("."):
                dot = self.next()
                name = self.expect("ident").text
                if self.at("("):
                    args = self.parse_args()
                    e = ast.CallExpr(e, name, args).at(dot.position)
                else:
                    e = ast.FieldAccess(e, name).at(dot.position)
            elif self.at("["):
                br = self.next()
                index = self.parse_expr()
                self.expect("]")
                e = ast.IndexExpr(e, index).at(br.position)
            else:
                return e

    def parse_args(self) -> list[ast.Expr]:
        self.expect("(")
        args = []
        while not self.at(")"):
            args.append(self.parse_expr())
            if not self.accept(","):
                break
        self.expect(")")
        return args

    def parse_primary(self) -> ast.Expr:
        t = self.peek()
        if t.kind == "int":
            self.next()
            return ast.IntLit(int(t.text)).at(t.position)
        if t.kind == "True":
            self.next()
            return ast.BoolLit(True).at(t.position)
        if t.kind == "False":
            self.next()
            return ast.BoolLit(False).at(t.position)
        if t.kind == "Void":
            self.next()
            return ast.VoidLit().at(t.position)
        if t.kind == "Current":
            self.next()
            return ast.CurrentExpr().at(t.position)
        if t.kind == "Result":
            self.next()
            return ast.ResultExpr().at(t.position)
        if t.kind == "(":
            self.next()
            e = self.parse_expr()
            self.expect(")")
            return e
        if t.kind == "across":
            return self.parse_across()
        if t.kind == "ident":
            self.next()
            if self.at("("):
                args = self.parse_args()
                return ast.CallExpr(None, t.text, args).at(t.position)
            return ast.Ident(t.text).at(t.position)
        raise InputError(error(f"expected an expression, found {t}", t.position))

    def parse_across(self) -> ast.Expr:
        start = self.expect("across")
        lower = self.parse_expr()
        self.expect("|..|")
        upper = self.parse_expr()
        self.expect("as")
        var = self.expect("ident").text
        quant_tok = self.peek()
        if quant_tok.kind not in ("all", "some"):
            raise InputError(
                error(f"expected 'all' or 'some', found {quant_tok}", quant_tok.position)
            )
        self.next()
        body = self.parse_expr()
        self.expect("end")
        return ast.AcrossExpr(lower, upper, var, quant_tok.kind, body).at(start.position)


def parse_unit(text: str, path: str = "<input>") -> list[ast.ClassDecl]:
    """Parse source text into class declarations.

    Raises InputError with a positioned diagnostic on malformed input.
    """
    return _Parser(tokenize(text, path)).parse_program()
