"""Token stream definitions for the source language."""

from __future__ import annotations

from dataclasses import dataclass

from miniproof.diagnostics import Position

# Reserved words. `and then` / `or else` are two tokens each; the parser
# glues them back together.
KEYWORDS = frozenset(
    {
        "class",
        "inherit",
        "feature",
        "end",
        "note",
        "require",
        "ensure",
        "local",
        "do",
        "from",
        "until",
        "loop",
        "invariant",
        "variant",
        "check",
        "if",
        "then",
        "elseif",
        "else",
        "across",
        "as",
        "all",
        "some",
        "old",
        "create",
        "modify",
        "read",
        "and",
        "or",
        "not",
        "implies",
        "xor",
        "True",
        "False",
        "Void",
        "Current",
        "Result",
    }
)

# Multi-character symbols first so the lexer can match longest-first.
SYMBOLS = (
    "|..|",
    ":=",
    "<=",
    ">=",
    "/=",
    "//",
    "\\\\",
    "(",
    ")",
    "[",
    "]",
    ":",
    ";",
    ",",
    ".",
    "+",
    "-",
    "*",
    "=",
    "<",
    ">",
)


@dataclass(frozen=True)
class Token:
    """One lexeme.

    kind is "ident", "int", "string", "eof", a keyword, or a symbol
    (symbols and keywords are their own kind, e.g. kind ":=" or "loop").
    """

    kind: str
    text: str
    position: Position

    def is_keyword(self, word: str) -> bool:
        return self.kind == word and word in KEYWORDS

    def __str__(self) -> str:
        if self.kind in ("ident", "int", "string"):
            return f"{self.kind} '{self.text}'"
        return f"'{self.text}'"
