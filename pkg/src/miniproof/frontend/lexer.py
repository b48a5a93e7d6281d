"""Hand-rolled lexer.

Longest-match symbols, `--` line comments, decimal integer literals and
double-quoted strings (strings only appear as note values). Identifiers
are case-sensitive; capitalized reserved words (True, Void, Current,
Result) follow Eiffel convention.
"""

from __future__ import annotations

from miniproof.diagnostics import InputError, Position, error
from miniproof.frontend.tokens import KEYWORDS, SYMBOLS, Token


def tokenize(text: str, path: str = "<input>") -> list[Token]:
    """Lex `text` into tokens ending with one "eof" token.

    Raises InputError on characters that start no token and on unterminated
    strings.
    """
    tokens: list[Token] = []
    line = 1
    col = 1
    i = 0
    n = len(text)

    def pos() -> Position:
        return Position(line, col, path)

    while i < n:
        c = text[i]
        if c == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if text.startswith("--", i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        if c.isdigit():
            start = i
            startpos = pos()
            while i < n and text[i].isdigit():
                i += 1
            lexeme = text[start:i]
            col += len(lexeme)
            tokens.append(Token("int", lexeme, startpos))
            continue
        if c.isalpha() or c == "_":
            start = i
            startpos = pos()
            while i < n and (text[i].isalnum() or text[i] == "_"):
                i += 1
            lexeme = text[start:i]
            col += len(lexeme)
            kind = lexeme if lexeme in KEYWORDS else "ident"
            tokens.append(Token(kind, lexeme, startpos))
            continue
        if c == '"':
            startpos = pos()
            j = i + 1
            while j < n and text[j] not in ('"', "\n"):
                j += 1
            if j >= n or text[j] != '"':
                raise InputError(error("unterminated string literal", startpos))
            lexeme = text[i + 1 : j]
            col += j + 1 - i
            i = j + 1
            tokens.append(Token("string", lexeme, startpos))
            continue
        for sym in SYMBOLS:
            if text.startswith(sym, i):
                tokens.append(Token(sym, sym, pos()))
                i += len(sym)
                col += len(sym)
                break
        else:
            raise InputError(error(f"unexpected character {c!r}", pos()))
    tokens.append(Token("eof", "", pos()))
    return tokens
