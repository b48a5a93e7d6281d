"""Source-language frontend: lexing, parsing, typechecking, annotations."""

from miniproof.frontend.lexer import tokenize
from miniproof.frontend.parser import parse_unit
from miniproof.frontend.typecheck import typecheck
from miniproof.frontend.annotations import resolve_annotations

__all__ = ["tokenize", "parse_unit", "typecheck", "resolve_annotations"]
