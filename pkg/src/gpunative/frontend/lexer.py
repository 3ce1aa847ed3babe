"""Tokenizer for the ``.gn`` DSL."""

from __future__ import annotations

import enum
from dataclasses import dataclass

INT64_MAX = 2**63 - 1

KEYWORDS = frozenset({"fn", "let", "if", "else", "while", "return", "int", "bool"})
BOOL_LITERALS = frozenset({"true", "false"})

# longest match first
OPERATORS = ("->", "<=", ">=", "==", "!=", "&&", "||", "+", "-", "*", "/", "<", ">", "=")
PUNCTUATION = ("(", ")", "{", "}", ",", ";", ":")


class TokenKind(enum.Enum):
    KEYWORD = "keyword"
    IDENT = "ident"
    INT = "int"
    BOOL = "bool"
    OP = "op"
    PUNCT = "punct"


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    text: str
    line: int = 1
    col: int = 1

    @property
    def value(self) -> int | bool:
        if self.kind is TokenKind.INT:
            return int(self.text)
        if self.kind is TokenKind.BOOL:
            return self.text == "true"
        raise ValueError(f"token {self.text!r} has no literal value")

    def same(self, other: Token) -> bool:
        """Compare kind and text, ignoring position."""
        return self.kind is other.kind and self.text == other.text

    def __repr__(self) -> str:
        return f"Token({self.kind.name}, {self.text!r}, {self.line}:{self.col})"


class CompileError(Exception):
    """Base class for every front/back-end diagnostic carrying a source position."""

    def __init__(self, message: str, line: int = 0, col: int = 0):
        super().__init__(message)
        self.message = message
        self.line = line
        self.col = col

    def __str__(self) -> str:
        return f"{self.line}:{self.col}: {self.message}"


class LexError(CompileError):
    pass


def lex(source: str) -> list[Token]:
    tokens: list[Token] = []
    i, line, col = 0, 1, 1
    n = len(source)
    while i < n:
        ch = source[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "#":
            while i < n and source[i] != "\n":
                i += 1
            continue
        start_col = col
        if ch.isascii() and (ch.isalpha() or ch == "_"):
            j = i + 1
            while j < n and source[j].isascii() and (source[j].isalnum() or source[j] == "_"):
                j += 1
            word = source[i:j]
            if word in KEYWORDS:
                kind = TokenKind.KEYWORD
            elif word in BOOL_LITERALS:
                kind = TokenKind.BOOL
            else:
                kind = TokenKind.IDENT
            tokens.append(Token(kind, word, line, start_col))
        elif ch.isascii() and ch.isdigit():
            j = i + 1
            while j < n and source[j].isascii() and source[j].isdigit():
                j += 1
            text = source[i:j]
            if int(text) > INT64_MAX:
                raise LexError(f"integer literal {text} does not fit in 64 bits", line, start_col)
            if j < n and source[j].isascii() and (source[j].isalpha() or source[j] == "_"):
                raise LexError(f"malformed number {source[i:j + 1]!r}", line, start_col)
            tokens.append(Token(TokenKind.INT, text, line, start_col))
        else:
            for op in OPERATORS:
                if source.startswith(op, i):
                    tokens.append(Token(TokenKind.OP, op, line, start_col))
                    j = i + len(op)
                    break
            else:
                if ch in PUNCTUATION:
                    tokens.append(Token(TokenKind.PUNCT, ch, line, start_col))
                    j = i + 1
                else:
                    raise LexError(f"unexpected character {ch!r}", line, start_col)
        col += j - i
        i = j
    return tokens


def render(tokens: list[Token]) -> str:
    """Print tokens back to source text, one space apart."""
    return " ".join(t.text for t in tokens)
