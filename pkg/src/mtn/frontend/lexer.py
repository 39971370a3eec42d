"""Tokenizer for the C subset."""
from __future__ import annotations

from typing import NamedTuple

KEYWORDS = frozenset({
    "int", "char", "float", "double", "void",
    "if", "else", "while", "do", "for", "switch", "case", "default",
    "return", "break", "continue",
})

# Multi-character operators first so maximal munch wins.
_OPERATORS = [
    "<<", ">>", "<=", ">=", "==", "!=", "&&", "||", "++", "--",
    "+=", "-=", "*=", "/=",
    "=", "+", "-", "*", "/", "%", "<", ">", "!", "&", "|", "^",
]
_PUNCT = "(){}[];,:"

_IDENT_START = frozenset("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_")
_DIGITS = frozenset("0123456789")
_IDENT_CONT = _IDENT_START | _DIGITS


class Token(NamedTuple):
    kind: str  # kw | ident | int | float | char | string | op | punct
    text: str
    line: int
    column: int


class LexError(Exception):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} at {line}:{column}")
        self.line = line
        self.column = column


class UnknownCharacter(LexError):
    def __init__(self, ch: str, line: int, column: int):
        super().__init__(f"unknown character {ch!r}", line, column)
        self.character = ch


class UnterminatedLiteral(LexError):
    def __init__(self, what: str, line: int, column: int):
        super().__init__(f"unterminated {what}", line, column)


def tokenize(source: str) -> list[Token]:
    """Split source text into tokens; whitespace and comments are dropped.

    Positions are 1-based (line, column) of each token's first character.
    """
    tokens: list[Token] = []
    i = 0
    n = len(source)
    line = 1
    col = 1

    def advance(k: int = 1) -> None:
        nonlocal i, line, col
        for _ in range(k):
            if i < n and source[i] == "\n":
                line += 1
                col = 1
            else:
                col += 1
            i += 1

    while i < n:
        ch = source[i]
        if ch in " \t\r\n":
            advance()
            continue
        if ch == "/" and i + 1 < n and source[i + 1] == "/":
            while i < n and source[i] != "\n":
                advance()
            continue
        if ch == "/" and i + 1 < n and source[i + 1] == "*":
            start_line, start_col = line, col
            advance(2)
            while True:
                if i >= n:
                    raise UnterminatedLiteral("comment", start_line, start_col)
                if source[i] == "*" and i + 1 < n and source[i + 1] == "/":
                    advance(2)
                    break
                advance()
            continue

        start_line, start_col = line, col

        if ch in _IDENT_START:
            j = i
            while j < n and source[j] in _IDENT_CONT:
                j += 1
            text = source[i:j]
            kind = "kw" if text in KEYWORDS else "ident"
            tokens.append(Token(kind, text, start_line, start_col))
            advance(j - i)
            continue

        if ch in _DIGITS:
            j = i
            while j < n and source[j] in _DIGITS:
                j += 1
            is_float = False
            if j < n and source[j] == "." and j + 1 < n and source[j + 1] in _DIGITS:
                is_float = True
                j += 1
                while j < n and source[j] in _DIGITS:
                    j += 1
            if j < n and source[j] in "eE":
                k = j + 1
                if k < n and source[k] in "+-":
                    k += 1
                if k < n and source[k] in _DIGITS:
                    is_float = True
                    j = k
                    while j < n and source[j] in _DIGITS:
                        j += 1
            text = source[i:j]
            tokens.append(Token("float" if is_float else "int", text,
                                start_line, start_col))
            advance(j - i)
            continue

        if ch == "'" or ch == '"':
            quote = ch
            what = "char literal" if quote == "'" else "string literal"
            j = i + 1
            while True:
                if j >= n or source[j] == "\n":
                    raise UnterminatedLiteral(what, start_line, start_col)
                if source[j] == "\\":
                    if j + 1 >= n:
                        raise UnterminatedLiteral(what, start_line, start_col)
                    j += 2
                    continue
                if source[j] == quote:
                    j += 1
                    break
                j += 1
            text = source[i:j]
            tokens.append(Token("char" if quote == "'" else "string", text,
                                start_line, start_col))
            advance(j - i)
            continue

        matched = False
        for op in _OPERATORS:
            if source.startswith(op, i):
                tokens.append(Token("op", op, start_line, start_col))
                advance(len(op))
                matched = True
                break
        if matched:
            continue

        if ch in _PUNCT:
            tokens.append(Token("punct", ch, start_line, start_col))
            advance()
            continue

        raise UnknownCharacter(ch, start_line, start_col)

    return tokens
