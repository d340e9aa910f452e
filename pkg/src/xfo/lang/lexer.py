"""Tokenizer for .xfo source. Keywords are contextual: the lexer only emits
identifiers, strings, and punctuation. ``#`` starts a line comment."""

from __future__ import annotations

from dataclasses import dataclass

from ..diagnostics import ERROR, SYNTAX, Diagnostic, Span

IDENT = "IDENT"
STRING = "STRING"
LBRACE = "LBRACE"
RBRACE = "RBRACE"
LPAREN = "LPAREN"
RPAREN = "RPAREN"
COMMA = "COMMA"
COLON = "COLON"
EQUALS = "EQUALS"
QUESTION = "QUESTION"
DOT = "DOT"
EOF = "EOF"

_PUNCT = {
    "{": LBRACE,
    "}": RBRACE,
    "(": LPAREN,
    ")": RPAREN,
    ",": COMMA,
    ":": COLON,
    "=": EQUALS,
    "?": QUESTION,
    ".": DOT,
}

_ESCAPES = {'"': '"', "\\": "\\", "n": "\n", "t": "\t"}


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    span: Span


def _ident_start(ch: str) -> bool:
    return ch.isascii() and (ch.isalpha() or ch == "_")


def _ident_part(ch: str) -> bool:
    return ch.isascii() and (ch.isalnum() or ch in "_-")


def tokenize(source: str, file: str = "<input>") -> tuple[list[Token], list[Diagnostic]]:
    tokens: list[Token] = []
    diagnostics: list[Diagnostic] = []
    pos = 0
    line = 1
    col = 1
    n = len(source)

    def span(start_pos: int, start_line: int, start_col: int) -> Span:
        return Span(start_line, start_col, pos - start_pos, start_pos)

    while pos < n:
        ch = source[pos]
        if ch == "\n":
            pos += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            pos += 1
            col += 1
            continue
        if ch == "#":
            while pos < n and source[pos] != "\n":
                pos += 1
            continue
        start_pos, start_line, start_col = pos, line, col
        if ch in _PUNCT:
            pos += 1
            col += 1
            tokens.append(Token(_PUNCT[ch], ch, span(start_pos, start_line, start_col)))
            continue
        if _ident_start(ch):
            while pos < n and _ident_part(source[pos]):
                pos += 1
                col += 1
            text = source[start_pos:pos]
            tokens.append(Token(IDENT, text, span(start_pos, start_line, start_col)))
            continue
        if ch == '"':
            pos += 1
            col += 1
            value = []
            closed = False
            while pos < n:
                ch = source[pos]
                if ch == "\n":
                    break
                pos += 1
                col += 1
                if ch == '"':
                    closed = True
                    break
                if ch == "\\" and pos < n:
                    escape = source[pos]
                    pos += 1
                    col += 1
                    value.append(_ESCAPES.get(escape, escape))
                else:
                    value.append(ch)
            if not closed:
                diagnostics.append(
                    Diagnostic(
                        ERROR, SYNTAX, "unterminated string literal", file,
                        span(start_pos, start_line, start_col),
                    )
                )
            tokens.append(
                Token(STRING, "".join(value), span(start_pos, start_line, start_col))
            )
            continue
        pos += 1
        col += 1
        diagnostics.append(
            Diagnostic(
                ERROR, SYNTAX, f"unexpected character {ch!r}", file,
                span(start_pos, start_line, start_col),
            )
        )

    tokens.append(Token(EOF, "", Span(line, col, 0, pos)))
    return tokens, diagnostics
