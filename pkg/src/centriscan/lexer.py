"""Tokenizer for the supported Solidity subset.

Comments and whitespace are dropped; every token carries a span into the
original source so later stages can render evidence. Unknown characters and
unterminated strings produce diagnostics instead of exceptions, so lexing
always covers the full input.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .source import Diagnostic, ERROR, SourceFile, Span, WARNING

IDENT = "ident"
NUMBER = "number"
STRING = "string"
KEYWORD = "kw"
PUNCT = "punct"
EOF = "eof"

KEYWORDS = frozenset(
    {
        "contract", "interface", "library", "abstract",
        "function", "modifier", "constructor",
        "require", "revert", "if", "else", "for", "while", "return", "returns",
        "mapping", "struct", "enum", "event", "error", "using",
        "public", "external", "internal", "private",
        "view", "pure", "payable", "constant", "immutable",
        "virtual", "override", "memory", "storage", "calldata",
        "emit", "indexed", "anonymous",
        "msg", "block", "tx", "this", "super",
        "selfdestruct", "pragma", "import", "is",
        "true", "false", "new", "delete", "break", "continue",
        "assembly", "try", "catch",
    }
)

# Elementary type words double as keywords: uint/uintN, int/intN, bytes/bytesN,
# plus the fixed names below.
_TYPE_WORD = re.compile(r"^(u?int(\d+)?|bytes(\d+)?|address|bool|string|byte)$")

_PUNCT_2 = (
    "**", "<<", ">>", "<=", ">=", "==", "!=", "&&", "||",
    "+=", "-=", "*=", "/=", "%=", "|=", "&=", "^=", "++", "--", "=>",
)
_PUNCT_1 = "+-*/%=<>!&|^~()[]{};,.:?"

_IDENT_START = re.compile(r"[A-Za-z_$]")
_IDENT_BODY = re.compile(r"[A-Za-z0-9_$]")


def is_type_word(text: str) -> bool:
    return bool(_TYPE_WORD.match(text))


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    span: Span

    def is_kw(self, *words: str) -> bool:
        return self.kind == KEYWORD and self.text in words

    def is_punct(self, *texts: str) -> bool:
        return self.kind == PUNCT and self.text in texts


class _Cursor:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.line = 1
        self.col = 1

    def at_end(self) -> bool:
        return self.pos >= len(self.text)

    def peek(self, off: int = 0) -> str:
        i = self.pos + off
        return self.text[i] if i < len(self.text) else ""

    def advance(self, n: int = 1) -> None:
        for _ in range(n):
            if self.at_end():
                return
            if self.text[self.pos] == "\n":
                self.line += 1
                self.col = 1
            else:
                self.col += 1
            self.pos += 1

    def mark(self) -> tuple[int, int, int]:
        return self.pos, self.line, self.col

    def span_from(self, mark: tuple[int, int, int]) -> Span:
        return Span(mark[0], self.pos, mark[1], mark[2])


def lex(source: SourceFile) -> tuple[list[Token], list[Diagnostic]]:
    """Tokenize the full input; diagnostics carry spans for bad characters."""
    cur = _Cursor(source.content)
    tokens: list[Token] = []
    diags: list[Diagnostic] = []

    while not cur.at_end():
        c = cur.peek()
        if c in " \t\r\n":
            cur.advance()
            continue
        if c == "/" and cur.peek(1) == "/":
            while not cur.at_end() and cur.peek() != "\n":
                cur.advance()
            continue
        if c == "/" and cur.peek(1) == "*":
            m = cur.mark()
            cur.advance(2)
            while not cur.at_end() and not (cur.peek() == "*" and cur.peek(1) == "/"):
                cur.advance()
            if cur.at_end():
                diags.append(Diagnostic(WARNING, "unterminated-comment", "unterminated block comment", cur.span_from(m)))
            else:
                cur.advance(2)
            continue
        if c in "'\"":
            tok, diag = _lex_string(cur)
            tokens.append(tok)
            if diag:
                diags.append(diag)
            continue
        if c.isdigit():
            tokens.append(_lex_number(cur))
            continue
        if _IDENT_START.match(c):
            m = cur.mark()
            while not cur.at_end() and _IDENT_BODY.match(cur.peek()):
                cur.advance()
            text = source.content[m[0] : cur.pos]
            kind = KEYWORD if (text in KEYWORDS or is_type_word(text)) else IDENT
            tokens.append(Token(kind, text, cur.span_from(m)))
            continue
        two = c + cur.peek(1)
        if two in _PUNCT_2:
            m = cur.mark()
            cur.advance(2)
            tokens.append(Token(PUNCT, two, cur.span_from(m)))
            continue
        if c in _PUNCT_1:
            m = cur.mark()
            cur.advance()
            tokens.append(Token(PUNCT, c, cur.span_from(m)))
            continue
        m = cur.mark()
        cur.advance()
        diags.append(Diagnostic(ERROR, "invalid-character", f"invalid character {c!r}", cur.span_from(m)))

    eof_span = Span(cur.pos, cur.pos, cur.line, cur.col)
    tokens.append(Token(EOF, "", eof_span))
    return tokens, diags


def _lex_string(cur: _Cursor) -> tuple[Token, Diagnostic | None]:
    quote = cur.peek()
    m = cur.mark()
    cur.advance()
    chars: list[str] = []
    while not cur.at_end():
        c = cur.peek()
        if c == "\\":
            cur.advance()
            if not cur.at_end():
                chars.append(cur.peek())
                cur.advance()
            continue
        if c == quote:
            cur.advance()
            return Token(STRING, "".join(chars), cur.span_from(m)), None
        if c == "\n":
            break
        chars.append(c)
        cur.advance()
    span = cur.span_from(m)
    return Token(STRING, "".join(chars), span), Diagnostic(ERROR, "unterminated-string", "unterminated string literal", span)


def _lex_number(cur: _Cursor) -> Token:
    m = cur.mark()
    if cur.peek() == "0" and cur.peek(1) in "xX":
        cur.advance(2)
        while not cur.at_end() and (cur.peek() in "_" or cur.peek() in "0123456789abcdefABCDEF"):
            cur.advance()
    else:
        while not cur.at_end() and (cur.peek().isdigit() or cur.peek() == "_"):
            cur.advance()
        if cur.peek() == "." and cur.peek(1).isdigit():
            cur.advance()
            while not cur.at_end() and cur.peek().isdigit():
                cur.advance()
        if cur.peek() in "eE" and (cur.peek(1).isdigit() or (cur.peek(1) in "+-" and cur.peek(2).isdigit())):
            cur.advance()
            if cur.peek() in "+-":
                cur.advance()
            while not cur.at_end() and cur.peek().isdigit():
                cur.advance()
    text = cur.text[m[0] : cur.pos]
    return Token(NUMBER, text, cur.span_from(m))
