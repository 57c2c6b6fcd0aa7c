from __future__ import annotations

import dataclasses
import re

from unfab.exceptions import ParseError
from unfab.ir import SourceSpan


_IDENT = r"[A-Za-z_][A-Za-z0-9_]*['~]*"

_TOKEN_SPEC = [
    ("COMMENT", r"#[^\n]*"),
    ("NEWLINE", r"\n"),
    ("SKIP", r"[ \t\r]+"),
    ("ASSIGN", r":=(?:[pqm](?![A-Za-z0-9_]))?"),
    ("CVAR", r"\$" + _IDENT),
    ("GVAR", r"%" + _IDENT),
    ("NAME", _IDENT),
    ("INT", r"[0-9]+"),
    ("OP", r"==|!=|<=|>=|&&|[-+*/<>!]"),
    ("PUNCT", r"[{}\[\](),;:^@]"),
]

_MASTER = re.compile("|".join("(?P<{}>{})".format(name, regex) for name, regex in _TOKEN_SPEC))


@dataclasses.dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int

    def span(self, file: str) -> SourceSpan:
        return SourceSpan(file, self.line, self.col, self.line, self.col + len(self.text))

    def is_(self, text: str) -> bool:
        return self.kind in ("OP", "PUNCT", "NAME") and self.text == text


def tokenize(text: str, file: str = "<string>") -> list[Token]:
    """Split program text into tokens, keeping newlines and dropping comments.

    Raises:
        :exc:`~unfab.exceptions.ParseError`:
            On a character that starts no token.

    """
    tokens: list[Token] = []
    line = 1
    line_start = 0
    pos = 0
    while pos < len(text):
        match = _MASTER.match(text, pos)
        col = pos - line_start + 1
        if match is None:
            raise ParseError(
                "Unexpected character {!r}.".format(text[pos]),
                SourceSpan(file, line, col, line, col + 1),
            )
        kind = match.lastgroup
        assert kind is not None
        value = match.group()
        if kind == "NEWLINE":
            tokens.append(Token(kind, value, line, col))
            line += 1
            line_start = match.end()
        elif kind not in ("SKIP", "COMMENT"):
            tokens.append(Token(kind, value, line, col))
        pos = match.end()
    tokens.append(Token("EOF", "", line, pos - line_start + 1))
    return tokens
