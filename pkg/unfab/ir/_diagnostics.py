from __future__ import annotations

import dataclasses

from unfab.ir._nodes import SourceSpan


@dataclasses.dataclass(frozen=True)
class Diagnostic:
    """A problem found by a check.

    Args:
        code:
            Stable identifier such as ``DoubleConsume`` or ``NotForgettable``.
        message:
            Human readable explanation.
        function:
            Name of the function the problem was found in.
        statement:
            Index of the offending statement in the body, :obj:`None` for signature problems.
        var:
            The offending variable, printed with its kind prefix.
        span:
            Source location of the statement, when it was parsed from text.

    """

    code: str
    message: str
    function: str = ""
    statement: int | None = None
    var: str | None = None
    span: SourceSpan | None = None

    def render(self) -> str:
        location = str(self.span) if self.span is not None else self.function or "<program>"
        return "{}: {}: {}".format(location, self.code, self.message)

    def to_record(self) -> str:
        """Format as one line of ``key=value`` pairs."""
        fields = [("code", self.code), ("function", self.function)]
        if self.statement is not None:
            fields.append(("statement", str(self.statement)))
        if self.var is not None:
            fields.append(("var", self.var))
        if self.span is not None:
            fields.append(("line", str(self.span.line)))
            fields.append(("col", str(self.span.col)))
        fields.append(("message", _quote(self.message)))
        return " ".join("{}={}".format(k, v) for k, v in fields)


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'
