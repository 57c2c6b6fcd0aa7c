from __future__ import annotations

from collections.abc import Sequence
from typing import TYPE_CHECKING


if TYPE_CHECKING:
    from unfab.ir._diagnostics import Diagnostic
    from unfab.ir._nodes import SourceSpan


class UnfabError(Exception):
    """Base class for unfab specific errors."""

    pass


class ParseError(UnfabError, ValueError):
    """Exception for malformed program or circuit text.

    Args:
        message:
            A description of the problem.
        span:
            Location of the offending token, if known.

    """

    def __init__(self, message: str, span: SourceSpan | None = None) -> None:
        self.span = span
        if span is not None:
            message = "{}: {}".format(span, message)
        super().__init__(message)


class KindMismatchError(UnfabError, ValueError):
    """Exception for operands whose kind or count does not match the operation signature."""

    pass


class SynthesisError(UnfabError, RuntimeError):
    """Exception raised when a transformation pass finds its precondition violated.

    Well-formed, verified input never triggers it; the CLI reports it as an internal error.
    """

    pass


class FuelExhaustedError(UnfabError, RuntimeError):
    """Exception raised when inlining exceeds its call budget."""

    pass


class UnresolvedClassicalError(UnfabError, ValueError):
    """Exception raised when a classical value needed for unrolling is not a constant."""

    pass


class UnnewViolationError(UnfabError, RuntimeError):
    """Exception raised when a deallocated qubit is not in the asserted basis state."""

    pass


class BudgetExceededError(UnfabError, RuntimeError):
    """Exception raised when a simulation needs more qubits than configured."""

    pass


class VerificationError(UnfabError, ValueError):
    """Exception carrying the diagnostics of a failed check.

    Args:
        diagnostics:
            The diagnostics reported by the verifier.

    """

    def __init__(self, diagnostics: Sequence[Diagnostic]) -> None:
        self.diagnostics = list(diagnostics)
        lines = [d.render() for d in self.diagnostics]
        super().__init__("\n".join(lines) if lines else "verification failed")


class ForgetViolationError(UnfabError, RuntimeError):
    """Exception raised when a simulated ``forget`` would merge distinct basis vectors."""

    pass
