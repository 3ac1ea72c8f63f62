"""Exception hierarchy.

The CLI maps :class:`PreconditionError` (and subclasses) to exit code 2 and
:class:`ParseError` / usage problems to exit code 1.
"""


class CursekitError(Exception):
    """Base class for all package errors."""


class PreconditionError(CursekitError, ValueError):
    """A numerical precondition of a bound or backend is violated."""


class IntegrationError(CursekitError):
    """Adaptive quadrature ran out of subdivisions.

    Carries the best estimate and its residual error estimate so callers can
    decide whether the result is still usable.
    """

    def __init__(self, message, estimate, residual):
        super().__init__(f"{message} (estimate={estimate!r}, residual={residual!r})")
        self.estimate = estimate
        self.residual = residual


class NoDecomposablePartError(PreconditionError):
    """The worst-case function has no decomposable part (e.g. P2)."""


class BudgetExceededError(PreconditionError):
    """A combinatorial or box budget would be exceeded."""


class DivergenceError(PreconditionError):
    """A truncated integral does not settle when the cutoff is doubled."""


class ParseError(CursekitError):
    """Malformed point-set file; ``lineno`` is 1-based."""

    def __init__(self, message, lineno=None):
        where = f"line {lineno}: " if lineno is not None else ""
        super().__init__(where + message)
        self.lineno = lineno
