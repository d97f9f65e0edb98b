"""Exception hierarchy shared by all cantorlab modules.

Two families matter to callers:

* configuration / input problems (bad grammar, out-of-range arguments) --
  these subclass ValueError so ordinary ``except ValueError`` works, and the
  CLI maps them to exit code 1;
* computation failures (a search or iteration that did not finish) -- these
  subclass ComputationError and the CLI maps them to exit code 2.
"""

from __future__ import annotations


class CantorError(Exception):
    """Base class for every error raised deliberately by this package."""


class ParseError(CantorError, ValueError):
    """Positioned syntax error in one of the text mini-grammars."""

    def __init__(self, text: str, position: int, expected: str):
        self.text = text
        self.position = position
        self.expected = expected
        super().__init__(
            "syntax error at offset %d: expected %s (in %r)"
            % (position, expected, text)
        )


class DomainError(CantorError, ValueError):
    """An argument lies outside the mathematical domain of the operation."""


class RangeError(CantorError, ValueError):
    """An index or order parameter is out of the supported range."""


class OverflowPolicyError(CantorError):
    """A value exceeded the configured digit-size cap and full
    materialization was requested anyway."""


class DegenerateChain(CantorError, ValueError):
    """Markov parameters that would produce a reducible / deterministic
    chain (b = 2 with n = 1)."""


class ComputationError(CantorError):
    """Base class for failures of an otherwise well-posed computation."""


class NoConvergence(ComputationError):
    def __init__(self, max_iter: int, best_residual: float):
        self.max_iter = max_iter
        self.best_residual = best_residual
        super().__init__(
            "no convergence after %d iterations (best residual %.3e)"
            % (max_iter, best_residual)
        )


class SingularJacobian(ComputationError):
    def __init__(self, pivot: float, column: int):
        self.pivot = pivot
        self.column = column
        super().__init__(
            "singular Jacobian: pivot %.3e in column %d" % (pivot, column)
        )


class SearchExhausted(ComputationError):
    """A bounded search (schedule step) ran out before finding a witness."""

    def __init__(self, search_cap: int, reason: str, partial=None):
        self.search_cap = search_cap
        self.reason = reason
        self.partial = partial
        super().__init__("search exhausted (cap %d): %s" % (search_cap, reason))


class DegenerateDenominator(ComputationError):
    """A ratio was requested but the denominator's enclosure contains 0."""


class PrecisionError(ComputationError):
    """The digit representation cannot resolve the requested tolerance
    (e.g. an unresolved huge-digit marker inside an evaluation window)."""
