"""Semantic exception hierarchy.

Public functions raise these instead of bare ValueError/RuntimeError so that
callers (and the CLI exit-code mapping) can discriminate failure modes.
"""


class QcwassError(Exception):
    """Base class for all library errors."""


class DomainError(QcwassError, ValueError):
    """An argument violates its mathematical domain (range, ordering, sign)."""


class QuadratureError(QcwassError, ArithmeticError):
    """Adaptive quadrature exhausted its subdivision budget before reaching
    the requested tolerance."""


class EmptyClassError(QcwassError, ValueError):
    """A quantile-constraint collection cannot be satisfied by any probability
    measure (non-strictly-increasing levels or target values).

    Attributes
    ----------
    index : int
        Position (in level-sorted order) of the first offending pair.
    pair : tuple
        The two conflicting ``(alpha, b)`` constraints.
    """

    def __init__(self, message, index=None, pair=None):
        super().__init__(message)
        self.index = index
        self.pair = pair


class InfeasibleError(QcwassError):
    """A segment fit has no feasible monotone polynomial (decreasing endpoint
    values)."""


class SolverError(QcwassError, RuntimeError):
    """The embedded conic solver failed to converge, or a fitted curve failed
    its post-solve validation."""


class ConfigError(QcwassError, ValueError):
    """A study configuration is malformed.

    Attributes
    ----------
    field : str | None
        Dotted path of the offending field, e.g. ``schemes[1].dilatation.eta``.
    """

    def __init__(self, message, field=None):
        if field:
            message = f"{field}: {message}"
        super().__init__(message)
        self.field = field


class ShapeError(QcwassError, ValueError):
    """Array shapes or lengths do not match the operation contract."""


class LinearAlgebraError(QcwassError, ArithmeticError):
    """A required matrix factorization failed (e.g. a correlation matrix that
    is not positive definite)."""
