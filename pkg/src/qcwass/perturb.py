"""Quantile constraints and intensity-indexed perturbation schemes.

A constraint ``(alpha, b)`` asks the perturbed measure Q to admit ``b`` as an
alpha-quantile, i.e. ``quantile_left(alpha) <= b <= quantile_right(alpha)``.
A collection of constraints is satisfiable by some probability measure as
soon as its levels and values are both strictly increasing; ``validate_class``
enforces exactly that.

Two generators translate a standardized intensity ``theta`` on [-1, 1] into
concrete constraints:

* quantile shift  -- relocates one alpha-quantile inside a bracket
  ``[eta0, eta1]`` around its initial value;
* support dilatation -- rescales the support width by a factor between
  ``1/eta`` and ``eta`` while preserving the support midpoint, via
  constraints at levels 0 and 1.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, EmptyClassError


@dataclass(frozen=True, order=True)
class QuantileConstraint:
    """A target value ``b`` for the quantile of level ``alpha``."""

    alpha: float
    b: float

    def __post_init__(self):
        if not (np.isfinite(self.alpha) and 0.0 <= self.alpha <= 1.0):
            raise DomainError(f"constraint level must be in [0, 1], got {self.alpha}")
        if not np.isfinite(self.b):
            raise DomainError("constraint value must be finite")


def _check_theta(theta):
    if not (np.isfinite(theta) and -1.0 <= theta <= 1.0):
        raise DomainError(f"intensity must lie in [-1, 1], got {theta}")
    return float(theta)


def shift_target(p_alpha, eta0, eta1, theta):
    """Shifted quantile value at intensity ``theta``.

    Piecewise-affine, continuous and strictly increasing in ``theta``, with
    ``shift_target(.., -1) = eta0``, ``shift_target(.., 0) = p_alpha`` and
    ``shift_target(.., 1) = eta1``.
    """
    if not (eta0 < p_alpha < eta1):
        raise DomainError(
            f"shift bracket must satisfy eta0 < p_alpha < eta1, "
            f"got {eta0} < {p_alpha} < {eta1}")
    theta = _check_theta(theta)
    if theta < 0.0:
        return p_alpha * (1.0 + theta) - theta * eta0
    if theta == 0.0:
        return float(p_alpha)
    return p_alpha * (1.0 - theta) + theta * eta1


def dilatation_targets(omega0, omega1, eta, theta):
    """Support endpoints ``(b0, b1)`` after rescaling ``[omega0, omega1]``.

    The midpoint is preserved (``b0 + b1 = omega0 + omega1``) and the width
    ratio ``(b1 - b0) / (omega1 - omega0)`` moves monotonically from
    ``1/eta`` at intensity -1 through 1 at intensity 0 up to ``eta`` at
    intensity 1.
    """
    if not omega0 < omega1:
        raise DomainError(f"support requires omega0 < omega1, got [{omega0}, {omega1}]")
    if not (np.isfinite(eta) and eta > 1.0):
        raise DomainError(f"dilatation factor must exceed 1, got {eta}")
    theta = _check_theta(theta)
    if theta == 0.0:
        return float(omega0), float(omega1)
    if theta < 0.0:
        g = 1.0 / eta - 1.0
        b0 = 0.5 * (omega0 * (2.0 - theta * g) + theta * omega1 * g)
        b1 = 0.5 * (omega1 * (2.0 - theta * g) + theta * omega0 * g)
    else:
        g = eta - 1.0
        b0 = 0.5 * (omega0 * (2.0 + theta * g) - theta * omega1 * g)
        b1 = 0.5 * (omega1 * (2.0 + theta * g) - theta * omega0 * g)
    return b0, b1


def validate_class(constraints):
    """Sort constraints by level and verify they admit a probability measure.

    Exact duplicate ``(alpha, b)`` pairs are collapsed. Raises
    :class:`EmptyClassError` identifying the first violated adjacent pair
    when levels are not strictly increasing or values not strictly
    increasing.
    """
    items = sorted(set((float(c.alpha), float(c.b)) for c in constraints))
    if not items:
        raise EmptyClassError("constraint list is empty")
    out = [QuantileConstraint(a, b) for a, b in items]
    for i in range(len(out) - 1):
        lo, hi = out[i], out[i + 1]
        if hi.alpha <= lo.alpha:
            raise EmptyClassError(
                f"levels must be strictly increasing: "
                f"({lo.alpha}, {lo.b}) then ({hi.alpha}, {hi.b})",
                index=i, pair=(lo, hi))
        if hi.b <= lo.b:
            raise EmptyClassError(
                f"values must be strictly increasing: "
                f"({lo.alpha}, {lo.b}) then ({hi.alpha}, {hi.b})",
                index=i, pair=(lo, hi))
    return out


@dataclass(frozen=True)
class ShiftSpec:
    """Quantile-shift generator: relocate the level-``alpha`` quantile from
    ``p_alpha`` within ``(eta0, eta1)``."""

    alpha: float
    p_alpha: float
    eta0: float
    eta1: float

    def __post_init__(self):
        if not (0.0 <= self.alpha <= 1.0):
            raise DomainError("shift level must be in [0, 1]")
        if not (self.eta0 < self.p_alpha < self.eta1):
            raise DomainError("shift requires eta0 < p_alpha < eta1")

    def constraints(self, theta):
        return [QuantileConstraint(self.alpha,
                                   shift_target(self.p_alpha, self.eta0,
                                                self.eta1, theta))]


@dataclass(frozen=True)
class DilatationSpec:
    """Support-dilatation generator on ``[omega0, omega1]`` with factor
    ``eta``."""

    omega0: float
    omega1: float
    eta: float

    def __post_init__(self):
        if not self.omega0 < self.omega1:
            raise DomainError("dilatation requires omega0 < omega1")
        if not self.eta > 1.0:
            raise DomainError("dilatation requires eta > 1")

    def constraints(self, theta):
        b0, b1 = dilatation_targets(self.omega0, self.omega1, self.eta, theta)
        return [QuantileConstraint(0.0, b0), QuantileConstraint(1.0, b1)]


@dataclass(frozen=True)
class PerturbationScheme:
    """An intensity-driven constraint generator plus intensity-independent
    fixed constraints.

    ``generator`` is a :class:`ShiftSpec`, a :class:`DilatationSpec`, an
    explicit tuple of constraints (applied at every intensity), or ``None``.
    Fixed constraints typically pin tails or the median to the values of the
    unperturbed measure; they are frozen at scheme-build time.
    """

    generator: object = None
    fixed: tuple = field(default_factory=tuple)

    def materialize(self, theta):
        """Constraint list at intensity ``theta``, level-sorted and
        validated."""
        theta = _check_theta(theta)
        items = list(self.fixed)
        if isinstance(self.generator, (ShiftSpec, DilatationSpec)):
            items.extend(self.generator.constraints(theta))
        elif self.generator is not None:
            items.extend(self.generator)
        return validate_class(items)


def preserve_constraints(measure, alphas):
    """Constraints pinning ``measure``'s own quantiles at the given levels."""
    return tuple(QuantileConstraint(float(a), measure.quantile_left(float(a)))
                 for a in alphas)


def offset_constraints(measure, offsets):
    """Constraints moving ``measure``'s quantiles by additive deltas.

    ``offsets`` is an iterable of ``(alpha, delta)`` pairs.
    """
    return tuple(QuantileConstraint(float(a),
                                    measure.quantile_left(float(a)) + float(d))
                 for a, d in offsets)


def support_constraints(lower, upper):
    """Constraints pinning the support to ``[lower, upper]`` via levels 0
    and 1."""
    return (QuantileConstraint(0.0, float(lower)),
            QuantileConstraint(1.0, float(upper)))
