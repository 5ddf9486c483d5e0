"""Exact quantile-constrained 2-Wasserstein projection.

The closest measure to a base measure P (in 2-Wasserstein distance) among all
measures admitting each ``b_i`` as an ``alpha_i``-quantile has an explicit
gqf: it equals P's gqf outside a union of disjoint level intervals
``A_i = (c_i, d_i]`` and is clamped to the constant ``b_i`` on ``A_i``. Each
interval of positive length creates an atom of mass ``d_i - c_i`` at ``b_i``
and an adjacent value interval that receives no mass.

With ``beta_i = F_P(b_i)`` (right-continuous cdf) the interval bounds are::

    c_1 = min(beta_1, alpha_1)
    c_i = min(max(alpha_{i-1}, beta_i), alpha_i)        i = 2..K
    d_K = max(beta_K, alpha_K)
    d_j = max(min(beta_j, alpha_{j+1}), alpha_j)        j = 1..K-1

Degenerate intervals (``c_i = d_i``) occur when the constraint is already
satisfied by P; they carry no mass but are kept so the constraint remains
visible in reports.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .measures import Discrete, UnivariateMeasure, w2_distance
from .perturb import validate_class
from .quadrature import integrate, power_step_integral


@dataclass(frozen=True, eq=False)
class PiecewiseGqf(UnivariateMeasure):
    """Result of the exact projection: base measure with clamped level
    intervals.

    Behaves as a :class:`UnivariateMeasure`; the canonical left- and
    right-continuous quantile functions and the cdf are all available in
    closed form on top of the base measure's.
    """

    base: UnivariateMeasure
    levels: np.ndarray        # constraint levels alpha_i (sorted)
    targets: np.ndarray       # constraint values b_i (sorted)
    starts: np.ndarray        # c_i
    ends: np.ndarray          # d_i
    kind: str = field(default="piecewise-gqf", init=False, repr=False)

    def __post_init__(self):
        for name in ("levels", "targets", "starts", "ends"):
            arr = np.asarray(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        mask = self.ends > self.starts
        object.__setattr__(self, "_ndg_starts", self.starts[mask])
        object.__setattr__(self, "_ndg_ends", self.ends[mask])
        object.__setattr__(self, "_ndg_targets", self.targets[mask])

    # -- bookkeeping -------------------------------------------------------

    @property
    def atoms(self):
        """List of ``(value, mass)`` pairs for the constraint atoms with
        positive mass."""
        return [(float(b), float(d - c)) for b, c, d in
                zip(self._ndg_targets, self._ndg_starts, self._ndg_ends)]

    @property
    def is_identity(self):
        """True when every interval is degenerate, i.e. the projection left
        the base measure unchanged."""
        return self._ndg_starts.size == 0

    def zero_mass_intervals(self):
        """Open value intervals emptied by the projection.

        For a constraint pulled above the base quantile the emptied interval
        sits just below ``b_i``; below, just above. Adjacent constraint
        values truncate the interval. Only non-empty intervals are returned.
        """
        out = []
        K = self.levels.size
        for i in range(K):
            a_i, b_i = self.levels[i], self.targets[i]
            p_i = self.base.quantile_left(a_i)
            lo_nb = self.targets[i - 1] if i > 0 else -math.inf
            hi_nb = self.targets[i + 1] if i + 1 < K else math.inf
            if b_i > p_i:
                lo, hi = max(p_i, lo_nb), b_i
            elif b_i < p_i:
                lo, hi = b_i, min(hi_nb, p_i)
            else:
                continue
            if hi > lo:
                out.append((float(lo), float(hi)))
        return out

    # -- measure interface ---------------------------------------------------

    def support(self):
        return float(self.quantile_right(0.0)), float(self.quantile_left(1.0))

    def _interval_index_left(self, y):
        """Index i with y in (c_i, d_i], else -1 (non-degenerate only)."""
        if self._ndg_starts.size == 0:
            return np.full(np.shape(y), -1)
        j = np.searchsorted(self._ndg_ends, y, side="left")
        j = np.clip(j, 0, self._ndg_ends.size - 1)
        inside = (y > self._ndg_starts[j]) & (y <= self._ndg_ends[j])
        return np.where(inside, j, -1)

    def _interval_index_right(self, y):
        """Index i with y in [c_i, d_i), else -1 (non-degenerate only)."""
        if self._ndg_starts.size == 0:
            return np.full(np.shape(y), -1)
        j = np.searchsorted(self._ndg_ends, y, side="right")
        j = np.clip(j, 0, self._ndg_ends.size - 1)
        inside = (y >= self._ndg_starts[j]) & (y < self._ndg_ends[j])
        return np.where(inside, j, -1)

    def quantile_left(self, a):
        scalar = np.isscalar(a)
        a1 = np.atleast_1d(np.asarray(a, dtype=float))
        base_val = np.atleast_1d(self.base.quantile_left(a1))
        if self._ndg_targets.size == 0:
            out = base_val
        else:
            idx = self._interval_index_left(a1)
            out = np.where(idx >= 0, self._ndg_targets[np.maximum(idx, 0)],
                           base_val)
        return float(out[0]) if scalar else out

    def quantile_right(self, a):
        scalar = np.isscalar(a)
        a1 = np.atleast_1d(np.asarray(a, dtype=float))
        base_val = np.atleast_1d(self.base.quantile_right(a1))
        if self._ndg_targets.size == 0:
            out = base_val
        else:
            idx = self._interval_index_right(a1)
            out = np.where(idx >= 0, self._ndg_targets[np.maximum(idx, 0)],
                           base_val)
        return float(out[0]) if scalar else out

    def evaluate(self, a):
        """The projected gqf including degenerate pins.

        Identical to ``quantile_left`` except that a degenerate constraint
        (already satisfied by the base) still reports its target value at
        exactly its level, which keeps the constraint visible in exported
        tables.
        """
        scalar = np.isscalar(a)
        a1 = np.atleast_1d(np.asarray(a, dtype=float))
        out = np.atleast_1d(self.quantile_left(a1)).copy()
        deg = self.starts == self.ends
        for c, b in zip(self.starts[deg], self.targets[deg]):
            out[a1 == c] = b
        return float(out[0]) if scalar else out

    def cdf(self, t):
        scalar = np.isscalar(t)
        t1 = np.atleast_1d(np.asarray(t, dtype=float))
        ft = np.atleast_1d(self.base.cdf(t1)).astype(float)
        for c, d, b in zip(self._ndg_starts, self._ndg_ends, self._ndg_targets):
            ft -= np.clip(ft - c, 0.0, d - c)
            ft += np.where(t1 >= b, d - c, 0.0)
        ft = np.clip(ft, 0.0, 1.0)
        return float(ft[0]) if scalar else ft

    def gqf_breakpoints(self):
        return np.unique(np.concatenate([
            self.base.gqf_breakpoints(), self.starts, self.ends]))

    def step_gqf(self):
        base_step = self.base.step_gqf()
        if base_step is None:
            return None
        bb, bv = base_step
        breaks = np.unique(np.concatenate([bb, self._ndg_starts, self._ndg_ends]))
        lo = breaks[:-1]
        ib = np.clip(np.searchsorted(bb, lo, side="right") - 1, 0, bv.size - 1)
        vals = bv[ib]
        if self._ndg_targets.size:
            iv = self._interval_index_right(lo)
            vals = np.where(iv >= 0, self._ndg_targets[np.maximum(iv, 0)], vals)
        return breaks, vals

    def as_discrete(self):
        """Explicit finite discrete representation (requires a step-gqf
        base)."""
        step = self.step_gqf()
        if step is None:
            raise DomainError("base measure is not purely atomic")
        breaks, vals = step
        return Discrete(vals, np.diff(breaks))


def project_exact(p, constraints):
    """Project measure ``p`` onto the class defined by quantile constraints.

    Returns the unique 2-Wasserstein minimizer as a :class:`PiecewiseGqf`.
    ``constraints`` must form a satisfiable class (strictly increasing levels
    and values); they are validated and level-sorted here.
    """
    cons = validate_class(constraints)
    alphas = np.array([c.alpha for c in cons])
    targets = np.array([c.b for c in cons])
    K = alphas.size
    betas = np.atleast_1d(np.asarray(p.cdf(targets), dtype=float))

    starts = np.empty(K)
    ends = np.empty(K)
    starts[0] = min(betas[0], alphas[0])
    for i in range(1, K):
        starts[i] = min(max(alphas[i - 1], betas[i]), alphas[i])
    ends[K - 1] = max(betas[K - 1], alphas[K - 1])
    for j in range(K - 1):
        ends[j] = max(min(betas[j], alphas[j + 1]), alphas[j])
    return PiecewiseGqf(base=p, levels=alphas, targets=targets,
                        starts=starts, ends=ends)


def w2_cost(result, *, rel_tol=1e-10):
    """Transport cost of an exact projection.

    Integrates the squared gap between the base gqf and the clamped value on
    each positive-length interval; closed form for atomic bases, adaptive
    quadrature otherwise. Equals ``w2_distance(result.base, result)``.
    """
    base = result.base
    total = 0.0
    step = base.step_gqf()
    vstar = max(abs(v) for v in result.support())
    floor = 1e-12 * max(vstar, 1.0) ** 2
    for c, d, b in zip(result._ndg_starts, result._ndg_ends, result._ndg_targets):
        if step is not None:
            breaks, vals = step
            sq = power_step_integral(breaks, (vals - b) ** 2, c, d, 0)
        else:
            def gap_sq(x, b=b):
                g = base.quantile_right(x) - b
                return g * g
            pts = base.gqf_breakpoints()
            sq = integrate(gap_sq, float(c), float(d), rel_tol=rel_tol,
                           breakpoints=pts[(pts > c) & (pts < d)],
                           min_scale=floor,
                           noise_floor=8e-12 * max(vstar, 1.0))
        total += sq
    return math.sqrt(max(total, 0.0))


__all__ = ["PiecewiseGqf", "project_exact", "w2_cost", "w2_distance"]
