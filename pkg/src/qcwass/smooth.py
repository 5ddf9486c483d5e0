"""Smooth quantile-constrained projection: continuous, non-decreasing
piecewise-polynomial gqfs.

The exact projection leaves jumps (value intervals with no mass). When a
continuous perturbed quantile function is required, the projection is instead
restricted to piecewise polynomials on the knot grid given by the constraint
levels: on each segment ``[a_i, a_{i+1}]`` the fit minimizes the squared L2
distance to the base gqf subject to endpoint interpolation
``G(a_i) = b_i, G(a_{i+1}) = b_{i+1}`` and a nonnegative derivative on the
whole segment (certified through PSD Gram matrices, not a grid heuristic).
Segments are independent convex programs and solve in parallel.

Support bounds must be part of the constraints (levels 0 and 1), otherwise a
polynomial gqf cannot exist; :func:`fit_smooth` enforces this.

Numerical notes: target values are affinely pre-scaled to [-1, 1] before
solving and unscaled afterwards; each segment is solved in its normalized
coordinate and converted back to global monomial coefficients at the end.
For very narrow segments combined with high degrees the global monomial
representation itself approaches double-precision limits; the post-fit
validation raises :class:`SolverError` rather than returning a curve that
violates its advertised tolerances.
"""
from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import ConfigError, DomainError, SolverError
from .measures import UnivariateMeasure
from .perturb import validate_class
from .polybasis import orthonormal_antiderivative, orthonormal_values
from .quadrature import integrate, power_step_integral
from .solver import SolveInfo, solve_monotone_coeffs

CONTINUITY_TOL = 1e-7
INTERPOLATION_TOL = 1e-6
MONOTONICITY_TOL = -1e-8
_DERIVATIVE_GRID = 10_000


def moment_matrix(t0, t1, d):
    """Moment matrix of the Lebesgue measure on ``[t0, t1]``:
    ``M[i, j] = (t1^(i+j-1) - t0^(i+j-1)) / (i+j-1)`` for 1-based i, j.

    Symmetric positive definite (a Gram matrix of the monomials); note that
    for narrow, offset intervals at high degree its floating-point Cholesky
    factorization can fail even though the matrix is PD in exact arithmetic.
    """
    if not (0.0 <= t0 < t1 <= 1.0):
        raise DomainError(f"need 0 <= t0 < t1 <= 1, got [{t0}, {t1}]")
    if d < 1:
        raise DomainError("degree must be >= 1")
    e = np.arange(1, d + 2)
    ee = e[:, None] + e[None, :] - 1
    return (t1 ** ee.astype(float) - t0 ** ee.astype(float)) / ee


def moment_vector(p, t0, t1, d):
    """Moments ``r[i] = integral of x^i * gqf_right(x) over [t0, t1]`` for
    ``i = 0 .. d``.

    Closed form (cell-by-cell antiderivative over the level grid) when the
    gqf is a step function; adaptive Gauss-Legendre otherwise.
    """
    if not (0.0 <= t0 < t1 <= 1.0):
        raise DomainError(f"need 0 <= t0 < t1 <= 1, got [{t0}, {t1}]")
    if d < 0:
        raise DomainError("degree must be >= 0")
    step = p.step_gqf()
    if step is not None:
        breaks, values = step
        return np.array([power_step_integral(breaks, values, t0, t1, i)
                         for i in range(d + 1)])
    pts = p.gqf_breakpoints()
    pts = pts[(pts > t0) & (pts < t1)]
    lo, hi = p.support()
    scale = (t1 - t0) * (1.0 + max(abs(lo), abs(hi)))
    out = np.empty(d + 1)
    for i in range(d + 1):
        out[i] = integrate(lambda x, i=i: x ** i * p.quantile_right(x),
                           t0, t1, breakpoints=pts, min_scale=scale,
                           noise_floor=4e-12 * (1.0 + max(abs(lo), abs(hi))))
    return out


def _local_legendre_moments(p, t0, t1, d, center, halfwidth):
    """Moments of the scaled local target ``(gqf(t0 + w u) - center)/halfwidth``
    against the orthonormal shifted-Legendre basis on u in [0, 1]."""
    w = t1 - t0
    step = p.step_gqf()
    out = np.empty(d + 1)
    if step is not None:
        breaks, values = step
        ub = np.clip((breaks - t0) / w, 0.0, 1.0)
        scaled = (values - center) / halfwidth
        for k in range(d + 1):
            phi = orthonormal_antiderivative(k)
            out[k] = float(np.dot(scaled, phi(ub[1:]) - phi(ub[:-1])))
        return out
    pts = p.gqf_breakpoints()
    pts = np.clip((pts[(pts > t0) & (pts < t1)] - t0) / w, 0.0, 1.0)

    def target(u):
        return (p.quantile_right(t0 + w * u) - center) / halfwidth

    for k in range(d + 1):
        out[k] = integrate(lambda u, k=k: orthonormal_values(k, u) * target(u),
                           0.0, 1.0, breakpoints=pts, min_scale=1.0,
                           noise_floor=5e-11)
    return out


def _local_to_global(coeffs, t0, t1):
    """Coefficients of ``S((x - t0)/(t1 - t0))`` in the monomial basis of x."""
    d = coeffs.size - 1
    w = t1 - t0
    out = np.zeros(d + 1)
    for m in range(d + 1):
        cm = coeffs[m] / w ** m
        for j in range(m + 1):
            out[j] += cm * math.comb(m, j) * (-t0) ** (m - j)
    return out


class SegmentProblem:
    """One segment of the piecewise fit: interval, endpoint values, degree,
    and the moment data of the base gqf on the interval.

    ``M``/``r`` follow the moment contracts of :func:`moment_matrix` and
    :func:`moment_vector`; pass ``measure`` to fill ``r``, or leave both
    unset for a metadata-only problem (the segment solver recomputes its
    own normalized moments either way).
    """

    def __init__(self, t0, t1, z0, z1, degree, measure=None, with_moments=True):
        from .errors import InfeasibleError
        if not (0.0 <= t0 < t1 <= 1.0):
            raise DomainError(f"need 0 <= t0 < t1 <= 1, got [{t0}, {t1}]")
        if degree < 1:
            raise DomainError("degree must be >= 1")
        if z0 > z1:
            raise InfeasibleError(
                f"endpoint values must be non-decreasing, got {z0} > {z1}")
        self.t0 = float(t0)
        self.t1 = float(t1)
        self.z0 = float(z0)
        self.z1 = float(z1)
        self.degree = int(degree)
        self.M = moment_matrix(t0, t1, degree) if with_moments else None
        self.r = (moment_vector(measure, t0, t1, degree)
                  if with_moments and measure is not None else None)
        # PD sanity on the normalized-coordinate Gram (numerically robust
        # equivalent of the positivity of M)
        np.linalg.cholesky(moment_matrix(0.0, 1.0, degree))


def _solve_segment(prob, p, center, halfwidth, *, gap_tol=1e-10):
    """Solve one segment; returns coefficients in the segment's normalized
    coordinate (original value units) plus SolveInfo."""
    d = prob.degree
    z0s = (prob.z0 - center) / halfwidth
    z1s = (prob.z1 - center) / halfwidth
    if z1s > z0s:
        lm = _local_legendre_moments(p, prob.t0, prob.t1, d, center, halfwidth)
    else:
        lm = np.zeros(d + 1)  # constant segment; moments unused
    s_local, info = solve_monotone_coeffs(d, z0s, z1s, lm, gap_tol=gap_tol)
    s_local = halfwidth * s_local
    s_local[0] += center
    return s_local, info


def fit_segment(prob: SegmentProblem, p: UnivariateMeasure, *, scaling=None,
                gap_tol=1e-10):
    """Fit one monotone interpolating polynomial segment.

    Minimizes the squared L2 distance of the polynomial to the base gqf on
    ``[t0, t1]`` subject to the endpoint equalities and a globally
    nonnegative derivative. Returns monomial coefficients (degree-ascending)
    in the original x coordinate and value units.

    The global monomial representation loses precision for very narrow
    segments at high degree (the conversion carries a ``(1/width)^degree``
    factor); :func:`fit_smooth` therefore keeps normalized per-segment
    coefficients instead.

    ``scaling`` optionally fixes the affine value pre-scaling as a
    ``(center, halfwidth)`` pair; by default it is derived from the endpoint
    values and the gqf range on the segment. Passing ``(0.0, 1.0)``
    effectively disables pre-scaling.
    """
    if scaling is None:
        lo = min(prob.z0, float(p.quantile_right(prob.t0)))
        hi = max(prob.z1, float(p.quantile_left(prob.t1)))
        scaling = (0.5 * (hi + lo), max(0.5 * (hi - lo), 1e-12))
    center, halfwidth = scaling
    coeffs, _ = _solve_segment(prob, p, center, halfwidth, gap_tol=gap_tol)
    return _local_to_global(coeffs, prob.t0, prob.t1)


@dataclass(frozen=True, eq=False)
class SmoothGqf(UnivariateMeasure):
    """Continuous non-decreasing piecewise-polynomial quantile function.

    ``knots`` spans [0, 1]; segment ``i`` covers ``[knots[i], knots[i+1]]``
    with monomial coefficients ``coefficients[i]`` (original value units) in
    the segment's normalized coordinate ``u = (y - knots[i]) /
    (knots[i+1] - knots[i])``. The normalized coordinate keeps evaluation
    stable for narrow segments, where global-coordinate monomials would
    amplify coefficient rounding by ``(1/width)^degree``. ``scaling``
    records the affine map used to bring values into [-1, 1] during
    fitting.
    """

    knots: np.ndarray
    coefficients: tuple
    degree: int
    scaling: tuple
    kind: str = field(default="smooth-gqf", init=False, repr=False)

    def __post_init__(self):
        knots = np.asarray(self.knots, dtype=float)
        knots.setflags(write=False)
        object.__setattr__(self, "knots", knots)
        coeffs = tuple(np.asarray(c, dtype=float) for c in self.coefficients)
        for c in coeffs:
            c.setflags(write=False)
        object.__setattr__(self, "coefficients", coeffs)

    # -- evaluation ---------------------------------------------------------

    def _segment_index(self, y):
        idx = np.searchsorted(self.knots, y, side="right") - 1
        return np.clip(idx, 0, len(self.coefficients) - 1)

    def evaluate(self, y):
        scalar = np.isscalar(y)
        y1 = np.atleast_1d(np.asarray(y, dtype=float))
        idx = self._segment_index(y1)
        out = np.empty(y1.shape)
        for i in np.unique(idx):
            m = idx == i
            w = self.knots[i + 1] - self.knots[i]
            out[m] = npoly.polyval((y1[m] - self.knots[i]) / w,
                                   self.coefficients[i])
        return float(out[0]) if scalar else out

    def derivative(self, y):
        scalar = np.isscalar(y)
        y1 = np.atleast_1d(np.asarray(y, dtype=float))
        idx = self._segment_index(y1)
        out = np.empty(y1.shape)
        for i in np.unique(idx):
            m = idx == i
            c = self.coefficients[i]
            w = self.knots[i + 1] - self.knots[i]
            out[m] = npoly.polyval((y1[m] - self.knots[i]) / w,
                                   c[1:] * np.arange(1, c.size)) / w
        return float(out[0]) if scalar else out

    def quantile_left(self, a):
        a = np.clip(np.asarray(a, dtype=float), 0.0, 1.0)
        return self.evaluate(a if a.ndim else float(a))

    quantile_right = quantile_left

    def support(self):
        return float(self.evaluate(0.0)), float(self.evaluate(1.0))

    def cdf(self, t):
        scalar = np.isscalar(t)
        t1 = np.atleast_1d(np.asarray(t, dtype=float))
        lo = np.zeros(t1.shape)
        hi = np.ones(t1.shape)
        for _ in range(50):
            mid = 0.5 * (lo + hi)
            le = self.evaluate(mid) <= t1
            lo = np.where(le, mid, lo)
            hi = np.where(le, hi, mid)
        g0, g1 = self.support()
        out = np.where(t1 < g0, 0.0, np.where(t1 >= g1, 1.0, lo))
        return float(out[0]) if scalar else out

    def gqf_breakpoints(self):
        return self.knots[1:-1].copy()

    # -- serialization -------------------------------------------------------

    def to_dict(self):
        return {
            "format": "qcwass-smooth-gqf",
            "version": 1,
            "degree": self.degree,
            "knots": [float(k) for k in self.knots],
            "coordinate": "segment-normalized",
            "coefficients": [[float(v) for v in c] for c in self.coefficients],
            "value_scaling": {"center": float(self.scaling[0]),
                              "halfwidth": float(self.scaling[1])},
        }

    def to_json(self, **kwargs):
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, data):
        if data.get("format") != "qcwass-smooth-gqf":
            raise ConfigError("not a serialized smooth gqf", field="format")
        sc = data["value_scaling"]
        return cls(knots=np.asarray(data["knots"], dtype=float),
                   coefficients=tuple(np.asarray(c, dtype=float)
                                      for c in data["coefficients"]),
                   degree=int(data["degree"]),
                   scaling=(float(sc["center"]), float(sc["halfwidth"])))

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def _default_threads(n_jobs):
    env = os.environ.get("QCWASS_THREADS")
    if env:
        try:
            return max(1, min(int(env), n_jobs))
        except ValueError:
            pass
    return max(1, min(os.cpu_count() or 1, n_jobs))


def fit_smooth(p, constraints, degree=9, *, threads=None, gap_tol=1e-10):
    """Fit a continuous monotone piecewise-polynomial gqf through the
    constraints.

    The constraint list must contain support-bound entries at levels 0 and 1
    (a polynomial quantile function needs finite endpoints). Each segment
    between consecutive constraint levels is fitted independently (in
    parallel across ``threads`` workers) and the pieces are validated for
    continuity, endpoint interpolation, and monotonicity before assembly.

    Returns a :class:`SmoothGqf`. Raises :class:`ConfigError` when the level
    grid is missing its endpoints or the degree is invalid, and
    :class:`SolverError` when a segment fails to converge or the assembled
    curve violates its tolerances.
    """
    if not isinstance(degree, (int, np.integer)) or degree < 1:
        raise ConfigError(f"degree must be a positive integer, got {degree}")
    cons = validate_class(constraints)
    levels = np.array([c.alpha for c in cons])
    targets = np.array([c.b for c in cons])
    if levels[0] != 0.0 or levels[-1] != 1.0:
        raise ConfigError(
            "smooth fitting requires support constraints at levels 0 and 1")

    center = 0.5 * (targets[-1] + targets[0])
    halfwidth = 0.5 * (targets[-1] - targets[0])
    n_seg = levels.size - 1
    probs = [SegmentProblem(levels[i], levels[i + 1], targets[i],
                            targets[i + 1], degree, with_moments=False)
             for i in range(n_seg)]

    def run(i):
        try:
            return _solve_segment(probs[i], p, center, halfwidth,
                                  gap_tol=gap_tol)
        except SolverError as exc:
            raise SolverError(
                f"segment {i} [{probs[i].t0}, {probs[i].t1}]: {exc}") from exc

    workers = threads if threads is not None else _default_threads(n_seg)
    if workers > 1 and n_seg > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, range(n_seg)))
    else:
        results = [run(i) for i in range(n_seg)]

    gqf = SmoothGqf(knots=levels, coefficients=tuple(c for c, _ in results),
                    degree=degree, scaling=(center, halfwidth))
    _validate_fit(gqf, cons)
    return gqf


def _validate_fit(gqf, cons):
    scale = max(1.0, abs(gqf.scaling[0]) + abs(gqf.scaling[1]))
    for c in cons:
        err = abs(gqf.evaluate(float(c.alpha)) - c.b)
        if err > INTERPOLATION_TOL * scale:
            raise SolverError(
                f"interpolation violated at level {c.alpha}: error {err:.2e}")
    knots = gqf.knots
    for i in range(len(gqf.coefficients) - 1):
        left_val = float(npoly.polyval(1.0, gqf.coefficients[i]))
        right_val = float(npoly.polyval(0.0, gqf.coefficients[i + 1]))
        gap = abs(left_val - right_val)
        if gap > CONTINUITY_TOL * scale:
            raise SolverError(
                f"continuity violated at knot {knots[i + 1]}: gap {gap:.2e}")
    for i in range(len(gqf.coefficients)):
        ys = np.linspace(knots[i], knots[i + 1], _DERIVATIVE_GRID)
        der = np.atleast_1d(gqf.derivative(ys))
        if der.min() < MONOTONICITY_TOL * scale:
            raise SolverError(
                f"monotonicity violated on segment {i}: "
                f"min derivative {der.min():.2e}")


__all__ = ["moment_matrix", "moment_vector", "SegmentProblem", "fit_segment",
           "fit_smooth", "SmoothGqf", "SolveInfo", "CONTINUITY_TOL",
           "INTERPOLATION_TOL", "MONOTONICITY_TOL"]
