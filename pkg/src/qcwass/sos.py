"""Sum-of-squares certificates for polynomial nonnegativity on an interval.

A univariate polynomial is nonnegative on ``[t0, t1]`` exactly when it can be
written with two SOS polynomials Z, W as

* even degree ``2m``:  ``Z(x) + (x - t0)(t1 - x) W(x)``,
  with deg Z <= 2m and deg W <= 2m - 2;
* odd degree ``2m+1``: ``(x - t0) Z(x) + (t1 - x) W(x)``,
  with deg Z, W <= 2m.

An SOS polynomial of degree ``2m`` is in turn exactly the set of quadratic
forms ``v(x)^T G v(x)`` over the monomial vector ``v(x) = (1, x, .., x^m)``
with ``G`` symmetric positive semidefinite; its coefficient of ``x^a`` is the
sum of the ``a``-th anti-diagonal of ``G``.

This module provides the linear algebra tying those pieces together for the
*derivative* of a degree-``d`` polynomial: the maps from the two Gram
matrices to the derivative's coefficients, in the scaled symmetric
vectorization (``svec``) so that Euclidean norms match Frobenius norms.
"""
from __future__ import annotations

import numpy as np

_SQ2 = np.sqrt(2.0)
_IDX_CACHE = {}


def _tri_indices(n):
    """Upper-triangle (i, j) index arrays in svec order for an n x n
    symmetric matrix."""
    if n not in _IDX_CACHE:
        ii, jj = [], []
        for j in range(n):
            for i in range(j + 1):
                ii.append(i)
                jj.append(j)
        _IDX_CACHE[n] = (np.array(ii), np.array(jj))
    return _IDX_CACHE[n]


def svec_size(n):
    return n * (n + 1) // 2


def svec(G):
    """Scaled upper-triangle vectorization: off-diagonal entries carry a
    sqrt(2) factor so that ``dot(svec(A), svec(B)) == trace(A @ B)``."""
    n = G.shape[0]
    ii, jj = _tri_indices(n)
    v = G[ii, jj].astype(float).copy()
    v[ii != jj] *= _SQ2
    return v

def smat(v, n):
    """Inverse of :func:`svec`."""
    ii, jj = _tri_indices(n)
    G = np.zeros((n, n))
    off = ii != jj
    vals = np.asarray(v, dtype=float).copy()
    vals[off] /= _SQ2
    G[ii, jj] = vals
    G[jj, ii] = vals
    return G


def gram_sizes(d):
    """Sizes ``(nz, nw)`` of the two Gram matrices certifying that the
    derivative of a degree-``d`` polynomial is nonnegative on an interval.

    ``nw`` is 0 when the second block is absent (degree 1).
    """
    if d < 1:
        raise ValueError("degree must be >= 1")
    if d % 2 == 1:
        nz = (d - 1) // 2 + 1
        nw = (d - 3) // 2 + 1 if d >= 3 else 0
    else:
        nz = (d - 2) // 2 + 1
        nw = nz
    return nz, nw


def gram_to_coeffs(n):
    """Matrix mapping ``svec(G)`` to the coefficient vector (degrees
    ``0 .. 2n-2``) of the SOS polynomial with Gram matrix G."""
    ii, jj = _tri_indices(n)
    V = np.zeros((2 * n - 1, svec_size(n)))
    for k, (i, j) in enumerate(zip(ii, jj)):
        V[i + j, k] += 1.0 if i == j else _SQ2
    return V


def derivative_coupling(d, t0, t1):
    """Maps from SOS coefficient vectors to the derivative's coefficients.

    For ``S`` of degree ``d`` with coefficients ``s``, the derivative has
    coefficient ``(a+1) * s[a+1]`` on ``x^a``. This returns ``(Az, Bw)`` with

        (a+1) * s[a+1] = (Az @ z + Bw @ w)[a],   a = 0 .. d-1,

    where ``z`` and ``w`` are the coefficient vectors of the two SOS factors
    in the interval certificate on ``[t0, t1]``. ``Bw`` has zero columns when
    the second block is absent (d == 1).
    """
    if d % 2 == 1:
        ncz, ncw = d, max(d - 2, 0)
        Az = np.zeros((d, ncz))
        Bw = np.zeros((d, ncw))
        for a in range(d):
            Az[a, a] = 1.0
            if ncw:
                if a <= d - 3:
                    Bw[a, a] += -t0 * t1
                if 0 <= a - 1 <= d - 3:
                    Bw[a, a - 1] += t0 + t1
                if 0 <= a - 2 <= d - 3:
                    Bw[a, a - 2] += -1.0
    else:
        ncz = ncw = d - 1
        Az = np.zeros((d, ncz))
        Bw = np.zeros((d, ncw))
        for a in range(d):
            if a >= 1:
                Az[a, a - 1] += 1.0
                Bw[a, a - 1] += -1.0
            if a <= d - 2:
                Az[a, a] += -t0
                Bw[a, a] += t1
    return Az, Bw


def gram_maps(d, t0, t1):
    """Combined linear map from the stacked ``(svec(Gz), svec(Gw))`` vector
    to the scaled derivative coefficients ``((a+1) s[a+1])_a``.

    Returns ``(J, nz, nw)`` where ``J`` has ``d`` rows.
    """
    nz, nw = gram_sizes(d)
    Az, Bw = derivative_coupling(d, t0, t1)
    cols = [Az @ gram_to_coeffs(nz)]
    if nw:
        cols.append(Bw @ gram_to_coeffs(nw))
    J = np.hstack(cols)
    return J, nz, nw
