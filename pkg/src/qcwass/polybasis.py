"""Orthonormal shifted-Legendre basis on [0, 1].

The monomial basis is numerically hostile at the degrees used here (its Gram
matrix is the Hilbert matrix), so least-squares objectives are evaluated in
the orthonormal basis ``p_k(x) = sqrt(2k+1) * P_k(2x - 1)`` where ``P_k`` is
the Legendre polynomial. Conversions to and from monomial coefficients stay
available for the public (monomial) contracts.
"""
from __future__ import annotations

import math

import numpy as np
from numpy.polynomial import legendre as _leg

_B_CACHE = {}
_ANTIDERIV_CACHE = {}


def mono_to_orthonormal(d):
    """Matrix ``B`` with ``x^a = sum_k B[k, a] p_k(x)`` on [0, 1].

    Satisfies ``B.T @ B == moment_matrix(0, 1, d)`` (the Hilbert matrix), so
    a squared L2 norm of a polynomial equals the squared Euclidean norm of
    its orthonormal coefficient vector ``B @ s``.
    """
    if d not in _B_CACHE:
        B = np.zeros((d + 1, d + 1))
        for a in range(d + 1):
            # x^a with x = (u + 1)/2 expanded in u-monomials, then in P_k(u)
            mono_u = np.array([math.comb(a, k) for k in range(a + 1)],
                              dtype=float) / 2.0 ** a
            leg = _leg.poly2leg(mono_u)
            for k, ck in enumerate(leg):
                B[k, a] = ck / math.sqrt(2 * k + 1)
        B.setflags(write=False)
        _B_CACHE[d] = B
    return _B_CACHE[d]


def orthonormal_values(k, x):
    """Evaluate ``p_k`` at points ``x`` in [0, 1] (stable recurrence)."""
    e = np.zeros(k + 1)
    e[k] = math.sqrt(2 * k + 1)
    return _leg.legval(2.0 * np.asarray(x, dtype=float) - 1.0, e)


def orthonormal_antiderivative(k):
    """Return a callable ``Phi`` with ``Phi(x) = integral of p_k on [0, x]``."""
    if k not in _ANTIDERIV_CACHE:
        e = np.zeros(k + 1)
        e[k] = math.sqrt(2 * k + 1)
        ci = _leg.legint(e)                       # antiderivative in u = 2x - 1
        base = _leg.legval(-1.0, ci)

        def phi(x, ci=ci, base=base):
            u = 2.0 * np.asarray(x, dtype=float) - 1.0
            return 0.5 * (_leg.legval(u, ci) - base)

        _ANTIDERIV_CACHE[k] = phi
    return _ANTIDERIV_CACHE[k]
