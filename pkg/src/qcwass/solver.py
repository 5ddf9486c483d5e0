"""Embedded dense conic solver for monotone-polynomial least squares.

Solves, on the normalized interval [0, 1],

    minimize    integral of (S(x) - g(x))^2 over [0, 1]
    subject to  S(0) = z0,  S(1) = z1,
                S'(x) >= 0 for all x in [0, 1],

where ``S`` is a polynomial of degree ``d`` and ``g`` the target function,
supplied through its moments against the orthonormal shifted-Legendre basis.
The derivative constraint is encoded exactly through two positive
semidefinite Gram matrices (:mod:`qcwass.sos`), making the feasible set a
linear image of a product of PSD cones; the polynomial coefficients are
affine in the Gram entries, so they are eliminated and the solve runs over
the Gram blocks alone.

Method: log-det barrier path following. Each barrier stage is centered with
Newton steps computed in factored least-squares form (a QR solve on the
stacked objective/barrier square roots), which avoids the squared
conditioning of normal equations; steps obey a fraction-to-boundary rule on
the PSD cones plus a backtracking test on the KKT residual. Problem sizes
are tiny (Gram blocks of side at most ``d/2 + 1``), so each step is a dense
solve of order at most ~45.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import lstsq as _lstsq

from .errors import InfeasibleError, SolverError
from .polybasis import mono_to_orthonormal
from .sos import gram_maps, smat, svec, svec_size


@dataclass(frozen=True)
class SolveInfo:
    """Diagnostics of one segment solve."""

    newton_iterations: int
    suboptimality_bound: float
    equality_residual: float
    min_gram_eigenvalue: float


def _chol(G):
    try:
        return np.linalg.cholesky(G)
    except np.linalg.LinAlgError:
        return None


def _congruence(Linv, n):
    """Matrix of ``svec(X) -> svec(Linv X Linv')``; its Gram is the Hessian
    of -log det at ``L L'``."""
    m = svec_size(n)
    K = np.empty((m, m))
    e = np.zeros(m)
    for k in range(m):
        e[k] = 1.0
        K[:, k] = svec(Linv @ smat(e, n) @ Linv.T)
        e[k] = 0.0
    return K


def solve_monotone_coeffs(d, z0, z1, legendre_moments, *, gap_tol=1e-10,
                          mu=30.0, max_newton=5000):
    """Fit the monotone degree-``d`` polynomial on [0, 1].

    Parameters
    ----------
    z0, z1 : float
        Required endpoint values, ``z0 <= z1``.
    legendre_moments : ndarray, shape (d+1,)
        Integrals of the target against the orthonormal shifted-Legendre
        polynomials on [0, 1].

    Returns
    -------
    (ndarray, SolveInfo)
        Monomial coefficients (length ``d + 1``) and solve diagnostics.
    """
    if z1 < z0:
        raise InfeasibleError(
            f"endpoint values must be non-decreasing, got {z0} > {z1}")
    if z1 == z0:
        s = np.zeros(d + 1)
        s[0] = z0
        return s, SolveInfo(0, 0.0, 0.0, 0.0)
    if d == 1:
        # the interpolating line is the only feasible polynomial
        return np.array([z0, z1 - z0]), SolveInfo(0, 0.0, 0.0, z1 - z0)

    J_raw, nz, nw = gram_maps(d, 0.0, 1.0)
    mz, mw = svec_size(nz), svec_size(nw)
    N = mz + mw
    J = J_raw / np.arange(1, d + 1, dtype=float)[:, None]   # sbreve = J y
    c = J.sum(axis=0)
    gamma = z1 - z0
    B = mono_to_orthonormal(d)
    F = B[:, 1:] @ J
    f0 = B[:, 0] * z0 - np.asarray(legendre_moments, dtype=float)
    blocks = [(0, mz, nz)] + ([(mz, mz + mw, nw)] if nw else [])

    # tangent basis of the single equality constraint
    Qc, _ = np.linalg.qr(c[:, None], mode="complete")
    Z = Qc[:, 1:]

    sq2 = np.sqrt(2.0)

    def state(yv, t):
        """Stacked LS factor, its RHS, gradient, and KKT residual norm."""
        rho = F @ yv + f0
        rows = [sq2 * F]
        rhs = [-sq2 * rho]
        g = 2.0 * (F.T @ rho)
        for lo, hi, n in blocks:
            L = _chol(smat(yv[lo:hi], n))
            if L is None:
                return None
            Linv = np.linalg.inv(L)
            K = _congruence(Linv, n) / np.sqrt(t)
            block = np.zeros((svec_size(n), N))
            block[:, lo:hi] = K
            rows.append(block)
            rhs.append(svec(np.eye(n)) / np.sqrt(t))
            g[lo:hi] -= svec(Linv.T @ Linv) / t
        gp = Z.T @ g
        rp = float(c @ yv) - gamma
        nres = np.sqrt(float(gp @ gp) + rp * rp)
        return np.vstack(rows), np.concatenate(rhs), nres, rp

    # strictly feasible start: scaled identity Gram blocks
    y = np.concatenate([svec(np.eye(nz)),
                        svec(np.eye(nw)) if nw else np.empty(0)])
    y *= gamma / float(c @ y)
    t = 1.0
    nu = nz + nw
    total = 0
    stalled_res = 0.0

    while True:
        inner_tol = max(1e-12, min(1e-6, 1e-4 / t))
        stalled = False
        for _ in range(60):
            st = state(y, t)
            A, b, nres, rp = st
            if nres < inner_tol:
                break
            dy0 = (-rp / float(c @ c)) * c
            v = _lstsq(A @ Z, b - A @ dy0, lapack_driver="gelsy")[0]
            dy = dy0 + Z @ v
            step = 1.0
            for lo, hi, n in blocks:
                G = smat(y[lo:hi], n)
                D = smat(dy[lo:hi], n)
                L = np.linalg.cholesky(G)
                Linv = np.linalg.inv(L)
                w0 = float(np.linalg.eigvalsh(Linv @ D @ Linv.T)[0])
                if w0 < 0.0:
                    step = min(step, -0.99 / w0)
            step = min(1.0, step)
            accepted = False
            for _ in range(40):
                st2 = state(y + step * dy, t)
                if st2 is not None and st2[2] <= (1.0 - 0.01 * step) * nres + 1e-16:
                    y = y + step * dy
                    accepted = True
                    break
                step *= 0.5
            total += 1
            if total > max_newton:
                raise SolverError(
                    f"Newton budget exhausted (degree {d}, residual {nres:.2e})")
            if not accepted:
                if nres < 1e-6:
                    stalled = True
                    stalled_res = nres
                    break
                raise SolverError(
                    f"line search stalled (degree {d}, residual {nres:.2e})")
        if stalled or nu / t < gap_tol:
            break
        t *= mu

    s = np.concatenate([[z0], J @ y])
    min_eig = min(float(np.linalg.eigvalsh(smat(y[lo:hi], n))[0])
                  for lo, hi, n in blocks)
    eq_res = abs(float(c @ y) - gamma)
    bound = nu / t + stalled_res * max(1.0, float(np.linalg.norm(y)))
    return s, SolveInfo(total, bound, eq_res, min_eig)
