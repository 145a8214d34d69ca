"""Dense symmetric linear algebra used by every other module.

Matrices are plain ``numpy.ndarray`` objects of shape ``(n, n)`` stored in
full (both triangles). Tolerances scale with the trace or the largest
eigenvalue of the input, because the models handled here are routinely
ill-conditioned and fixed absolute thresholds would misfire.
"""
from __future__ import annotations

import warnings

import numpy as np
from scipy import linalg

from .errors import NoConvergence, NotPD, NotSymmetric, SingularBlock, ValidationError

SYMMETRY_TOL = 1e-12


def as_symmetric(a, tol: float = SYMMETRY_TOL) -> np.ndarray:
    """Validate and return ``a`` as a float symmetric matrix.

    Raises :class:`NotSymmetric` when
    ``|a_ij - a_ji| > tol * (1 + max|a|)`` for some pair.
    """
    a = np.array(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise ValidationError(f"expected a non-empty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValidationError("matrix has non-finite entries")
    scale = 1.0 + np.max(np.abs(a))
    if np.max(np.abs(a - a.T)) > tol * scale:
        raise NotSymmetric("matrix is not symmetric")
    return 0.5 * (a + a.T)


def cholesky(a) -> np.ndarray:
    """Lower-triangular ``L`` with ``L @ L.T == a``.

    A pivot ``L_kk**2 <= n * 1e-14 * trace(a)`` is treated as a failure, so
    numerically semidefinite matrices are rejected rather than factored.
    """
    a = as_symmetric(a)
    n = a.shape[0]
    try:
        lower = np.linalg.cholesky(a)
    except np.linalg.LinAlgError as exc:
        raise NotPD("matrix is not positive definite") from exc
    floor = n * 1e-14 * abs(np.trace(a))
    if np.min(np.diag(lower)) ** 2 <= floor:
        raise NotPD("matrix is numerically singular (tiny Cholesky pivot)")
    return lower


def solve_spd(a, b) -> np.ndarray:
    lower = cholesky(a)
    return linalg.cho_solve((lower, True), np.asarray(b, dtype=float))


def inverse_spd(a) -> np.ndarray:
    """Inverse of an SPD matrix through its Cholesky factor, symmetrized."""
    lower = cholesky(a)
    inv = linalg.cho_solve((lower, True), np.eye(lower.shape[0]))
    return 0.5 * (inv + inv.T)


def pseudo_inverse(a, rank_tol: float = 1e-12) -> np.ndarray:
    """Moore-Penrose pseudo-inverse of a symmetric matrix.

    Eigenvalues with ``|lam| <= rank_tol * max|lam|`` are dropped.
    """
    a = as_symmetric(a)
    lam, vec = np.linalg.eigh(a)
    top = np.max(np.abs(lam))
    if top == 0.0:
        return np.zeros_like(a)
    keep = np.abs(lam) > rank_tol * top
    inv = (vec[:, keep] / lam[keep]) @ vec[:, keep].T
    return 0.5 * (inv + inv.T)


def spectral_radius_nonneg(a, tol: float = 1e-12, max_iter: int = 200_000):
    """Perron root and eigenvector of an entrywise nonnegative symmetric matrix.

    Power iteration on ``a + I`` started from the all-ones vector. The shift
    makes the Perron root strictly dominant even when ``-rho`` is also an
    eigenvalue (bipartite patterns), without changing eigenvectors.

    Returns
    -------
    value : float
        Largest eigenvalue of ``a``.
    vector : ndarray
        Unit-norm, entrywise nonnegative eigenvector with
        ``||a v - value v|| <= tol * max(1, value)``.
    """
    a = as_symmetric(a)
    if np.min(a) < 0:
        raise ValidationError("matrix has negative entries")
    n = a.shape[0]
    v = np.full(n, 1.0 / np.sqrt(n))
    if not np.any(a):
        return 0.0, v
    for _ in range(max_iter):
        w = a @ v + v
        v = w / np.linalg.norm(w)
        av = a @ v
        lam = float(v @ av)
        if np.linalg.norm(av - lam * v) <= tol * max(1.0, lam):
            return lam, np.abs(v)
    raise NoConvergence(f"power iteration did not converge in {max_iter} iterations")


def schur_complement(a, keep) -> np.ndarray:
    """``a[K,K] - a[K,E] a[E,E]^{-1} a[E,K]`` with ``E`` the complement of ``keep``."""
    a = as_symmetric(a)
    n = a.shape[0]
    keep = sorted(set(int(k) for k in keep))
    elim = [k for k in range(n) if k not in set(keep)]
    akk = a[np.ix_(keep, keep)]
    if not elim:
        return akk
    aee = a[np.ix_(elim, elim)]
    ake = a[np.ix_(keep, elim)]
    try:
        with warnings.catch_warnings():
            # singular pivots are reported below as SingularBlock
            warnings.simplefilter("ignore", linalg.LinAlgWarning)
            lu = linalg.lu_factor(aee, check_finite=True)
    except (linalg.LinAlgError, ValueError) as exc:
        raise SingularBlock("eliminated block is singular") from exc
    piv = np.abs(np.diag(lu[0]))
    if np.min(piv) <= 1e-14 * max(np.max(piv), np.finfo(float).tiny):
        raise SingularBlock("eliminated block is singular")
    out = akk - ake @ linalg.lu_solve(lu, ake.T)
    return 0.5 * (out + out.T)


def min_eigenvalue(a) -> float:
    return float(np.linalg.eigvalsh(as_symmetric(a))[0])
