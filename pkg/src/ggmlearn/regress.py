"""Least-squares estimators shared by every learner.

Estimators take a *moment source*: either sample rows (a split of a
:class:`~ggmlearn.sampler.SampleSet`) or an exact covariance matrix
("population mode"). A source exposes the second-moment matrix ``gram``
and the sample count ``m`` (``inf`` in population mode), which is all the
Gram-form kernels need. In population mode every estimator returns the
exact population quantity, so learner logic can be tested without
sampling noise.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from . import kernels
from .errors import BadParams, NoConvergence, RankDeficient, TooFewSamples, ValidationError
from .model import GgmModel, _check_node
from .sampler import SampleSet

RANK_TOL = 1e-10


@dataclass(frozen=True)
class RegressionFit:
    """Result of a least-squares fit.

    ``k`` is the number of degrees of freedom charged to the fit, so
    ``sigma_hat_sq = residual_ssq / (m - k)``. Constrained (l1) fits charge
    none and report the empirical risk ``residual_ssq / m``.
    """

    support: tuple
    coefficients: np.ndarray
    sigma_hat_sq: float
    residual_ssq: float
    m: float
    k: int
    extra: dict = field(default_factory=dict, repr=False)


class SampleMoments:
    """Moments of the rows of one split."""

    def __init__(self, rows: np.ndarray):
        self.rows = np.asarray(rows, dtype=float)
        m = self.rows.shape[0]
        if m < 1:
            raise TooFewSamples("split has no rows")
        gram = self.rows.T @ self.rows / m
        self.gram = 0.5 * (gram + gram.T)
        self.m = float(m)

    @property
    def n(self) -> int:
        return self.gram.shape[0]

    def fit(self, i: int, s) -> RegressionFit:
        s = list(s)
        fit = ols(self.rows[:, s], self.rows[:, i])
        return RegressionFit(tuple(s), fit.coefficients, fit.sigma_hat_sq, fit.residual_ssq, fit.m, fit.k)


class PopulationMoments:
    """Exact covariance standing in for sample moments (``m = inf``)."""

    def __init__(self, sigma: np.ndarray):
        self.gram = np.asarray(sigma, dtype=float)
        self.m = math.inf

    @property
    def n(self) -> int:
        return self.gram.shape[0]

    def fit(self, i: int, s) -> RegressionFit:
        s = list(s)
        if not s:
            return RegressionFit((), np.zeros(0), float(self.gram[i, i]), math.nan, self.m, 0)
        g = self.gram[np.ix_(s, s)]
        try:
            coef = linalg.cho_solve(linalg.cho_factor(g, lower=True), self.gram[s, i])
        except linalg.LinAlgError as exc:
            raise RankDeficient("covariance submatrix is singular") from exc
        var = float(self.gram[i, i] - self.gram[s, i] @ coef)
        return RegressionFit(tuple(s), coef, var, math.nan, self.m, len(s))


def as_source(obj, split: str = "all"):
    """Moment source for a sample set split, a model (population mode) or a source."""
    if isinstance(obj, (SampleMoments, PopulationMoments)):
        return obj
    if isinstance(obj, GgmModel):
        return PopulationMoments(obj.sigma)
    if isinstance(obj, SampleSet):
        return SampleMoments(obj.rows(split))
    raise ValidationError(f"cannot use {type(obj).__name__} as a moment source")


def ols(design, response) -> RegressionFit:
    """Ordinary least squares through a QR factorization of the design.

    The unbiased noise estimate is ``||y - X w||^2 / (m - k)``; with no
    columns it is ``||y||^2 / m``.
    """
    x = np.asarray(design, dtype=float)
    y = np.asarray(response, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    m, k = x.shape
    if y.shape != (m,):
        raise BadParams("response length does not match design rows")
    if k == 0:
        rss = float(y @ y)
        return RegressionFit((), np.zeros(0), rss / m, rss, m, 0)
    if m <= k:
        raise TooFewSamples(f"need more than {k} rows, got {m}")
    q, r = np.linalg.qr(x)
    diag = np.abs(np.diag(r))
    if diag.min() <= RANK_TOL * diag.max():
        raise RankDeficient("design matrix is rank deficient")
    coef = linalg.solve_triangular(r, q.T @ y)
    resid = y - x @ coef
    rss = float(resid @ resid)
    return RegressionFit(tuple(range(k)), coef, rss / (m - k), rss, m, k)


def _check_target(n: int, i: int, s) -> list[int]:
    _check_node(n, i)
    s = [int(v) for v in s]
    _check_node(n, *s)
    if i in s:
        raise ValidationError(f"node {i} is in its own regressor set")
    if len(set(s)) != len(s):
        raise ValidationError("regressor set has duplicates")
    return s


def cond_var_estimate(samples, split: str, i: int, s) -> float:
    """Estimated ``Var(X_i | X_S)``: the noise estimate of regressing ``X_i`` on ``X_S``.

    Exact conditional variance in population mode.
    """
    src = as_source(samples, split)
    s = _check_target(src.n, i, s)
    return src.fit(i, s).sigma_hat_sq


def variance_decrement_stat(samples, split: str, i: int, s, j: int, route: str = "closed") -> float:
    """Per-sample loss increase from dropping ``j`` out of the regressors ``S``.

    ``route="closed"`` uses ``w_j^2 / [(G_SS)^{-1}]_jj`` with ``G`` the second
    moment matrix; ``route="loss"`` refits without ``j`` and measures how much the
    residual mean square grows. Both agree up to rounding.
    """
    src = as_source(samples, split)
    s = _check_target(src.n, i, s)
    if j not in s:
        raise ValidationError(f"{j} is not in the regressor set")
    g = src.gram[np.ix_(s, s)]
    b = src.gram[s, i]
    lam = np.linalg.eigvalsh(g)
    if lam[0] <= RANK_TOL * max(lam[-1], np.finfo(float).tiny):
        raise RankDeficient("regressors are collinear")
    if route == "closed":
        ginv = linalg.inv(g)
        w = ginv @ b
        pos = s.index(j)
        return float(max(w[pos] ** 2 / ginv[pos, pos], 0.0))
    if route == "loss":
        # the full residual is orthogonal to the regressors, so the loss gap
        # is the quadratic form of the coefficient change (no cancellation)
        delta = linalg.solve(g, b, assume_a="pos")
        rest = [k for k, v in enumerate(s) if v != j]
        if rest:
            delta[rest] -= linalg.solve(g[np.ix_(rest, rest)], b[rest], assume_a="pos")
        return float(max(delta @ g @ delta, 0.0))
    raise BadParams(f"unknown route {route!r}")


def omp(samples, split: str, target: int, candidates, t: int) -> list[int]:
    """Orthogonal matching pursuit for ``t`` steps.

    Each step appends the candidate whose inclusion minimizes the
    least-squares loss of ``X_target``; ties go to the lowest index. The
    run stops early only if every remaining candidate is collinear with
    the current selection.
    """
    src = as_source(samples, split)
    cand = sorted(_check_target(src.n, target, candidates))
    if t < 0 or t > len(cand):
        raise BadParams(f"t={t} must lie in [0, {len(cand)}]")
    if t == 0:
        return []
    g = src.gram
    order, _ = kernels.omp_gram(g, g[:, target], g[target, target], np.asarray(cand, dtype=np.int64), t)
    return [int(v) for v in order]


def l1_constrained_ls(
    design,
    response,
    free_col=None,
    radius: float = 1.0,
    tol: float = 1e-8,
    max_iter: int = 100000,
) -> RegressionFit:
    """Least squares with ``||w||_1 <= radius`` on every column except ``free_col``.

    Solved in second-moment form by accelerated projected gradient. The
    solution is certified by a duality gap below ``tol`` times the mean
    square of the response.
    """
    x = np.asarray(design, dtype=float)
    y = np.asarray(response, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    m, k = x.shape
    if m < 1 or y.shape != (m,):
        raise BadParams("design and response must have matching nonzero length")
    if radius < 0:
        raise BadParams("radius must be nonnegative")
    g = x.T @ x / m
    b = x.T @ y / m
    yy = float(y @ y / m)
    free = -1 if free_col is None else int(free_col)
    if free >= k:
        raise BadParams("free_col out of range")
    coef = l1_gram_solve(g, b, yy, radius, free, tol, max_iter)
    resid = y - x @ coef
    rss = float(resid @ resid)
    support = tuple(int(v) for v in np.flatnonzero(coef))
    return RegressionFit(support, coef, rss / m, rss, m, 0, {"radius": radius, "free": free})


def l1_gram_solve(g, b, yy, radius, free=-1, tol=1e-8, max_iter=100000, x0=None) -> np.ndarray:
    """Gram-form l1-constrained solve; raises :class:`NoConvergence` when uncertified."""
    if free >= 0 and g[free, free] <= 0:
        raise RankDeficient("free column has zero second moment")
    x, gap, iters, ok = kernels.l1_ls_gram(g, b, float(radius), free, tol, max(abs(yy), 1e-300), max_iter, x0)
    if not ok:
        raise NoConvergence(f"l1 solver gap {gap:.3g} above tolerance after {iters} iterations")
    return np.asarray(x)
