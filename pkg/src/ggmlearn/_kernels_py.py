"""Pure numpy implementation of the inner-loop kernels.

Every kernel works on second-moment ("Gram") form: ``G`` is ``X^T X / m``
(or the population covariance), ``b`` is ``X^T y / m`` and ``yy`` is
``y^T y / m``. The squared loss of coefficients ``w`` on the support ``S``
is then ``yy - 2 b_S.w + w.G_SS.w``, and its minimum over ``w`` is the
residual mean square ``yy - b_S.G_SS^{-1}.b_S``.

The compiled module ``_kernels`` exposes the same functions with identical
semantics; ``ggmlearn.kernels`` picks one at import time.
"""
from __future__ import annotations

import itertools
import math

import numpy as np
from scipy import linalg

COLLINEAR_TOL = 1e-12
TIE_TOL = 1e-12


def project_l1_ball(v, radius):
    """Euclidean projection of ``v`` onto ``{x : ||x||_1 <= radius}`` (sort-based)."""
    v = np.asarray(v, dtype=float)
    if radius <= 0:
        return np.zeros_like(v)
    a = np.abs(v)
    if a.sum() <= radius:
        return v.copy()
    u = np.sort(a)[::-1]
    css = np.cumsum(u)
    k = np.arange(1, u.size + 1)
    hits = np.nonzero(u - (css - radius) / k > 0)[0]
    rho = hits[-1] if hits.size else 0  # radius below rounding of the largest entry
    theta = (css[rho] - radius) / (rho + 1.0)
    return np.sign(v) * np.maximum(a - theta, 0.0)


def omp_gram(G, b, yy, candidates, t, tie_tol=TIE_TOL):
    """Forward selection of up to ``t`` columns by largest squared-loss reduction.

    Returns ``(order, reductions)``: selected column indices in insertion
    order and the loss reduction achieved by each step. Stops early when
    every remaining candidate is collinear with the selection. Ties within
    ``tie_tol`` (relative) go to the lowest candidate index.
    """
    G = np.asarray(G, dtype=float)
    b = np.asarray(b, dtype=float)
    cand = np.asarray(candidates, dtype=np.int64)
    p = cand.size
    gdiag = G[cand, cand].copy()
    rdiag = gdiag.copy()
    rcorr = b[cand].copy()
    active = np.ones(p, dtype=bool)
    rows = []
    qs = []
    order = []
    reductions = []
    for _ in range(min(t, p)):
        valid = active & (rdiag > COLLINEAR_TOL * np.maximum(gdiag, 1e-300))
        if not valid.any():
            break
        score = np.full(p, -np.inf)
        score[valid] = rcorr[valid] ** 2 / rdiag[valid]
        best = score.max()
        pick = int(np.flatnonzero(score >= best - tie_tol * abs(best))[0])
        piv = int(cand[pick])
        dr = rdiag[pick]
        row = G[piv, cand].copy()
        q = b[piv]
        for prev_row, prev_q in zip(rows, qs):
            row -= prev_row[pick] * prev_row
            q -= prev_row[pick] * prev_q
        sq = math.sqrt(dr)
        row /= sq
        q /= sq
        rows.append(row)
        qs.append(q)
        rdiag -= row**2
        rcorr -= row * q
        active[pick] = False
        order.append(piv)
        reductions.append(float(q * q))
    return np.array(order, dtype=np.int64), np.array(reductions)


def _rms(G, b, yy, idx):
    if len(idx) == 0:
        return float(yy)
    idx = list(idx)
    g = G[np.ix_(idx, idx)]
    bb = b[idx]
    try:
        c = linalg.cho_factor(g, lower=True, check_finite=False)
    except linalg.LinAlgError:
        return math.nan
    if np.min(np.abs(np.diag(c[0]))) ** 2 <= COLLINEAR_TOL * np.max(np.diag(g)):
        return math.nan
    return float(yy - bb @ linalg.cho_solve(c, bb, check_finite=False))


def residual_variance(G, b, yy, idx, m):
    """Unbiased residual variance ``m/(m-k) * rms`` (``m = inf`` for population)."""
    r = _rms(G, b, yy, idx)
    if math.isinf(m):
        return r
    return r * m / (m - len(idx))


def prune_gram(G, b, yy, order, threshold, m):
    """Backward pruning pass.

    Visits ``order`` once; drops ``j`` when
    ``var(S - {j}) - var(S) < threshold`` for the current ``S``. Returns a
    boolean mask over ``order`` of kept entries.
    """
    order = [int(j) for j in order]
    keep = [True] * len(order)
    current = list(order)
    var_s = residual_variance(G, b, yy, current, m)
    for pos, j in enumerate(order):
        trial = [v for v in current if v != j]
        var_t = residual_variance(G, b, yy, trial, m)
        if var_t - var_s < threshold:
            keep[pos] = False
            current = trial
            var_s = var_t
    return np.array(keep, dtype=bool)


def colex_combinations(p, k):
    """All ``k``-subsets of ``range(p)`` as rows, in colexicographic order."""
    if k == 0:
        return np.zeros((1, 0), dtype=np.int64)
    combos = np.array(list(itertools.combinations(range(p), k)), dtype=np.int64)
    if combos.size == 0:
        return combos.reshape(0, k)
    order = np.lexsort(combos.T)
    return combos[order]


def best_subsets(G, b, yy, candidates, kmax, tie_tol=1e-10, chunk=65536):
    """Exact best-subset least squares for every size ``0..kmax``.

    Returns ``(subsets, rms)`` where ``subsets[k]`` is the colex-first subset
    of ``candidates`` of size ``k`` whose residual mean square is within
    ``tie_tol * yy`` of the minimum, and ``rms[k]`` its value.
    """
    G = np.asarray(G, dtype=float)
    b = np.asarray(b, dtype=float)
    cand = np.asarray(candidates, dtype=np.int64)
    subsets, values = [], []
    for k in range(kmax + 1):
        combos = colex_combinations(cand.size, k)
        if combos.shape[0] == 0:
            break
        if k == 0:
            subsets.append(np.zeros(0, dtype=np.int64))
            values.append(float(yy))
            continue
        rms = np.empty(combos.shape[0])
        for start in range(0, combos.shape[0], chunk):
            blk = cand[combos[start:start + chunk]]
            g = G[blk[:, :, None], blk[:, None, :]]
            bb = b[blk]
            with np.errstate(invalid="ignore"):
                try:
                    chol = np.linalg.cholesky(g)
                    ok = np.min(np.diagonal(chol, axis1=1, axis2=2) ** 2, axis=1) > COLLINEAR_TOL * np.max(
                        np.diagonal(g, axis1=1, axis2=2), axis=1
                    )
                    z = np.linalg.solve(chol, bb[:, :, None])[:, :, 0]
                    vals = yy - np.sum(z * z, axis=1)
                    vals[~ok] = np.inf
                except np.linalg.LinAlgError:
                    vals = np.array([_rms(G, b, yy, row) for row in blk])
                    vals[np.isnan(vals)] = np.inf
            rms[start:start + chunk] = vals
        best = rms.min()
        pick = int(np.flatnonzero(rms <= best + tie_tol * abs(yy))[0])
        subsets.append(cand[combos[pick]])
        values.append(float(rms[pick]))
    return subsets, np.array(values)


def _power_lmax(G, iters=100):
    n = G.shape[0]
    v = np.ones(n) / math.sqrt(n)
    lam = 0.0
    for _ in range(iters):
        w = G @ v
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        lam = float(v @ w)
        v = w / nw
    return max(lam, float(v @ (G @ v)))


def l1_ls_gram(G, b, radius, free=-1, tol=1e-8, scale=1.0, max_iter=100000, x0=None):
    """Minimize ``0.5 x.G.x - b.x`` over ``||x_{-free}||_1 <= radius``.

    The coordinate ``free`` (or none when ``-1``) is unconstrained and is
    eliminated in closed form. The remaining problem is solved with
    monotone FISTA and Euclidean projection onto the l1 ball; iteration
    stops once the Frank-Wolfe duality gap is at most ``tol * scale``.

    Returns ``(x, gap, iterations, converged)``.
    """
    G = np.asarray(G, dtype=float)
    b = np.asarray(b, dtype=float)
    n = b.size
    if free >= 0:
        rest = np.array([k for k in range(n) if k != free], dtype=np.int64)
        gaa = G[free, free]
        gwa = G[rest, free]
        Gr = G[np.ix_(rest, rest)] - np.outer(gwa, gwa) / gaa
        br = b[rest] - gwa * b[free] / gaa
    else:
        rest = np.arange(n)
        Gr = G
        br = b

    def finish(w, gap, it, ok):
        x = np.zeros(n)
        x[rest] = w
        if free >= 0:
            x[free] = (b[free] - gwa @ w) / gaa
        return x, gap, it, ok

    p = rest.size
    if p == 0 or radius <= 0:
        w = np.zeros(p)
        g = -br
        gap = radius * (np.max(np.abs(g)) if p else 0.0)
        return finish(w, 0.0 if radius <= 0 else gap, 0, True)

    w = np.zeros(p) if x0 is None else project_l1_ball(np.asarray(x0, float)[rest], radius)
    lip = 1.05 * _power_lmax(Gr)
    if lip <= 0:
        lip = 1.0
    Gw = Gr @ w
    fw = 0.5 * w @ Gw - br @ w
    y = w.copy()
    w_prev = w.copy()
    t = 1.0
    gap = math.inf
    for it in range(1, max_iter + 1):
        g = Gw - br
        gap = float(g @ w + radius * np.max(np.abs(g)))
        if gap <= tol * scale:
            return finish(w, gap, it - 1, True)
        Gy = Gr @ y
        fy = 0.5 * y @ Gy - br @ y
        gy = Gy - br
        while True:
            z = project_l1_ball(y - gy / lip, radius)
            Gz = Gr @ z
            fz = 0.5 * z @ Gz - br @ z
            dz = z - y
            if fz <= fy + gy @ dz + 0.5 * lip * (dz @ dz) + 1e-14 * abs(fy):
                break
            lip *= 2.0
        # restart the momentum once it points uphill
        if (y - z) @ (z - w) > 0.0:
            t = 1.0
        t_next = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
        w_prev = w
        if fz <= fw:
            w, Gw, fw_new = z, Gz, fz
        else:
            fw_new = fw
        assert fw_new <= fw + 1e-12 * max(1.0, abs(fw)), "objective increased"
        fw = fw_new
        y = w + (t / t_next) * (z - w) + ((t - 1.0) / t_next) * (w - w_prev)
        t = t_next
    g = Gw - br
    gap = float(g @ w + radius * np.max(np.abs(g)))
    return finish(w, gap, max_iter, gap <= tol * scale)
