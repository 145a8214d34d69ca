"""Exhaustive reference computations over all conditioning sets.

Everything here enumerates subsets of the nodes, so it is meant for small
models (``n <= 16``). The central object is the table of every conditional
variance ``Var(X_r | X_S)``, computed from inverses of principal submatrices
of the precision matrix, a route independent of the covariance-side Schur
complements used by :mod:`ggmlearn.model`.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import BadParams, NotAttractive, TooLarge
from .model import GgmModel, _check_node, classify, is_attractive, is_sdd, walk_summable_margin
from .regress import as_source, ols

MAX_NODES = 16
SLACK_TOL = 1e-9


def _bits(mask: int) -> list[int]:
    return [b for b in range(mask.bit_length()) if mask >> b & 1]


def _mask(nodes) -> int:
    out = 0
    for v in nodes:
        out |= 1 << int(v)
    return out


def conditional_variance_table(model: GgmModel) -> np.ndarray:
    """``V[mask, r] = Var(X_r | X_S)`` for ``S`` the bit set of ``mask``.

    Entries with ``r`` in ``S`` are NaN. Uses ``[(Theta_RR)^{-1}]_rr`` with
    ``R`` the complement of ``S``, batched by ``|R|``.
    """
    n = model.n
    if n > MAX_NODES:
        raise TooLarge(f"exhaustive tables need n <= {MAX_NODES}, got {n}")
    full = (1 << n) - 1
    table = np.full((1 << n, n), np.nan)
    masks = np.arange(1 << n)
    pop = np.array([bin(int(v)).count("1") for v in masks])
    theta = model.theta
    for size in range(1, n + 1):
        sel = masks[pop == n - size]
        comp = np.array([_bits(full ^ int(mk)) for mk in sel], dtype=np.int64)
        blocks = theta[comp[:, :, None], comp[:, None, :]]
        inv_diag = np.diagonal(np.linalg.inv(blocks), axis1=1, axis2=2)
        table[sel[:, None], comp] = inv_diag
    return table


def conditional_variance_precision_route(model: GgmModel, i: int, s) -> float:
    """``Var(X_i | X_S)`` as a diagonal entry of the inverse of ``Theta_RR``."""
    _check_node(model.n, i)
    s = set(int(v) for v in s)
    rest = [r for r in range(model.n) if r not in s]
    if i not in rest:
        raise BadParams(f"node {i} is in its own conditioning set")
    block = model.theta[np.ix_(rest, rest)]
    return float(np.linalg.inv(block)[rest.index(i), rest.index(i)])


@dataclass(frozen=True)
class SupermodularityReport:
    """Worst value of ``[f(S) - f(S+j)] - [f(T) - f(T+j)]`` over ``S <= T``, ``j`` not in ``T``.

    ``f(S) = Var(X_i | X_S)``; a negative ``worst_violation`` means the
    marginal variance reductions are not diminishing. ``witness`` is
    ``(S, T, j)`` attaining it.
    """

    model_hash: str
    node: int
    worst_violation: float
    witness: tuple
    checked: int

    @property
    def holds(self) -> bool:
        return self.worst_violation >= -SLACK_TOL


def _subset_min(values: np.ndarray, bits: list[int]):
    """Min (and argmin mask) of ``values`` over all submasks, via a subset DP."""
    best = values.copy()
    arg = np.arange(values.size)
    ar = np.arange(values.size)
    for b in bits:
        bit = 1 << b
        has = ar[(ar & bit) != 0]
        cand = best[has ^ bit]
        better = cand < best[has]
        best[has[better]] = cand[better]
        arg[has[better]] = arg[(has ^ bit)[better]]
    return best, arg


def check_supermodularity(model: GgmModel, i: int, table: np.ndarray | None = None) -> SupermodularityReport:
    """Exhaustive diminishing-returns check of ``S -> Var(X_i | X_S)``."""
    n = model.n
    _check_node(n, i)
    if table is None:
        table = conditional_variance_table(model)
    f = table[:, i]
    size = 1 << n
    ar = np.arange(size)
    worst, witness = np.inf, ((), (), -1)
    ground = [v for v in range(n) if v != i]
    for j in ground:
        bit = 1 << j
        valid = (ar & ((1 << i) | bit)) == 0
        dec = np.full(size, np.inf)
        dec[valid] = f[ar[valid]] - f[ar[valid] | bit]
        low, arg = _subset_min(dec, [v for v in ground if v != j])
        with np.errstate(invalid="ignore"):
            gap = np.where(valid, low - dec, np.inf)
        t = int(np.argmin(gap))
        if gap[t] < worst:
            worst = float(gap[t])
            witness = (tuple(_bits(int(arg[t]))), tuple(_bits(t)), j)
    p = n - 1
    checked = p * 3 ** (p - 1) if p > 0 else 0
    if p <= 0:
        worst = 0.0
    return SupermodularityReport(model.digest, i, worst, witness, checked)


def submodularity_ratio(model: GgmModel, i: int, k: int, table: np.ndarray | None = None,
                        rel_tol: float = 1e-13) -> float:
    """Exact ``gamma(k)`` of ``f(S) = Var(X_i) - Var(X_i | X_S)``.

    Minimizes ``sum_x [f(L+x) - f(L)] / [f(L+S) - f(L)]`` over disjoint
    ``L, S`` with ``1 <= |S| <= k``; pairs whose denominator is zero (up to
    ``rel_tol * Var(X_i)``) are skipped. Returns ``inf`` if every pair is
    skipped.
    """
    n = model.n
    _check_node(n, i)
    if n > 12:
        raise TooLarge("submodularity ratio enumeration needs n <= 12")
    if k < 1:
        raise BadParams("k must be at least 1")
    if table is None:
        table = conditional_variance_table(model)
    v = table[:, i]
    floor = rel_tol * v[0]
    ground = [x for x in range(n) if x != i]
    best = np.inf
    for lsize in range(len(ground) + 1):
        for lset in itertools.combinations(ground, lsize):
            lm = _mask(lset)
            rest = [x for x in ground if x not in lset]
            single = {x: v[lm] - v[lm | 1 << x] for x in rest}
            for ssize in range(1, min(k, len(rest)) + 1):
                for sset in itertools.combinations(rest, ssize):
                    den = v[lm] - v[lm | _mask(sset)]
                    if den <= floor:
                        continue
                    best = min(best, sum(single[x] for x in sset) / den)
    return float(best)


def walk_expansion_partial(model: GgmModel, s, order: int) -> np.ndarray:
    """Partial sum ``sum_{k <= order} A_R^k`` with ``A = I - Theta``, ``R`` the complement of ``s``.

    Requires an attractive model with unit diagonal; the full series equals
    the conditional covariance of ``X_R`` given ``X_S``.
    """
    theta = model.theta
    if not is_attractive(theta):
        raise NotAttractive("walk expansion needs nonpositive off-diagonal entries")
    if not np.allclose(np.diag(theta), 1.0, atol=1e-12):
        raise BadParams("walk expansion needs a unit diagonal; rescale the model first")
    if order < 0:
        raise BadParams("order must be nonnegative")
    s = set(int(v) for v in s)
    _check_node(model.n, *s)
    rest = [r for r in range(model.n) if r not in s]
    a = np.eye(len(rest)) - theta[np.ix_(rest, rest)]
    total = np.eye(len(rest))
    power = np.eye(len(rest))
    for _ in range(order):
        power = power @ a
        total = total + power
    return total


def omp_reference(samples, split: str, target: int, candidates, t: int) -> list[int]:
    """OMP by explicit refits: each step minimizes the refitted residual sum of squares.

    Ties within a relative ``1e-12`` go to the lowest index. Quadratic in
    the number of candidates per step; used to cross-check the fast kernel.
    """
    src = as_source(samples, split)
    chosen: list[int] = []
    cand = sorted(int(c) for c in candidates)
    for _ in range(t):
        losses = []
        for c in cand:
            if c in chosen:
                continue
            s = chosen + [c]
            if hasattr(src, "rows"):
                loss = ols(src.rows[:, s], src.rows[:, target]).residual_ssq / src.m
            else:
                g = src.gram
                loss = g[target, target] - g[target, s] @ np.linalg.solve(g[np.ix_(s, s)], g[s, target])
            losses.append((loss, c))
        if not losses:
            break
        low = min(l for l, _ in losses)
        scale = max(abs(low), 1e-300)
        pick = min(c for l, c in losses if l <= low + 1e-12 * scale)
        chosen.append(pick)
    return chosen


# ------------------------------------------------------------ lemma sweep

LEMMAS = (
    "kappa_variance",
    "degree_bound",
    "sdd_smooth_variance",
    "bound_after_conditioning_ij",
    "bound_after_conditioning",
    "griffiths",
    "kappa_variance_attractive",
)


@dataclass(frozen=True)
class LemmaOutcome:
    """Slack of one inequality, minimized over every checked instance.

    ``applies`` says whether the model is in the class the inequality is
    claimed for; the slack is reported regardless.
    """

    name: str
    applies: bool
    slack: float
    checked: int
    witness: tuple = ()

    @property
    def passed(self) -> bool:
        return (not self.applies) or self.slack >= -SLACK_TOL


def verify_structural_lemmas(model: GgmModel, table: np.ndarray | None = None) -> dict:
    """Check the structural variance inequalities exhaustively.

    Returns a dict name -> :class:`LemmaOutcome`. Inequalities are checked
    on every node and, where they quantify over conditioning sets, on every
    subset.
    """
    n = model.n
    if table is None:
        table = conditional_variance_table(model)
    theta, sigma = model.theta, model.sigma
    adj = model.adjacency_matrix
    cls = classify(model)
    sdd = is_sdd(theta, 1e-12)
    attractive = cls["attractive"]
    ws = walk_summable_margin(theta) > 1e-10
    kappa = model.kappa
    deg = model.adjacency_matrix.sum(axis=1)
    dmax = int(deg.max()) if n > 1 else 0
    size = 1 << n
    masks = np.arange(size)
    out = {}

    def record(name, applies, items):
        items = list(items)
        if not items:
            out[name] = LemmaOutcome(name, applies, np.inf, 0)
            return
        slack, wit = min(items, key=lambda t: t[0])
        out[name] = LemmaOutcome(name, applies, float(slack), len(items), wit)

    # missing at least one neighbor => Var >= (1 + kappa^2) / theta_ii
    items = []
    if kappa is not None:
        for i in range(n):
            nb = _mask(np.flatnonzero(adj[i]))
            if not nb:
                continue
            sel = masks[((masks >> i) & 1 == 0) & ((masks & nb) != nb)]
            vals = table[sel, i] - (1 + kappa**2) / theta[i, i]
            k = int(np.argmin(vals))
            items.append((vals[k], (i, tuple(_bits(int(sel[k]))))))
    record("kappa_variance", kappa is not None, items)

    items = [(1.0 / kappa**2 - dmax, (dmax,))] if kappa is not None else []
    record("degree_bound", ws and kappa is not None, items)

    edges = [(i, j) for i in range(n) for j in range(n) if i != j and adj[i, j]]
    record(
        "sdd_smooth_variance",
        sdd,
        [(1.0 / abs(theta[i, j]) + sigma[j, j] - sigma[i, i], (i, j)) for i, j in edges],
    )
    record(
        "bound_after_conditioning_ij",
        sdd,
        [(1.0 / abs(theta[i, j]) - table[1 << j, i], (i, j)) for i, j in edges],
    )
    items = []
    for i in range(n):
        nb = np.flatnonzero(adj[i])
        if nb.size:
            best = min(table[1 << int(j), i] for j in nb)
            items.append((4.0 * dmax / theta[i, i] - best, (i,)))
    record("bound_after_conditioning", sdd, items)

    iu = np.triu_indices(n, 1)
    items = [(sigma[a, b], (int(a), int(b))) for a, b in zip(*iu)]
    record("griffiths", attractive, items)

    items = []
    if kappa is not None:
        for i in range(n):
            nb = _mask(np.flatnonzero(adj[i]))
            sel = masks[(masks >> i) & 1 == 0]
            missing = np.array([bin(int(nb & ~int(mk))).count("1") for mk in sel])
            vals = table[sel, i] - (1 + missing * kappa**2) / theta[i, i]
            k = int(np.argmin(vals))
            items.append((vals[k], (i, tuple(_bits(int(sel[k]))))))
    record("kappa_variance_attractive", attractive and kappa is not None, items)
    return out


def lemma_table(report: dict) -> str:
    """Plain-text table of a :func:`verify_structural_lemmas` report."""
    lines = [f"{'inequality':30s} {'applies':8s} {'min slack':>14s} {'checked':>8s}  result"]
    for name in LEMMAS:
        o = report[name]
        status = "pass" if o.passed else "FAIL"
        if not o.applies:
            status = "n/a" if o.slack >= -SLACK_TOL else "n/a (violated)"
        lines.append(f"{name:30s} {str(o.applies):8s} {o.slack:14.6g} {o.checked:8d}  {status}")
    return "\n".join(lines)
