"""Neighborhood-selection structure learners.

Four estimators are provided: greedy forward selection with backward
pruning (:func:`greedy_and_prune`), exhaustive sparse regression with a
validation pass (:func:`search_and_validate`), an l1-constrained regression
after conditioning on the single best predictor (:func:`ws_regression`), and
the structure learner built from it (:func:`hybrid_mb`). Each per-node
estimator accepts a :class:`~ggmlearn.sampler.SampleSet` or, for
population mode, a :class:`~ggmlearn.model.GgmModel`.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace
from math import comb

import numpy as np

from . import kernels
from .errors import (
    BadParams,
    EnumerationBudgetExceeded,
    GgmError,
    GridExhausted,
    MissingNode,
    TooFewSamples,
)
from .model import GgmModel
from .regress import as_source, l1_gram_solve
from .sampler import SampleSet, split as split_samples

ALGORITHMS = ("greedy-and-prune", "search-and-validate", "hybrid-mb")
ENUMERATION_BUDGET = 2_000_000
SUBSET_TIE_TOL = 1e-9


@dataclass(frozen=True)
class NeighborhoodEstimate:
    """Recovered neighborhood of one node.

    ``support`` is stored sorted and ``coefficients`` follow its order; any
    selection order is kept in ``diagnostics``. ``sigma_hat_sq`` is the
    estimated conditional variance, so ``1/sigma_hat_sq`` estimates the
    diagonal precision entry.
    """

    node: int
    support: tuple
    coefficients: np.ndarray
    sigma_hat_sq: float
    diagnostics: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        support = tuple(int(v) for v in self.support)
        coef = np.asarray(self.coefficients, dtype=float)
        if coef.shape != (len(support),):
            raise BadParams(f"node {self.node}: {coef.size} coefficients for {len(support)} neighbors")
        order = np.argsort(support, kind="stable")
        object.__setattr__(self, "support", tuple(support[k] for k in order))
        object.__setattr__(self, "coefficients", coef[order])
        if self.node in self.support:
            raise BadParams("a node cannot be in its own neighborhood")
        if not self.sigma_hat_sq > 0:
            raise BadParams(f"node {self.node}: nonpositive variance estimate {self.sigma_hat_sq}")


@dataclass(frozen=True, eq=False)
class PrecisionEstimate:
    theta_hat: np.ndarray
    edge_set: frozenset
    per_node: list = field(default_factory=list, repr=False)

    @property
    def n(self) -> int:
        return self.theta_hat.shape[0]


@dataclass(frozen=True)
class LearnerConfig:
    """Tuning knobs shared by the learners; ``None`` means "use the default".

    Defaults that depend on the model need ``kappa`` (and ``d`` for
    ``t_steps`` and the non-``gamma_prime`` hybrid mode):

    * greedy-and-prune: ``nu = kappa**2 / sqrt(32)``,
      ``t_steps = ceil(64 d log(4 / kappa**2)) + 1``
    * search-and-validate: ``nu = kappa**2 / 2``
    * hybrid-mb: ``tau = kappa**2 / 8``, ``gamma = 2``

    ``sample_split_mode`` is ``"split"`` (disjoint sample sets per stage) or
    ``"single"`` (every stage uses all rows).
    """

    nu: float | None = None
    t_steps: int | None = None
    kappa: float | None = None
    d: int | None = None
    tau: float | None = None
    gamma: float | None = None
    gamma_prime: float | None = None
    sample_split_mode: str = "split"
    budget: int = ENUMERATION_BUDGET
    tol: float = 1e-8
    max_iter: int = 100000

    def __post_init__(self):
        for name in ("nu", "tau"):
            v = getattr(self, name)
            if v is not None and v < 0:
                raise BadParams(f"{name} must be nonnegative")
        for name in ("gamma", "gamma_prime", "kappa"):
            v = getattr(self, name)
            if v is not None and v <= 0:
                raise BadParams(f"{name} must be positive")
        if self.sample_split_mode not in ("split", "single"):
            raise BadParams("sample_split_mode must be 'split' or 'single'")
        if self.d is not None and self.d < 0:
            raise BadParams("d must be nonnegative")

    def to_dict(self) -> dict:
        return asdict(self)

    def _need(self, name: str):
        v = getattr(self, name)
        if v is None:
            raise BadParams(f"config needs {name} (or a value that depends on it)")
        return v

    def greedy_nu(self) -> float:
        return self.nu if self.nu is not None else self._need("kappa") ** 2 / math.sqrt(32.0)

    def greedy_steps(self) -> int:
        if self.t_steps is not None:
            return int(self.t_steps)
        kappa, d = self._need("kappa"), self._need("d")
        return int(math.ceil(64 * d * math.log(4.0 / kappa**2))) + 1

    def search_nu(self) -> float:
        return self.nu if self.nu is not None else self._need("kappa") ** 2 / 2.0

    def hybrid_tau(self) -> float:
        return self.tau if self.tau is not None else self._need("kappa") ** 2 / 8.0

    def hybrid_gamma(self) -> float:
        return self.gamma if self.gamma is not None else 2.0


def config_for_model(model: GgmModel, **overrides) -> LearnerConfig:
    """Config with ``kappa`` and ``d`` read off a known model."""
    kappa = model.kappa if model.kappa is not None else 1.0
    base = {"kappa": kappa, "d": model.max_degree}
    base.update({k: v for k, v in overrides.items() if v is not None})
    return LearnerConfig(**base)


def _splits(samples, parts: int, mode: str) -> list:
    """Moment sources for each stage: population, all rows, or disjoint splits."""
    if isinstance(samples, GgmModel):
        src = as_source(samples)
        return [src] * parts
    if not isinstance(samples, SampleSet):
        raise BadParams("samples must be a SampleSet or a GgmModel")
    if mode == "single":
        src = as_source(samples, "all")
        return [src] * parts
    names = [f"s{k + 1}" for k in range(parts)]
    if not all(nm in samples.splits and samples.splits[nm].size for nm in names) or (
        parts == 2 and "s3" in samples.splits
    ):
        samples = split_samples(samples, parts)
    return [as_source(samples, nm) for nm in names]


def _others(n: int, i: int) -> np.ndarray:
    return np.array([k for k in range(n) if k != i], dtype=np.int64)


def _node_error(exc: GgmError, i: int) -> GgmError:
    try:
        return type(exc)(f"node {i}: {exc}")
    except TypeError:
        return exc


def _trivial(i: int, src) -> NeighborhoodEstimate:
    fit = src.fit(i, [])
    return NeighborhoodEstimate(i, (), np.zeros(0), fit.sigma_hat_sq, {})


# ---------------------------------------------------------------- greedy


def _greedy_trace(src, i: int, t: int):
    g = src.gram
    cand = _others(src.n, i)
    cap = len(cand)
    if not math.isinf(src.m):
        cap = min(cap, int(src.m) - 2)
    if cap < 0:
        raise TooFewSamples("not enough rows for a single regression")
    order, red = kernels.omp_gram(g, g[:, i], g[i, i], cand, min(t, cap))
    return order, red


def _prune(src, i: int, order, nu: float):
    g = src.gram
    var_s = kernels.residual_variance(g, g[:, i], g[i, i], np.asarray(order, dtype=np.int64), src.m)
    if not var_s > 0:
        raise TooFewSamples(f"node {i}: residual variance is not positive after greedy steps")
    keep = kernels.prune_gram(g, g[:, i], g[i, i], np.asarray(order, dtype=np.int64), nu * var_s, src.m)
    return [int(v) for v, k in zip(order, keep) if k], var_s


def greedy_and_prune(samples, i: int, cfg: LearnerConfig) -> NeighborhoodEstimate:
    """Greedy forward selection for ``T`` steps followed by one pruning pass.

    The diagonal estimate ``1/Var(X_i | X_S)`` is frozen after the greedy
    phase; pruning visits the selected nodes in insertion order and removes
    ``j`` when its removal raises the estimated conditional variance by less
    than ``nu`` times the frozen ``Var(X_i | X_S)``. The returned
    coefficients and variance come from a fresh fit on the pruned set.
    """
    src = as_source(samples, "all")
    if src.n == 1:
        return _trivial(i, src)
    order, red = _greedy_trace(src, i, cfg.greedy_steps())
    kept, var_s = _prune(src, i, order, cfg.greedy_nu())
    fit = src.fit(i, kept)
    diag = {"omp_order": [int(v) for v in order], "omp_reductions": red.tolist(), "frozen_variance": var_s}
    return NeighborhoodEstimate(i, tuple(kept), fit.coefficients, fit.sigma_hat_sq, diag)


def greedy_and_prune_grid(samples, i: int, steps, nus) -> dict:
    """``greedy_and_prune`` for every ``(t, nu)`` pair, sharing one greedy run.

    Greedy selection is prefix-consistent, so a single run to ``max(steps)``
    serves every step count.
    """
    src = as_source(samples, "all")
    out = {}
    if src.n == 1:
        est = _trivial(i, src)
        return {(int(t), float(nu)): est for t in steps for nu in nus}
    order, _ = _greedy_trace(src, i, max(int(t) for t in steps))
    fits = {}
    for t in steps:
        prefix = order[: int(t)]
        for nu in nus:
            kept, _ = _prune(src, i, prefix, float(nu))
            key = tuple(kept)
            if key not in fits:
                fits[key] = src.fit(i, kept)
            fit = fits[key]
            out[(int(t), float(nu))] = NeighborhoodEstimate(i, key, fit.coefficients, fit.sigma_hat_sq)
    return out


# ---------------------------------------------------------------- search


def enumeration_size(p: int, d: int) -> int:
    return sum(comb(p, k) for k in range(min(d, p) + 1))


def search_and_validate(samples, i: int, cfg: LearnerConfig) -> NeighborhoodEstimate:
    """Exhaustive sparse regression on one half, validation on the other.

    For each size bound ``d' = 0..d`` the best support of size at most
    ``d'`` is found on the first set (supports ordered by size, then
    colexicographically; near ties go to the earliest). Candidate ``d'`` is
    accepted when no node ``j`` of another candidate support, absent from
    its own, lowers the second-set conditional variance of the union by more
    than ``nu`` times that variance. The first accepted candidate is
    returned; if none survives, the largest one is returned and flagged.
    """
    d = int(cfg._need("d"))
    nu = cfg.search_nu()
    fit_src, val_src = _splits(samples, 2, cfg.sample_split_mode)
    n = fit_src.n
    if n == 1:
        return _trivial(i, val_src)
    cand = _others(n, i)
    d = min(d, len(cand))
    if enumeration_size(len(cand), d) > cfg.budget:
        raise EnumerationBudgetExceeded(
            f"{enumeration_size(len(cand), d)} supports exceed the budget of {cfg.budget}"
        )
    if not math.isinf(fit_src.m) and fit_src.m <= d + 1:
        raise TooFewSamples("first sample set too small for the requested support size")

    g = fit_src.gram
    yy = g[i, i]
    subsets, rms = kernels.best_subsets(g, g[:, i], yy, cand, d, SUBSET_TIE_TOL)
    supports = []
    for dp in range(d + 1):
        best = float(np.min(rms[: dp + 1]))
        k = next(k for k in range(dp + 1) if rms[k] <= best + SUBSET_TIE_TOL * abs(yy))
        supports.append(tuple(sorted(int(v) for v in subsets[k])))

    gv = val_src.gram
    var_cache: dict = {}

    def var2(s) -> float:
        key = tuple(sorted(s))
        if key not in var_cache:
            var_cache[key] = kernels.residual_variance(gv, gv[:, i], gv[i, i], np.asarray(key, dtype=np.int64), val_src.m)
        return var_cache[key]

    chosen = None
    rejected = []
    for dp in range(d + 1):
        ok = True
        base = set(supports[dp])
        for dpp in range(d + 1):
            if dpp == dp or not ok:
                continue
            union = base | set(supports[dpp])
            v_union = var2(union)
            for j in sorted(set(supports[dpp]) - base):
                if var2(union - {j}) - v_union > nu * v_union:
                    ok = False
                    break
        if ok:
            chosen = dp
            break
        rejected.append(dp)
    flagged = chosen is None
    if flagged:
        chosen = d
    support = supports[chosen]
    fit = val_src.fit(i, support)
    diag = {"candidates": [list(s) for s in supports], "chosen_d": chosen, "none_validated": flagged}
    return NeighborhoodEstimate(i, support, fit.coefficients, fit.sigma_hat_sq, diag)


# ---------------------------------------------------------------- hybrid


@dataclass(frozen=True)
class WsRegressionResult:
    """Output of :func:`ws_regression`.

    ``w`` holds the weights of the rescaled regressors ``X_k / sqrt(v_k)``
    for ``k`` in ``others`` (``v_k`` the estimated ``Var(X_k | X_j)``), ``a``
    the free coefficient on ``X_j``.
    """

    node: int
    j: int
    w: np.ndarray
    a: float
    sigma_hat_sq: float
    others: np.ndarray
    scales: np.ndarray
    radius: float
    level: int
    exhausted: bool

    def predictor(self, n: int) -> np.ndarray:
        """Coefficient vector ``u`` over all ``n`` nodes with ``E[X_i | X] ~ u . X``."""
        u = np.zeros(n)
        u[self.j] = self.a
        u[self.others] = self.w / np.sqrt(self.scales)
        return u


def _best_single(src, i: int, cand) -> tuple[int, float]:
    g = src.gram
    dof = 1.0 if math.isinf(src.m) else src.m / (src.m - 1.0)
    best_j, best_v = -1, math.inf
    for j in cand:
        if g[j, j] <= 0:
            continue
        v = (g[i, i] - g[i, j] ** 2 / g[j, j]) * dof
        if v < best_v * (1.0 - 1e-12):
            best_j, best_v = int(j), v
    if best_j < 0:
        raise TooFewSamples(f"node {i}: no usable predictor column")
    return best_j, best_v


def _cond_on(src, k, j: int) -> np.ndarray:
    g = src.gram
    dof = 1.0 if math.isinf(src.m) else src.m / (src.m - 1.0)
    return (np.diag(g)[k] - g[k, j] ** 2 / g[j, j]) * dof


def _lambda_path(v_best: float, cfg: LearnerConfig, n: int):
    """Radii ``lambda_l`` and the exit thresholds multiplying ``sigma_hat^2``."""
    if cfg.gamma_prime is not None:
        base = math.exp(math.floor(math.log(v_best / 4.0)) - 1.0)
        top = int(math.ceil(math.log(8.0 * max(n - 1, 1)) + 3.0))
        lam_sq = [base * math.exp(l) for l in range(top + 1)]
        return [math.sqrt(v) for v in lam_sq], [(v, cfg.gamma_prime) for v in lam_sq]
    d = max(int(cfg._need("d")), 1)
    gamma = cfg.hybrid_gamma()
    s0_sq = math.exp(math.floor(math.log(v_best / (8.0 * d))) - 1.0)
    top = int(math.ceil(math.log(8.0 * d) + 3.0))
    s_sq = [s0_sq * math.exp(l) for l in range(top + 1)]
    return [math.sqrt(2.0 * d * v) for v in s_sq], [(v, gamma**2) for v in s_sq]


def _ws_path(samples, i: int, cfg: LearnerConfig):
    """Shared work of :func:`ws_regression`: yields one solution per radius."""
    s1, s2, s3 = _splits(samples, 3, cfg.sample_split_mode)
    n = s1.n
    cand = _others(n, i)
    j, v_best = _best_single(s1, i, cand)
    others = np.array([k for k in cand if k != j], dtype=np.int64)
    scales = _cond_on(s1, others, j)
    if np.any(scales <= 0):
        raise TooFewSamples(f"node {i}: a regressor is collinear with X_{j}")
    v_best = max(v_best, np.finfo(float).tiny)
    radii, tests = _lambda_path(v_best, cfg, n)

    cols = np.concatenate([others, [j]])
    colscale = np.concatenate([1.0 / np.sqrt(scales), [1.0]])
    g2 = s2.gram[np.ix_(cols, cols)] * np.outer(colscale, colscale)
    b2 = s2.gram[cols, i] * colscale
    yy2 = s2.gram[i, i]
    g3 = s3.gram[np.ix_(cols, cols)] * np.outer(colscale, colscale)
    b3 = s3.gram[cols, i] * colscale
    yy3 = s3.gram[i, i]
    free = len(cols) - 1
    x = None
    for level, radius in enumerate(radii):
        x = l1_gram_solve(g2, b2, yy2, radius, free, cfg.tol, cfg.max_iter, x0=x)
        sigma_sq = float(yy3 - 2.0 * b3 @ x + x @ g3 @ x)
        sigma_sq = max(sigma_sq, 0.0)
        yield level, radius, tests[level], WsRegressionResult(
            node=i,
            j=j,
            w=x[:free].copy(),
            a=float(x[free]),
            sigma_hat_sq=sigma_sq,
            others=others,
            scales=scales,
            radius=radius,
            level=level,
            exhausted=False,
        )


def ws_regression(samples, i: int, cfg: LearnerConfig, strict: bool = False) -> WsRegressionResult:
    """Regression after conditioning on the best single predictor.

    Picks ``j`` minimizing the estimated ``Var(X_i | X_j)`` (first set),
    then walks a geometric grid of l1 radii for the rescaled regressors
    ``X_k / sqrt(Var(X_k | X_j))`` with an unpenalized coefficient on
    ``X_j`` (second set), and stops at the first radius that is large
    relative to the held-out residual variance (third set). When
    ``cfg.gamma_prime`` is set the exit test is ``lambda^2 >= gamma' sigma^2``
    and the degree bound is not needed.

    If no radius passes, the last solution is returned with
    ``exhausted=True``, or :class:`GridExhausted` is raised when ``strict``.
    """
    if samples.n == 1:
        raise BadParams("regression needs at least two nodes")
    last = None
    for _, radius, (lhs, mult), res in _ws_path(samples, i, cfg):
        last = res
        if lhs >= mult * res.sigma_hat_sq:
            return res
    if strict:
        raise GridExhausted(f"node {i}: no radius passed the exit test")
    return replace(last, exhausted=True)


def _ws_path_multi(samples, i: int, cfg: LearnerConfig, gamma_primes) -> dict:
    """``ws_regression`` results for several ``gamma'`` values from one radius path."""
    pending = {float(gp) for gp in gamma_primes}
    found = {}
    last = None
    base = replace(cfg, gamma_prime=min(pending))
    for _, radius, (lhs, _), res in _ws_path(samples, i, base):
        last = res
        for gp in sorted(pending):
            if lhs >= gp * res.sigma_hat_sq:
                found[gp] = res
        pending -= set(found)
        if not pending:
            break
    for gp in pending:
        found[gp] = replace(last, exhausted=True)
    return found


def _edges_from_predictors(u: np.ndarray, sig: np.ndarray, tau: float) -> frozenset:
    n = u.shape[0]
    edges = set()
    for a in range(n):
        for b in range(a + 1, n):
            uab, uba = u[a, b], u[b, a]
            if uab == 0.0 or uba == 0.0:
                continue
            if uab**2 * sig[b] >= tau * sig[a] and uba**2 * sig[a] >= tau * sig[b]:
                edges.add((a, b))
    return frozenset(edges)


def _assemble(u: np.ndarray, sig: np.ndarray, edges, per_node) -> PrecisionEstimate:
    n = u.shape[0]
    theta = np.zeros((n, n))
    diag = 1.0 / sig
    for a, b in edges:
        c_ab = -u[a, b] * diag[a]
        c_ba = -u[b, a] * diag[b]
        theta[a, b] = theta[b, a] = c_ab if abs(c_ab) <= abs(c_ba) else c_ba
    theta[np.diag_indices(n)] = diag
    return PrecisionEstimate(theta, frozenset(edges), per_node)


def hybrid_mb(samples, cfg: LearnerConfig) -> PrecisionEstimate:
    """Structure from per-node :func:`ws_regression` fits and a two-sided test.

    The pair ``(a, b)`` is an edge when ``u(a)_b^2 s(b) >= tau s(a)`` and
    ``u(b)_a^2 s(a) >= tau s(b)`` with ``u(a)`` node ``a``'s predictor and
    ``s(a)`` its residual variance; a zero coefficient in either direction
    never yields an edge.
    """
    n = samples.n
    if n == 1:
        return _single_node_estimate(samples)
    tau = cfg.hybrid_tau()
    u = np.zeros((n, n))
    sig = np.zeros(n)
    per_node = []
    for i in range(n):
        try:
            res = ws_regression(samples, i, cfg)
        except GgmError as exc:
            raise _node_error(exc, i) from exc
        u[i] = res.predictor(n)
        sig[i] = res.sigma_hat_sq
        per_node.append(res)
    if np.any(sig <= 0):
        raise TooFewSamples("a residual variance estimate is zero")
    return _assemble(u, sig, _edges_from_predictors(u, sig, tau), per_node)


def hybrid_mb_grid(samples, cfg: LearnerConfig, gamma_primes) -> dict:
    """:func:`hybrid_mb` in ``gamma'`` mode for every value in ``gamma_primes``."""
    n = samples.n
    tau = cfg.hybrid_tau()
    gps = [float(g) for g in gamma_primes]
    if n == 1:
        est = _single_node_estimate(samples)
        return {gp: est for gp in gps}
    u = {gp: np.zeros((n, n)) for gp in gps}
    sig = {gp: np.zeros(n) for gp in gps}
    for i in range(n):
        found = _ws_path_multi(samples, i, cfg, gps)
        for gp in gps:
            u[gp][i] = found[gp].predictor(n)
            sig[gp][i] = found[gp].sigma_hat_sq
    out = {}
    for gp in gps:
        if np.any(sig[gp] <= 0):
            raise TooFewSamples("a residual variance estimate is zero")
        out[gp] = _assemble(u[gp], sig[gp], _edges_from_predictors(u[gp], sig[gp], tau), [])
    return out


def _single_node_estimate(samples) -> PrecisionEstimate:
    src = as_source(samples)
    var = src.fit(0, []).sigma_hat_sq
    return PrecisionEstimate(np.array([[1.0 / var]]), frozenset(), [])


# ---------------------------------------------------------------- merging


def merge_and_symmetrize(nbhds, rule: str = "intersection", n: int | None = None) -> PrecisionEstimate:
    """Combine per-node neighborhoods into a symmetric precision estimate.

    The diagonal is ``1/sigma_hat_sq``; node ``i``'s candidate for
    ``theta_ij`` is ``-coef_i(j) / sigma_hat_sq(i)``. An edge is kept when both
    endpoints select each other (``"intersection"``) or either does
    (``"union"``); its value is the candidate of smaller magnitude.
    """
    if rule not in ("intersection", "union"):
        raise BadParams("rule must be 'intersection' or 'union'")
    nbhds = list(nbhds)
    n = len(nbhds) if n is None else n
    by_node = {e.node: e for e in nbhds}
    missing = [i for i in range(n) if i not in by_node]
    if missing:
        raise MissingNode(f"no neighborhood estimate for node(s) {missing}")
    cand = np.zeros((n, n))
    sel = np.zeros((n, n), dtype=bool)
    diag = np.empty(n)
    for i in range(n):
        e = by_node[i]
        diag[i] = 1.0 / e.sigma_hat_sq
        for j, c in zip(e.support, e.coefficients):
            cand[i, j] = -c * diag[i]
            sel[i, j] = True
    both = sel & sel.T if rule == "intersection" else sel | sel.T
    theta = np.zeros((n, n))
    edges = set()
    for i in range(n):
        for j in range(i + 1, n):
            if both[i, j]:
                a, b = cand[i, j], cand[j, i]
                val = a if abs(a) <= abs(b) else b
                theta[i, j] = theta[j, i] = val
                edges.add((i, j))
    theta[np.diag_indices(n)] = diag
    return PrecisionEstimate(theta, frozenset(edges), nbhds)


def threshold_edges(est, kappa: float) -> frozenset:
    """Pairs with ``|theta_ij| / sqrt(theta_ii theta_jj) > kappa / 2``."""
    theta = est.theta_hat if isinstance(est, PrecisionEstimate) else np.asarray(est, dtype=float)
    d = np.diag(theta)
    if np.any(d <= 0):
        raise BadParams("threshold_edges needs a positive diagonal")
    ratio = np.abs(theta) / np.sqrt(np.outer(d, d))
    ii, jj = np.nonzero(np.triu(ratio > kappa / 2.0, k=1))
    return frozenset(zip(ii.tolist(), jj.tolist()))


def learn(samples, algorithm: str, cfg: LearnerConfig, rule: str = "intersection") -> PrecisionEstimate:
    """Run a structure learner over every node."""
    n = samples.n
    if algorithm == "hybrid-mb":
        return hybrid_mb(samples, cfg)
    if algorithm == "greedy-and-prune":
        per = greedy_and_prune
    elif algorithm == "search-and-validate":
        per = search_and_validate
    else:
        raise BadParams(f"unknown algorithm {algorithm!r}; known: {ALGORITHMS}")
    nbhds = []
    for i in range(n):
        try:
            nbhds.append(per(samples, i, cfg))
        except GgmError as exc:
            raise _node_error(exc, i) from exc
    return merge_and_symmetrize(nbhds, rule, n)
