"""Synthetic model families: experiment models and hand-built counterexamples.

Each constructor returns a :class:`~ggmlearn.model.GgmModel`. Where a closed
form exists for both the covariance and the precision matrix, both are
passed in so ill-conditioned families do not pick up inversion noise in
their zero pattern.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from . import matrixcore as mc
from .errors import BadParams, NotPD, SingularCovariance, SingularLaplacian, UnknownName
from .model import GgmModel, laplacian_from_weights
from .sampler import derive_rng

FAMILIES = ("path_cliques", "gaussian_walk", "gff", "break_greedy", "possibly_hard", "counterexample")


def _walk_precision(first_var: float, step_var: float, n: int) -> np.ndarray:
    """Precision of ``X_1 ~ N(0, first_var)``, ``X_{k+1} - X_k ~ N(0, step_var)``."""
    diff = np.eye(n) - np.eye(n, k=-1)
    w = np.full(n, 1.0 / step_var)
    w[0] = 1.0 / first_var
    return diff.T @ (w[:, None] * diff)


def _standardize_model(theta: np.ndarray, sigma: np.ndarray):
    s = np.sqrt(np.diag(sigma))
    return theta * np.outer(s, s), sigma / np.outer(s, s)


def path_cliques(n: int, d: int, rho: float = 0.95, standardize: bool = True) -> GgmModel:
    """Brownian path block of size ``n/2`` next to independent ``d``-cliques.

    Path block: ``Cov(X_i, X_j) = 1/2 + min(i, j)/n`` (1-based). Clique blocks
    use ``I - (rho/d) 11^T`` rescaled to unit variances.
    """
    if n < 2 or n % 2 or d < 1 or (n // 2) % d:
        raise BadParams("path_cliques needs n even and (n/2) divisible by d")
    if not 0.0 < rho < 1.0:
        raise BadParams("rho must lie in (0, 1)")
    half = n // 2
    idx = np.arange(1, half + 1)
    path_sigma = 0.5 + np.minimum.outer(idx, idx) / n
    path_theta = _walk_precision(0.5 + 1.0 / n, 1.0 / n, half)

    c = rho / d
    clique_theta0 = np.eye(d) - c * np.ones((d, d))
    clique_sigma0 = np.eye(d) + (c / (1.0 - rho)) * np.ones((d, d))
    s = np.sqrt(np.diag(clique_sigma0))
    clique_theta = clique_theta0 * np.outer(s, s)
    clique_sigma = clique_sigma0 / np.outer(s, s)

    blocks_t = [path_theta] + [clique_theta] * (half // d)
    blocks_s = [path_sigma] + [clique_sigma] * (half // d)
    theta = linalg.block_diag(*blocks_t)
    sigma = linalg.block_diag(*blocks_s)
    if standardize:
        theta, sigma = _standardize_model(theta, sigma)
    return GgmModel(theta=theta, sigma=sigma, primary="covariance", name=f"path_cliques(n={n},d={d},rho={rho})")


def gaussian_walk(n: int, start_time: int = 0, standardize: bool = False) -> GgmModel:
    """Gaussian simple random walk observed at times ``start_time + 1 .. start_time + n``.

    ``Cov(X_i, X_j) = start_time + min(i, j)``; the precision is tridiagonal.
    """
    if n < 1 or start_time < 0:
        raise BadParams("gaussian_walk needs n >= 1 and start_time >= 0")
    idx = np.arange(1, n + 1)
    sigma = start_time + np.minimum.outer(idx, idx).astype(float)
    theta = _walk_precision(start_time + 1.0, 1.0, n)
    if standardize:
        theta, sigma = _standardize_model(theta, sigma)
    return GgmModel(theta=theta, sigma=sigma, primary="covariance", name=f"gaussian_walk(n={n},start={start_time})")


def gff(weights, boundary) -> GgmModel:
    """Discrete Gaussian free field with zero boundary condition on ``boundary``.

    ``weights`` is a symmetric nonnegative matrix of edge conductances. The
    returned model is indexed by the non-boundary nodes in increasing order.
    """
    w = np.array(weights, dtype=float)
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise BadParams("weights must be square")
    if np.any(w < 0) or not np.allclose(w, w.T):
        raise BadParams("weights must be symmetric and nonnegative")
    boundary = sorted(set(int(b) for b in boundary))
    if not boundary:
        raise BadParams("boundary must be nonempty")
    interior = [v for v in range(w.shape[0]) if v not in set(boundary)]
    if not interior:
        raise BadParams("every node is on the boundary")
    lap = laplacian_from_weights(w)
    theta = lap[np.ix_(interior, interior)]
    try:
        model = GgmModel.from_precision(theta, name="gff")
    except NotPD as exc:
        raise SingularLaplacian("graph is not connected to the boundary") from exc
    object.__setattr__(model, "_meta", {"interior": interior})
    return model


def _break_greedy_sigma(d: int, delta: float) -> np.ndarray:
    centered = np.eye(d) - np.ones((d, d)) / d
    noise = delta**2 * np.eye(d)
    return np.block([[centered + noise, centered], [centered, centered + noise]])


def break_greedy(d: int, delta: float, n_pad: int = 0) -> GgmModel:
    """Near-duplicate pairs ``X_i = Z_i + delta W_i``, ``Y_i = Z_i + delta W'_i``.

    ``Z`` is ``d`` i.i.d. standard Gaussians conditioned to sum to zero.
    Node order is ``X_1..X_d, Y_1..Y_d`` followed by ``n_pad`` independent
    unit-variance nodes.
    """
    if d <= 2 or delta <= 0 or n_pad < 0:
        raise BadParams("break_greedy needs d > 2, delta > 0, n_pad >= 0")
    sigma0 = _break_greedy_sigma(d, delta)
    try:
        theta0 = mc.inverse_spd(sigma0)
    except NotPD as exc:
        raise SingularCovariance(f"covariance is numerically singular at delta={delta}") from exc
    sigma = linalg.block_diag(sigma0, np.eye(n_pad)) if n_pad else sigma0
    theta = linalg.block_diag(theta0, np.eye(n_pad)) if n_pad else theta0
    return GgmModel(theta=theta, sigma=sigma, primary="covariance", name=f"break_greedy(d={d},delta={delta})")


def possibly_hard(d: int, delta: float, tiles: int = 1, permute_seed=None) -> GgmModel:
    """Break-greedy block with ``d/4`` of the ``X`` nodes conditioned out, tiled and permuted.

    Conditioning removes ``X_1..X_{d/4}``: the tile's precision is the
    corresponding principal submatrix of the break-greedy precision. With
    ``permute_seed=None`` the node order is left unpermuted.
    """
    if d <= 2 or d % 4 or delta <= 0 or tiles < 1:
        raise BadParams("possibly_hard needs d > 2 divisible by 4, delta > 0, tiles >= 1")
    sigma0 = _break_greedy_sigma(d, delta)
    keep = list(range(d // 4, 2 * d))
    try:
        sigma_tile = mc.schur_complement(sigma0, keep)
        theta_tile = mc.inverse_spd(sigma0)[np.ix_(keep, keep)]
    except NotPD as exc:
        raise SingularCovariance(f"covariance is numerically singular at delta={delta}") from exc
    theta = linalg.block_diag(*([theta_tile] * tiles))
    sigma = linalg.block_diag(*([sigma_tile] * tiles))
    if permute_seed is not None:
        perm = derive_rng(permute_seed, "possibly_hard").permutation(theta.shape[0])
        theta = theta[np.ix_(perm, perm)]
        sigma = sigma[np.ix_(perm, perm)]
    return GgmModel(theta=theta, sigma=sigma, primary="covariance", name=f"possibly_hard(d={d},delta={delta})")


def no_submodularity() -> GgmModel:
    theta = np.array([[1.0, -0.5, -0.5], [-0.5, 1.0, 0.5], [-0.5, 0.5, 1.0]])
    return GgmModel.from_precision(theta, name="no_submodularity")


def no_apx_submodularity(eps: float = 0.01, M: float = 100.0) -> GgmModel:
    if not 0 < eps < 0.5 < M:
        raise BadParams("need 0 < eps < 1/2 < M")
    theta = np.array([[1.0, -eps, eps], [-eps, M, eps - M], [eps, eps - M, M]])
    return GgmModel.from_precision(theta, name=f"no_apx_submodularity(eps={eps},M={M})")


def big_cancellation(C: float = 10.0, kappa: float = 0.5) -> GgmModel:
    if C <= 0 or not 0 < kappa <= 1:
        raise BadParams("need C > 0 and kappa in (0, 1]")
    b = C**2 / kappa**2
    theta = np.array([[1.0, C, -C], [C, b, 1.0 - b], [-C, 1.0 - b, b]])
    return GgmModel.from_precision(theta, name=f"big_cancellation(C={C},kappa={kappa})")


def walk_summable_r(r: float = 0.39) -> GgmModel:
    theta = np.array([[1.0, -r, r, r], [-r, 1.0, r, 0.0], [r, r, 1.0, r], [r, 0.0, r, 1.0]])
    return GgmModel.from_precision(theta, name=f"walk_summable_r(r={r})")


COUNTEREXAMPLES = {
    "no_submodularity": no_submodularity,
    "no_apx_submodularity": no_apx_submodularity,
    "big_cancellation": big_cancellation,
    "walk_summable_r": walk_summable_r,
}


def counterexample(name: str, **params) -> GgmModel:
    try:
        ctor = COUNTEREXAMPLES[name]
    except KeyError:
        raise UnknownName(f"unknown counterexample {name!r}; known: {sorted(COUNTEREXAMPLES)}") from None
    try:
        return ctor(**params)
    except TypeError as exc:
        raise BadParams(str(exc)) from exc


@dataclass(frozen=True)
class GeneratorSpec:
    """A model family plus its parameters, buildable on demand."""

    family: str
    params: dict = field(default_factory=dict)

    def build(self, **overrides) -> GgmModel:
        params = {**self.params, **overrides}
        try:
            return self._build(params)
        except TypeError as exc:
            raise BadParams(f"{self.family}: {exc}") from exc

    def _build(self, params: dict) -> GgmModel:
        if self.family == "path_cliques":
            return path_cliques(**params)
        if self.family == "gaussian_walk":
            return gaussian_walk(**params)
        if self.family == "gff":
            return gff(**params)
        if self.family == "break_greedy":
            return break_greedy(**params)
        if self.family == "possibly_hard":
            return possibly_hard(**params)
        if self.family == "counterexample":
            params = dict(params)
            return counterexample(params.pop("name"), **params)
        raise UnknownName(f"unknown family {self.family!r}")
