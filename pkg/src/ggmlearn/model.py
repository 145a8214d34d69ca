"""Gaussian graphical model type and its structural quantities.

A :class:`GgmModel` holds the precision matrix ``theta`` together with the
covariance ``sigma`` computed once at construction. Everything here is an
exact population quantity: class predicates (attractive, SDD,
walk-summable), the diagonal rescaling that turns a walk-summable precision
matrix into an SDD one, the lifted Laplacian of an SDD matrix, effective
resistances, and conditional variances / regression coefficients.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import linalg

from . import matrixcore as mc
from .errors import (
    IndexOutOfRange,
    NotSDD,
    NotWalkSummable,
    SingularSubmatrix,
    ValidationError,
)

ZERO_TOL = 1e-12
WALK_SUMMABLE_TOL = 1e-10


def edge_mask(theta: np.ndarray, zero_tol: float = ZERO_TOL) -> np.ndarray:
    """Boolean adjacency: ``|theta_ij| > zero_tol * sqrt(theta_ii theta_jj)``, no diagonal."""
    d = np.sqrt(np.abs(np.diag(theta)))
    mask = np.abs(theta) > zero_tol * np.outer(d, d)
    np.fill_diagonal(mask, False)
    return mask


@dataclass(frozen=True, eq=False)
class GgmModel:
    """Zero-mean GGM given by its precision matrix.

    ``primary`` records which side was supplied exactly ("precision" or
    "covariance"); the other side is derived numerically unless both are
    passed in. Instances are immutable.
    """

    theta: np.ndarray
    sigma: np.ndarray = None
    primary: str = "precision"
    name: str = ""
    _meta: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        theta = mc.as_symmetric(self.theta)
        mc.cholesky(theta)
        if self.sigma is None:
            sigma = mc.inverse_spd(theta)
        else:
            sigma = mc.as_symmetric(self.sigma)
        check = theta @ sigma - np.eye(theta.shape[0])
        scale = np.linalg.norm(theta) * np.linalg.norm(sigma)
        if np.linalg.norm(check) > 1e-8 * max(scale, 1.0):
            raise ValidationError("precision and covariance are not inverse to each other")
        theta.setflags(write=False)
        sigma.setflags(write=False)
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "sigma", sigma)

    @classmethod
    def from_precision(cls, theta, name: str = "", sigma=None) -> "GgmModel":
        return cls(theta=theta, sigma=sigma, primary="precision", name=name)

    @classmethod
    def from_covariance(cls, sigma, name: str = "", theta=None) -> "GgmModel":
        sigma = mc.as_symmetric(sigma)
        if theta is None:
            theta = mc.inverse_spd(sigma)
        return cls(theta=theta, sigma=sigma, primary="covariance", name=name)

    @property
    def n(self) -> int:
        return self.theta.shape[0]

    @cached_property
    def adjacency_matrix(self) -> np.ndarray:
        return edge_mask(self.theta)

    @cached_property
    def edges(self) -> frozenset:
        ii, jj = np.nonzero(np.triu(self.adjacency_matrix))
        return frozenset(zip(ii.tolist(), jj.tolist()))

    def neighbors(self, i: int) -> list[int]:
        return np.flatnonzero(self.adjacency_matrix[i]).tolist()

    @cached_property
    def kappa(self):
        return kappa_of(self)

    @cached_property
    def max_degree(self) -> int:
        return max_degree_of(self)

    @cached_property
    def digest(self) -> str:
        h = hashlib.sha256()
        h.update(np.ascontiguousarray(self.theta).tobytes())
        return h.hexdigest()[:16]

    def rescaled(self, scale) -> "GgmModel":
        """Model of ``X / scale`` i.e. precision ``diag(scale) theta diag(scale)``."""
        s = np.asarray(scale, dtype=float)
        return GgmModel(
            theta=s[:, None] * self.theta * s[None, :],
            sigma=self.sigma / np.outer(s, s),
            primary=self.primary,
            name=self.name,
        )


def _check_node(model_or_n, *nodes):
    n = model_or_n if isinstance(model_or_n, int) else model_or_n.shape[0]
    for v in nodes:
        if not 0 <= int(v) < n:
            raise IndexOutOfRange(f"node {v} out of range for n={n}")


def normalized_offdiag(theta: np.ndarray) -> np.ndarray:
    """``|theta_ij| / sqrt(theta_ii theta_jj)`` with a zero diagonal."""
    d = np.sqrt(np.diag(theta))
    out = np.abs(theta) / np.outer(d, d)
    np.fill_diagonal(out, 0.0)
    return out


def is_attractive(theta: np.ndarray, tol: float = 0.0) -> bool:
    off = theta - np.diag(np.diag(theta))
    return bool(np.all(off <= tol * np.max(np.abs(np.diag(theta)))))


def sdd_slack(theta: np.ndarray) -> np.ndarray:
    """Per-row diagonal dominance margin ``theta_ii - sum_{j != i} |theta_ij|``."""
    off = np.abs(theta).sum(axis=1) - np.abs(np.diag(theta))
    return np.diag(theta) - off


def is_sdd(theta: np.ndarray, tol: float = 0.0) -> bool:
    return bool(np.all(sdd_slack(theta) >= -tol * np.max(np.abs(np.diag(theta)))))


def walk_summable_margin(theta: np.ndarray) -> float:
    """Smallest eigenvalue of ``I - A_bar`` after normalizing to unit diagonal.

    Positive iff the matrix is walk-summable; invariant under positive
    diagonal congruence.
    """
    a_bar = normalized_offdiag(theta)
    return float(np.linalg.eigvalsh(np.eye(theta.shape[0]) - a_bar)[0])


def classify(model: GgmModel, tol: float = WALK_SUMMABLE_TOL) -> dict:
    theta = model.theta
    return {
        "attractive": is_attractive(theta),
        "sdd": is_sdd(theta),
        "walk_summable": walk_summable_margin(theta) > tol,
    }


def sdd_rescaling(model: GgmModel, tol: float = WALK_SUMMABLE_TOL) -> np.ndarray:
    """Positive vector ``d`` with ``diag(d) @ theta @ diag(d)`` SDD.

    Normalizes the diagonal to one, then scales by the unit Perron vector of
    the absolute off-diagonal part. The returned vector is the product of
    both scalings.
    """
    if walk_summable_margin(model.theta) <= tol:
        raise NotWalkSummable("model is not walk-summable")
    unit = 1.0 / np.sqrt(np.diag(model.theta))
    return unit * _blockwise_perron(normalized_offdiag(model.theta))


def _blockwise_perron(a_bar: np.ndarray) -> np.ndarray:
    # one Perron vector per connected component keeps every entry strictly positive
    from scipy.sparse.csgraph import connected_components

    n_comp, labels = connected_components(a_bar > 0, directed=False)
    v = np.empty(a_bar.shape[0])
    for c in range(n_comp):
        idx = np.flatnonzero(labels == c)
        if len(idx) == 1:
            v[idx] = 1.0
        else:
            _, vc = mc.spectral_radius_nonneg(a_bar[np.ix_(idx, idx)])
            v[idx] = vc
    return v / np.linalg.norm(v)


@dataclass(frozen=True)
class LiftedLaplacian:
    """Generalized Laplacian ``[[L, P], [P, L]]`` of size ``2n``.

    Node ``i`` of the original matrix maps to index ``i`` (``e_i``) and to
    index ``n + i`` (``e'_i``).
    """

    matrix: np.ndarray
    n: int

    def lift(self, x):
        x = np.asarray(x, dtype=float)
        return np.concatenate([x, -x])

    def pair(self, i: int) -> tuple[int, int]:
        return i, self.n + i


def lift_laplacian(theta_sdd, tol: float = 1e-12) -> LiftedLaplacian:
    theta = mc.as_symmetric(theta_sdd)
    if not is_sdd(theta, tol):
        raise NotSDD("lift requires an SDD matrix")
    n = theta.shape[0]
    off = theta - np.diag(np.diag(theta))
    lap = np.diag(np.diag(theta)) + np.minimum(off, 0.0)
    pos = -np.maximum(off, 0.0)
    big = np.block([[lap, pos], [pos, lap]])
    return LiftedLaplacian(matrix=big, n=n)


def effective_resistance(lap, i: int, j: int, rank_tol: float = 1e-12) -> float:
    lap = lap.matrix if isinstance(lap, LiftedLaplacian) else np.asarray(lap, dtype=float)
    _check_node(lap.shape[0], i, j)
    if i == j:
        return 0.0
    e = np.zeros(lap.shape[0])
    e[i], e[j] = 1.0, -1.0
    return float(max(e @ mc.pseudo_inverse(lap, rank_tol) @ e, 0.0))


def laplacian_from_weights(weights) -> np.ndarray:
    """Graph Laplacian of a symmetric nonnegative weight matrix (diagonal ignored)."""
    w = np.array(weights, dtype=float)
    np.fill_diagonal(w, 0.0)
    return np.diag(w.sum(axis=1)) - w


def _as_index_list(s, n: int, exclude: int) -> list[int]:
    s = sorted(set(int(v) for v in s))
    _check_node(n, *s)
    if exclude in s:
        raise ValidationError(f"node {exclude} is in its own conditioning set")
    return s


def conditional_coefficients(model: GgmModel, i: int, s) -> np.ndarray:
    """Population regression vector ``w`` with ``E[X_i | X_S] = w . X_S``.

    Entries follow the sorted order of ``s``.
    """
    _check_node(model.n, i)
    s = _as_index_list(s, model.n, i)
    if not s:
        return np.zeros(0)
    sig = model.sigma
    try:
        factor = linalg.cho_factor(sig[np.ix_(s, s)], lower=True)
    except linalg.LinAlgError as exc:
        raise SingularSubmatrix("covariance submatrix is singular") from exc
    return linalg.cho_solve(factor, sig[s, i])


def conditional_variance(model: GgmModel, i: int, s) -> float:
    """``Var(X_i | X_S) = Sigma_ii - Sigma_iS Sigma_SS^{-1} Sigma_Si``."""
    _check_node(model.n, i)
    s = _as_index_list(s, model.n, i)
    sig = model.sigma
    if not s:
        return float(sig[i, i])
    w = conditional_coefficients(model, i, s)
    return float(sig[i, i] - sig[i, s] @ w)


def kappa_of(model: GgmModel):
    """Smallest normalized edge strength, or ``None`` for an edgeless model."""
    mask = model.adjacency_matrix
    if not mask.any():
        return None
    return float(np.min(normalized_offdiag(model.theta)[mask]))


def max_degree_of(model: GgmModel) -> int:
    deg = int(model.adjacency_matrix.sum(axis=1).max()) if model.n > 1 else 0
    if __debug__ and deg > 0 and walk_summable_margin(model.theta) > WALK_SUMMABLE_TOL:
        kappa = kappa_of(model)
        assert deg <= 1.0 / kappa**2 + 1e-9, "degree exceeds 1/kappa^2 on a walk-summable model"
    return deg
