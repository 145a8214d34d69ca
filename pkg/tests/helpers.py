"""Random model constructors shared by the test modules."""
from __future__ import annotations

import numpy as np

from ggmlearn.model import GgmModel


def _random_congruence(theta: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    s = np.exp(rng.uniform(-1.0, 1.0, theta.shape[0]))
    return s[:, None] * theta * s[None, :]


def _random_graph(n: int, d: int, rng: np.random.Generator, p: float = 0.6) -> np.ndarray:
    """Symmetric 0/1 adjacency with maximum degree at most ``d``."""
    adj = np.zeros((n, n), dtype=bool)
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    for k in rng.permutation(len(pairs)):
        i, j = pairs[k]
        if rng.random() < p and adj[i].sum() < d and adj[j].sum() < d:
            adj[i, j] = adj[j, i] = True
    return adj


def random_attractive(n: int, rng: np.random.Generator, d: int | None = None, radius=(0.3, 0.95)) -> GgmModel:
    """``D (I - A) D`` with ``A >= 0`` of spectral radius in ``radius``."""
    adj = _random_graph(n, d if d is not None else n - 1, rng)
    a = np.where(adj, rng.uniform(0.2, 1.0, (n, n)), 0.0)
    a = np.triu(a, 1)
    a = a + a.T
    rho = np.max(np.abs(np.linalg.eigvalsh(a))) if adj.any() else 1.0
    a *= rng.uniform(*radius) / rho
    return GgmModel.from_precision(_random_congruence(np.eye(n) - a, rng), name="random_attractive")


def random_kappa_attractive(n: int, d: int, rng: np.random.Generator) -> GgmModel:
    """Attractive model with degree at most ``d`` and every normalized edge weight in ``[0.3, 0.9] / d``."""
    adj = _random_graph(n, d, rng)
    a = np.where(adj, rng.uniform(0.3, 0.9, (n, n)) / max(d, 1), 0.0)
    a = np.triu(a, 1)
    a = a + a.T
    return GgmModel.from_precision(_random_congruence(np.eye(n) - a, rng), name="random_kappa_attractive")


def random_sdd(n: int, rng: np.random.Generator, d: int | None = None) -> GgmModel:
    """Signed diagonally dominant precision."""
    adj = _random_graph(n, d if d is not None else n - 1, rng)
    w = np.where(adj, rng.uniform(0.2, 1.0, (n, n)) * rng.choice([-1.0, 1.0], (n, n)), 0.0)
    w = np.triu(w, 1)
    w = w + w.T
    diag = np.abs(w).sum(axis=1) + rng.uniform(0.05, 1.0, n)
    return GgmModel.from_precision(w + np.diag(diag), name="random_sdd")


def random_walk_summable(n: int, rng: np.random.Generator, d: int | None = None) -> GgmModel:
    """Signed walk-summable precision that is usually not SDD."""
    adj = _random_graph(n, d if d is not None else n - 1, rng)
    a = np.where(adj, rng.uniform(0.2, 1.0, (n, n)), 0.0)
    a = np.triu(a, 1)
    a = a + a.T
    rho = np.max(np.abs(np.linalg.eigvalsh(a))) if adj.any() else 1.0
    a *= rng.uniform(0.5, 0.95) / rho
    signs = np.triu(rng.choice([-1.0, 1.0], (n, n)), 1)
    signs = signs + signs.T
    return GgmModel.from_precision(_random_congruence(np.eye(n) - signs * a, rng), name="random_walk_summable")


def chain(n: int = 3) -> GgmModel:
    """Tridiagonal precision with 2 on the diagonal and -1 next to it."""
    theta = 2.0 * np.eye(n) - np.eye(n, k=1) - np.eye(n, k=-1)
    return GgmModel.from_precision(theta, name=f"chain{n}")
