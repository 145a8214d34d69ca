"""Seeded sampling, empirical moments, standardization and sample splitting.

Random numbers come from numpy's Philox4x64 counter-based generator keyed by
the 64-bit seed; normals use numpy's ziggurat ``standard_normal``. Derived
streams for sub-tasks use ``seed XOR blake2b(task_id)`` as the key, so
per-node or per-trial work is reproducible regardless of execution order.
A reference sequence for seed 0 lives in ``tests/data/philox_seed0.json``.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, replace

import numpy as np

from . import matrixcore as mc
from .errors import BadParams, EmptySplit, TooFewSamples, ZeroVarianceColumn

MASK64 = (1 << 64) - 1


def _task_hash(task_id) -> int:
    digest = hashlib.blake2b(repr(task_id).encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def derive_seed(seed: int, task_id=None) -> int:
    seed = int(seed) & MASK64
    if task_id is None:
        return seed
    return seed ^ _task_hash(task_id)


def derive_rng(seed: int, task_id=None) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=derive_seed(seed, task_id)))


@dataclass(frozen=True, eq=False)
class SampleSet:
    """``m x n`` data matrix with provenance and named row splits.

    ``splits`` maps a name to a sorted array of row indices; ``"all"`` is
    always present.
    """

    data: np.ndarray
    seed: int = 0
    model_hash: str = ""
    splits: dict = field(default_factory=dict)

    def __post_init__(self):
        data = np.array(self.data, dtype=float)
        if data.ndim != 2 or data.shape[0] < 1:
            raise BadParams("sample data must be a non-empty 2-D array")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)
        splits = {"all": np.arange(data.shape[0])}
        for name, rows in dict(self.splits).items():
            rows = np.asarray(rows, dtype=int)
            if rows.size and (rows.min() < 0 or rows.max() >= data.shape[0]):
                raise BadParams(f"split {name!r} refers to missing rows")
            splits[name] = rows
        named = [set(v.tolist()) for k, v in splits.items() if k != "all"]
        for a in range(len(named)):
            for b in range(a + 1, len(named)):
                if named[a] & named[b]:
                    raise BadParams("splits overlap")
        object.__setattr__(self, "splits", splits)

    @property
    def m(self) -> int:
        return self.data.shape[0]

    @property
    def n(self) -> int:
        return self.data.shape[1]

    def rows(self, split: str = "all") -> np.ndarray:
        try:
            idx = self.splits[split]
        except KeyError:
            raise EmptySplit(f"no split named {split!r}") from None
        if idx.size == 0:
            raise EmptySplit(f"split {split!r} is empty")
        if split == "all":
            return self.data
        return self.data[idx]


def sample(model, m: int, seed: int) -> SampleSet:
    """``m`` i.i.d. rows from ``N(0, model.sigma)``.

    Rows are ``z @ L.T`` with ``L = chol(sigma)`` and ``z`` drawn row-major,
    so the first ``m'`` rows for a given seed do not depend on ``m``.
    """
    if m < 1:
        raise BadParams("m must be at least 1")
    lower = mc.cholesky(model.sigma)
    z = derive_rng(seed).standard_normal((m, model.n))
    return SampleSet(data=z @ lower.T, seed=int(seed), model_hash=model.digest)


def empirical_covariance(s: SampleSet, split: str = "all") -> np.ndarray:
    """``X^T X / m`` over the split rows; no mean is subtracted."""
    x = s.rows(split)
    cov = x.T @ x / x.shape[0]
    return 0.5 * (cov + cov.T)


def standardize(s: SampleSet):
    """Center each column and scale it to unit empirical variance.

    Returns the new sample set and the per-column scale (standard deviation)
    that was divided out.
    """
    x = s.data
    centered = x - x.mean(axis=0)
    scale = np.sqrt(np.mean(centered**2, axis=0))
    if np.any(scale <= 1e-14 * (1.0 + np.abs(x).max(axis=0))):
        raise ZeroVarianceColumn("a column has zero empirical variance")
    out = replace(s, data=centered / scale, splits={k: v for k, v in s.splits.items() if k != "all"})
    return out, scale


def split(s: SampleSet, parts: int) -> SampleSet:
    """Contiguous equal blocks ``s1..s{parts}``; leftover rows are dropped."""
    if parts not in (2, 3):
        raise BadParams("parts must be 2 or 3")
    size = s.m // parts
    if size < 1:
        raise TooFewSamples(f"cannot split {s.m} rows into {parts} parts")
    named = {f"s{k + 1}": np.arange(k * size, (k + 1) * size) for k in range(parts)}
    return replace(s, splits=named)


def write_csv(s: SampleSet, path) -> None:
    header = ",".join(f"x{k + 1}" for k in range(s.n))
    with open(path, "w", newline="") as fh:
        fh.write(header + "\n")
        for row in s.data:
            fh.write(",".join(format(float(v), ".17g") for v in row) + "\n")


def read_csv(path, seed: int = 0, model_hash: str = "") -> SampleSet:
    with open(path) as fh:
        header = fh.readline().strip().split(",")
    if not header or not all(h.startswith("x") for h in header):
        raise BadParams("sample CSV header must be x1,...,xn")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if data.shape[1] != len(header):
        raise BadParams("sample CSV rows do not match the header")
    return SampleSet(data=data, seed=seed, model_hash=model_hash)
