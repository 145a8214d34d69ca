"""Accuracy metrics and sample-size sweeps for the structure learners."""
from __future__ import annotations

import csv
import itertools
import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from . import learners as L
from .errors import (
    BadParams,
    DimensionMismatch,
    NoConvergence,
    RankDeficient,
    TooFewSamples,
    Unattainable,
    ZeroDiagonal,
)
from .generators import GeneratorSpec
from .model import GgmModel
from .sampler import SampleSet, derive_seed, sample


def _theta(obj) -> np.ndarray:
    if isinstance(obj, L.PrecisionEstimate):
        return obj.theta_hat
    if isinstance(obj, GgmModel):
        return obj.theta
    return np.asarray(obj, dtype=float)


def structure_error(est, truth: GgmModel, kappa: float | None = None) -> float:
    """Incorrect edges per node after thresholding ``est`` at ``kappa / 2``.

    Every inserted or deleted edge counts once at each endpoint, so the
    value is ``2 |E_est ^ E_true| / n``. ``kappa`` defaults to the truth's.
    """
    theta = _theta(est)
    if theta.shape != truth.theta.shape:
        raise DimensionMismatch(f"estimate is {theta.shape}, truth is {truth.theta.shape}")
    if kappa is None:
        kappa = truth.kappa if truth.kappa is not None else 1.0
    found = L.threshold_edges(theta, kappa)
    return 2.0 * len(found ^ truth.edges) / truth.n


def l1_error(est, truth) -> float:
    """Entrywise l1 norm of ``theta_hat - theta`` divided by ``n``."""
    a, b = _theta(est), _theta(truth)
    if a.shape != b.shape:
        raise DimensionMismatch(f"shapes {a.shape} and {b.shape} differ")
    return float(np.abs(a - b).sum() / a.shape[0])


def cv_objective(est, holdout) -> float:
    """Mean squared neighborhood-prediction error on held-out rows.

    Each node is predicted from the others with coefficients
    ``-(theta_ij + theta_ji) / (2 theta_ii)``; the squared errors are
    averaged over nodes and rows. The holdout is used as given (it is
    expected to be standardized already).
    """
    theta = _theta(est)
    x = holdout.data if isinstance(holdout, SampleSet) else np.asarray(holdout, dtype=float)
    if x.shape[1] != theta.shape[0]:
        raise DimensionMismatch("holdout columns do not match the estimate")
    d = np.diag(theta)
    if np.any(d <= 0):
        raise ZeroDiagonal("estimate has a nonpositive diagonal entry")
    coef = (theta + theta.T) / (2.0 * d[:, None])
    np.fill_diagonal(coef, 1.0)
    resid = x @ coef.T
    return float(np.mean(resid**2))


def ws_distance(est, tol: float = 1e-9, max_iter: int = 20000) -> float:
    """Relative Frobenius distance to the nearest walk-summable matrix.

    Approximate: the search is restricted to matrices with the sign and
    zero pattern of ``est``. Under the sign flip that makes every off
    diagonal entry nonpositive, that set is the intersection of the PSD cone
    with a polyhedral cone, and Dykstra's alternating projections give the
    nearest point.
    """
    theta = _theta(est)
    if not np.allclose(theta, theta.T, atol=1e-12 * (1 + np.abs(theta).max())):
        raise BadParams("ws_distance needs a symmetric matrix")
    n = theta.shape[0]
    off = ~np.eye(n, dtype=bool)
    zero = off & (theta == 0)
    target = np.where(off, -np.abs(theta), theta)
    norm = np.linalg.norm(target)
    if norm == 0:
        return 0.0

    def proj_cone(a):
        out = a.copy()
        out[off] = np.minimum(out[off], 0.0)
        out[zero] = 0.0
        return out

    def proj_psd(a):
        lam, vec = np.linalg.eigh(0.5 * (a + a.T))
        return (vec * np.maximum(lam, 0.0)) @ vec.T

    x = target.copy()
    p = np.zeros_like(x)
    q = np.zeros_like(x)
    for _ in range(max_iter):
        y = proj_psd(x + p)
        p = x + p - y
        x_new = proj_cone(y + q)
        q = y + q - x_new
        move = np.linalg.norm(x_new - x)
        x = x_new
        if move <= tol * norm and np.linalg.norm(y - x) <= tol * norm:
            break
    else:
        raise NoConvergence("Dykstra projections did not converge")
    return float(np.linalg.norm(x - target) / norm)


# ------------------------------------------------------------------ grids


def default_grids() -> dict:
    text = resources.files("ggmlearn").joinpath("data/grids.json").read_text()
    return json.loads(text)


def expand_grid(grid: dict) -> list[dict]:
    """Cartesian product of a ``{name: [values]}`` grid, in sorted-key order."""
    keys = sorted(grid)
    return [dict(zip(keys, vals)) for vals in itertools.product(*(grid[k] for k in keys))]


def cfg_id(cfg: dict) -> str:
    return ",".join(f"{k}={cfg[k]:.6g}" if isinstance(cfg[k], float) else f"{k}={cfg[k]}" for k in sorted(cfg))


def run_grid(samples, algorithm: str, grid: list[dict], base: L.LearnerConfig) -> dict:
    """Estimates for every grid point, sharing work between grid points where possible."""
    n = samples.n
    if algorithm == "greedy-and-prune" and all(set(g) <= {"t_steps", "nu"} for g in grid):
        steps = sorted({int(g.get("t_steps", base.greedy_steps())) for g in grid})
        nus = sorted({float(g.get("nu", base.greedy_nu())) for g in grid})
        per_node = [L.greedy_and_prune_grid(samples, i, steps, nus) for i in range(n)]
        out = {}
        for g in grid:
            key = (int(g.get("t_steps", base.greedy_steps())), float(g.get("nu", base.greedy_nu())))
            out[cfg_id(g)] = L.merge_and_symmetrize([p[key] for p in per_node], "intersection", n)
        return out
    if algorithm == "hybrid-mb" and all(set(g) <= {"gamma_prime", "tau"} for g in grid):
        out = {}
        taus = sorted({float(g.get("tau", base.hybrid_tau())) for g in grid})
        for tau in taus:
            sub = [g for g in grid if float(g.get("tau", base.hybrid_tau())) == tau]
            gps = [float(g["gamma_prime"]) for g in sub]
            ests = L.hybrid_mb_grid(samples, L.LearnerConfig(**{**base.to_dict(), "tau": tau}), gps)
            for g in sub:
                out[cfg_id(g)] = ests[float(g["gamma_prime"])]
        return out
    out = {}
    for g in grid:
        cfg = L.LearnerConfig(**{**base.to_dict(), **g})
        out[cfg_id(g)] = L.learn(samples, algorithm, cfg)
    return out


# ------------------------------------------------------------------ sweeps

CSV_COLUMNS = ("n", "m", "trial", "algorithm", "cfg_id", "structure_error", "l1_error", "runtime_ms", "seed")


@dataclass
class SweepResult:
    """Per-cell records of a sample-size search and the minimal ``m`` per ``n``.

    ``rows`` holds one record per ``(n, m, trial, cfg)`` evaluation, sorted
    by ``(n, m, trial, cfg_id)``; ``summary`` maps ``n`` to the chosen ``m``,
    its best configuration and the trial-averaged error there.
    """

    algorithm: str
    rows: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    seed: int = 0
    config: dict = field(default_factory=dict)

    def sort(self) -> None:
        self.rows.sort(key=lambda r: (r["n"], r["m"], r["trial"], r["cfg_id"]))

    def write_csv(self, path) -> None:
        self.sort()
        with open(path, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
            w.writeheader()
            for r in self.rows:
                w.writerow({k: (format(v, ".17g") if isinstance(v, float) else v) for k, v in r.items()})

    def to_summary(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "seed": self.seed,
            "config": self.config,
            "minimal_m": {str(k): v for k, v in sorted(self.summary.items())},
        }


def trial_seed(seed: int, n: int, trial: int) -> int:
    """Seed of one trial; independent of ``m`` so smaller samples are prefixes of larger ones."""
    return derive_seed(seed, ("trial", int(n), int(trial)))


def evaluate_cell(model, algorithm, grid, base, m, trials, seed, kappa=None, threads=1):
    """Run every trial at sample size ``m``; returns (records, best cfg id, best mean error)."""
    n = model.n

    def one(trial):
        s = trial_seed(seed, n, trial)
        data = sample(model, m, s)
        t0 = time.perf_counter()
        try:
            ests = run_grid(data, algorithm, grid, base)
        except (TooFewSamples, RankDeficient):
            # too few rows for this learner: every configuration fails the cell
            ests = {cfg_id(g): None for g in grid}
        elapsed = (time.perf_counter() - t0) * 1000.0 / max(len(ests), 1)
        recs = []
        for cid, est in sorted(ests.items()):
            recs.append(
                {
                    "n": n,
                    "m": int(m),
                    "trial": trial,
                    "algorithm": algorithm,
                    "cfg_id": cid,
                    "structure_error": math.inf if est is None else structure_error(est, model, kappa),
                    "l1_error": math.inf if est is None else l1_error(est, model),
                    "runtime_ms": elapsed,
                    "seed": s,
                }
            )
        return recs

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            per_trial = list(pool.map(one, range(trials)))
    else:
        per_trial = [one(t) for t in range(trials)]
    records = [r for recs in per_trial for r in recs]
    means = {}
    for r in records:
        means.setdefault(r["cfg_id"], []).append(r["structure_error"])
    best_id = min(sorted(means), key=lambda k: np.mean(means[k]))
    return records, best_id, float(np.mean(means[best_id]))


def min_samples_sweep(
    gen: GeneratorSpec,
    algorithm: str,
    cfg_grid,
    error_threshold: float = 1.0,
    trials: int = 8,
    seed: int = 0,
    ns=(None,),
    base: L.LearnerConfig | None = None,
    m_start: int = 25,
    m_max: int = 20000,
    granularity: int = 25,
    kappa: float | None = None,
    threads: int | None = None,
    overrides: dict | None = None,
) -> SweepResult:
    """Smallest sample size whose best-in-grid mean structure error meets the threshold.

    For each ``n`` the model is ``gen.build(n=n)`` (or ``gen.build()`` when
    ``n`` is ``None``). The size is doubled from ``m_start`` until the
    threshold is met, then bisected down to ``granularity`` samples. Each
    cell picks the grid configuration with the lowest trial-averaged error.
    Settings outside the grid come from ``base``, or else from the model
    (``kappa``, ``d``) updated with ``overrides``.
    Raises :class:`Unattainable` if ``m_max`` is not enough.
    """
    if isinstance(cfg_grid, dict):
        cfg_grid = expand_grid(cfg_grid)
    cfg_grid = list(cfg_grid)
    if not cfg_grid:
        raise BadParams("empty configuration grid")
    if m_start < 1 or granularity < 1 or trials < 1:
        raise BadParams("m_start, granularity and trials must be positive")
    threads = threads or os.cpu_count() or 1
    result = SweepResult(algorithm=algorithm, seed=int(seed), config={
        "generator": {"family": gen.family, "params": gen.params},
        "grid": cfg_grid,
        "error_threshold": error_threshold,
        "trials": trials,
        "granularity": granularity,
    })
    for n in ns:
        model = gen.build(n=n) if n is not None else gen.build()
        cfg = base or L.config_for_model(model, **(overrides or {}))
        cache = {}

        def passes(m):
            if m not in cache:
                recs, best_id, err = evaluate_cell(model, algorithm, cfg_grid, cfg, m, trials, seed, kappa, threads)
                result.rows.extend(recs)
                cache[m] = (err <= error_threshold, best_id, err)
            return cache[m][0]

        lo, hi = 0, m_start
        while not passes(hi):
            lo = hi
            hi *= 2
            if hi > m_max:
                raise Unattainable(m_max, f"n={model.n}: threshold not met with m <= {m_max}")
        while hi - lo > granularity:
            mid = lo + ((hi - lo) // 2 // granularity) * granularity
            if mid <= lo:
                break
            if passes(mid):
                hi = mid
            else:
                lo = mid
        _, best_id, err = cache[hi]
        result.summary[model.n] = {"m": hi, "best_cfg": best_id, "mean_structure_error": err}
    result.sort()
    return result


def best_grid_error(model, algorithm, grid, m, trials, seed, base=None, kappa=None, threads=1):
    """Trial-averaged structure error of the best grid configuration at one sample size."""
    if isinstance(grid, dict):
        grid = expand_grid(grid)
    cfg = base or L.config_for_model(model)
    recs, best_id, err = evaluate_cell(model, algorithm, list(grid), cfg, m, trials, seed, kappa, threads)
    return err, best_id, recs
