"""Canonical JSON for models, estimates and run reports.

Floats are written with 17 significant digits and object keys are sorted,
so equal inputs always produce byte-identical files.
"""
from __future__ import annotations

import json
import math

import numpy as np

from .errors import BadParams, DimensionMismatch, ValidationError
from .learners import NeighborhoodEstimate, PrecisionEstimate
from .model import GgmModel


def _float(v: float) -> str:
    if math.isnan(v):
        return "NaN"
    if math.isinf(v):
        return "Infinity" if v > 0 else "-Infinity"
    text = format(v, ".17g")
    if not any(c in text for c in ".eE"):
        text += ".0"
    return text


def _encode(obj, out: list) -> None:
    if obj is None or isinstance(obj, (bool, np.bool_)):
        out.append("null" if obj is None else ("true" if obj else "false"))
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(_float(float(obj)))
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, np.ndarray):
        _encode(obj.tolist(), out)
    elif isinstance(obj, dict):
        out.append("{")
        for k, key in enumerate(sorted(obj, key=str)):
            if k:
                out.append(",")
            out.append(json.dumps(str(key)))
            out.append(":")
            _encode(obj[key], out)
        out.append("}")
    elif isinstance(obj, (list, tuple, set, frozenset)):
        items = sorted(obj) if isinstance(obj, (set, frozenset)) else obj
        out.append("[")
        for k, item in enumerate(items):
            if k:
                out.append(",")
            _encode(item, out)
        out.append("]")
    else:
        raise BadParams(f"cannot serialize {type(obj).__name__}")


def dumps(obj) -> str:
    """Canonical JSON text (sorted keys, 17-digit floats, trailing newline)."""
    out: list = []
    _encode(obj, out)
    out.append("\n")
    return "".join(out)


def dump(obj, path) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(dumps(obj))


def load(path):
    with open(path) as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: invalid JSON ({exc})") from exc


# ------------------------------------------------------------------ models


def model_to_dict(model: GgmModel) -> dict:
    out = {"n": model.n, "precision": model.theta, "name": model.name, "primary": model.primary}
    if model.primary == "covariance":
        out["covariance"] = model.sigma
    return out


def model_from_dict(doc: dict) -> GgmModel:
    if not isinstance(doc, dict) or "n" not in doc or "precision" not in doc:
        raise ValidationError('model file needs "n" and "precision"')
    theta = np.asarray(doc["precision"], dtype=float)
    n = int(doc["n"])
    if theta.shape != (n, n):
        raise DimensionMismatch(f"precision is {theta.shape}, expected ({n}, {n})")
    sigma = doc.get("covariance")
    name = str(doc.get("name", ""))
    if sigma is not None:
        sigma = np.asarray(sigma, dtype=float)
        if sigma.shape != (n, n):
            raise DimensionMismatch("covariance shape does not match precision")
        return GgmModel(theta=theta, sigma=sigma, primary=doc.get("primary", "covariance"), name=name)
    return GgmModel.from_precision(theta, name=name)


def write_model(model: GgmModel, path) -> None:
    dump(model_to_dict(model), path)


def read_model(path) -> GgmModel:
    return model_from_dict(load(path))


# --------------------------------------------------------------- estimates


def _nbhd_to_dict(est: NeighborhoodEstimate) -> dict:
    return {
        "node": est.node,
        "support": list(est.support),
        "coefficients": np.asarray(est.coefficients, dtype=float),
        "sigma_hat_sq": est.sigma_hat_sq,
    }


def estimate_to_dict(est: PrecisionEstimate, algorithm: str, config: dict) -> dict:
    return {
        "algorithm": algorithm,
        "config": config,
        "theta_hat": est.theta_hat,
        "edges": [list(e) for e in sorted(est.edge_set)],
        "per_node": [_nbhd_to_dict(nb) for nb in est.per_node if isinstance(nb, NeighborhoodEstimate)],
    }


def estimate_from_dict(doc: dict) -> PrecisionEstimate:
    if not isinstance(doc, dict) or "theta_hat" not in doc:
        raise ValidationError('result file needs "theta_hat"')
    theta = np.asarray(doc["theta_hat"], dtype=float)
    if theta.ndim != 2 or theta.shape[0] != theta.shape[1]:
        raise DimensionMismatch("theta_hat must be square")
    edges = frozenset(tuple(sorted((int(a), int(b)))) for a, b in doc.get("edges", []))
    return PrecisionEstimate(theta, edges, [])


def read_estimate(path) -> PrecisionEstimate:
    return estimate_from_dict(load(path))
