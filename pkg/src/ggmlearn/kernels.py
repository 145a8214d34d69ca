"""Kernel backend selection.

The compiled ``_kernels`` extension is used when it was built; otherwise the
numpy implementation in ``_kernels_py`` is loaded. Setting the environment
variable ``GGMLEARN_PURE_PYTHON=1`` forces the numpy version.
"""
from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("GGMLEARN_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl
    except ImportError:
        _impl = _kernels_py

BACKEND = "compiled" if _impl is not _kernels_py else "python"

project_l1_ball = _impl.project_l1_ball
omp_gram = _impl.omp_gram
prune_gram = _impl.prune_gram
best_subsets = _impl.best_subsets
l1_ls_gram = _impl.l1_ls_gram
residual_variance = _impl.residual_variance

__all__ = [
    "BACKEND",
    "project_l1_ball",
    "omp_gram",
    "prune_gram",
    "best_subsets",
    "l1_ls_gram",
    "residual_variance",
]
