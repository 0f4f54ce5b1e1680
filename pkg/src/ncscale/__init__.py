"""Noncommutative rank, smallest shrunk subspaces and majorized operator scaling."""

__version__ = "0.1.0"

from .kernels import BACKEND
from .numla import CPMap
from .opscale import MajSpec, approx_indep, decision_sinkhorn, maj_sinkhorn
from .shrunk import randomized_shrunk, round_subspaces

__all__ = [
    "__version__",
    "BACKEND",
    "CPMap",
    "MajSpec",
    "approx_indep",
    "decision_sinkhorn",
    "maj_sinkhorn",
    "randomized_shrunk",
    "round_subspaces",
]
