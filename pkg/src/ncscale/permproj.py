"""KL projections onto the down-closed permutahedron P_alpha and onto half-spaces."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels

__all__ = [
    "MajorizationTarget",
    "KLProjection",
    "HalfspaceProjection",
    "alpha_r",
    "kl_divergence",
    "kl_project",
    "halfspace_project",
    "majorization_slack",
]


@dataclass(frozen=True)
class MajorizationTarget:
    """Nonincreasing nonnegative vector alpha defining P_alpha = {p >= 0 : p weakly majorized by alpha}."""

    alpha: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.alpha, dtype=float).ravel()
        if np.any(a < 0) or np.any(np.diff(a) > 0):
            raise ValueError("alpha must be nonnegative and nonincreasing")
        object.__setattr__(self, "alpha", a)

    def __len__(self):
        return self.alpha.size


def alpha_r(n: int, r: int) -> np.ndarray:
    """n - r ones followed by r copies of 1 - 1/n."""
    if not 0 <= r <= n:
        raise ValueError("need 0 <= r <= n")
    a = np.ones(n)
    if r:
        a[n - r:] = 1.0 - 1.0 / n
    return a


def kl_divergence(p, q) -> float:
    """Generalized KL divergence sum p log(p/q) - p + q, with 0 log 0 = 0."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise ValueError("shape mismatch")
    if np.any(p < 0) or np.any(q < 0):
        raise ValueError("entries must be nonnegative")
    if np.any((p > 0) & (q <= 0)):
        raise ValueError("support of p must lie inside support of q")
    return max(0.0, float(kernels.gen_kl(p, q)))


@dataclass(frozen=True)
class KLProjection:
    p: np.ndarray          # projection, in the input order of q
    dual_x: np.ndarray     # nonincreasing exponents, aligned with q sorted nonincreasing
    order: np.ndarray      # permutation sorting q nonincreasing (stable)
    divergence: float


def kl_project(q, target: MajorizationTarget | np.ndarray) -> KLProjection:
    """Generalized KL projection of ``q`` onto P_alpha with dual recovery."""
    alpha = target.alpha if isinstance(target, MajorizationTarget) else MajorizationTarget(target).alpha
    q = np.asarray(q, dtype=float).ravel()
    if q.shape != alpha.shape:
        raise ValueError("q and alpha must have equal length")
    if np.any(q < 0):
        raise ValueError("q must be nonnegative")
    order = np.argsort(-q, kind="stable")
    qs = q[order]
    x = np.asarray(kernels.kl_dual_sorted(qs, alpha), dtype=float)
    ps = qs * np.exp(-x)
    p = np.empty_like(ps)
    p[order] = ps
    div = float(kernels.kl_projection_gap(qs, x))
    return KLProjection(p=p, dual_x=x, order=order, divergence=max(div, 0.0))


@dataclass(frozen=True)
class HalfspaceProjection:
    z: float
    divergence: float


def halfspace_project(nu, w, k: float, tol: float = 1e-12) -> HalfspaceProjection:
    """Minimize sum exp(w_i z) nu_i - k z over z >= 0.

    The divergence of ``nu`` from {x : w.x >= k} equals sum(nu) minus this minimum.
    """
    nu = np.asarray(nu, dtype=float).ravel()
    w = np.asarray(w, dtype=float).ravel()
    if nu.shape != w.shape:
        raise ValueError("shape mismatch")
    if np.any(w < 0):
        raise ValueError("weights must be nonnegative")
    z = float(kernels.halfspace_z(nu, w, float(k), tol))
    value = float(np.sum(np.exp(w * z) * nu) - k * z)
    return HalfspaceProjection(z=z, divergence=max(0.0, float(np.sum(nu)) - value))


def majorization_slack(x, alpha) -> float:
    """Largest prefix-sum excess of sorted ``x`` over ``alpha`` (<= 0 means x is weakly majorized)."""
    xs = np.sort(np.asarray(x, dtype=float))[::-1]
    a = np.asarray(alpha, dtype=float)
    return float(np.max(np.cumsum(xs) - np.cumsum(a)))
