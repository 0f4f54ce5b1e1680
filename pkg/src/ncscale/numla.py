"""Floating-point Hermitian linear algebra for completely positive maps."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .exactla import ExactMatrix

__all__ = [
    "CPMap",
    "EigDecomposition",
    "ImplicitPSD",
    "apply_cp",
    "apply_adjoint",
    "size",
    "hermitian_eig",
    "materialize",
    "op_norm_estimate",
]


class CPMap:
    """Completely positive map X -> sum_i A_i X A_i^H given by Kraus operators.

    ``kraus`` has shape (p, m, n).  When every entry is a Gaussian integer the
    exact generators are available through :attr:`exact`, which is what the
    exact routines (Wong sequences, certificate checks) use.  Rescaled copies
    keep pointing at the same exact generators since only their span matters.
    """

    def __init__(self, kraus, exact: Sequence[ExactMatrix] | None = None):
        arr = np.asarray(kraus)
        if arr.ndim == 2:
            arr = arr[None]
        if arr.ndim != 3:
            raise ValueError("kraus must have shape (p, m, n)")
        if arr.shape[0] < 1:
            raise ValueError("need at least one Kraus operator")
        if np.iscomplexobj(arr) and not np.any(arr.imag):
            arr = arr.real
        self.kraus = np.ascontiguousarray(arr, dtype=complex if np.iscomplexobj(arr) else float)
        self._exact = tuple(exact) if exact is not None else None

    @classmethod
    def from_exact(cls, generators: Sequence[ExactMatrix]) -> "CPMap":
        gens = list(generators)
        arr = np.stack([g.to_numpy() for g in gens])
        return cls(arr, exact=gens)

    @property
    def p(self) -> int:
        return self.kraus.shape[0]

    @property
    def m(self) -> int:
        return self.kraus.shape[1]

    @property
    def n(self) -> int:
        return self.kraus.shape[2]

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.kraus)

    @property
    def entry_bound(self) -> float:
        return float(np.max(np.abs(self.kraus))) if self.kraus.size else 0.0

    @cached_property
    def exact(self) -> tuple[ExactMatrix, ...] | None:
        """Exact generators, or None when the entries are not Gaussian integers."""
        if self._exact is not None:
            return self._exact
        k = self.kraus
        if np.all(np.round(k.real) == k.real) and (not np.iscomplexobj(k) or np.all(np.round(k.imag) == k.imag)):
            return tuple(ExactMatrix.from_numpy(a) for a in k)
        return None

    def scaled(self, c: float) -> "CPMap":
        """The map c * Phi (Kraus operators scaled by sqrt(c))."""
        out = CPMap(self.kraus * np.sqrt(c), exact=self.exact)
        return out

    def __repr__(self):
        return f"CPMap(p={self.p}, m={self.m}, n={self.n})"


def apply_cp(phi: CPMap, X) -> np.ndarray:
    """Phi(X) = sum_i A_i X A_i^H."""
    X = np.asarray(X)
    if X.shape != (phi.n, phi.n):
        raise ValueError(f"expected {phi.n}x{phi.n} input, got {X.shape}")
    A = phi.kraus
    return np.einsum("pij,jk,plk->il", A, X, A.conj(), optimize=True)


def apply_adjoint(phi: CPMap, Y) -> np.ndarray:
    """Phi^*(Y) = sum_i A_i^H Y A_i."""
    Y = np.asarray(Y)
    if Y.shape != (phi.m, phi.m):
        raise ValueError(f"expected {phi.m}x{phi.m} input, got {Y.shape}")
    A = phi.kraus
    return np.einsum("pji,jk,pkl->il", A.conj(), Y, A, optimize=True)


def size(phi: CPMap) -> float:
    """Tr Phi(I) = sum of squared Frobenius norms of the Kraus operators."""
    return float(np.sum(np.abs(phi.kraus) ** 2))


@dataclass(frozen=True)
class EigDecomposition:
    values: np.ndarray   # nonincreasing
    vectors: np.ndarray  # columns are eigenvectors
    delta: float

    def residual(self, A) -> float:
        V = self.vectors
        return float(np.linalg.norm(np.asarray(A) - (V * self.values) @ V.conj().T, 2))


def op_norm_estimate(A, rtol: float = 1e-3, max_iter: int = 500) -> float:
    """Operator norm by power iteration on A^H A (deterministic start)."""
    A = np.asarray(A)
    n = A.shape[1]
    if n == 0 or not np.any(A):
        return 0.0
    v = np.ones(n) + np.arange(n) / (3.0 * n)
    v = v / np.linalg.norm(v)
    est = 0.0
    for _ in range(max_iter):
        w = A.conj().T @ (A @ v)
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        new = np.sqrt(nw)
        v = w / nw
        if abs(new - est) <= rtol * new:
            return float(new)
        est = new
    return float(est)


def hermitian_eig(A, delta: float = 1e-12) -> EigDecomposition:
    """Eigendecomposition of a Hermitian matrix with values sorted nonincreasing.

    LAPACK's backward-stable solver meets |lambda_i - lambda_hat_i| <= delta ||A||
    for any delta above a small multiple of machine precision.
    """
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("square matrix required")
    if delta <= 0:
        raise ValueError("delta must be positive")
    scale = max(1.0, float(np.max(np.abs(A)))) if A.size else 1.0
    if np.max(np.abs(A - A.conj().T), initial=0.0) > 1e-10 * scale:
        raise ValueError("matrix is not Hermitian")
    w, V = np.linalg.eigh((A + A.conj().T) / 2)
    return EigDecomposition(values=w[::-1].copy(), vectors=V[:, ::-1].copy(), delta=delta)


@dataclass(frozen=True)
class ImplicitPSD:
    """PSD matrix U diag(eigvals) U^H, with U any diagonalizer of ``reference``.

    Eigenvalues are kept as logarithms so iterates with huge spectra do not
    overflow; ``eigvals`` exponentiates on demand.
    """

    logvals: np.ndarray
    reference: np.ndarray
    basis: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        lv = np.asarray(self.logvals, dtype=float)
        object.__setattr__(self, "logvals", lv)
        if self.basis is None:
            object.__setattr__(self, "basis", hermitian_eig(self.reference).vectors)

    @classmethod
    def from_eigvals(cls, eigvals, reference) -> "ImplicitPSD":
        ev = np.asarray(eigvals, dtype=float)
        if np.any(ev < 0):
            raise ValueError("eigenvalues must be nonnegative")
        with np.errstate(divide="ignore"):
            return cls(np.log(ev), np.asarray(reference))

    @classmethod
    def identity(cls, n: int) -> "ImplicitPSD":
        return cls(np.zeros(n), np.eye(n), np.eye(n))

    @property
    def dim(self) -> int:
        return self.logvals.size

    @property
    def eigvals(self) -> np.ndarray:
        return np.exp(self.logvals)

    def power(self, s: float) -> np.ndarray:
        U = self.basis
        return (U * np.exp(s * self.logvals)) @ U.conj().T

    def logdet(self) -> float:
        return float(np.sum(self.logvals))


def materialize(X: ImplicitPSD, delta: float = 1e-12, power: float = 1.0) -> np.ndarray:
    """Explicit matrix X**power (power=-1 gives the inverse, 0.5 the square root)."""
    return X.power(power)
