"""Exact smallest shrunk subspaces.

Two routes: rounding the Sinkhorn iterate (deterministic) and Wong sequences
of a random element of a blow-up space (randomized).  Both return exactly
verified subspaces.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .exactla import (ExactMatrix, GaussianRational, contains, image_under, nullspace,
                      orth_complement, preimage, pseudoinverse, rank, span_dim,
                      sum_basis)
from .numla import CPMap
from .opscale import (IndependentSetWitness, WitnessNotFound, approx_indep, find_kstar,
                      find_rstar)
from .rounding import continued_fraction_round, round_subspace

__all__ = [
    "WongSequence",
    "BlowUpSpace",
    "ShrunkResult",
    "DominantIndependentSet",
    "ShrunkSubspaceError",
    "wong_limit",
    "randomized_shrunk",
    "randomized_shrunk_trial",
    "round_subspaces",
    "continued_fraction_round",
    "defect",
    "shrunk_from_dominant",
]


class ShrunkSubspaceError(RuntimeError):
    pass


def _exact_generators(phi: CPMap) -> tuple[ExactMatrix, ...]:
    gens = phi.exact
    if gens is None:
        raise ValueError("exact routines need Gaussian-integer Kraus operators")
    return gens


def defect(generators: Sequence[ExactMatrix], U: Sequence[Sequence]) -> int:
    """dim U - dim A(U)."""
    if not U:
        return 0
    return span_dim(U) - len(image_under(generators, U))


@dataclass
class WongSequence:
    A: ExactMatrix
    basis_chain: list          # exact bases W_0 = {0}, W_1, ...
    limit: list                # basis of W_inf
    in_image: bool             # whether W_inf lies in Im(A)

    @property
    def steps(self) -> int:
        return len(self.basis_chain) - 1

    def shrunk_subspace(self) -> list:
        """A^{-1}(W_inf)."""
        return preimage(self.A, self.limit)


def wong_limit(A: ExactMatrix, generators: Sequence[ExactMatrix]) -> WongSequence:
    """Iterate W <- A(A^{-1} W) from {0} until the dimension stabilizes.

    While W stays inside Im(A) the step only needs the images A_j A^+ w of
    the newest vectors, since A^{-1}W = A^+ W + ker A.
    """
    m, n = A.shape
    gens = list(generators)
    Ap = pseudoinverse(A, integral=True)
    image = [A @ e for e in _unit_vectors(n)]
    chain: list[list] = [[]]
    W = image_under(gens, nullspace(A))
    chain.append(W)
    fresh = list(W)
    in_image = True
    while True:
        if in_image and all(contains(image, w) for w in fresh):
            pre = [Ap @ w for w in fresh]
            new = image_under(gens, pre)
        else:
            in_image = False
            new = image_under(gens, preimage(A, W))
        W2 = sum_basis(W, new)
        if len(W2) == len(W):
            break
        fresh = W2[len(W):]
        W = W2
        chain.append(W)
    if in_image:
        in_image = all(contains(image, w) for w in W)
    return WongSequence(A=A, basis_chain=chain, limit=W, in_image=in_image)


def _unit_vectors(n):
    from .exactla import ONE, ZERO
    return [tuple(ONE if i == j else ZERO for i in range(n)) for j in range(n)]


@dataclass
class BlowUpSpace:
    base: tuple
    d: int

    @property
    def kraus_blown(self) -> list[ExactMatrix]:
        out = []
        for A in self.base:
            for j in range(self.d):
                for l in range(self.d):
                    E = [[GaussianRational(1 if (a, b) == (j, l) else 0) for b in range(self.d)]
                         for a in range(self.d)]
                    out.append(A.kron(ExactMatrix(E)))
        return out

    def random_element(self, rng: np.random.Generator, bound: int) -> ExactMatrix:
        """sum_i A_i (x) C_i with C_i entries uniform in {0, ..., bound - 1}."""
        total = None
        for A in self.base:
            C = rng.integers(0, bound, size=(self.d, self.d))
            term = A.kron(ExactMatrix([[int(v) for v in row] for row in C]))
            total = term if total is None else total + term
        return total


@dataclass
class ShrunkResult:
    U: list                    # exact basis of the smallest c-shrunk subspace
    c: int
    ncrank: int
    certificate: list          # exact basis of A(U)
    d: int = 1
    method: str = "wong"
    trials: int = 1

    def to_json(self) -> dict:
        return {
            "ncrank": self.ncrank,
            "c": self.c,
            "d": self.d,
            "method": self.method,
            "U": [[str(a) for a in v] for v in self.U],
            "image": [[str(a) for a in v] for v in self.certificate],
        }


def _descend(Ustar: Sequence[Sequence], n: int, d: int) -> list:
    """U_0 = {u : u (x) e_i in U* for all i}; coordinates are ordered a*d + i."""
    N = orth_complement(Ustar, n * d)
    if not N:
        return _unit_vectors(n)
    rows = []
    for i in range(d):
        for w in N:
            rows.append([w[a * d + i].conj() for a in range(n)])
    return nullspace(ExactMatrix._raw(rows, len(rows), n))


def randomized_shrunk_trial(phi: CPMap, d: int, k: int, seed) -> ShrunkResult | None:
    """One draw of the randomized algorithm; None when the draw is not certified.

    A draw is certified when rk A = d (n - c(U_0)).  Since the blow-up has
    noncommutative rank d * ncrank, this proves A is of maximal rank, so the
    Wong limit gives the minimum shrunk subspace and U_0 its descent.
    """
    gens = _exact_generators(phi)
    n = phi.n
    k = max(int(k), 1)
    space = BlowUpSpace(tuple(gens), d)
    rng = np.random.default_rng(seed)
    A = space.random_element(rng, 2 * d * k)
    rA = rank(A)
    seq = wong_limit(A, _blown_generators(gens, d))
    if not seq.in_image:
        return None
    Ustar = seq.shrunk_subspace()
    U0 = _descend(Ustar, n, d)
    img = image_under(gens, U0) if U0 else []
    c = len(U0) - len(img)
    if rA != d * (n - c) or len(Ustar) != d * len(U0):
        return None
    return ShrunkResult(U=U0, c=c, ncrank=n - c, certificate=img, d=d, method="wong")


def _blown_generators(gens, d):
    # A_i (x) E_jl, built once per (gens, d)
    key = (id(gens), d)
    hit = _BLOWN_CACHE.get(key)
    if hit is not None and hit[0] is gens:
        return hit[1]
    out = BlowUpSpace(tuple(gens), d).kraus_blown
    _BLOWN_CACHE.clear()
    _BLOWN_CACHE[key] = (gens, out)
    return out


_BLOWN_CACHE: dict = {}


def randomized_shrunk(phi: CPMap, d: int | None = None, k: int | None = None, rng_seed=0,
                      trials: int = 8) -> ShrunkResult:
    """Smallest shrunk subspace via Wong sequences of random blow-up elements.

    With ``d=None`` the blow-up size is searched upward from 1 to n - 1; each
    size gets ``trials`` certified-or-rejected draws.
    """
    gens = _exact_generators(phi)
    n, m = phi.n, phi.m
    if all(g.is_zero() for g in gens):
        return ShrunkResult(U=_unit_vectors(n), c=n, ncrank=0, certificate=[], d=1, method="wong")
    if k is None:
        k = min(m, n)
    sizes = [d] if d is not None else list(range(1, max(2, n)))
    used = 0
    for dd in sizes:
        for t in range(trials):
            used += 1
            res = randomized_shrunk_trial(phi, dd, k, (rng_seed, dd, t))
            if res is not None:
                res.trials = used
                return res
    raise ShrunkSubspaceError(f"no certified draw for blow-up sizes {sizes} after {used} trials")


@dataclass
class DominantIndependentSet:
    L: list                    # exact basis of L* = A(R*)^perp
    R: list                    # exact basis of R*, the smallest shrunk subspace
    kstar: int
    rstar: int
    method: str
    iterations: int = 0
    diagnostics: dict = field(default_factory=dict)
    decisions: list = field(default_factory=list, repr=False)

    def to_json(self) -> dict:
        return {
            "kstar": self.kstar,
            "rstar": self.rstar,
            "method": self.method,
            "L": [[str(a) for a in v] for v in self.L],
            "R": [[str(a) for a in v] for v in self.R],
        }


def shrunk_from_dominant(phi: CPMap, dom: DominantIndependentSet) -> ShrunkResult:
    gens = _exact_generators(phi)
    img = image_under(gens, dom.R) if dom.R else []
    return ShrunkResult(U=list(dom.R), c=phi.n - dom.kstar, ncrank=dom.kstar,
                        certificate=img, d=1, method=dom.method)


def round_subspaces(phi: CPMap, eps_override: float | None = None,
                    denom_bound_override: int | None = None, *, max_iter: int = 20_000,
                    check_every: int = 10, fallback: bool = True, rng_seed=0,
                    decision_kwargs: dict | None = None) -> DominantIndependentSet:
    """Dominant independent set (L*, R*) by Sinkhorn, rounding and exact checks.

    k* and r* come from binary searches over capacity finiteness.  For
    0 < r* < n the iteration targeting (k*, r* + 1) is run and every
    eps-independent candidate R is rounded entrywise by continued fractions;
    the first exact R' with dim R' = r* and dim R' - dim A(R') = n - k* is
    returned.  If none verifies within ``max_iter`` steps the randomized
    Wong route supplies R*.
    """
    gens = _exact_generators(phi)
    n, m = phi.n, phi.m
    dkw = decision_kwargs or {}
    kstar, klog = find_kstar(phi, **dkw)
    rstar, rlog = find_rstar(phi, kstar, **dkw)
    diag = {"decisions": [(d.k, d.r, d.verdict, d.reason, d.iterations) for d in klog + rlog]}
    if rstar == n:
        R = _unit_vectors(n)
        return _finish(gens, m, R, kstar, rstar, "fast-path", 0, diag, klog + rlog)
    if rstar == 0:
        return _finish(gens, m, [], kstar, rstar, "fast-path", 0, diag, klog + rlog)
    bound = denom_bound_override or 10**6
    tol = eps_override if eps_override is not None else 1e-4
    tried: dict = {}

    def verify(w: IndependentSetWitness) -> bool:
        if w.R.shape[1] != rstar:
            return False
        key = np.round(w.R @ w.R.conj().T, 7).tobytes()
        if key in tried:
            return False
        R_ex = round_subspace(w.R, bound)
        ok = len(R_ex) == rstar and defect(gens, R_ex) == n - kstar
        tried[key] = R_ex if ok else None
        if ok:
            verify.found = R_ex
        return ok

    verify.found = None
    try:
        w = approx_indep(phi, kstar, rstar + 1, tol, max_iter=max_iter,
                         check_every=check_every, accept=verify, record=False)
        diag["witness_eps"] = w.epsilon
        return _finish(gens, m, verify.found, kstar, rstar, "round", len(tried), diag,
                       klog + rlog)
    except WitnessNotFound as exc:
        diag["rounding_failure"] = str(exc)
        if not fallback:
            raise ShrunkSubspaceError(f"rounding did not verify: {exc}") from exc
    res = randomized_shrunk(phi, k=kstar, rng_seed=rng_seed)
    if res.ncrank != kstar or len(res.U) != rstar:
        raise ShrunkSubspaceError("randomized route disagrees with the Sinkhorn decisions")
    return _finish(gens, m, res.U, kstar, rstar, "wong", 0, diag, klog + rlog)


def _finish(gens, m, R, kstar, rstar, method, iterations, diag, decisions) -> DominantIndependentSet:
    img = image_under(gens, R) if R else []
    L = orth_complement(img, m)
    n = gens[0].cols
    if len(R) - len(img) != n - kstar:
        raise ShrunkSubspaceError("exact defect check failed")
    return DominantIndependentSet(L=L, R=list(R), kstar=kstar, rstar=rstar, method=method,
                                  iterations=iterations, diagnostics=diag, decisions=decisions)
