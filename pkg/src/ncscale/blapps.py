"""Fractional linear matroid matching and the rank-2 Brascamp-Lieb polytope.

A line is the span of two vectors a, b in C^n.  Its wedge a b^T - b a^T is a
skew matrix whose image is the line; the matrix space of wedges has
noncommutative rank twice the fractional matching number, and its dominant
independent set gives the dominant 2-cover.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Sequence

import numpy as np
from scipy.optimize import linprog

from .exactla import (ExactMatrix, GaussianRational, intersection_basis, orth_complement, span_dim,
                      sum_basis)
from .numla import CPMap
from .opscale import find_kstar, z_update
from .permproj import halfspace_project
from .rounding import round_subspace
from .shrunk import round_subspaces

__all__ = [
    "LineSet",
    "FractionalMatching",
    "MatchingCheck",
    "TwoCover",
    "WeightedResult",
    "MembershipResult",
    "wedge",
    "wedge_map",
    "frac_matroid_matching",
    "verify_matching",
    "dominant_two_cover",
    "weighted_sinkhorn",
    "weighted_opt",
    "mem_eps_bl",
    "subspace_violation",
    "geometric_mean",
]


def _exact_vec(v) -> tuple:
    return tuple(GaussianRational.coerce(complex(a)) if isinstance(a, complex) else GaussianRational(int(a))
                 for a in v)


@dataclass
class LineSet:
    """Lines span(a_i, b_i) in C^n with Gaussian-integer spanning vectors."""

    n: int
    lines: list            # pairs (a, b) of integer (or complex-integer) sequences

    def __post_init__(self):
        for a, b in self.lines:
            if len(a) != self.n or len(b) != self.n:
                raise ValueError("line vectors must have length n")

    @classmethod
    def from_vectors(cls, pairs) -> "LineSet":
        pairs = [(list(a), list(b)) for a, b in pairs]
        if not pairs:
            raise ValueError("need at least one line")
        return cls(len(pairs[0][0]), pairs)

    @property
    def p(self) -> int:
        return len(self.lines)

    def exact_basis(self, i: int) -> list:
        """Exact basis of line i (1 or 2 vectors, empty for a zero line)."""
        a, b = self.lines[i]
        vecs = [_exact_vec(a), _exact_vec(b)]
        return sum_basis([], vecs)

    def ranks(self) -> list[int]:
        return [len(self.exact_basis(i)) for i in range(self.p)]

    def B(self, i: int) -> np.ndarray:
        """Full-row-rank n_i x n matrix whose rows span line i."""
        basis = self.exact_basis(i)
        return np.array([[complex(x) for x in v] for v in basis]).reshape(len(basis), self.n)

    def numeric(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        a, b = self.lines[i]
        return np.asarray(a, dtype=complex), np.asarray(b, dtype=complex)

    @property
    def entry_bound(self) -> float:
        return max(1.0, max(float(np.max(np.abs(np.concatenate(self.numeric(i))))) for i in range(self.p)))


def wedge(a, b) -> ExactMatrix:
    """a b^T - b a^T (exactly skew-symmetric)."""
    a = _exact_vec(a)
    b = _exact_vec(b)
    n = len(a)
    return ExactMatrix._raw([[a[i] * b[j] - b[i] * a[j] for j in range(n)] for i in range(n)], n, n)


def wedge_map(lines: LineSet) -> CPMap:
    gens = [wedge(a, b) for a, b in lines.lines]
    return CPMap.from_exact(gens)


def geometric_mean(X, Y) -> np.ndarray:
    """X # Y = X^(1/2) (X^(-1/2) Y X^(-1/2))^(1/2) X^(1/2)."""
    w, U = np.linalg.eigh((X + X.conj().T) / 2)
    w = np.maximum(w, 1e-300)
    Xh = (U * np.sqrt(w)) @ U.conj().T
    Xmh = (U / np.sqrt(w)) @ U.conj().T
    M = Xmh @ Y @ Xmh
    v, V = np.linalg.eigh((M + M.conj().T) / 2)
    Mh = (V * np.sqrt(np.maximum(v, 0.0))) @ V.conj().T
    G = Xh @ Mh @ Xh
    return (G + G.conj().T) / 2


def _inv_sqrt(X) -> np.ndarray:
    w, U = np.linalg.eigh((X + X.conj().T) / 2)
    return (U / np.sqrt(w)) @ U.conj().T


def _gap_unit(mu) -> float:
    """KL distance from mu to {p <= 1}: sum over mu > 1 of mu - 1 - log mu."""
    big = mu[mu > 1.0]
    return float(np.sum(big - 1.0 - np.log(big)))


@dataclass
class FractionalMatching:
    x: np.ndarray
    value: float
    quality: float                  # guaranteed fraction 1 - eps of the optimum
    transform: np.ndarray           # g with sum x_i pi_{g l_i} <= I
    kstar: int
    iterations: int = 0
    objectives: list = field(default_factory=list)


@dataclass
class MatchingCheck:
    ok: bool
    lam_max: float
    hint: np.ndarray | None = None  # top eigenvector when the check fails


def _line_projections(lines: LineSet, g=None) -> list[np.ndarray]:
    out = []
    for i in range(lines.p):
        B = lines.B(i).T          # n x n_i, columns span the line
        if g is not None:
            B = g @ B
        if B.shape[1] == 0:
            out.append(np.zeros((lines.n, lines.n)))
            continue
        Q, _ = np.linalg.qr(B)
        out.append(Q @ Q.conj().T)
    return out


def verify_matching(lines: LineSet, x, tol: float = 0.0, transform=None) -> MatchingCheck:
    """Whether lambda_max(sum x_i pi_i) <= 1 + tol, pi_i projecting onto (g applied to) line i.

    Passing proves sum x_i dim(l_i cap V) <= (1 + tol) dim V for every V,
    since g maps lines and subspaces alike.
    """
    x = np.asarray(x, dtype=float)
    if x.size != lines.p:
        raise ValueError("x length must equal the number of lines")
    if np.any(x < 0):
        return MatchingCheck(False, math.inf)
    P = sum(xi * Pi for xi, Pi in zip(x, _line_projections(lines, transform)))
    if np.isscalar(P):
        return MatchingCheck(True, 0.0)
    w, V = np.linalg.eigh((P + P.conj().T) / 2)
    lam = float(w[-1])
    ok = lam <= 1.0 + tol
    return MatchingCheck(ok, lam, None if ok else V[:, -1])


def _symmetric_scaling(A: np.ndarray, k: float, eps: float, max_iter: int):
    """Coupled Sinkhorn on skew Kraus operators with Y = conj(X).

    X moves to the geometric mean of itself and the exact X-update, which
    by geodesic convexity and the symmetry f(X, conj Y) = f(Y, conj X)
    decreases the objective at least as much as the plain update.
    """
    p, n, _ = A.shape
    X = np.eye(n, dtype=complex)
    z = 0.0
    thr = eps * eps / 2
    objs = []
    for it in range(max_iter + 1):
        Xmh = _inv_sqrt(X)
        Ymh = Xmh.conj()
        S = math.exp(z / 2) * np.matmul(np.matmul(Ymh, A), Xmh)
        qa = float(np.sum(np.abs(S) ** 2))
        Sf = S.reshape(p * n, n)
        mu = np.maximum(np.linalg.eigvalsh(Sf.conj().T @ Sf), 0.0)
        eps_x = _gap_unit(mu)
        a = qa * math.exp(-z)
        best = k - k * math.log(k / a) if a < k else a
        eps_q = max(0.0, qa - k * z - best)
        sign, logdet = np.linalg.slogdet(X)
        objs.append(qa + 2 * float(logdet.real) - k * z)
        if eps_x <= thr and eps_q <= thr:
            return X, z, it, objs
        if eps_q > eps_x:
            z = z_update(a, k)
        else:
            Yinv = np.linalg.inv(X).conj()
            C = math.exp(z) * np.einsum("pji,jk,pkl->il", A.conj(), Yinv, A, optimize=True)
            lam, U = np.linalg.eigh((C + C.conj().T) / 2)
            Xn = (U * np.maximum(lam, 1.0)) @ U.conj().T
            X = geometric_mean(X, Xn)
    raise RuntimeError(f"symmetric scaling did not converge in {max_iter} iterations")


def frac_matroid_matching(lines: LineSet, eps: float = 0.05, *, symmetric: bool = True,
                          kstar: int | None = None, max_iter: int = 200_000) -> FractionalMatching:
    """A (1 - eps)-maximum fractional linear matroid matching.

    The wedge map is scaled towards size k* (its noncommutative rank) with
    g A_i g^T; x_i is the Gram determinant of (g a_i, g b_i), divided by
    lambda_max(sum x_i pi_i) when that exceeds one.
    """
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    if any(r != 2 for r in lines.ranks()):
        raise ValueError("every line must have rank 2")
    phi = wedge_map(lines)
    if kstar is None:
        kstar, _ = find_kstar(phi)
    n, p = lines.n, lines.p
    if kstar == 0:
        return FractionalMatching(np.zeros(p), 0.0, 1 - eps, np.eye(n), 0)
    s = float(np.sum(np.abs(phi.kraus) ** 2))
    c = s if s > 1 else 1.0
    A = phi.kraus / math.sqrt(c)
    inner = eps / 2
    if symmetric:
        X, z, iters, objs = _symmetric_scaling(A.astype(complex), kstar, inner, max_iter)
        factor = (1 - inner) * math.exp(z)
        g = factor ** 0.25 * _inv_sqrt(X).conj() / c ** 0.25
        x = np.empty(p)
        for i in range(p):
            a, b = lines.numeric(i)
            ga, gb = g @ a, g @ b
            x[i] = max(0.0, float((np.vdot(ga, ga) * np.vdot(gb, gb)).real - abs(np.vdot(ga, gb)) ** 2))
    else:
        from .opscale import MajSinkhornRun, MajSpec
        run = MajSinkhornRun(CPMap(A), MajSpec(np.ones(n), np.ones(n), float(kstar)), inner)
        while not run.step():
            if run.iterations >= max_iter:
                raise RuntimeError("scaling did not converge")
        K = run.scaled_kraus()
        x = np.array([np.linalg.svd(Ki, compute_uv=False)[1] ** 2 for Ki in K])
        g = (run.V * np.exp(-run.y / 2)) @ run.V.conj().T
        iters, objs = run.iterations, run.objectives
    lam = verify_matching(lines, x, transform=g).lam_max
    if lam > 1.0:
        x = x / lam
    return FractionalMatching(x=x, value=float(x.sum()), quality=1 - eps, transform=g,
                              kstar=kstar, iterations=iters, objectives=objs)


@dataclass
class TwoCover:
    S: list
    T: list
    kstar: int
    verified: bool
    degenerate: list = field(default_factory=list)   # indices of rank-1 lines

    @property
    def size(self) -> int:
        return len(self.S) + len(self.T)

    def to_json(self) -> dict:
        return {"S": [[str(a) for a in v] for v in self.S],
                "T": [[str(a) for a in v] for v in self.T],
                "size": self.size, "kstar": self.kstar, "verified": self.verified}


def _meet_dim(U, V, n) -> int:
    if not U or not V:
        return 0
    return len(U) + len(V) - span_dim(list(U) + list(V))


def dominant_two_cover(lines: LineSet, **kwargs) -> TwoCover:
    """(S*, T*) from the dominant independent set (L*, R*) of the wedge space.

    S* is the Hermitian complement of L*; T* is the complement of R* under
    the bilinear pairing u^T v, matching w^H (a b^T - b a^T) v = 0.
    """
    phi = wedge_map(lines)
    dom = round_subspaces(phi, **kwargs)
    n = lines.n
    S = orth_complement(dom.L, n)
    T = orth_complement([tuple(a.conj() for a in v) for v in dom.R], n)
    ranks = lines.ranks()
    ok = True
    for i in range(lines.p):
        if ranks[i] < 2:
            continue
        l = lines.exact_basis(i)
        if _meet_dim(S, l, n) + _meet_dim(T, l, n) < 2:
            ok = False
    nested = span_dim(list(T) + list(S)) == len(T) if S else True
    return TwoCover(S=S, T=T, kstar=dom.kstar, verified=ok and nested,
                    degenerate=[i for i, r in enumerate(ranks) if r < 2])


# --- weighted optimization and membership over P(B) ---------------------------

def _normalized_B(lines: LineSet) -> list[np.ndarray]:
    Bs = [lines.B(i) for i in range(lines.p)]
    s = sum(float(np.sum(np.abs(B) ** 2)) for B in Bs)
    c = math.sqrt(s) if s > 1 else 1.0
    return [B / c for B in Bs]


def _lattice(lines: LineSet, limit: int = 200) -> list[list]:
    """Subspaces generated from the lines by sums and intersections (capped)."""
    n = lines.n
    seen: list[list] = []

    def add(U):
        if not U:
            return False
        for V in seen:
            if len(V) == len(U) and span_dim(list(V) + list(U)) == len(U):
                return False
        seen.append(list(U))
        return True

    for i in range(lines.p):
        add(lines.exact_basis(i))
    frontier = list(seen)
    while frontier and len(seen) < limit:
        new = []
        for U in frontier:
            for V in list(seen):
                for W in (sum_basis(U, V), intersection_basis(U, V, n)):
                    if len(seen) >= limit:
                        break
                    if add(W):
                        new.append(seen[-1])
        frontier = new
    return seen


def _eigen_flags(X, bound: int = 1000) -> list[list]:
    w, U = np.linalg.eigh((X + X.conj().T) / 2)
    n = X.shape[0]
    out = []
    for j in range(1, n):
        for cols in (U[:, n - j:], U[:, :j]):
            V = round_subspace(cols, bound)
            if V:
                out.append(V)
    return out


def _line_dims(lines: LineSet, V) -> list[int]:
    return [_meet_dim(lines.exact_basis(i), V, lines.n) for i in range(lines.p)]


def subspace_violation(lines: LineSet, x, candidates) -> tuple | None:
    """First V among ``candidates`` with sum x_i dim(l_i cap V) > dim V, exactly."""
    xs = [Fraction(v).limit_denominator(10**9) if not isinstance(v, Fraction) else v for v in x]
    for V in candidates:
        d = _line_dims(lines, V)
        lhs = sum(xi * di for xi, di in zip(xs, d))
        if lhs > len(V):
            return V, lhs - len(V)
    return None


def _dual_bound(lines: LineSet, w, subspaces) -> tuple[Fraction, list] | None:
    """Exact upper bound on max{w.x : x in P(B)} from a dual LP over ``subspaces``.

    Any y >= 0 with sum_V y_V dim(l_i cap V) >= w_i gives
    w.x <= sum_V y_V dim V for every feasible x.
    """
    if not subspaces:
        return None
    D = np.array([_line_dims(lines, V) for V in subspaces], dtype=float)    # |V| x p
    dims = np.array([len(V) for V in subspaces], dtype=float)
    w = np.asarray(w, dtype=float)
    res = linprog(dims, A_ub=-D.T, b_ub=-w, bounds=[(0, None)] * len(subspaces), method="highs")
    if res.status != 0:
        return None
    y = [Fraction(v).limit_denominator(10**6) if v > 1e-12 else Fraction(0) for v in res.x]
    wi = [Fraction(int(v)) if float(v).is_integer() else Fraction(v) for v in w]
    cover = [sum(yv * int(D[v, i]) for v, yv in enumerate(y)) for i in range(lines.p)]
    ratio = max((wi[i] / cover[i] for i in range(lines.p) if wi[i] > 0 and cover[i] > 0), default=Fraction(1))
    if any(wi[i] > 0 and cover[i] == 0 for i in range(lines.p)):
        return None
    ratio = max(ratio, Fraction(1))
    y = [yv * ratio for yv in y]
    value = sum(yv * int(dims[v]) for v, yv in enumerate(y))
    return value, y


@dataclass
class WeightedResult:
    feasible: bool
    x: np.ndarray | None
    k: float
    iterations: int
    reason: str                    # terminated | certificate | budget
    bound: Fraction | None = None  # exact upper bound on OPT when certified
    objectives: list = field(default_factory=list)


def weighted_sinkhorn(lines: LineSet, w, k: float, eps: float, T: int | None = None,
                      certify_every: int = 50, iter_const: float = 64.0) -> WeightedResult:
    """Feasible x with w.x >= (1 - eps) k, or a report that OPT < k.

    NotReached is certified by an exact dual bound below k over subspaces
    read from the iterate and from the line lattice, or declared after T
    iterations.
    """
    w = np.asarray(w, dtype=float)
    if np.any(w < 0):
        raise ValueError("weights must be nonnegative")
    if k < float(np.max(w)) - 1e-12:
        raise ValueError("need k >= max(w)")
    n, p = lines.n, lines.p
    Bs = _normalized_B(lines)
    ni = np.array([B.shape[0] for B in Bs], dtype=float)
    wt = w / ni
    delta = eps / (2 * math.sqrt(n))
    thr = delta * delta / 2
    if T is None:
        T = int(math.ceil(iter_const * (k * 2 * n * math.log(2 * n) + n * math.log(lines.entry_bound * p + 1) + 1)
                          / (eps * eps)))
    X = np.eye(n, dtype=complex)
    z = 0.0
    objs = []
    lattice = None
    for it in range(T + 1):
        Xinv = np.linalg.inv(X)
        Xinv = (Xinv + Xinv.conj().T) / 2
        # Y update (unit determinant)
        Gs, nus = [], np.empty(p)
        for i, B in enumerate(Bs):
            M = B @ Xinv @ B.conj().T
            detM = float(np.linalg.det(M).real)
            Minv = np.linalg.inv(M)
            scale = detM ** (1.0 / B.shape[0])
            G = scale * (B.conj().T @ Minv @ B)      # B^H Y^-1 B up to e^{w z}
            Gs.append(G)
            nus[i] = math.exp(wt[i] * z) * B.shape[0] * scale
        C = sum(math.exp(wt[i] * z) * G for i, G in enumerate(Gs))
        Xmh = _inv_sqrt(X)
        mu = np.linalg.eigvalsh(Xmh @ C @ Xmh)
        eps_x = _gap_unit(mu)
        hp = halfspace_project(nus, wt, k)
        eps_z = hp.divergence
        objs.append(float(nus.sum()) - k * z + float(np.linalg.slogdet(X)[1]))
        if eps_x <= thr and eps_z <= thr:
            x = math.exp(-delta) * nus / ni
            return WeightedResult(True, x, k, it, "terminated", objectives=objs)
        if certify_every and it % certify_every == 0 and it > 0:
            if lattice is None:
                lattice = _lattice(lines) + [_full(n)]
            bd = _dual_bound(lines, w, lattice + _eigen_flags(X))
            if bd is not None and bd[0] < Fraction(k).limit_denominator(10**9):
                return WeightedResult(False, None, k, it, "certificate", bound=bd[0], objectives=objs)
        if eps_z > eps_x:
            alphas = nus * np.exp(-wt * z)
            z = halfspace_project(alphas, wt, k).z
        else:
            lam, U = np.linalg.eigh((C + C.conj().T) / 2)
            X = (U * np.maximum(lam, 1.0)) @ U.conj().T
    return WeightedResult(False, None, k, T, "budget", objectives=objs)


def _full(n) -> list:
    return [tuple(GaussianRational(1 if i == j else 0) for i in range(n)) for j in range(n)]


def weighted_opt(lines: LineSet, w, eps: float | None = None, **kwargs) -> Fraction:
    """max{w.x : x in P(B)} for nonnegative integer weights.

    With every line of rank 2 the optimum is half-integral, so deciding
    OPT(2w) >= K for integers K with eps < 1/K pins it down exactly.
    Otherwise the binary search stops at resolution 2 eps.
    """
    w = np.asarray(w)
    if np.any(w < 0) or np.any(np.asarray(w, dtype=float) != np.round(np.asarray(w, dtype=float))):
        raise ValueError("weights must be nonnegative integers")
    w = w.astype(int)
    if not np.any(w):
        return Fraction(0)
    half = all(r == 2 for r in lines.ranks())
    if half:
        w2 = 2 * w
        lo, hi = int(w2.max()), int(w2.sum())        # OPT(2w) in [lo, hi]
        while lo < hi:
            mid = (lo + hi + 1) // 2
            res = weighted_sinkhorn(lines, w2, mid, eps if eps is not None else 1.0 / (4 * mid), **kwargs)
            if res.feasible:
                lo = max(mid, _half_ceil(float(w2 @ res.x)))
            else:
                hi = mid - 1
                if res.bound is not None:
                    hi = min(hi, math.floor(res.bound))
        return Fraction(lo, 2)
    eps = eps if eps is not None else 0.05
    lo, hi = float(w.max()), float(w.sum())
    while hi - lo > 2 * eps:
        mid = (lo + hi) / 2
        res = weighted_sinkhorn(lines, w, mid, eps / max(1.0, mid), **kwargs)
        if res.feasible:
            lo = max(mid * (1 - eps / max(1.0, mid)), float(w @ res.x))
            lo = max(lo, mid - eps)
        else:
            hi = mid
    return Fraction(lo).limit_denominator(1000)


def _half_ceil(v: float) -> int:
    # OPT(2w) is an integer at least w2.x
    return int(math.ceil(v - 1e-9))


@dataclass
class MembershipResult:
    near: bool
    y: np.ndarray | None
    iterations: int
    reason: str                       # terminated | contract | certificate | budget
    violated: list | None = None      # exact subspace witnessing Far
    objectives: list = field(default_factory=list)


def mem_eps_bl(lines: LineSet, x, eps: float, T: int | None = None, *,
               certify_every: int = 50, iter_const: float = 64.0) -> MembershipResult:
    """Decide eps-membership of x in P(B).

    Near returns y = e^(-eps') x with eps' = eps / max(1, ||x||_2), so
    ||x - y|| <= eps; y is feasible because the last iterate certifies
    e^(-delta) x in P(B).  Far comes with an exact violated subspace when
    one is found among V = C^n and rounded eigenspaces of X, otherwise after
    T iterations.
    """
    x = np.asarray(x, dtype=float)
    n, p = lines.n, lines.p
    if x.size != p:
        raise ValueError("x length must equal the number of lines")
    if np.any(x <= 0):
        raise ValueError("x must be positive")
    Bs = _normalized_B(lines)
    ni = np.array([B.shape[0] for B in Bs], dtype=float)
    if float(x @ ni) > n + 1e-12:
        viol = subspace_violation(lines, x, [_full(n)])
        return MembershipResult(False, None, 0, "certificate", viol[0] if viol else _full(n))
    eps_eff = eps / max(1.0, float(np.linalg.norm(x)))
    delta = eps_eff / (2 * math.sqrt(n))
    thr = delta * delta / 2
    if T is None:
        T = int(math.ceil(iter_const * (n * math.log(2 * n) + n * math.log(lines.entry_bound * p + 1) + 1)
                          / (delta * delta)))
    X = np.eye(n, dtype=complex)
    objs = []
    for it in range(T + 1):
        Xinv = np.linalg.inv(X)
        Xinv = (Xinv + Xinv.conj().T) / 2
        # Y_i = B_i X^-1 B_i^H / x_i minimizes the objective in Y_i
        C = np.zeros((n, n), dtype=complex)
        obj = float(np.linalg.slogdet(X)[1])
        for i, B in enumerate(Bs):
            M = B @ Xinv @ B.conj().T
            C += x[i] * (B.conj().T @ np.linalg.inv(M) @ B)
            obj += x[i] * (B.shape[0] + float(np.linalg.slogdet(M / x[i])[1]))
        objs.append(obj)
        Xmh = _inv_sqrt(X)
        mu = np.linalg.eigvalsh(Xmh @ C @ Xmh)
        if _gap_unit(mu) <= thr:
            return MembershipResult(True, math.exp(-eps_eff) * x, it, "terminated", objectives=objs)
        if certify_every and it % certify_every == 0 and it > 0:
            viol = subspace_violation(lines, x, _eigen_flags(X))
            if viol is not None:
                return MembershipResult(False, None, it, "certificate", viol[0], objs)
        lam, U = np.linalg.eigh((C + C.conj().T) / 2)
        X = (U * np.maximum(lam, 1.0)) @ U.conj().T
    return MembershipResult(False, None, T, "budget", objectives=objs)
