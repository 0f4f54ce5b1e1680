"""Majorized operator Sinkhorn: scaling, capacity-finiteness decision, independent sets.

The iterate (X, Y, z) lives in {X >= I, Y >= I, z >= 0}.  X and Y are kept as
log-eigenvalues plus an eigenbasis, which keeps huge spectra representable.
All runs work on the map normalized to size at most 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import kernels
from .exactla import ExactMatrix, image_under, orth_complement
from .numla import CPMap, ImplicitPSD, apply_adjoint, apply_cp, size
from .permproj import alpha_r
from .rounding import round_subspace

__all__ = [
    "MajSpec",
    "ScalingIterate",
    "CapacityBudget",
    "ScalingResult",
    "Decision",
    "IndependentSetWitness",
    "WitnessNotFound",
    "capacity_floor",
    "make_budget",
    "capacity_objective",
    "x_update",
    "y_update",
    "z_update",
    "maj_sinkhorn",
    "decision_sinkhorn",
    "approx_indep",
    "check_eps_independent",
    "candidate_pairs",
    "violates",
    "exact_violation",
    "find_kstar",
    "find_rstar",
    "default_eps",
    "normalize",
    "MajSinkhornRun",
    "monotone_violations",
]

_EPS_MACH = np.finfo(float).eps
# Beyond this z the float64 iterate no longer resolves the scaled map.
Z_LIMIT = 600.0


@dataclass(frozen=True)
class MajSpec:
    """Target spectra alpha (length n), beta (length m) and size k."""

    alpha: np.ndarray
    beta: np.ndarray
    k: float
    r: int = 0

    def __post_init__(self):
        a = np.asarray(self.alpha, dtype=float)
        b = np.asarray(self.beta, dtype=float)
        for v in (a, b):
            if np.any(v < 0) or np.any(np.diff(v) > 0):
                raise ValueError("alpha and beta must be nonnegative and nonincreasing")
        if self.k < 0:
            raise ValueError("k must be nonnegative")
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "beta", b)

    @classmethod
    def perturbed(cls, n: int, m: int, k: float, r: int = 0) -> "MajSpec":
        """alpha_r on the column side, all ones on the row side."""
        return cls(alpha_r(n, r), np.ones(m), float(k), r)

    @property
    def min_lead(self) -> float:
        return float(min(self.alpha[0], self.beta[0]))


@dataclass
class ScalingIterate:
    X: ImplicitPSD
    Y: ImplicitPSD
    z: float

    @property
    def q(self) -> float:
        return math.exp(self.z)

    @classmethod
    def start(cls, n: int, m: int) -> "ScalingIterate":
        return cls(ImplicitPSD.identity(n), ImplicitPSD.identity(m), 0.0)


@dataclass(frozen=True)
class CapacityBudget:
    floor: float
    max_iters: int
    progress_quantum: float


def capacity_floor(phi: CPMap, k: float, floor_const: float = 16.0) -> float:
    """Lower bound used to declare divergence of the normalized objective."""
    n, m, p = phi.n, phi.m, phi.p
    M = max(1.0, phi.entry_bound)
    return -floor_const * (k * (n + m) * math.log(m + n) + k * math.log(max(p, 1))
                           + n * math.log(p * m * n * M * M))


def make_budget(phi: CPMap, spec: MajSpec, eps: float, floor_const: float = 16.0,
                max_iters: int | None = None) -> CapacityBudget:
    floor = capacity_floor(phi, spec.k, floor_const)
    quantum = spec.min_lead * eps * eps / 2
    if max_iters is None:
        start = max(1.0, spec.k)
        max_iters = math.ceil(2 * (start - floor) / quantum) if quantum > 0 else 10**9
    return CapacityBudget(floor=floor, max_iters=int(max_iters), progress_quantum=quantum)


def normalize(phi: CPMap, bound: float = 1.0) -> tuple[CPMap, float]:
    """Divide by size / bound when the size exceeds bound; returns (map, divisor)."""
    s = size(phi)
    if s > bound:
        return phi.scaled(bound / s), s / bound
    return phi, 1.0


def default_eps(n: int, m: int, r: int) -> float:
    """Termination accuracy for the decision runs (r = 0 and r > 0 regimes)."""
    if r == 0:
        return 1.0 / (10.0 * math.sqrt(m + n))
    return 1.0 / (10.0 * n * math.sqrt(m + n))


def _sorted_desc(v) -> np.ndarray:
    return np.sort(np.asarray(v, dtype=float))[::-1]


def capacity_objective(phi: CPMap, it: ScalingIterate, spec: MajSpec) -> float:
    """Tr Phi(X^-1) Y^-1 e^z + alpha.lambda(log X) + beta.lambda(log Y) - k z."""
    Xinv = it.X.power(-1.0)
    Yinv = it.Y.power(-1.0)
    a = float(np.real(np.trace(apply_cp(phi, Xinv) @ Yinv)))
    return (a * math.exp(it.z) + float(spec.alpha @ _sorted_desc(it.X.logvals))
            + float(spec.beta @ _sorted_desc(it.Y.logvals)) - spec.k * it.z)


def _eig_desc(M):
    w, V = np.linalg.eigh((M + M.conj().T) / 2)
    return w[::-1], V[:, ::-1]


def _dual(values, target) -> np.ndarray:
    return np.asarray(kernels.kl_dual_sorted(np.maximum(values, 0.0), target), dtype=float)


def x_update(phi: CPMap, it: ScalingIterate, spec: MajSpec) -> ImplicitPSD:
    """argmin over X >= I of Tr(X^-1 C) + alpha.lambda(log X), C = e^z Phi^*(Y^-1)."""
    C = math.exp(it.z) * apply_adjoint(phi, it.Y.power(-1.0))
    lam, U = _eig_desc(C)
    return ImplicitPSD(_dual(lam, spec.alpha), C, U)


def y_update(phi: CPMap, it: ScalingIterate, spec: MajSpec) -> ImplicitPSD:
    """argmin over Y >= I of Tr(Y^-1 D) + beta.lambda(log Y), D = e^z Phi(X^-1)."""
    D = math.exp(it.z) * apply_cp(phi, it.X.power(-1.0))
    lam, V = _eig_desc(D)
    return ImplicitPSD(_dual(lam, spec.beta), D, V)


def z_update(a: float, k: float) -> float:
    """argmin over z >= 0 of a e^z - k z."""
    if a <= 0.0:
        if k > 0:
            raise ArithmeticError("Tr Phi(X^-1) Y^-1 = 0: objective unbounded below in z")
        return 0.0
    return math.log(k / a) if a < k else 0.0


def _z_gap(a_scaled: float, z: float, k: float) -> float:
    """(q a - k z) - min_{z' >= 0}(e^{z'} a - k z') with q a given as ``a_scaled``."""
    cur = a_scaled - k * z
    a = a_scaled * math.exp(-z)
    if a <= 0.0:
        return math.inf if k > 0 else 0.0
    best = k - k * math.log(k / a) if a < k else a
    return max(0.0, cur - best)


class MajSinkhornRun:
    """Stateful majorized Sinkhorn iteration on a normalized map.

    ``mode="finite"`` updates whichever of X, Y, z promises the most progress
    and outputs the factor (1 - eps) q; ``mode="exact"`` re-optimizes z every
    step, then updates X or Y, and outputs e^(z - eps).
    """

    def __init__(self, phi: CPMap, spec: MajSpec, eps: float, mode: str = "finite",
                 record: bool = True):
        if phi.n != spec.alpha.size or phi.m != spec.beta.size:
            raise ValueError("target dimensions do not match the map")
        if mode not in ("finite", "exact"):
            raise ValueError("mode must be 'finite' or 'exact'")
        self.phi = phi
        self.A = phi.kraus
        self.spec = spec
        self.eps = float(eps)
        self.mode = mode
        self.threshold = spec.min_lead * eps * eps / 2 if eps > 0 else -1.0
        p, m, n = self.A.shape
        self.p, self.m, self.n = p, m, n
        self.x = np.zeros(n)
        self.U = np.eye(n)
        self.refX = np.eye(n)
        self.y = np.zeros(m)
        self.V = np.eye(m)
        self.refY = np.eye(m)
        self.z = 0.0
        self.iterations = 0
        self.record = record
        self.objectives: list[float] = []
        self.slacks: list[float] = []
        self.updates: list[str] = []
        self._m = None

    # -- measurements -------------------------------------------------------
    def measure(self) -> dict:
        if self._m is not None:
            return self._m
        A, spec = self.A, self.spec
        p, m, n = self.p, self.m, self.n
        ey = np.exp((self.z - self.y) / 2)
        ex = np.exp(-self.x / 2)
        G = np.matmul(self.V.conj().T, A) * ey[None, :, None]     # e^{z/2} Y^{-1/2} A in V frame
        S = np.matmul(G, self.U) * ex[None, None, :]              # scaled Kraus in (V, U) frames
        qa = float(np.sum(np.abs(S) ** 2))
        Sf = S.reshape(p * m, n)
        St = S.transpose(1, 0, 2).reshape(m, p * n)
        mu = np.maximum(np.linalg.eigvalsh(Sf.conj().T @ Sf)[::-1], 0.0)
        nu = np.maximum(np.linalg.eigvalsh(St @ St.conj().T)[::-1], 0.0)
        xd = kernels.kl_dual_sorted(mu, spec.alpha)
        yd = kernels.kl_dual_sorted(nu, spec.beta)
        eps_x = max(0.0, float(kernels.kl_projection_gap(mu, xd)))
        eps_y = max(0.0, float(kernels.kl_projection_gap(nu, yd)))
        eps_q = _z_gap(qa, self.z, spec.k)
        lin = float(spec.alpha @ self.x) + float(spec.beta @ self.y)
        f = qa + lin - spec.k * self.z
        delta = 64 * (n + m) * _EPS_MACH * (1.0 + abs(lin) / max(qa, 1e-300) + spec.k * self.z / max(qa, 1e-300))
        self._m = dict(G=G, S=S, qa=qa, mu=mu, nu=nu, eps_x=eps_x, eps_y=eps_y,
                       eps_q=eps_q, objective=f, slack=3 * delta * qa + 64 * _EPS_MACH * abs(f))
        return self._m

    @property
    def objective(self) -> float:
        return self.measure()["objective"]

    def iterate(self) -> ScalingIterate:
        return ScalingIterate(ImplicitPSD(self.x.copy(), self.refX, self.U.copy()),
                              ImplicitPSD(self.y.copy(), self.refY, self.V.copy()), self.z)

    # -- updates ------------------------------------------------------------
    def _update_x(self):
        G = self.measure()["G"]
        Gf = G.reshape(self.p * self.m, self.n)
        C = Gf.conj().T @ Gf
        lam, U = _eig_desc(C)
        self.x = _dual(lam, self.spec.alpha)
        self.U, self.refX = U, C
        self._m = None

    def _update_y(self):
        ex = np.exp((self.z - self.x) / 2)
        H = np.matmul(self.A, self.U) * ex[None, None, :]
        Ht = H.transpose(1, 0, 2).reshape(self.m, self.p * self.n)
        D = Ht @ Ht.conj().T
        lam, V = _eig_desc(D)
        self.y = _dual(lam, self.spec.beta)
        self.V, self.refY = V, D
        self._m = None

    def _update_z(self):
        qa = self.measure()["qa"]
        self.z = z_update(qa * math.exp(-self.z), self.spec.k)
        self._m = None

    def converged(self) -> bool:
        mm = self.measure()
        thr = self.threshold
        ok = mm["eps_x"] <= thr and mm["eps_y"] <= thr
        if self.mode == "finite":
            ok = ok and mm["eps_q"] <= thr
        return ok

    def step(self) -> bool:
        """One iteration; returns True when the termination test passes (no update made)."""
        if self.mode == "exact":
            self._update_z()
        mm = self.measure()
        if self.record:
            self.objectives.append(mm["objective"])
            self.slacks.append(mm["slack"])
        if self.converged():
            return True
        if self.mode == "exact":
            which = "X" if mm["eps_x"] >= mm["eps_y"] else "Y"
        else:
            gains = {"X": mm["eps_x"], "Y": mm["eps_y"], "z": mm["eps_q"]}
            which = max(gains, key=gains.get)
        if which == "X":
            self._update_x()
        elif which == "Y":
            self._update_y()
        else:
            self._update_z()
        if self.record:
            self.updates.append(which)
        self.iterations += 1
        return False

    # -- outputs ------------------------------------------------------------
    def output_factor(self) -> float:
        if self.mode == "exact":
            return math.exp(self.z - self.eps)
        return (1.0 - self.eps) * math.exp(self.z)

    def scaled_kraus(self, factor: float | None = None) -> np.ndarray:
        """Kraus operators sqrt(factor) Y^{-1/2} A_i X^{-1/2} in the original frame."""
        c = self.output_factor() if factor is None else factor
        Xm = (self.U * np.exp(-self.x / 2)) @ self.U.conj().T
        Ym = (self.V * np.exp(-self.y / 2)) @ self.V.conj().T
        return math.sqrt(c) * np.matmul(np.matmul(Ym, self.A), Xm)

    def pair_defects(self) -> np.ndarray:
        """T[i, j] = Tr pi_L Phi(pi_R) for L = span(V[:, i:]), R = span(U[:, j:])."""
        Mrot = np.matmul(np.matmul(self.V.conj().T, self.A), self.U)
        E = np.sum(np.abs(Mrot) ** 2, axis=0)
        return np.cumsum(np.cumsum(E[::-1, ::-1], axis=0), axis=1)[::-1, ::-1]


def monotone_violations(objectives: Sequence[float], slacks: Sequence[float]) -> list[int]:
    """Steps t with f[t+1] > f[t] + slack[t] + slack[t+1]."""
    f = np.asarray(objectives, dtype=float)
    s = np.asarray(slacks, dtype=float)
    if f.size < 2:
        return []
    bad = f[1:] > f[:-1] + s[1:] + s[:-1]
    return [int(t) for t in np.flatnonzero(bad)]


def violates(dim_l: int, dim_r: int, m: int, n: int, k: float, r: int) -> bool:
    """Whether an independent pair of these dimensions violates (k, r)."""
    s = dim_l + dim_r
    return s > m + n - k or (s == m + n - k and dim_r < r)


def candidate_pairs(m: int, n: int, k: int, r: int) -> list[tuple[int, int]]:
    """Index pairs (i, j): L from eigenvectors i.. of Y, R from j.. of X.

    Kept: i + j = k - 1, and i + j = k with j > n - r; the boundary j = n - r
    with i + j = k gives no violation and is filtered by :func:`violates`.
    """
    out = []
    for i in range(m):
        for j in range(n):
            s = i + j
            if s == k - 1 or (s == k and j >= n - r):
                if violates(m - i, n - j, m, n, k, r):
                    out.append((i, j))
    return out


@dataclass
class IndependentSetWitness:
    L: np.ndarray                       # m x dim L, orthonormal columns
    R: np.ndarray                       # n x dim R, orthonormal columns
    epsilon: float                      # Tr pi_L Phi(pi_R) on the normalized map
    violated: tuple
    exact_L: list | None = None         # exact bases when certified
    exact_R: list | None = None

    @property
    def dims(self) -> tuple[int, int]:
        return self.L.shape[1], self.R.shape[1]


class WitnessNotFound(RuntimeError):
    def __init__(self, message: str, objective: float, iterations: int):
        super().__init__(message)
        self.objective = objective
        self.iterations = iterations


def check_eps_independent(phi: CPMap, L, R) -> float:
    """Tr pi_L Phi(pi_R) = sum_i ||L^H A_i R||_F^2 for orthonormal L, R."""
    L = np.asarray(L).reshape(phi.m, -1)
    R = np.asarray(R).reshape(phi.n, -1)
    if L.shape[1] == 0 or R.shape[1] == 0:
        return 0.0
    return float(np.sum(np.abs(np.matmul(np.matmul(L.conj().T, phi.kraus), R)) ** 2))


def _orthonormal(vectors, dim) -> np.ndarray:
    if not vectors:
        return np.zeros((dim, 0))
    M = np.array([[complex(a) for a in v] for v in vectors]).T
    Q, _ = np.linalg.qr(M)
    return Q if np.any(Q.imag) else Q.real


def exact_violation(gens: Sequence[ExactMatrix], m: int, n: int, R_numeric, k: float, r: int,
                    denom_bound: int = 10**6):
    """Round span(R_numeric) and test whether it yields an exact violating independent set.

    Returns (L exact basis, R exact basis) or None.  The returned pair is
    independent by construction: L is the orthogonal complement of A(R).
    """
    R_ex = round_subspace(R_numeric, denom_bound)
    AR = image_under(gens, R_ex) if R_ex else []
    dim_l = m - len(AR)
    if not violates(dim_l, len(R_ex), m, n, k, r):
        return None
    return orth_complement(AR, m), R_ex


@dataclass
class ScalingResult:
    status: str                       # "scaled" | "diverged" | "exhausted"
    iterate: ScalingIterate
    factor: float                     # output factor on the normalized map
    iterations: int
    objective: float
    normalization: float              # divisor applied to the input map
    scaled_kraus: np.ndarray | None = None
    objectives: list = field(default_factory=list)
    slacks: list = field(default_factory=list)

    @property
    def scaled(self) -> bool:
        return self.status == "scaled"


def maj_sinkhorn(phi: CPMap, spec: MajSpec, eps: float, budget: CapacityBudget | None = None,
                 mode: str = "finite", floor_const: float = 16.0, max_iter: int | None = None,
                 record: bool = True) -> ScalingResult:
    """Run majorized Sinkhorn until an (alpha, beta) scaling of size ~k is found.

    On ``scaled`` the returned Kraus operators define a map whose column
    spectrum is weakly majorized by alpha, row spectrum by beta, and whose size
    is at least (1 - eps)^2 k.  ``diverged`` means the objective fell below
    the capacity floor.
    """
    # a map already of size <= k needs no rescaling, so balanced inputs stop at once
    base, c = normalize(phi, max(1.0, spec.k))
    if budget is None:
        budget = make_budget(phi, spec, eps, floor_const, max_iter)
    run = MajSinkhornRun(base, spec, eps, mode=mode, record=record)
    status = "exhausted"
    while run.iterations < budget.max_iters:
        if run.z > Z_LIMIT:
            status = "diverged"
            break
        if run.step():
            status = "scaled"
            break
        if run.objective <= budget.floor:
            status = "diverged"
            break
    return ScalingResult(
        status=status, iterate=run.iterate(), factor=run.output_factor(),
        iterations=run.iterations, objective=run.objective, normalization=c,
        scaled_kraus=run.scaled_kraus() if status == "scaled" else None,
        objectives=run.objectives, slacks=run.slacks)


@dataclass
class Decision:
    bounded: bool
    reason: str           # scaled | certificate | floor | budget | trivial | precision
    k: float
    r: int
    iterations: int = 0
    objective: float = 0.0
    witness: IndependentSetWitness | None = None
    objectives: list = field(default_factory=list)
    slacks: list = field(default_factory=list)

    @property
    def verdict(self) -> str:
        return "bounded" if self.bounded else "unbounded"


def _decision_budget(phi: CPMap, k: float, r: int, iter_const: float) -> int:
    n, m = phi.n, phi.m
    M = max(1.0, phi.entry_bound)
    tail = n * math.log(max(M * phi.p, 2.0))
    core = k * (n + m) ** 2 * math.log(m + n)
    if r > 0:
        core *= n * n
    return int(math.ceil(iter_const * (core + tail)))


def decision_sinkhorn(phi: CPMap, k: float, r: int = 0, *, eps: float | None = None,
                      max_iter: int | None = None, floor_const: float = 16.0,
                      iter_const: float = 64.0, mode: str = "finite",
                      certify: bool = True, certify_every: int = 25,
                      cert_tol: float = 1e-4, denom_bound: int = 10**6,
                      record: bool = True, trace: bool | None = None) -> Decision:
    """Decide whether cap_{k,r} Phi is finite.

    Bounded is reported only when the Sinkhorn termination test passes.
    Unbounded is reported on an exact violating independent set read off the
    iterate (when the Kraus operators are Gaussian integers), on the objective
    dropping below the capacity floor, or after the iteration budget.
    """
    if trace is not None:
        record = trace
    n, m = phi.n, phi.m
    spec = MajSpec.perturbed(n, m, k, r)
    if k <= 0:
        return Decision(True, "trivial", k, r)
    if k > min(spec.alpha.sum(), spec.beta.sum()) + 1e-12:
        return Decision(False, "trivial", k, r)
    if size(phi) == 0.0:
        w = IndependentSetWitness(np.eye(m), np.eye(n), 0.0, (k, r))
        return Decision(False, "certificate", k, r, witness=w)
    if eps is None:
        eps = default_eps(n, m, r)
    if max_iter is None:
        max_iter = _decision_budget(phi, k, r, iter_const)
    floor = capacity_floor(phi, k, floor_const)
    base, _ = normalize(phi)
    gens = phi.exact if certify else None
    run = MajSinkhornRun(base, spec, eps, mode=mode, record=record)
    pairs = candidate_pairs(m, n, int(round(k)), r) if gens is not None and float(k).is_integer() else []
    tried: set = set()
    while True:
        if run.step():
            return _decision(run, True, "scaled", k, r)
        f = run.objective
        if f <= floor:
            return _decision(run, False, "floor", k, r)
        if run.z > Z_LIMIT:
            return _decision(run, False, "precision", k, r)
        if run.iterations >= max_iter:
            return _decision(run, False, "budget", k, r)
        if pairs and run.iterations % certify_every == 0:
            w = _try_certificate(run, gens, pairs, k, r, cert_tol, denom_bound, tried)
            if w is not None:
                return _decision(run, False, "certificate", k, r, w)


def _decision(run: MajSinkhornRun, bounded, reason, k, r, witness=None) -> Decision:
    return Decision(bounded, reason, k, r, run.iterations, run.objective, witness,
                    run.objectives, run.slacks)


def _try_certificate(run: MajSinkhornRun, gens, pairs, k, r, tol, denom_bound, tried,
                     max_attempts: int = 2):
    T = run.pair_defects()
    ranked = sorted(pairs, key=lambda ij: T[ij])
    attempts = 0
    seen_j = set()
    for i, j in ranked:
        if T[i, j] > tol or attempts >= max_attempts:
            break
        if j in seen_j:
            continue
        seen_j.add(j)
        attempts += 1
        R_num = run.U[:, j:]
        key = (j, np.round(R_num @ R_num.conj().T, 8).tobytes())
        if key in tried:
            continue
        tried.add(key)
        res = exact_violation(gens, run.m, run.n, R_num, k, r, denom_bound)
        if res is not None:
            L_ex, R_ex = res
            L, R = _orthonormal(L_ex, run.m), _orthonormal(R_ex, run.n)
            return IndependentSetWitness(L, R, check_eps_independent(run.phi, L, R), (k, r),
                                         exact_L=L_ex, exact_R=R_ex)
    return None


def approx_indep(phi: CPMap, k: int, r: int, eps: float, *, max_iter: int | None = None,
                 check_every: int = 10, mode: str = "finite",
                 accept: Callable[[IndependentSetWitness], bool] | None = None,
                 record: bool = True) -> IndependentSetWitness:
    """An eps-independent pair violating (k, r), read from trailing eigenvectors.

    Runs the Sinkhorn iteration for the target k - 1/(2n) without termination
    and tests the candidate splits of the eigenbases every ``check_every``
    steps.  ``accept`` may impose an extra (e.g. exact) test on a witness.
    """
    n, m = phi.n, phi.m
    if size(phi) == 0.0:
        return IndependentSetWitness(np.eye(m), np.eye(n), 0.0, (k, r))
    if not 0 <= r <= n:
        raise ValueError("need 0 <= r <= n")
    base, _ = normalize(phi)
    kp = k - 1.0 / (2 * n)
    spec = MajSpec.perturbed(n, m, kp, r)
    if max_iter is None:
        kk = max(k, 1)
        max_iter = int(math.ceil(4 * kk * kk * (m + n) * n ** 3
                                 * math.log(2 * math.e ** 2 * n * kk * kk / eps)))
    run = MajSinkhornRun(base, spec, 0.0, mode=mode, record=record)
    pairs = candidate_pairs(m, n, k, r)
    if not pairs:
        raise ValueError(f"no candidate split violates (k, r) = ({k}, {r})")
    while True:
        if run.iterations % check_every == 0:
            T = run.pair_defects()
            for i, j in sorted(pairs, key=lambda ij: T[ij]):
                if T[i, j] > eps:
                    break
                w = IndependentSetWitness(run.V[:, i:].copy(), run.U[:, j:].copy(), float(T[i, j]), (k, r))
                if accept is None or accept(w):
                    return w
        if run.iterations >= max_iter or run.z > Z_LIMIT:
            raise WitnessNotFound(f"no eps-independent candidate after {run.iterations} iterations",
                                  run.objective, run.iterations)
        run.step()


def find_kstar(phi: CPMap, **kwargs) -> tuple[int, list[Decision]]:
    """Largest k with cap_{k,0} finite, by binary search over [0, min(m, n)]."""
    lo, hi = 0, min(phi.m, phi.n)
    log = []
    while lo < hi:
        mid = (lo + hi + 1) // 2
        d = decision_sinkhorn(phi, mid, 0, **kwargs)
        log.append(d)
        if d.bounded:
            lo = mid
        else:
            hi = mid - 1
    return lo, log


def find_rstar(phi: CPMap, kstar: int, **kwargs) -> tuple[int, list[Decision]]:
    """Largest r with cap_{k*,r} finite, by binary search over [0, n]."""
    lo, hi = 0, phi.n
    log = []
    while lo < hi:
        mid = (lo + hi + 1) // 2
        d = decision_sinkhorn(phi, kstar, mid, **kwargs)
        log.append(d)
        if d.bounded:
            lo = mid
        else:
            hi = mid - 1
    return lo, log
