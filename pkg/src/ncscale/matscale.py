"""Majorized Sinkhorn scaling for nonnegative matrices and Hall blockers.

This is the diagonal special case of the operator iteration: the row and column
sums play the role of the spectra, and independent sets are zero blocks.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .permproj import alpha_r, kl_project
from .opscale import capacity_floor
from .numla import CPMap

__all__ = [
    "MatrixScalingTriple",
    "MatrixScalingResult",
    "HallBlocker",
    "ZeroBlock",
    "matrix_objective",
    "matrix_sinkhorn",
    "round_fractional_cover",
    "smallest_hall_blocker",
    "bipartite_kraus",
    "max_matching_size",
]


def _check_nonneg(A) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.ndim != 2:
        raise ValueError("matrix required")
    if np.any(A < 0):
        raise ValueError("entries must be nonnegative")
    return A


@dataclass
class MatrixScalingTriple:
    x: np.ndarray     # column exponents
    y: np.ndarray     # row exponents
    z: float

    def scaled(self, A, factor_exp: float = 0.0) -> np.ndarray:
        """e^(z - factor_exp) diag(e^-y) A diag(e^-x)."""
        return math.exp(self.z - factor_exp) * np.exp(-self.y)[:, None] * A * np.exp(-self.x)[None, :]


@dataclass
class MatrixScalingResult:
    status: str                 # "scaled" | "diverged" | "exhausted"
    triple: MatrixScalingTriple
    iterations: int
    objective: float
    scaled_matrix: np.ndarray | None = None
    objectives: list | None = None

    @property
    def scaled(self) -> bool:
        return self.status == "scaled"


@dataclass(frozen=True)
class HallBlocker:
    S: tuple            # column indices
    defect: int         # |S| - |Gamma(S)|


@dataclass(frozen=True)
class ZeroBlock:
    rows: tuple
    cols: tuple

    @property
    def size(self) -> int:
        return len(self.rows) + len(self.cols)


def matrix_objective(A, x, y, z, alpha, beta, k) -> float:
    """sum A_ij e^(z - y_i - x_j) + alpha.sort(x) + beta.sort(y) - k z."""
    A = _check_nonneg(A)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(x < 0) or np.any(y < 0) or z < 0:
        raise ValueError("triple outside the domain")
    a = float(np.sum(A * np.exp(z - y[:, None] - x[None, :])))
    return (a + float(np.asarray(alpha) @ np.sort(x)[::-1])
            + float(np.asarray(beta) @ np.sort(y)[::-1]) - k * z)


def _z_gap(qa: float, z: float, k: float) -> float:
    a = qa * math.exp(-z)
    if a <= 0:
        return math.inf if k > 0 else 0.0
    best = k - k * math.log(k / a) if a < k else a
    return max(0.0, qa - k * z - best)


def _zero_block_certificate(A, x, y, k: int) -> ZeroBlock | None:
    """A zero block with |rows| + |cols| > m + n - k, found by a sorted sweep.

    Rows and columns are ordered by increasing exponent; every split
    i + j = k - 1 is tried and the block entries are checked exactly.
    """
    m, n = A.shape
    rows = np.argsort(y, kind="stable")
    cols = np.argsort(x, kind="stable")
    for i in range(0, min(m, k)):
        j = k - 1 - i
        if j > n:
            continue
        L = rows[: m - i]
        R = cols[: n - j]
        if len(R) and len(L) and not np.any(A[np.ix_(L, R)]):
            return ZeroBlock(tuple(sorted(L.tolist())), tuple(sorted(R.tolist())))
    return None


def _matrix_floor(A, k) -> float:
    m, n = A.shape
    M = float(A.max()) if A.size else 1.0
    diag = CPMap(np.zeros((1, m, n)) + math.sqrt(max(M, 1.0)))
    return capacity_floor(diag, k)


def matrix_sinkhorn(A, alpha, beta, k: float, eps: float, max_iter: int = 100_000,
                    certify: bool = True, check_every: int = 10) -> MatrixScalingResult:
    """Find a k-scaling of A to (alpha, beta) or report divergence.

    Updates whichever of the column exponents, row exponents or the global
    factor gives the largest KL progress.  With alpha = beta = 1 a zero
    block violating the matching bound stops the run early as ``diverged``.
    """
    A = _check_nonneg(A)
    m, n = A.shape
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=float)
    if alpha.size != n or beta.size != m:
        raise ValueError("alpha/beta length mismatch")
    if k > min(alpha.sum(), beta.sum()) + 1e-12:
        raise ValueError("k exceeds min(sum alpha, sum beta)")
    s = float(A.sum())
    if s == 0.0:
        if k <= 0:
            return MatrixScalingResult("scaled", MatrixScalingTriple(np.zeros(n), np.zeros(m), 0.0), 0, 0.0, A.copy())
        return MatrixScalingResult("diverged", MatrixScalingTriple(np.zeros(n), np.zeros(m), 0.0), 0, -math.inf)
    bound = max(1.0, float(k))
    B = A * (bound / s) if s > bound else A
    floor = _matrix_floor(A, k)
    thr = min(alpha[0], beta[0]) * eps * eps / 2
    unit = certify and np.all(alpha == 1) and np.all(beta == 1) and float(k).is_integer()
    support = B > 0
    x, y, z = np.zeros(n), np.zeros(m), 0.0
    objs = []
    it = 0
    while True:
        expo = z - y[:, None] - x[None, :]
        Sc = np.where(support, B * np.exp(np.where(support, expo, 0.0)), 0.0)
        qa = float(Sc.sum())
        f = qa + float(alpha @ np.sort(x)[::-1]) + float(beta @ np.sort(y)[::-1]) - k * z
        objs.append(f)
        col = kl_project(Sc.sum(axis=0), alpha)
        row = kl_project(Sc.sum(axis=1), beta)
        gains = {"x": col.divergence, "y": row.divergence, "z": _z_gap(qa, z, k)}
        triple = MatrixScalingTriple(x.copy(), y.copy(), z)
        if max(gains.values()) <= thr:
            out = (1 - eps) * Sc
            return MatrixScalingResult("scaled", triple, it, f, out, objs)
        if f <= floor:
            return MatrixScalingResult("diverged", triple, it, f, None, objs)
        if unit and it % check_every == 0 and it > 0:
            if _zero_block_certificate(A, x, y, int(k)) is not None:
                return MatrixScalingResult("diverged", triple, it, f, None, objs)
        if it >= max_iter:
            return MatrixScalingResult("exhausted", triple, it, f, None, objs)
        which = max(gains, key=gains.get)
        if which == "x":
            x = _dual_unsorted(Sc.sum(axis=0) * np.exp(x), alpha)
        elif which == "y":
            y = _dual_unsorted(Sc.sum(axis=1) * np.exp(y), beta)
        else:
            a = qa * math.exp(-z)
            z = math.log(k / a) if a < k else 0.0
        it += 1


def _dual_unsorted(q, target) -> np.ndarray:
    proj = kl_project(q, target)
    out = np.empty_like(proj.dual_x)
    out[proj.order] = proj.dual_x
    return out


def round_fractional_cover(A, triple: MatrixScalingTriple, k: int, threshold: float | None = None) -> ZeroBlock:
    """Zero block of size >= m + n - k + 1 read off a low-objective triple.

    Rows are sorted by y and columns by x (smallest first); the sweep tries all
    splits i + j = k + 1 and returns the first exactly-zero block.
    """
    A = _check_nonneg(A)
    m, n = A.shape
    if not np.any(A):
        return ZeroBlock(tuple(range(m)), tuple(range(n)))
    if threshold is not None:
        f = matrix_objective(A, triple.x, triple.y, triple.z, np.ones(n), np.ones(m), k - 0.5)
        if f > -threshold:
            raise ValueError("objective above the rounding threshold")
    rows = np.argsort(np.asarray(triple.y), kind="stable")
    cols = np.argsort(np.asarray(triple.x), kind="stable")
    for i in range(1, k + 1):
        j = k + 1 - i
        if i > m + 1 or j > n + 1:
            continue
        L = rows[: m - i + 1]
        R = cols[: n - j + 1]
        if not np.any(A[np.ix_(L, R)]):
            return ZeroBlock(tuple(sorted(L.tolist())), tuple(sorted(R.tolist())))
    raise ValueError("no zero block of the required size along the sweep")


def max_matching_size(A) -> int:
    """Maximum matching in the support graph (augmenting paths)."""
    A = np.asarray(A)
    m, n = A.shape
    match_row = [-1] * m
    adj = [np.flatnonzero(A[:, j]).tolist() for j in range(n)]

    def augment(j, seen):
        for i in adj[j]:
            if not seen[i]:
                seen[i] = True
                if match_row[i] < 0 or augment(match_row[i], seen):
                    match_row[i] = j
                    return True
        return False

    return sum(augment(j, [False] * m) for j in range(n))


def smallest_hall_blocker(A, max_iter: int = 2000) -> HallBlocker:
    """Smallest column set maximizing |S| - |Gamma(S)|.

    Runs the perturbed scaling just below the matching number and reads S off
    the sorted column exponents.  The candidate is checked against the
    alternating-path characterization (columns exposed by some maximum
    matching), which is also the fallback.
    """
    A = _check_nonneg(A)
    m, n = A.shape
    k = max_matching_size(A)
    defect = n - k
    if defect == 0:
        return HallBlocker((), 0)
    sup = A > 0

    def is_blocker(S):
        S = list(S)
        return len(S) - int(np.any(sup[:, S], axis=1).sum()) == defect

    # the smallest blocker carries the smallest column exponents once the
    # perturbed target k - 1/(2n) with all column weights reduced is pushed
    res = matrix_sinkhorn(A, alpha_r(n, n), np.ones(m), k - 1.0 / (2 * n), 0.0,
                          max_iter=max_iter, certify=False)
    order = np.argsort(res.triple.x, kind="stable")
    best = None
    for size_s in range(defect, n + 1):
        S = sorted(order[:size_s].tolist())
        if is_blocker(S):
            best = S
            break
    exact = _exposed_columns(sup, k)
    if best is None or len(best) != len(exact) or set(best) != set(exact):
        best = exact
    return HallBlocker(tuple(best), defect)


def _exposed_columns(sup, k) -> list[int]:
    """Columns left unmatched by some maximum matching (alternating-path closure)."""
    m, n = sup.shape
    match_row = [-1] * m
    match_col = [-1] * n
    adj = [np.flatnonzero(sup[:, j]).tolist() for j in range(n)]

    def augment(j, seen):
        for i in adj[j]:
            if not seen[i]:
                seen[i] = True
                if match_row[i] < 0 or augment(match_row[i], seen):
                    match_row[i] = j
                    match_col[j] = i
                    return True
        return False

    for j in range(n):
        augment(j, [False] * m)
    reach = {j for j in range(n) if match_col[j] < 0}
    stack = list(reach)
    while stack:
        j = stack.pop()
        for i in adj[j]:
            jj = match_row[i]
            if jj >= 0 and jj not in reach:
                reach.add(jj)
                stack.append(jj)
    return sorted(reach)


def bipartite_kraus(A) -> CPMap:
    """Kraus operators sqrt(A_ij) E_ij, one per support entry."""
    A = _check_nonneg(A)
    m, n = A.shape
    ops = []
    for i, j in zip(*np.nonzero(A)):
        E = np.zeros((m, n))
        E[i, j] = math.sqrt(A[i, j])
        ops.append(E)
    if not ops:
        ops.append(np.zeros((m, n)))
    return CPMap(np.array(ops))
