"""Independent reference computations used by the tests and the repro suite.

None of these call the scaling code.  Ranks of Gaussian-integer matrices are
computed modulo a large prime p = 1 (mod 4), sending i to a square root of -1.
Reduction can only lower the rank, so a full rank mod p is a proof of full
rank over Q(i); for matrices whose minors have norm below p the two ranks
agree exactly.
"""
from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np
from scipy.optimize import minimize
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

__all__ = [
    "PRIME",
    "max_matching_oracle",
    "hall_blocker_oracle",
    "kl_projection_oracle",
    "rank_mod_p",
    "blowup_ncrank",
    "enumerate_subspaces",
    "shrunk_oracle",
    "matching_member",
    "weighted_opt_oracle",
    "line_meet_dims",
]

PRIME = 2_147_483_629          # prime, = 1 mod 4, below 2^31 so products fit in int64
_I_MOD = pow(2, (PRIME - 1) // 4, PRIME)
if _I_MOD * _I_MOD % PRIME != PRIME - 1:           # pragma: no cover - fixed prime
    for _g in range(3, 100):
        _I_MOD = pow(_g, (PRIME - 1) // 4, PRIME)
        if _I_MOD * _I_MOD % PRIME == PRIME - 1:
            break


# --- bipartite oracles ------------------------------------------------------

def max_matching_oracle(A) -> int:
    """Maximum matching size of the support graph (Hopcroft-Karp via scipy)."""
    A = np.asarray(A)
    if A.size == 0 or not np.any(A):
        return 0
    match = maximum_bipartite_matching(csr_matrix((A != 0).astype(np.int8)), perm_type="column")
    return int(np.sum(match >= 0))


def hall_blocker_oracle(A) -> tuple[int, tuple]:
    """(max defect, smallest column set attaining it) by exhaustive search.

    The maximizers of |S| - |N(S)| are closed under intersection, so the
    smallest one is unique.
    """
    sup = np.asarray(A) != 0
    m, n = sup.shape
    best, best_sets = 0, [()]
    for size in range(1, n + 1):
        for S in itertools.combinations(range(n), size):
            d = size - int(np.any(sup[:, list(S)], axis=1).sum())
            if d > best:
                best, best_sets = d, [S]
            elif d == best:
                best_sets.append(S)
    smallest = min(best_sets, key=len)
    return best, smallest


# --- KL projection oracle ---------------------------------------------------

def kl_projection_oracle(q, alpha) -> tuple[np.ndarray, float]:
    """Projection of q onto {p >= 0 weakly majorized by alpha} by SQP.

    Uses the explicit description sum_{j in S} p_j <= alpha_1 + ... + alpha_|S|
    for every subset S, so no sorting enters the constraints.
    """
    q = np.asarray(q, dtype=float)
    alpha = np.sort(np.asarray(alpha, dtype=float))[::-1]
    n = q.size
    live = np.flatnonzero(q > 0)
    p = np.zeros(n)
    if live.size == 0:
        return p, 0.0
    ql = q[live]
    pref = np.concatenate([[0.0], np.cumsum(alpha)])
    rows, rhs = [], []
    for size in range(1, live.size + 1):
        for S in itertools.combinations(range(live.size), size):
            r = np.zeros(live.size)
            r[list(S)] = 1.0
            rows.append(r)
            rhs.append(pref[size])
    G = np.array(rows)
    h = np.array(rhs)

    def f(u):
        pl = np.exp(u)
        return float(np.sum(pl * (u - np.log(ql)) - pl + ql))

    def grad(u):
        pl = np.exp(u)
        return pl * (u - np.log(ql))

    cons = {"type": "ineq", "fun": lambda u: h - G @ np.exp(u),
            "jac": lambda u: -G * np.exp(u)[None, :]}
    # start strictly inside: scale q down until it is majorized
    u0 = np.log(ql)
    excess = np.max((G @ ql) / h)
    if excess >= 1:
        u0 = u0 - math.log(excess) - 1e-3
    res = minimize(f, u0, jac=grad, constraints=[cons], method="SLSQP",
                   options={"ftol": 1e-15, "maxiter": 2000})
    u = res.x
    # the optimum can sit on p_j = 0 only when q_j = 0, so the log
    # parametrization loses nothing
    p[live] = np.exp(u)
    return p, f(u)


# --- exact ranks modulo a prime ----------------------------------------------

def _to_mod(entry) -> int:
    """Gaussian-integer-like value to its residue mod (p, i - s)."""
    if isinstance(entry, (int, np.integer)):
        return int(entry) % PRIME
    if isinstance(entry, Fraction):
        if entry.denominator != 1:
            raise ValueError("integral entries required")
        return int(entry) % PRIME
    if hasattr(entry, "real") and hasattr(entry, "imag") and not isinstance(entry, (float, complex)):
        re, im = Fraction(str(entry.real)), Fraction(str(entry.imag))
    else:
        c = complex(entry)
        re, im = Fraction(c.real), Fraction(c.imag)
    if re.denominator != 1 or im.denominator != 1:
        raise ValueError("integral entries required")
    return (int(re) + int(im) * _I_MOD) % PRIME


def _mod_array(M) -> np.ndarray:
    rows = [[_to_mod(v) for v in row] for row in M]
    return np.array(rows, dtype=np.int64).reshape(len(rows), len(rows[0]) if rows else 0)


def rank_mod_p(M) -> int:
    """Rank of an integer matrix (given as int64 residues or entries) mod PRIME."""
    A = M.copy() if isinstance(M, np.ndarray) and M.dtype == np.int64 else _mod_array(M)
    A %= PRIME
    rows, cols = A.shape
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.flatnonzero(A[r:, c])
        if nz.size == 0:
            continue
        piv = r + int(nz[0])
        if piv != r:
            A[[r, piv]] = A[[piv, r]]
        inv = pow(int(A[r, c]), PRIME - 2, PRIME)
        A[r] = (A[r] * inv) % PRIME
        below = A[r + 1:, c].copy()
        if np.any(below):
            A[r + 1:] = (A[r + 1:] - (below[:, None] * A[r][None, :]) % PRIME) % PRIME
        r += 1
    return r


def blowup_ncrank(generators, seed: int = 0, tries: int = 2) -> int:
    """Noncommutative rank from the rank of random elements of blow-ups.

    rank(sum_i A_i (x) C_i) / d never exceeds ncrank and attains it for
    d >= n - 1 and generic C_i, so the result is a lower bound that is exact
    with high probability.
    """
    mats = [_mod_array(g) for g in generators]
    m, n = mats[0].shape
    rng = np.random.default_rng(seed)
    best = 0
    d = max(1, n - 1)
    for _ in range(tries):
        total = np.zeros((m * d, n * d), dtype=np.int64)
        for A in mats:
            C = rng.integers(0, PRIME, size=(d, d), dtype=np.int64)
            # kron mod p without overflow: entries of A and C are < 2^31
            total = (total + _kron_mod(A, C)) % PRIME
        best = max(best, rank_mod_p(total))
        if best == min(m, n) * d:
            break
    return best // d


def _matmul_mod(A, B) -> np.ndarray:
    out = np.zeros((A.shape[0], B.shape[1]), dtype=np.int64)
    for k in range(A.shape[1]):
        out = (out + (A[:, k:k + 1] * B[k:k + 1, :]) % PRIME) % PRIME
    return out


def _kron_mod(A, C) -> np.ndarray:
    m, n = A.shape
    d = C.shape[0]
    out = (A[:, None, :, None] * C[None, :, None, :]) % PRIME
    return out.reshape(m * d, n * d)


# --- small subspace enumeration ----------------------------------------------

def enumerate_subspaces(n: int, values=(-1, 0, 1)):
    """All subspaces of C^n with an RREF basis whose free entries lie in ``values``.

    Yields integer basis lists (rows), including the zero subspace first.
    """
    yield []
    for dim in range(1, n + 1):
        for pivots in itertools.combinations(range(n), dim):
            free = [(r, c) for r in range(dim) for c in range(pivots[r] + 1, n) if c not in pivots]
            for vals in itertools.product(values, repeat=len(free)):
                rows = [[0] * n for _ in range(dim)]
                for r, c in enumerate(pivots):
                    rows[r][c] = 1
                for (r, c), v in zip(free, vals):
                    rows[r][c] = v
                yield rows


def _image_dim(gen_mods, rows) -> int:
    if not rows:
        return 0
    U = np.array(rows, dtype=np.int64).T % PRIME              # n x dim
    imgs = [_matmul_mod(G, U) for G in gen_mods]
    return rank_mod_p(np.concatenate(imgs, axis=1))


def shrunk_oracle(generators, values=(-1, 0, 1)) -> tuple[int, list]:
    """(max defect, smallest subspace of max defect) over enumerated subspaces.

    The maximizers form a lattice, so their intersection is the smallest one;
    it is returned as an integer basis (rows).  Only subspaces with small
    RREF entries are searched; callers cross-check the defect against
    ``blowup_ncrank``.  Two distinct smallest maximizers mean their
    intersection lies outside the grid, which raises LookupError.
    """
    gen_mods = [_mod_array(g) for g in generators]
    n = gen_mods[0].shape[1]
    best, best_sets = 0, [[]]
    for rows in enumerate_subspaces(n, values):
        d = len(rows) - _image_dim(gen_mods, rows)
        if d > best:
            best, best_sets = d, [rows]
        elif d == best:
            best_sets.append(rows)
    smallest = min(best_sets, key=len)
    for rows in best_sets:
        if len(rows) == len(smallest) and rows != smallest:
            raise LookupError("smallest maximizer lies outside the enumerated grid")
    return best, smallest


# --- fractional matching membership and weighted optimum --------------------

def line_meet_dims(line_bases, V) -> list[int]:
    """dim(l_i cap V) for integer bases (rows), computed mod p."""
    out = []
    Vm = _mod_array(V) if V else None
    for l in line_bases:
        lm = _mod_array(l)
        if Vm is None:
            out.append(0)
            continue
        out.append(lm.shape[0] + Vm.shape[0] - rank_mod_p(np.concatenate([lm, Vm], axis=0)))
    return out


MAX_MEMBER_COLUMNS = 64


def matching_member(line_bases, x, seed: int = 0) -> bool:
    """Whether x (rationals) satisfies sum_i x_i dim(l_i cap V) <= dim V for all V.

    Writing x_i = c_i / d, x is feasible iff the matrix space on the direct
    sum of c_i copies of each line, with generators u_j -> u_j (x) e_t
    (t = 1..d), has no shrunk subspace: a shrunk subspace projects to
    subspaces S_j of the copies with sum dim S_j > d dim(sum S_j).  Full
    noncommutative rank is tested on a random blow-up mod p.
    """
    xs = [v if isinstance(v, Fraction) else Fraction(str(v)) for v in x]
    if any(v < 0 for v in xs):
        return False
    d = 1
    for v in xs:
        d = d * v.denominator // math.gcd(d, v.denominator)
    copies = []
    for l, v in zip(line_bases, xs):
        copies += [l] * int(v * d)
    if not copies:
        return True
    n = len(line_bases[0][0])
    cols = sum(len(l) for l in copies)
    if cols > d * n:
        return False
    if cols > MAX_MEMBER_COLUMNS:
        raise ValueError(f"blow-up too large ({cols} columns); use smaller denominators")
    gens = []
    offset = 0
    for l in copies:
        J = np.array(l, dtype=object).T               # n x dim l
        for t in range(d):
            G = np.zeros((n * d, cols), dtype=object)
            for a in range(n):
                for b in range(len(l)):
                    G[a * d + t, offset + b] = J[a, b]
            gens.append(G.tolist())
        offset += len(l)
    return blowup_ncrank(gens, seed=seed) == cols


def weighted_opt_oracle(line_bases, w) -> Fraction:
    """max w.x over half-integral x in [0, 1]^p feasible for the matching polytope."""
    p = len(line_bases)
    best = Fraction(0)
    grid = [Fraction(0), Fraction(1, 2), Fraction(1)]
    for x in itertools.product(grid, repeat=p):
        val = sum(Fraction(wi) * xi for wi, xi in zip(w, x))
        if val <= best:
            continue
        if matching_member(line_bases, x):
            best = val
    return best
