"""Reproduction suite: property checks of every solver against exact oracles.

Each criterion returns a :class:`CriterionResult`; :func:`run_suite` prints one
PASS/FAIL line per criterion.  Thresholds live in module constants so a
corrupted constant flips the matching line.
"""
from __future__ import annotations

import math
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from . import oracles
from .blapps import (LineSet, dominant_two_cover, frac_matroid_matching, mem_eps_bl,
                     verify_matching, weighted_opt)
from .exactla import ExactMatrix, projection, same_span, track_bits
from .matscale import bipartite_kraus
from .numla import CPMap
from .opscale import MajSpec, find_kstar, maj_sinkhorn, monotone_violations
from .permproj import kl_project, majorization_slack
from .shrunk import randomized_shrunk, randomized_shrunk_trial, round_subspaces

__all__ = [
    "CriterionResult",
    "CRITERIA",
    "run_suite",
    "handcrafted_instances",
    "bipartite_instances",
    "random_line_sets",
]

# thresholds
MATCHING_AGREEMENT = 1.0
RUNTIME_LIMIT = 600.0
MAJORIZATION_SLACK = 1e-8
KL_AGREEMENT = 1e-6
KL_FEASIBILITY = 1e-12
SHRUNK_TRIAL_SUCCESS = 0.4
SHRUNK_TRIAL_SEEDS = 100
DUALITY_EPS = 0.05
MEMBERSHIP_EPS = 0.05
BIT_CONSTANT = 8.0


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0
    data: dict = field(default_factory=dict)

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] {self.number} {self.name}: {self.detail} ({self.seconds:.1f}s)"


@dataclass
class _Context:
    """Objective traces collected by criteria 1-3 for the monotonicity check."""
    traces: dict = field(default_factory=lambda: {1: [], 2: [], 3: []})
    shrunk_runs: list = field(default_factory=list)


# --- instance families ---------------------------------------------------------

def _gens(mats) -> list[ExactMatrix]:
    return [ExactMatrix([[int(v) for v in row] for row in M]) for M in mats]


def _E(m, n, i, j):
    M = [[0] * n for _ in range(m)]
    M[i][j] = 1
    return M


def _rotate(mats, Q, P):
    Q, P = np.array(Q), np.array(P)
    return [(Q @ np.array(M) @ P).tolist() for M in mats]


def _wedge_int(a, b):
    n = len(a)
    return [[a[i] * b[j] - b[i] * a[j] for j in range(n)] for i in range(n)]


def handcrafted_instances() -> list[tuple[str, list]]:
    """Small named matrix spaces with known shrunk-subspace structure."""
    bip = [_E(3, 3, 0, 0), _E(3, 3, 0, 1), _E(3, 3, 1, 2), _E(3, 3, 2, 2)]
    Q = [[1, 1, 0], [0, 1, 0], [0, 0, 1]]
    P = [[1, 0, 0], [1, 1, 0], [0, -1, 1]]
    block = [[[1, -1, 1, 0], [0, 1, 1, 1], [0, 0, 0, 1], [0, 0, 0, -1]],
             [[0, 1, -1, 1], [1, 0, 1, 0], [0, 0, 0, 1], [0, 0, 0, 1]]]
    kernel = [[[1, 0, 1], [0, 1, 1], [1, 1, 2]],
              [[0, 1, 1], [1, -1, 0], [2, 0, 2]]]
    return [
        ("identity", [[[1, 0], [0, 1]]]),
        ("E11,E12", [_E(2, 2, 0, 0), _E(2, 2, 0, 1)]),
        ("skew3", [_wedge_int(*pair) for pair in
                   (([1, 0, 0], [0, 1, 0]), ([1, 0, 0], [0, 0, 1]), ([0, 1, 0], [0, 0, 1]))]),
        ("E11,E22,E12", [_E(2, 2, 0, 0), _E(2, 2, 1, 1), _E(2, 2, 0, 1)]),
        ("rotated-bipartite", _rotate(bip, Q, P)),
        ("rectangular-2x3", [_E(2, 3, 0, 0), _E(2, 3, 0, 1), _E(2, 3, 1, 2)]),
        ("zero", [[[0, 0], [0, 0]]]),
        ("wedge-identical-lines", [_wedge_int([1, 0, 0], [0, 1, 0]), _wedge_int([1, 0, 0], [0, 1, 0])]),
        ("block-4x4", block),
        ("common-kernel", kernel),
    ]


def bipartite_instances(count: int, max_m: int, max_n: int, seed: int) -> list[np.ndarray]:
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        m = int(rng.integers(1, max_m + 1))
        n = int(rng.integers(1, max_n + 1))
        A = (rng.random((m, n)) < rng.uniform(0.15, 0.6)).astype(int)
        if not A.any():
            A[rng.integers(m), rng.integers(n)] = 1
        out.append(A)
    return out


def random_line_sets(count: int, max_n: int, max_p: int, seed: int, entries: int = 2,
                     min_n: int = 2, min_p: int = 1) -> list[LineSet]:
    """Random lines of rank 2 with integer entries in [-entries, entries]."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        n = int(rng.integers(min_n, max_n + 1))
        p = int(rng.integers(min_p, max_p + 1))
        pairs = []
        while len(pairs) < p:
            a, b = rng.integers(-entries, entries + 1, size=(2, n))
            if np.linalg.matrix_rank(np.stack([a, b])) == 2:
                pairs.append((a.tolist(), b.tolist()))
        out.append(LineSet.from_vectors(pairs))
    return out


def _line_bases(lines: LineSet) -> list[list]:
    return [[list(a), list(b)] for a, b in lines.lines]


def _integral_rows(basis) -> list[list[int]]:
    """Scale exact vectors over Q(i) to Gaussian-integer rows."""
    out = []
    for v in basis:
        den = 1
        for a in v:
            for part in (Fraction(str(a.real)), Fraction(str(a.imag))):
                den = den * part.denominator // math.gcd(den, part.denominator)
        row = []
        for a in v:
            re, im = Fraction(str(a.real)) * den, Fraction(str(a.imag)) * den
            row.append(int(re) if im == 0 else complex(int(re), int(im)))
        out.append(row)
    return out


# --- criteria ------------------------------------------------------------------

def criterion_1(ctx: _Context) -> CriterionResult:
    mats = bipartite_instances(50, 8, 8, seed=101)
    agree = 0
    for A in mats:
        k, log = find_kstar(bipartite_kraus(A))
        ctx.traces[1] += [(d.objectives, d.slacks) for d in log]
        agree += k == oracles.max_matching_oracle(A)
    rate = agree / len(mats)
    return CriterionResult(1, "bipartite ncrank", rate >= MATCHING_AGREEMENT,
                           f"{agree}/{len(mats)} agree with augmenting paths")


def _criterion_2_instances():
    cases = []
    for idx, A in enumerate(bipartite_instances(20, 6, 6, seed=202)):
        cases.append((f"bipartite-{idx}", bipartite_kraus(A), ("bipartite", A)))
    for name, mats in handcrafted_instances():
        cases.append((name, CPMap.from_exact(_gens(mats)), ("general", mats)))
    return cases


def _oracle_shrunk(kind, data, n):
    if kind == "bipartite":
        defect, S = oracles.hall_blocker_oracle(data)
        rows = [[1 if j == c else 0 for j in range(n)] for c in S] if defect else []
        return defect, rows
    defect, rows = oracles.shrunk_oracle(data)
    nc = oracles.blowup_ncrank(data)
    if n - defect != nc:
        raise AssertionError(f"enumeration misses the maximum defect: {n - defect} != {nc}")
    return defect, rows


def _same(U_exact, rows, n) -> bool:
    if not rows:
        return len(U_exact) == 0
    return same_span(U_exact, _gens([rows])[0].tolist())


def criterion_2(ctx: _Context) -> CriterionResult:
    failures = []
    worst_rate = 1.0
    for name, phi, (kind, data) in _criterion_2_instances():
        n = phi.n
        defect, rows = _oracle_shrunk(kind, data, n)
        with track_bits() as tr:
            dom = round_subspaces(phi)
            if dom.R:
                projection(dom.R, n)
            rnd = randomized_shrunk(phi)
        ctx.traces[2] += [(d.objectives, d.slacks) for d in dom.decisions]
        M = max(1.0, phi.entry_bound)
        ctx.shrunk_runs.append((name, n, M, tr.max_bits))
        if dom.kstar != n - defect or not _same(dom.R, rows, n):
            failures.append(f"{name}: rounding")
        if rnd.ncrank != n - defect or not _same(rnd.U, rows, n):
            failures.append(f"{name}: randomized")
        ok_trials = 0
        for t in range(SHRUNK_TRIAL_SEEDS):
            res = randomized_shrunk_trial(phi, rnd.d, n - defect, seed=(7, rnd.d, t))
            ok_trials += res is not None and _same(res.U, rows, n)
        rate = ok_trials / SHRUNK_TRIAL_SEEDS
        worst_rate = min(worst_rate, rate)
        if rate < SHRUNK_TRIAL_SUCCESS:
            failures.append(f"{name}: trial success {rate:.2f}")
    n_cases = 30
    detail = (f"{n_cases - len(set(f.split(':')[0] for f in failures))}/{n_cases} exact, "
              f"worst per-trial success {worst_rate:.2f}")
    if failures:
        detail += "; " + ", ".join(failures[:5])
    return CriterionResult(2, "smallest shrunk subspace", not failures, detail)


def _generic_scaling_instance(rng):
    n = int(rng.integers(1, 7))
    m = int(rng.integers(1, 7))
    p = m + n          # enough operators that only trivial independent sets exist
    kraus = rng.standard_normal((p, m, n))
    # skew the row and column weights over three orders of magnitude so the
    # scaling has work to do; invertible diagonals keep the map generic
    left = np.exp(rng.uniform(-3.5, 3.5, m))
    right = np.exp(rng.uniform(-3.5, 3.5, n))
    kraus = left[None, :, None] * kraus * right[None, None, :]
    alpha = np.sort(rng.uniform(0.3, 1.0, n))[::-1]
    beta = np.sort(rng.uniform(0.3, 1.0, m))[::-1]
    k = float(rng.uniform(0.3, 0.95) * min(alpha.sum(), beta.sum()))
    return CPMap(kraus), MajSpec(alpha, beta, k)


def criterion_3(ctx: _Context, eps: float = 0.05) -> CriterionResult:
    rng = np.random.default_rng(303)
    scaled = 0
    worst_maj, worst_size = -math.inf, math.inf
    bad = []
    for t in range(100):
        phi, spec = _generic_scaling_instance(rng)
        res = maj_sinkhorn(phi, spec, eps)
        ctx.traces[3].append((res.objectives, res.slacks))
        if not res.scaled:
            bad.append(f"#{t} {res.status}")
            continue
        scaled += 1
        K = res.scaled_kraus
        p, m, n = K.shape
        col = np.linalg.eigvalsh(sum(Ki.conj().T @ Ki for Ki in K))
        row = np.linalg.eigvalsh(sum(Ki @ Ki.conj().T for Ki in K))
        s_maj = max(majorization_slack(col, spec.alpha), majorization_slack(row, spec.beta))
        s_size = float(np.sum(np.abs(K) ** 2)) - (1 - eps) ** 2 * spec.k
        worst_maj = max(worst_maj, s_maj)
        worst_size = min(worst_size, s_size)
        if s_maj > MAJORIZATION_SLACK or s_size < -MAJORIZATION_SLACK:
            bad.append(f"#{t} slack {s_maj:.2e} size {s_size:.2e}")
    detail = (f"{scaled}/100 scaled, worst majorization excess {worst_maj:.1e}, "
              f"worst size margin {worst_size:.1e}")
    if bad:
        detail += "; " + ", ".join(bad[:5])
    return CriterionResult(3, "scaling feasibility", not bad, detail)


def criterion_4(ctx: _Context) -> CriterionResult:
    for c, fn in ((1, criterion_1), (2, criterion_2), (3, criterion_3)):
        if not ctx.traces[c]:
            fn(ctx)
    runs = steps = 0
    bad = []
    for c in (1, 2, 3):
        for objs, slacks in ctx.traces[c]:
            runs += 1
            steps += max(0, len(objs) - 1)
            v = monotone_violations(objs, slacks)
            if v:
                t = v[0]
                bad.append(f"criterion {c} step {t}: {objs[t]:.6g} -> {objs[t + 1]:.6g}")
    detail = f"{runs} runs, {steps} steps, {len(bad)} increases beyond slack"
    if bad:
        detail += "; " + "; ".join(bad[:3])
    return CriterionResult(4, "objective monotonicity", not bad, detail)


def criterion_5(ctx: _Context) -> CriterionResult:
    rng = np.random.default_rng(505)
    worst_div = worst_feas = 0.0
    rescale_bad = 0
    for _ in range(200):
        n = int(rng.integers(1, 9))
        alpha = np.sort(rng.uniform(0.1, 1.0, n))[::-1]
        q = rng.exponential(rng.uniform(0.2, 1.5), n)
        q[rng.random(n) < 0.15] = 0.0
        proj = kl_project(q, alpha)
        _, div_oracle = oracles.kl_projection_oracle(q, alpha)
        worst_div = max(worst_div, abs(proj.divergence - div_oracle))
        feas = max(majorization_slack(proj.p, alpha), float(np.max(-proj.p)))
        worst_feas = max(worst_feas, feas)
        # rescaling: divergence <= alpha_1 eps^2 / 2 forces e^-eps q into P_alpha
        e = math.sqrt(2 * proj.divergence / alpha[0])
        if majorization_slack(math.exp(-e) * q, alpha) > 1e-12:
            rescale_bad += 1
    ok = worst_div <= KL_AGREEMENT and worst_feas <= KL_FEASIBILITY and rescale_bad == 0
    return CriterionResult(5, "KL projection", ok,
                           f"max divergence gap {worst_div:.1e}, max infeasibility {worst_feas:.1e}, "
                           f"rescaling violations {rescale_bad}")


def criterion_6(ctx: _Context) -> CriterionResult:
    eps = DUALITY_EPS
    bad = []
    for idx, lines in enumerate(random_line_sets(20, 6, 6, seed=606)):
        fm = frac_matroid_matching(lines, eps=eps)
        cover = dominant_two_cover(lines)
        v, s = fm.value, cover.size
        if not (2 * v <= s + 1e-9 and s <= 2 * v / (1 - eps) + 1e-9):
            bad.append(f"#{idx} v={v:.4f} s={s}")
        if not verify_matching(lines, fm.x, tol=2 * eps, transform=fm.transform).ok:
            bad.append(f"#{idx} matching infeasible")
        bases = _line_bases(lines)
        S = _integral_rows(cover.S)
        T = _integral_rows(cover.T)
        a_S = oracles.line_meet_dims(bases, S)
        a_T = oracles.line_meet_dims(bases, T)
        if any(x + y < 2 for x, y in zip(a_S, a_T)):
            bad.append(f"#{idx} cover inequality")
    detail = f"{20 - len(bad)}/20 sandwiched with exact covers"
    if bad:
        detail += "; " + ", ".join(bad[:5])
    return CriterionResult(6, "matching duality", not bad, detail)


_STRUCTURED_LINES = [
    # three planes in C^3 meeting pairwise: optimum 3/2 for unit weights
    [([1, 0, 0], [0, 1, 0]), ([1, 0, 0], [0, 0, 1]), ([0, 1, 0], [0, 0, 1])],
    # duplicated line
    [([1, 0, 0, 0], [0, 1, 0, 0]), ([1, 0, 0, 0], [0, 1, 0, 0]), ([0, 0, 1, 0], [0, 0, 0, 1])],
    # three lines through a common vector in C^4
    [([1, 1, 0, 0], [0, 0, 1, 0]), ([1, 1, 0, 0], [0, 0, 0, 1]), ([1, 1, 0, 0], [1, 0, 1, 1])],
    # two lines inside a 3-space plus one outside
    [([1, 0, 0, 0], [0, 1, 0, 0]), ([0, 1, 1, 0], [1, 0, 1, 0]), ([0, 0, 0, 1], [1, 1, 1, 1])],
]


def _weighted_instances(count: int, seed: int):
    rng = np.random.default_rng(seed)
    out = []
    sets = [LineSet.from_vectors(ls) for ls in _STRUCTURED_LINES for _ in range(2)]
    sets += random_line_sets(count - len(sets), 4, 3, seed=seed, entries=1, min_n=3, min_p=2)
    for lines in sets:
        total = int(rng.integers(1, 7))
        w = [0] * lines.p
        for _ in range(total):
            w[int(rng.integers(lines.p))] += 1
        out.append((lines, w))
    return out


def criterion_7(ctx: _Context) -> CriterionResult:
    cases = _weighted_instances(36, seed=707)
    bad = []
    for idx, (lines, w) in enumerate(cases):
        got = weighted_opt(lines, w)
        want = oracles.weighted_opt_oracle(_line_bases(lines), w)
        if Fraction(got) != want:
            bad.append(f"#{idx} {got} != {want}")
    detail = f"{len(cases) - len(bad)}/{len(cases)} equal to half-integral enumeration"
    if bad:
        detail += "; " + ", ".join(bad[:5])
    return CriterionResult(7, "weighted optimum", not bad, detail)


def _half_integral_vertices(bases) -> list[tuple]:
    import itertools
    grid = (Fraction(0), Fraction(1, 2), Fraction(1))
    return [x for x in itertools.product(grid, repeat=len(bases)) if oracles.matching_member(bases, x)]


def certified_feasible(bases, y, vertices=None) -> bool:
    """y lies below a convex combination of feasible half-integral points."""
    from scipy.optimize import linprog
    V = np.array([[float(v) for v in x] for x in (vertices or _half_integral_vertices(bases))])
    p = len(bases)
    # find lambda >= 0, sum lambda = 1, V^T lambda >= y
    res = linprog(np.zeros(len(V)), A_ub=-V.T, b_ub=-np.asarray(y, dtype=float) + 1e-12,
                  A_eq=np.ones((1, len(V))), b_eq=[1.0], bounds=[(0, None)] * len(V), method="highs")
    return res.status == 0 and p == V.shape[1]


def _violating_points(count: int, seed: int, eps: float):
    """Lines with two of them inside a 3-space V and x giving excess >= 2 eps at V."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        n = int(rng.integers(4, 6))
        inside = []
        while len(inside) < 2:
            a, b = rng.integers(-2, 3, size=(2, 3))
            if np.linalg.matrix_rank(np.stack([a, b])) == 2:
                inside.append((a.tolist() + [0] * (n - 3), b.tolist() + [0] * (n - 3)))
        extra = []
        for _ in range(int(rng.integers(0, 3))):
            a, b = rng.integers(-2, 3, size=(2, n))
            if np.linalg.matrix_rank(np.stack([a, b])) == 2:
                extra.append((a.tolist(), b.tolist()))
        lines = LineSet.from_vectors(inside + extra)
        V = [[1 if i == j else 0 for i in range(n)] for j in range(3)]
        x = [0.8, 0.8] + [float(rng.uniform(0.01, 0.1)) for _ in extra]
        excess = sum(xi * d for xi, d in zip(x, oracles.line_meet_dims(_line_bases(lines), V))) - 3
        if excess >= 2 * eps:
            out.append((lines, x, V, excess))
    return out


def criterion_8(ctx: _Context) -> CriterionResult:
    eps = MEMBERSHIP_EPS
    bad = []
    near = far = 0
    rng = np.random.default_rng(808)
    for idx, lines in enumerate(random_line_sets(10, 4, 3, seed=818, entries=1)):
        bases = _line_bases(lines)
        verts = _half_integral_vertices(bases)
        lam = rng.dirichlet(np.ones(len(verts)))
        x = 0.9 * (lam @ np.array([[float(v) for v in u] for u in verts])) + 1e-3
        res = mem_eps_bl(lines, x, eps)
        if res.near:
            near += 1
            if np.linalg.norm(res.y - x) > eps + 1e-12 or not certified_feasible(bases, res.y, verts):
                bad.append(f"inner #{idx} uncertified Near")
        else:
            if certified_feasible(bases, x, verts):
                bad.append(f"inner #{idx} Far on a feasible point")
    for idx, (lines, x, V, excess) in enumerate(_violating_points(10, 828, eps)):
        res = mem_eps_bl(lines, x, eps)
        if res.near:
            bad.append(f"violating #{idx} Near")
        else:
            far += 1
    detail = f"{near}/10 interior points Near and certified, {far}/10 violating points Far"
    if bad:
        detail += "; " + ", ".join(bad[:5])
    return CriterionResult(8, "membership soundness", not bad, detail)


def bit_envelope(n: int, M: float) -> float:
    return n * n * (1.0 + math.log2(max(n, 1)) + math.log2(max(M, 1.0)))


def criterion_9(ctx: _Context) -> CriterionResult:
    if not ctx.shrunk_runs:
        criterion_2(ctx)
    ratios = [(bits / bit_envelope(n, M), name, bits) for name, n, M, bits in ctx.shrunk_runs]
    c, name, bits = max(ratios)
    ok = c <= BIT_CONSTANT
    return CriterionResult(9, "bit-length envelope", ok,
                           f"fitted c = {c:.3f} (worst {name}, {bits} bits), limit {BIT_CONSTANT}",
                           data={"c": c})


CRITERIA: dict[int, tuple[str, Callable[[_Context], CriterionResult]]] = {
    1: ("ncrank", criterion_1),
    2: ("shrunk", criterion_2),
    3: ("scaling", criterion_3),
    4: ("monotone", criterion_4),
    5: ("kl", criterion_5),
    6: ("duality", criterion_6),
    7: ("weighted", criterion_7),
    8: ("membership", criterion_8),
    9: ("bits", criterion_9),
}


def _selected(filter) -> list[int]:
    if filter is None or filter == "" or filter == "all":
        return sorted(CRITERIA)
    out = []
    for tok in str(filter).split(","):
        tok = tok.strip()
        for num, (slug, _) in CRITERIA.items():
            if tok == str(num) or tok == slug:
                out.append(num)
                break
        else:
            raise ValueError(f"unknown criterion {tok!r}; choose from "
                             + ", ".join(f"{k}/{v[0]}" for k, v in CRITERIA.items()))
    return sorted(set(out))


_STDOUT = object()


def run_suite(filter=None, out=_STDOUT) -> list[CriterionResult]:
    """Run the selected criteria (numbers or names, comma separated).

    Lines go to the current sys.stdout by default; pass out=None for silence.
    """
    if out is _STDOUT:
        out = sys.stdout
    ctx = _Context()
    results = []
    for num in _selected(filter):
        t0 = time.perf_counter()
        res = CRITERIA[num][1](ctx)
        res.seconds = time.perf_counter() - t0
        if num in (1, 7) and res.seconds > RUNTIME_LIMIT:
            res.passed = False
            res.detail += f"; runtime above {RUNTIME_LIMIT:.0f}s"
        results.append(res)
        if out is not None:
            print(res.line(), file=out, flush=True)
    return results


if __name__ == "__main__":     # pragma: no cover
    rs = run_suite(sys.argv[1] if len(sys.argv) > 1 else None)
    sys.exit(0 if all(r.passed for r in rs) else 1)
