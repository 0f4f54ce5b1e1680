import math
from fractions import Fraction

import numpy as np
import pytest

from ncscale.blapps import (LineSet, dominant_two_cover, frac_matroid_matching, mem_eps_bl,
                            verify_matching, wedge, weighted_opt, weighted_sinkhorn)
from ncscale.exactla import ExactMatrix, rank, same_span
from ncscale.oracles import blowup_ncrank, matching_member, weighted_opt_oracle

E = np.eye(4, dtype=int)


def lines_of(*pairs):
    return LineSet.from_vectors([(list(a), list(b)) for a, b in pairs])


def quarters(x):
    # feasibility is downward closed, so rounding down keeps the oracle small
    return [Fraction(math.floor(4 * v + 1e-12), 4) for v in x]


ONE = lines_of(((1, 0), (0, 1)))
TWO_SAME = lines_of(((1, 0), (0, 1)), ((1, 0), (0, 1)))
# three lines through e1 in C^4
COMMON = lines_of((E[0], E[1]), (E[0], E[2]), (E[0], E[3]))
GENERIC3 = lines_of(((1, 2, 0, 1), (0, 1, 3, 1)), ((2, 0, 1, 1), (1, 1, 0, 2)), ((0, 1, 1, 3), (1, 0, 2, 0)))


def test_wedge_examples():
    assert wedge((1, 0), (0, 1)) == ExactMatrix([[0, 1], [-1, 0]])
    assert wedge((1, 2, 3), (1, 2, 3)).is_zero()
    assert wedge((1, 0, 0), (1, 1, 0)) == wedge((1, 0, 0), (0, 1, 0))
    W = wedge((1, 2, 0), (0, 1, 5))
    assert W.T == -W and rank(W) == 2


@pytest.mark.parametrize("lines,opt", [(ONE, 1), (TWO_SAME, 1), (GENERIC3, 2), (COMMON, 1)])
def test_frac_matching_quality_and_feasibility(lines, opt):
    eps = 0.05
    fm = frac_matroid_matching(lines, eps)
    assert fm.kstar == 2 * opt
    assert fm.value >= (1 - eps) * opt - 1e-9
    assert fm.value <= opt + 1e-9
    assert verify_matching(lines, fm.x, transform=fm.transform).ok
    bases = [[list(a), list(b)] for a, b in lines.lines]
    assert matching_member(bases, quarters(fm.x))


def test_frac_matching_kstar_matches_blowup_rank():
    gens = [wedge(a, b).tolist() for a, b in GENERIC3.lines]
    ints = [[[int(v.real) for v in row] for row in g] for g in gens]
    assert blowup_ncrank(ints) == 4


def test_frac_matching_rejects_rank_one_lines():
    with pytest.raises(ValueError):
        frac_matroid_matching(lines_of(((1, 1), (2, 2))))


def test_two_cover_examples():
    c = dominant_two_cover(ONE)
    assert c.verified and c.size == 2 and c.kstar == 2
    c2 = dominant_two_cover(TWO_SAME)
    assert c2.size == c.size and same_span(c2.S, c.S) if c.S else c2.S == []
    c = dominant_two_cover(lines_of(((1, 1), (2, 2)), ((1, 0), (0, 1))))
    assert c.degenerate == [0]


def test_two_cover_of_lines_through_a_common_vector():
    c = dominant_two_cover(COMMON)
    assert c.kstar == 2 and c.verified
    assert same_span(c.S, [tuple(E[0])]) and same_span(c.T, [tuple(E[0])])


def test_weighted_sinkhorn_examples():
    eps = 0.05
    r = weighted_sinkhorn(ONE, [1], 1, eps)
    assert r.feasible and r.x[0] >= 1 - eps
    r = weighted_sinkhorn(TWO_SAME, [1, 1], 2, eps)
    assert not r.feasible
    r = weighted_sinkhorn(ONE, [2], 2, eps)
    assert r.feasible and 2 * r.x[0] >= 2 * (1 - eps)
    assert matching_member([[list(v) for v in ONE.lines[0]]], quarters(r.x))


@pytest.mark.parametrize("lines,w,opt", [
    (ONE, [3], 3),
    (TWO_SAME, [1, 1], 1),
    (TWO_SAME, [0, 0], 0),
    (COMMON, [1, 2, 3], 3),
])
def test_weighted_opt_examples(lines, w, opt):
    assert weighted_opt(lines, w) == opt


def test_weighted_opt_matches_half_integral_enumeration():
    rng = np.random.default_rng(41)
    for lines in (GENERIC3, COMMON):
        bases = [[list(a), list(b)] for a, b in lines.lines]
        for _ in range(2):
            w = rng.integers(0, 4, lines.p)
            assert weighted_opt(lines, w) == weighted_opt_oracle(bases, w)


def test_membership_examples():
    eps = 0.05
    r = mem_eps_bl(ONE, [0.5], eps)
    assert r.near and np.allclose(r.y, math.exp(-eps) * 0.5)
    r = mem_eps_bl(TWO_SAME, [0.6, 0.6], 0.1)
    assert not r.near and r.violated is not None
    r = mem_eps_bl(GENERIC3, [1e-3] * 3, eps)
    assert r.near


def test_membership_far_certificate_is_exact_violation():
    # two lines inside <e1, e2, e3>, each with weight 0.8: V = <e1, e2, e3> is violated
    lines = lines_of((E[0], E[1]), (E[1], E[2]), (E[3], E[0] + E[3]))
    x = [0.8, 0.8, 0.1]
    assert not matching_member([[list(a), list(b)] for a, b in lines.lines], x)
    r = mem_eps_bl(lines, x, 0.05)
    assert not r.near
    if r.violated is not None:
        from ncscale.blapps import subspace_violation
        assert subspace_violation(lines, x, [r.violated]) is not None


def test_membership_near_point_is_feasible():
    x = [0.3, 0.3, 0.3]
    r = mem_eps_bl(GENERIC3, x, 0.05)
    assert r.near
    assert np.linalg.norm(np.array(x) - r.y) <= 0.05
    bases = [[list(a), list(b)] for a, b in GENERIC3.lines]
    assert matching_member(bases, quarters(r.y))


def test_verify_matching_examples():
    assert verify_matching(ONE, [0]).ok
    assert verify_matching(TWO_SAME, [0.5, 0.5]).ok
    chk = verify_matching(TWO_SAME, [0.6, 0.6])
    assert not chk.ok and chk.lam_max == pytest.approx(1.2) and chk.hint is not None
