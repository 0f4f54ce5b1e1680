"""Sanity checks for the reference computations themselves."""
from fractions import Fraction

import numpy as np
import pytest
import sympy

from ncscale.oracles import (PRIME, blowup_ncrank, enumerate_subspaces, hall_blocker_oracle,
                             kl_projection_oracle, matching_member, max_matching_oracle, rank_mod_p,
                             shrunk_oracle, weighted_opt_oracle)


def test_prime_supports_a_square_root_of_minus_one():
    assert sympy.isprime(PRIME) and PRIME % 4 == 1


def test_rank_mod_p_matches_sympy_on_gaussian_integers():
    rng = np.random.default_rng(51)
    for _ in range(20):
        m, n = rng.integers(1, 6, 2)
        re = rng.integers(-3, 4, (m, n))
        im = rng.integers(-2, 3, (m, n)) * (rng.random() < 0.5)
        rows = [[complex(int(re[i, j]), int(im[i, j])) for j in range(n)] for i in range(m)]
        S = sympy.Matrix([[int(re[i, j]) + sympy.I * int(im[i, j]) for j in range(n)] for i in range(m)])
        assert rank_mod_p(rows) == S.rank()


def test_rank_mod_p_uses_i_squared_minus_one():
    assert rank_mod_p([[1, 1j], [1j, -1]]) == 1


def test_blowup_ncrank_examples():
    assert blowup_ncrank([[[1, 0], [0, 0]], [[0, 1], [0, 0]]]) == 1
    assert blowup_ncrank([[[1, 0], [0, 1]]]) == 2
    skew = [[[0, 1, 0], [-1, 0, 0], [0, 0, 0]], [[0, 0, 1], [0, 0, 0], [-1, 0, 0]],
            [[0, 0, 0], [0, 0, 1], [0, -1, 0]]]
    # every element is a singular 3x3 skew matrix, but the blow-up has full rank
    assert blowup_ncrank(skew) == 3


def test_enumerate_subspaces_counts():
    # over {0, 1} the RREF count in dimension 2 is the number of binary subspaces
    subs = list(enumerate_subspaces(2, (0, 1)))
    assert len(subs) == 1 + 3 + 1


def test_shrunk_oracle_on_coordinate_blocker():
    A = [[1, 1, 0], [0, 0, 1], [0, 0, 1]]
    gens = [[[1 if (i, j) == (a, b) else 0 for b in range(3)] for a in range(3)]
            for i in range(3) for j in range(3) if A[i][j]]
    best, rows = shrunk_oracle(gens)
    assert best == 1 and rows == [[1, 0, 0], [0, 1, 0]]


def test_matching_oracles_agree_with_exhaustive_search():
    rng = np.random.default_rng(52)
    for _ in range(20):
        A = (rng.random((4, 5)) < 0.35).astype(int)
        d, _ = hall_blocker_oracle(A)
        assert max_matching_oracle(A) == 5 - d


def test_kl_projection_oracle_examples():
    p, _ = kl_projection_oracle([0.5, 0.5], [1, 1])
    assert np.allclose(p, [0.5, 0.5])
    p, _ = kl_projection_oracle([4.0, 1.0], [1, 1])
    assert np.allclose(p, [1, 1], atol=1e-6)
    p, _ = kl_projection_oracle([3.0, 1.0], [2, 1])
    assert np.allclose(p, [2, 1], atol=1e-6)


@pytest.mark.parametrize("x,ok", [
    ([Fraction(1, 2), Fraction(1, 2)], True),
    ([Fraction(3, 5), Fraction(3, 5)], False),
    ([Fraction(1), Fraction(0)], True),
])
def test_matching_member_on_two_identical_lines(x, ok):
    lines = [[[1, 0], [0, 1]], [[1, 0], [0, 1]]]
    assert matching_member(lines, x) is ok


def test_matching_member_sees_a_hidden_flat():
    # <e1, e2> and <e1 + e3, e2 - e3> meet in e1 + e2, which no coordinate flat sees
    lines = [[[1, 0, 0, 0], [0, 1, 0, 0]], [[1, 0, 1, 0], [0, 1, -1, 0]]]
    assert matching_member(lines, [Fraction(1, 2), Fraction(1, 2)])
    assert not matching_member(lines, [Fraction(3, 4), Fraction(1, 2)])


def test_weighted_opt_oracle_examples():
    assert weighted_opt_oracle([[[1, 0], [0, 1]]], [3]) == 3
    assert weighted_opt_oracle([[[1, 0], [0, 1]], [[1, 0], [0, 1]]], [1, 1]) == 1
    assert weighted_opt_oracle([[[1, 0], [0, 1]]], [0]) == 0
