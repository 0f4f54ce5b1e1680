import math

import numpy as np
import pytest

from ncscale.matscale import (bipartite_kraus, matrix_objective, matrix_sinkhorn, max_matching_size,
                              round_fractional_cover, smallest_hall_blocker)
from ncscale.oracles import hall_blocker_oracle, max_matching_oracle
from ncscale.permproj import majorization_slack

# support edges (1,1),(1,2),(2,3),(3,3) in 1-based (row, column) form
BLOCKER3 = np.array([[1, 1, 0], [0, 0, 1], [0, 0, 1]])


def test_matrix_objective_examples():
    A = np.array([[1.0, 2], [3, 4]])
    assert matrix_objective(A, [0, 0], [0, 0], 0, [1, 1], [1, 1], 2) == pytest.approx(10)
    I = np.eye(2)
    for t in (0.0, 0.5, 2.0):
        assert matrix_objective(I, [0, 0], [0, 0], t, [1, 1], [1, 1], 2) == pytest.approx(2 * math.exp(t) - 2 * t)
    Z = np.zeros((2, 2))
    assert matrix_objective(Z, [0.3, 0], [0, 0.1], 5, [1, 1], [1, 1], 2) == pytest.approx(0.4 - 10)


def test_matrix_objective_rejects_negative_exponents():
    with pytest.raises(ValueError):
        matrix_objective(np.eye(2), [-1, 0], [0, 0], 0, [1, 1], [1, 1], 1)


def test_sinkhorn_identity_scales_immediately():
    r = matrix_sinkhorn(np.eye(2), np.ones(2), np.ones(2), 2, 0.1)
    assert r.scaled and r.iterations == 0


def test_sinkhorn_diverges_without_perfect_matching():
    r = matrix_sinkhorn(np.array([[1.0, 1], [0, 0]]), np.ones(2), np.ones(2), 2, 0.1)
    assert r.status == "diverged"


def test_sinkhorn_scales_to_matching_size_one():
    eps = 0.1
    r = matrix_sinkhorn(np.array([[1.0, 1], [0, 0]]), np.ones(2), np.ones(2), 1, eps)
    assert r.scaled
    S = r.scaled_matrix
    assert S.sum() >= (1 - eps) ** 2 - 1e-12
    assert np.all(S.sum(axis=0) <= 1 + 1e-12) and np.all(S.sum(axis=1) <= 1 + 1e-12)


def test_sinkhorn_decides_matching_number_on_random_supports():
    rng = np.random.default_rng(11)
    for _ in range(25):
        m, n = rng.integers(1, 7, 2)
        A = (rng.random((m, n)) < 0.4) * rng.uniform(0.5, 3, (m, n))
        nu = max_matching_oracle(A)
        if nu > 0:
            assert matrix_sinkhorn(A, np.ones(n), np.ones(m), nu, 0.1).scaled
        if nu < min(m, n):
            assert not matrix_sinkhorn(A, np.ones(n), np.ones(m), nu + 1, 0.1, max_iter=20000).scaled


def test_sinkhorn_majorized_targets():
    rng = np.random.default_rng(12)
    for _ in range(10):
        A = rng.uniform(0.1, 1, (3, 4))
        alpha = np.sort(rng.uniform(0.3, 1, 4))[::-1]
        beta = np.sort(rng.uniform(0.3, 1, 3))[::-1]
        k = 0.8 * min(alpha.sum(), beta.sum())
        r = matrix_sinkhorn(A, alpha, beta, k, 0.05)
        assert r.scaled
        S = r.scaled_matrix
        assert majorization_slack(S.sum(axis=0), alpha) <= 1e-9
        assert majorization_slack(S.sum(axis=1), beta) <= 1e-9
        assert S.sum() >= (1 - 0.05) ** 2 * k - 1e-9


def test_sinkhorn_objective_is_nonincreasing():
    A = np.array([[1.0, 1, 0], [0, 0, 1], [0, 0, 1]])
    r = matrix_sinkhorn(A, np.ones(3), np.ones(3), 3, 0.05, max_iter=300, certify=False)
    objs = np.array(r.objectives)
    assert np.all(np.diff(objs) <= 1e-10 * (1 + np.abs(objs[:-1])))


def test_round_fractional_cover_examples():
    r = matrix_sinkhorn(BLOCKER3, np.ones(3), np.ones(3), 3, 0.05, max_iter=400, certify=False)
    Z = round_fractional_cover(BLOCKER3, r.triple, 3)
    assert Z.size >= 6 - 3 + 1
    assert not np.any(BLOCKER3[np.ix_(Z.rows, Z.cols)])
    Z = round_fractional_cover(np.zeros((2, 3)), r.triple, 2)
    assert Z.rows == (0, 1) and Z.cols == (0, 1, 2)


def test_round_fractional_cover_refuses_on_full_matching():
    r = matrix_sinkhorn(np.eye(3), np.ones(3), np.ones(3), 3, 0.05)
    with pytest.raises(ValueError):
        round_fractional_cover(np.eye(3), r.triple, 3, threshold=1.0)


@pytest.mark.parametrize("A,S,defect", [
    (np.eye(3), (), 0),
    (BLOCKER3, (0, 1), 1),
    (np.ones((2, 2)), (), 0),
])
def test_smallest_hall_blocker_examples(A, S, defect):
    b = smallest_hall_blocker(A)
    assert b.S == S and b.defect == defect


def test_smallest_hall_blocker_matches_exhaustive_search():
    rng = np.random.default_rng(13)
    for _ in range(30):
        m, n = rng.integers(1, 7, 2)
        A = (rng.random((m, n)) < rng.uniform(0.2, 0.6)).astype(float)
        d, S = hall_blocker_oracle(A)
        b = smallest_hall_blocker(A)
        assert b.defect == d
        assert b.S == tuple(S) if d else b.S == ()


def test_max_matching_matches_scipy_oracle():
    rng = np.random.default_rng(14)
    for _ in range(30):
        A = rng.random(tuple(rng.integers(1, 9, 2))) < 0.3
        assert max_matching_size(A) == max_matching_oracle(A)


def test_bipartite_kraus_reproduces_the_matrix():
    A = np.array([[1.0, 4], [0, 9]])
    phi = bipartite_kraus(A)
    assert np.allclose(sum(np.abs(K) ** 2 for K in phi.kraus), A)
