from fractions import Fraction

import numpy as np
import pytest

from ncscale.exactla import same_span
from ncscale.rounding import continued_fraction_round, round_projection, round_subspace


@pytest.mark.parametrize("x,bound,expected", [
    (0.5, 10, Fraction(1, 2)),
    (0.3333333333, 10, Fraction(1, 3)),
    (0.142857142, 100, Fraction(1, 7)),
    (-2.75, 10, Fraction(-11, 4)),
])
def test_continued_fraction_examples(x, bound, expected):
    assert continued_fraction_round(x, bound) == expected


def test_continued_fraction_is_best_approximation():
    rng = np.random.default_rng(0)
    for _ in range(50):
        x = float(rng.uniform(-3, 3))
        bound = int(rng.integers(2, 60))
        got = continued_fraction_round(x, bound)
        assert got.denominator <= bound
        best = min(abs(x - Fraction(round(x * d), d)) for d in range(1, bound + 1))
        assert abs(x - got) == pytest.approx(float(best), abs=1e-15)


def test_round_subspace_recovers_rotated_rational_span():
    B = np.array([[1, 2], [0, 1], [1, -1], [3, 0]], dtype=float)
    Q, _ = np.linalg.qr(B @ np.array([[0.6, -0.8], [0.8, 0.6]]))
    R = round_subspace(Q, 1000)
    assert same_span(R, [tuple(int(v) for v in B[:, 0]), tuple(int(v) for v in B[:, 1])])


def test_round_projection_is_exact_projector():
    v = np.array([1.0, 1.0]) / np.sqrt(2)
    P = round_projection(np.outer(v, v), 100)
    assert P @ P == P
