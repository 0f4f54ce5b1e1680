from fractions import Fraction

import numpy as np
import pytest
import sympy

from ncscale.exactla import (ExactMatrix, GaussianRational, column_basis, contains, gauss_eliminate,
                             gr, gram_schmidt, image_under, intersection_basis, inverse,
                             max_independent_columns, nullspace, orth_complement, preimage,
                             projection, pseudoinverse, rank, same_span, span_dim, sum_basis,
                             track_bits)


def M(rows):
    return ExactMatrix(rows)


def as_sympy(A: ExactMatrix):
    return sympy.Matrix([[sympy.Rational(str(a.real)) + sympy.I * sympy.Rational(str(a.imag))
                          for a in row] for row in A.tolist()])


# --- Gaussian rationals ---------------------------------------------------

def test_gaussian_rational_field_operations():
    a = gr(1, 2)
    b = gr(Fraction(1, 3), -1)
    assert a * a.inverse() == gr(1)
    assert (a + b) - b == a
    assert complex(a * b) == pytest.approx(complex(1, 2) * complex(1 / 3, -1))
    assert a.conj() == gr(1, -2)
    assert a.abs2() == 5


def test_parse_round_trips_string_form():
    for v in (gr(3), gr(Fraction(-2, 7), Fraction(5, 3)), gr(0, 1)):
        assert GaussianRational.parse(str(v)) == v


# --- rank normal form -----------------------------------------------------

@pytest.mark.parametrize("rows,expected", [
    ([[1, 0], [0, 1]], 2),
    ([[0, 0, 0]] * 3, 0),
    ([[1, 2], [2, 4]], 1),
])
def test_gauss_eliminate_rank_examples(rows, expected):
    A = M(rows)
    nf = gauss_eliminate(A)
    assert nf.rank == expected
    m, n = A.shape
    assert nf.P @ A @ nf.Q_inv == nf.block(m, n)
    assert nf.Q @ nf.Q_inv == ExactMatrix.identity(n)


def test_gauss_eliminate_matches_sympy_on_random_gaussian_integers():
    rng = np.random.default_rng(0)
    for _ in range(20):
        m, n = rng.integers(1, 5, 2)
        re = rng.integers(-2, 3, (m, n))
        im = rng.integers(-1, 2, (m, n)) * (rng.random() < 0.5)
        A = M([[gr(int(re[i, j]), int(im[i, j])) for j in range(n)] for i in range(m)])
        nf = gauss_eliminate(A)
        assert nf.rank == as_sympy(A).rank()
        assert nf.P @ A @ nf.Q_inv == nf.block(m, n)


# --- inverses -----------------------------------------------------------------

def test_pseudoinverse_identity():
    assert pseudoinverse(ExactMatrix.identity(3)) == ExactMatrix.identity(3)


def test_pseudoinverse_diag_acts_as_identity_on_image():
    A = M([[1, 0], [0, 0]])
    Ap = pseudoinverse(A)
    e1 = (gr(1), gr(0))
    assert A @ Ap @ ExactMatrix.from_columns([e1]) == ExactMatrix.from_columns([e1])


def test_pseudoinverse_of_rank_one_off_diagonal():
    A = M([[0, 1], [0, 0]])          # e1 e2^T, image <e1>
    Ap = pseudoinverse(A)
    e1 = ExactMatrix.from_columns([(gr(1), gr(0))])
    assert A @ (Ap @ e1) == e1


def test_pseudoinverse_integral_variant_keeps_image_identity():
    rng = np.random.default_rng(3)
    for _ in range(10):
        A = M(rng.integers(-3, 4, (3, 4)).tolist())
        Ap = pseudoinverse(A, integral=True)
        assert Ap.is_gaussian_integer()
        for w in column_basis(A):
            col = ExactMatrix.from_columns([w])
            img = A @ (Ap @ col)
            # A Ap w is a nonzero multiple of w
            assert span_dim([w, img.column(0)]) == 1


def test_inverse_matches_sympy():
    A = M([[2, 1], [gr(0, 1), 3]])
    inv = inverse(A)
    assert as_sympy(inv).equals(as_sympy(A).inv())


def test_inverse_of_singular_matrix_raises():
    with pytest.raises(ZeroDivisionError):
        inverse(M([[1, 2], [2, 4]]))


# --- subspaces ----------------------------------------------------------------

def test_gram_schmidt_examples():
    e1, e2 = (1, 0, 0), (0, 1, 0)
    orth, P = gram_schmidt([e1, (1, 1, 0)])
    assert same_span(orth, [e1, e2])
    assert P == M([[1, 0, 0], [0, 1, 0], [0, 0, 0]])
    _, P = gram_schmidt([(1, 1)])
    half = Fraction(1, 2)
    assert P == M([[half, half], [half, half]])
    _, P = gram_schmidt([(1, 2), (0, 1)])
    assert P == ExactMatrix.identity(2)


def test_gram_schmidt_output_is_orthogonal_and_projection_idempotent():
    basis = [(1, gr(0, 1), 2, 0), (0, 1, 1, gr(1, 1)), (3, 0, gr(0, -1), 1)]
    orth, P = gram_schmidt(basis)
    for i in range(3):
        for j in range(i):
            dot = sum((a.conj() * b for a, b in zip(orth[i], orth[j])), gr(0))
            assert dot == gr(0)
    assert P @ P == P
    assert P.is_hermitian()
    assert projection(basis, 4) == P


def test_max_independent_columns_examples():
    e1, e2 = (1, 0), (0, 1)
    assert max_independent_columns([e1, e1, e2]) == [0, 2]
    assert max_independent_columns([(0, 0), (0, 0)]) == []
    assert max_independent_columns([(1, 0), (1, 1), (2, 1)]) == [0, 1]


def test_nullspace_and_complements():
    A = M([[1, 1, 0], [0, 0, 1]])
    N = nullspace(A)
    assert len(N) == 1 and same_span(N, [(1, -1, 0)])
    C = orth_complement([(1, gr(0, 1), 0)], 3)
    assert len(C) == 2
    for v in C:
        assert sum((GaussianRational.coerce(a).conj() * b for a, b in zip((1, gr(0, 1), 0), v)), gr(0)) == gr(0)


def test_sum_intersection_dimension_formula():
    U = [(1, 0, 0, 0), (0, 1, 0, 0)]
    V = [(0, 1, 0, 0), (0, 0, 1, 1)]
    S = sum_basis(U, V)
    I = intersection_basis(U, V, 4)
    assert len(S) + len(I) == len(U) + len(V)
    assert same_span(I, [(0, 1, 0, 0)])


def test_image_and_preimage():
    E11, E12 = M([[1, 0], [0, 0]]), M([[0, 1], [0, 0]])
    assert same_span(image_under([E11, E12], [(0, 1)]), [(1, 0)])
    pre = preimage(E11, [(1, 0)])
    assert same_span(pre, [(1, 0), (0, 1)])
    assert contains([(1, 1)], (2, 2)) and not contains([(1, 1)], (1, 0))


def test_rank_of_complex_matrix():
    A = M([[1, gr(0, 1)], [gr(0, 1), -1]])      # second row = i * first
    assert rank(A) == 1


def test_bit_tracker_records_intermediate_sizes():
    with track_bits() as t:
        rank(M([[3, 7, 11], [5, 13, 17], [19, 23, 29]]))
    assert t.max_bits > 0 and t.samples > 0
