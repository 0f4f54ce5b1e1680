import numpy as np
import pytest

from ncscale.numla import (CPMap, ImplicitPSD, apply_adjoint, apply_cp, hermitian_eig, materialize,
                           op_norm_estimate, size)

E11 = np.array([[1.0, 0], [0, 0]])
E12 = np.array([[0.0, 1], [0, 0]])
E22 = np.array([[0.0, 0], [0, 1]])


def random_hermitian(rng, n):
    G = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return (G + G.conj().T) / 2


def test_apply_cp_examples():
    rng = np.random.default_rng(0)
    X = random_hermitian(rng, 2)
    assert np.allclose(apply_cp(CPMap([np.eye(2)]), X), X)
    assert np.allclose(apply_cp(CPMap([E11, E12]), np.eye(2)), 2 * E11)
    assert np.allclose(apply_cp(CPMap([E11, E12]), np.zeros((2, 2))), 0)


def test_apply_adjoint_examples():
    rng = np.random.default_rng(1)
    Y = random_hermitian(rng, 2)
    assert np.allclose(apply_adjoint(CPMap([np.eye(2)]), Y), Y)
    assert np.allclose(apply_adjoint(CPMap([E11, E12]), np.eye(2)), np.eye(2))
    assert np.allclose(apply_adjoint(CPMap([E11, E12]), np.zeros((2, 2))), 0)


def test_adjoint_duality_on_random_maps():
    rng = np.random.default_rng(2)
    for _ in range(10):
        p, m, n = rng.integers(1, 4), rng.integers(1, 5), rng.integers(1, 5)
        K = rng.standard_normal((p, m, n)) + 1j * rng.standard_normal((p, m, n))
        phi = CPMap(K)
        X, Y = random_hermitian(rng, n), random_hermitian(rng, m)
        lhs = np.trace(apply_cp(phi, X) @ Y)
        rhs = np.trace(X @ apply_adjoint(phi, Y))
        assert lhs == pytest.approx(rhs)


@pytest.mark.parametrize("kraus,expected", [([np.eye(2)], 2.0), ([E11, E12], 2.0), ([np.zeros((2, 2))], 0.0)])
def test_size_examples(kraus, expected):
    assert size(CPMap(kraus)) == expected


def test_cpmap_exact_generators_only_for_gaussian_integers():
    assert CPMap([E11, 2j * E12]).exact is not None
    assert CPMap([0.5 * E11]).exact is None


def test_hermitian_eig_examples():
    d = hermitian_eig(np.diag([1.0, 3.0]))
    assert np.allclose(d.values, [3, 1])
    assert abs(abs(d.vectors[1, 0]) - 1) < 1e-12
    d = hermitian_eig(np.array([[0.0, 1], [1, 0]]))
    assert np.allclose(d.values, [1, -1])
    assert abs(abs(d.vectors[:, 0] @ np.array([1, 1]) / np.sqrt(2)) - 1) < 1e-12


def test_hermitian_eig_residual_on_random_matrices():
    rng = np.random.default_rng(3)
    delta = 1e-12
    for _ in range(10):
        A = random_hermitian(rng, 4)
        d = hermitian_eig(A, delta)
        assert d.residual(A) <= 10 * delta * np.linalg.norm(A, 2)


def test_hermitian_eig_rejects_non_hermitian():
    with pytest.raises(ValueError):
        hermitian_eig(np.array([[0.0, 1], [0, 0]]))


def test_materialize_examples():
    X = ImplicitPSD.from_eigvals([3.0, 2.0], np.diag([5.0, 1.0]))
    assert np.allclose(materialize(X), np.diag([3, 2]))
    R = np.array([[0.0, 1], [1, 0]])
    assert np.allclose(materialize(ImplicitPSD.from_eigvals([4.0, 4.0], R)), 4 * np.eye(2))
    X = ImplicitPSD.from_eigvals([2.0, 1.0], R)
    assert np.allclose(materialize(X), 1.5 * np.eye(2) + 0.5 * R)
    assert np.allclose(materialize(X, power=-1) @ materialize(X), np.eye(2))
    S = materialize(X, power=0.5)
    assert np.allclose(S @ S, materialize(X))


def test_implicit_psd_survives_huge_spectra():
    X = ImplicitPSD(np.array([900.0, 0.0]), np.diag([2.0, 1.0]))
    assert X.logdet() == 900.0
    inv = materialize(X, power=-1)
    assert np.isfinite(inv).all() and inv[1, 1] == pytest.approx(1.0)


def test_op_norm_estimate_matches_svd():
    rng = np.random.default_rng(4)
    for _ in range(5):
        A = rng.standard_normal((4, 3))
        assert op_norm_estimate(A, rtol=1e-8, max_iter=5000) == pytest.approx(np.linalg.norm(A, 2), rel=1e-4)
    assert op_norm_estimate(np.zeros((2, 2))) == 0.0
