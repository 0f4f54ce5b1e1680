import math

import numpy as np
import pytest

from ncscale.oracles import kl_projection_oracle
from ncscale.permproj import (MajorizationTarget, alpha_r, halfspace_project, kl_divergence,
                              kl_project, majorization_slack)


def test_kl_divergence_examples():
    assert kl_divergence([1, 2], [1, 2]) == 0.0
    assert kl_divergence([1, 0.5], [2, 0.5]) == pytest.approx(1 - math.log(2))
    assert kl_divergence([0, 1], [1, 1]) == pytest.approx(1.0)


def test_kl_divergence_rejects_support_mismatch():
    with pytest.raises(ValueError):
        kl_divergence([1, 1], [1, 0])


def test_kl_project_feasible_input_is_fixed():
    r = kl_project([0.9, 0.3], [1, 0.5])
    assert np.allclose(r.p, [0.9, 0.3])
    assert np.allclose(r.dual_x, 0)
    assert r.divergence == 0.0


def test_kl_project_scales_large_entries_down():
    r = kl_project([2, 0.5], [1, 1])
    assert np.allclose(r.p, [1, 0.5])
    assert r.divergence == pytest.approx(1 - math.log(2))


def test_kl_project_equal_entries():
    r = kl_project([4, 4], [1, 1])
    assert np.allclose(r.p, [1, 1])
    assert np.allclose(r.dual_x, [math.log(4)] * 2)
    assert r.divergence == pytest.approx(6 - 4 * math.log(2))


def test_kl_project_agrees_with_sqp_oracle():
    rng = np.random.default_rng(7)
    for _ in range(40):
        n = int(rng.integers(1, 7))
        alpha = np.sort(rng.uniform(0.1, 1, n))[::-1]
        q = rng.exponential(1.0, n)
        r = kl_project(q, alpha)
        p_or, d_or = kl_projection_oracle(q, alpha)
        assert r.divergence == pytest.approx(d_or, abs=1e-7)
        assert np.allclose(r.p, p_or, atol=1e-4)
        assert majorization_slack(r.p, alpha) <= 1e-12
        assert kl_divergence(r.p, q) == pytest.approx(r.divergence, abs=1e-10)


def test_kl_project_keeps_input_order_and_zeros():
    r = kl_project([0.2, 3.0, 0.0, 1.5], [1, 1, 1, 0.5])
    assert r.p[2] == 0.0
    assert r.p[1] >= r.p[3] >= r.p[0]


def test_majorization_target_validation():
    with pytest.raises(ValueError):
        MajorizationTarget(np.array([0.5, 1.0]))
    with pytest.raises(ValueError):
        kl_project([1, 2], [1, 1, 1])


def test_alpha_r():
    assert np.allclose(alpha_r(4, 0), np.ones(4))
    assert np.allclose(alpha_r(4, 2), [1, 1, 0.75, 0.75])
    with pytest.raises(ValueError):
        alpha_r(3, 4)


def test_halfspace_project_examples():
    h = halfspace_project([2, 1], [1, 1], 2)
    assert h.z == 0.0 and h.divergence == 0.0
    h = halfspace_project([1], [1], 2)
    assert h.z == pytest.approx(math.log(2))
    assert h.divergence == pytest.approx(2 * math.log(2) - 1)
    h = halfspace_project([1, 1], [1, 0], 2)
    assert h.z == pytest.approx(math.log(2))
    assert h.divergence == pytest.approx(2 * math.log(2) - 1)


def test_halfspace_project_matches_scalar_minimizer():
    from scipy.optimize import minimize_scalar
    rng = np.random.default_rng(8)
    for _ in range(20):
        n = int(rng.integers(1, 5))
        nu = rng.uniform(0.1, 1, n)
        w = rng.integers(1, 3, n).astype(float)
        k = float(rng.uniform(0.5, 4))
        h = halfspace_project(nu, w, k)
        res = minimize_scalar(lambda z: np.sum(np.exp(w * z) * nu) - k * z, bounds=(0, 20),
                              method="bounded", options={"xatol": 1e-12})
        best = min(res.fun, float(np.sum(nu)))
        assert np.sum(np.exp(w * h.z) * nu) - k * h.z == pytest.approx(best, abs=1e-9)
