import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from marginlab import (KernelModel, KernelSpec, NumericalError, Schedule, canonical, gd_run,
                       generate_separable, gram, kernel_ascent, kernel_margin, kernel_optimal_margin,
                       optimal_margin)
from marginlab.kernel import signed_gram
from oracles import random_simplex

LIN, RBF = KernelSpec("linear"), KernelSpec("rbf", 1.0)
RBF_D2 = math.sqrt((2 + 2 * math.exp(-1)) / 4)


def test_spec_validation():
    with pytest.raises(ValueError):
        KernelSpec("poly")
    with pytest.raises(ValueError):
        KernelSpec("rbf", 0.0)


def test_gram_examples():
    d = canonical("D2")
    np.testing.assert_allclose(gram(d, LIN), np.eye(2))
    np.testing.assert_allclose(gram(d, RBF), [[1, math.exp(-1)], [math.exp(-1), 1]], atol=1e-15)
    assert gram(canonical("D1"), RBF).tolist() == [[1.0]]


def test_gram_not_psd_raises(monkeypatch):
    import marginlab.kernel as kmod
    monkeypatch.setattr(kmod, "min_eigenvalue", lambda K: -1e-6)
    with pytest.raises(NumericalError):
        gram(canonical("D2"), LIN)


def test_optimal_margin_examples():
    d = canonical("D2")
    g, q = kernel_optimal_margin(d, LIN)
    assert g == pytest.approx(math.sqrt(0.5), abs=1e-10)
    np.testing.assert_allclose(q, [0.5, 0.5], atol=1e-9)
    assert kernel_optimal_margin(d, RBF)[0] == pytest.approx(RBF_D2, abs=1e-10)
    assert RBF_D2 == pytest.approx(0.82700648, abs=1e-8)
    assert kernel_optimal_margin(canonical("D1"), LIN)[0] == pytest.approx(1.0)


@pytest.mark.parametrize("seed", range(20))
def test_linear_kernel_equals_primal(seed):
    d = generate_separable(5 + seed, 1 + seed % 5, 0.1, seed)
    assert kernel_optimal_margin(d, LIN)[0] == pytest.approx(optimal_margin(d).gamma_opt, abs=1e-8)


def test_kernel_margin_examples():
    d = canonical("D2")
    _, q = kernel_optimal_margin(d, LIN)
    assert kernel_margin(KernelModel(d.labels * q), d, LIN) == pytest.approx(math.sqrt(0.5))
    assert kernel_margin(KernelModel(np.array([1.0, 0.0])), d, LIN) == 0.0
    a = np.array([0.3, 0.9])
    assert kernel_margin(KernelModel(5 * a), d, RBF) == pytest.approx(kernel_margin(KernelModel(a), d, RBF))
    with pytest.raises(ValueError):
        kernel_margin(KernelModel(np.zeros(2)), d, LIN)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10**6), sigma=st.floats(0.3, 3.0))
def test_rkhs_sandwich_and_weak_duality(seed, sigma):
    d = generate_separable(int(np.random.default_rng(seed).integers(2, 15)), 3, 0.1, seed)
    k = KernelSpec("rbf", sigma)
    gh, _ = kernel_optimal_margin(d, k)
    G = signed_gram(d, k)
    rng = np.random.default_rng(seed)
    q = random_simplex(rng, d.n)
    val = math.sqrt(q @ G @ q)
    assert gh - 1e-8 <= val <= math.sqrt(np.max(np.diag(gram(d, k)))) + 1e-12
    a = rng.standard_normal(d.n)
    assert kernel_margin(KernelModel(a), d, k) <= gh + 1e-8


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_gram_psd(seed):
    d = generate_separable(10, 4, 0.1, seed)
    for k in (LIN, RBF):
        assert np.linalg.eigvalsh(gram(d, k))[0] >= -1e-9


@pytest.mark.parametrize("d", [canonical("D2"), generate_separable(15, 4, 0.15, 3)], ids=["D2", "gen"])
def test_linear_ascent_matches_primal(d):
    a = kernel_ascent(d, LIN, steps=3000)
    b = gd_run(d, schedule=Schedule.adaptive(), steps=3000)
    np.testing.assert_array_equal(a.t, b.t)
    for col in ("norm_w", "margin", "smooth_margin", "grad_norm", "deficit"):
        np.testing.assert_allclose(a.column(col), b.column(col), rtol=0, atol=1e-10)


def test_ascent_d1_linear():
    tr = kernel_ascent(canonical("D1"), LIN, steps=1000)
    assert tr.margin[-1] == pytest.approx(1.0, abs=0.01)


def test_ascent_d1_rbf_reaches_gamma_h():
    d = canonical("D1")
    tr = kernel_ascent(d, RBF, steps=1000)
    assert tr.margin[-1] == pytest.approx(kernel_optimal_margin(d, RBF)[0], abs=0.01)


def test_ascent_d2_rbf():
    tr = kernel_ascent(canonical("D2"), RBF, steps=10_000)
    assert tr.deficit[-1] <= 0.01
    assert tr.meta["gamma_opt"] == pytest.approx(RBF_D2)
    assert np.all(tr.extra["h_dist"] >= 0)


def test_ascent_rejects_flow():
    with pytest.raises(ValueError):
        kernel_ascent(canonical("D2"), LIN, schedule=Schedule.flow())
