from math import factorial, gamma as Gamma

import numpy as np
import pytest

from wco.errors import DomainError
from wco.series import TruncatedSeries, enumerate_multiindices, kernel_series
from wco.space import (
    SpaceParams,
    beta_weighted_norm,
    inner_product,
    kernel_norm,
    log_monomial_norm_sq,
    monomial_norm_sq,
    norm,
)
from oracles import quadrature_norm_sq


@pytest.mark.parametrize("gamma", [1.0, 1.5, 2.0, 3.0])
@pytest.mark.parametrize("N", [1, 2])
def test_monomial_norms_match_quadrature(N, gamma):
    sp = SpaceParams(N, gamma)
    for alpha in enumerate_multiindices(N, 4):
        assert abs(monomial_norm_sq(sp, alpha) - quadrature_norm_sq(alpha, gamma)) <= 1e-6


def test_norm_examples():
    assert monomial_norm_sq(SpaceParams(3, 2.0), (0, 0, 0)) == pytest.approx(1.0)
    for n in range(8):
        assert monomial_norm_sq(SpaceParams(1), (n,)) == pytest.approx(1.0)
        assert monomial_norm_sq(SpaceParams(1, 2.0), (n,)) == pytest.approx(1 / (n + 1))
    assert monomial_norm_sq(SpaceParams(2), (1, 1)) == pytest.approx(1 / 6)
    big = monomial_norm_sq(SpaceParams(2, 3.0), (60, 40))
    assert np.isfinite(big) and big > 0


def test_space_params():
    assert SpaceParams(2, 1.0).K == 1.0
    assert SpaceParams(1, 1.0).K == 0.5
    assert SpaceParams(3, 2.5).K == pytest.approx(2.25)
    with pytest.raises(DomainError):
        SpaceParams(0)
    with pytest.raises(DomainError):
        SpaceParams(2, 0.5)


def test_inner_product_examples():
    sp = SpaceParams(2, 1.5)
    a = TruncatedSeries.from_terms(2, 3, {(1, 0): 1})
    b = TruncatedSeries.from_terms(2, 3, {(0, 1): 1})
    assert inner_product(sp, a, b) == 0
    f = TruncatedSeries.from_terms(2, 3, {(0, 0): 2 - 1j, (1, 1): 3})
    assert inner_product(sp, f, TruncatedSeries.constant(2, 3)) == pytest.approx(2 - 1j)
    g = TruncatedSeries.from_terms(1, 2, {(0,): 1, (1,): 1})
    assert norm(SpaceParams(1), g) ** 2 == pytest.approx(2.0)


def test_kernel_norm_examples():
    assert kernel_norm(SpaceParams(1), [0.0]) == 1.0
    assert kernel_norm(SpaceParams(1), [0.8]) == pytest.approx(5 / 3)
    assert kernel_norm(SpaceParams(2), [0.5, 0.5j]) == pytest.approx(2.0)
    with pytest.raises(DomainError):
        kernel_norm(SpaceParams(1), [1.0])


@pytest.mark.parametrize("N,gamma,D", [(1, 1.0, 80), (1, 2.5, 80), (2, 1.0, 50), (2, 3.0, 50)])
def test_reproducing_property(N, gamma, D, rng):
    sp = SpaceParams(N, gamma)
    idx = enumerate_multiindices(N, D - 5)
    for _ in range(5):
        coeffs = rng.normal(size=len(idx)) + 1j * rng.normal(size=len(idx))
        coeffs /= 1 + np.array([sum(a) for a in idx]) ** 2
        f = TruncatedSeries.from_terms(N, D, dict(zip(idx, coeffs)))
        w = rng.normal(size=N) + 1j * rng.normal(size=N)
        w *= 0.6 / np.linalg.norm(w)
        K = kernel_series(w, sp.twoK, D)
        assert abs(inner_product(sp, f, K) - f(w)) <= 1e-8
        assert abs(norm(sp, K) ** 2 - kernel_norm(sp, w) ** 2) <= 1e-8


@pytest.mark.parametrize("N", [1, 2])
@pytest.mark.parametrize("gamma", [1.5, 2.0, 3.0])
def test_norm_equivalence(N, gamma):
    sp, h2 = SpaceParams(N, gamma), SpaceParams(N, 1.0)
    D = 2000
    alpha = np.zeros((D + 1, N), dtype=int)
    alpha[:, 0] = np.arange(D + 1)
    n = alpha.sum(axis=1)
    ratios = (1.0 + n) ** (1 - gamma) * np.exp(log_monomial_norm_sq(h2, alpha) - log_monomial_norm_sq(sp, alpha))
    for k in (0, 1, 7, 30):
        f = TruncatedSeries.from_terms(N, 30, {tuple(alpha[k]): 1.0})
        assert beta_weighted_norm(sp, f) ** 2 / norm(sp, f) ** 2 == pytest.approx(ratios[k], rel=1e-12)
    # Stirling: Gamma(n + N + gamma - 1) / Gamma(n + N) ~ n^(gamma - 1)
    limit = factorial(N - 1) / Gamma(N + gamma - 1)
    assert abs(ratios[-1] / limit - 1) < 0.01
    assert ratios.max() / ratios.min() < 10
    assert abs(ratios[-1] - ratios[D // 2]) < 0.01 * limit


def test_beta_norm_hardy_and_constants():
    f = TruncatedSeries.from_terms(2, 3, {(0, 0): 1, (1, 2): 2j})
    assert beta_weighted_norm(SpaceParams(2), f) == pytest.approx(norm(SpaceParams(2), f))
    c = TruncatedSeries.constant(2, 3, 1.5)
    assert beta_weighted_norm(SpaceParams(2, 3.0), c) == pytest.approx(norm(SpaceParams(2, 3.0), c))
