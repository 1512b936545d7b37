import json

import numpy as np
import pytest

from wco import automorphism as aut
from wco.errors import NotInvertible, TruncationError
from wco.operator import (
    adjoint_on_kernel,
    apply_operator_series,
    build_matrix,
    compose_wco,
    eigenvalues,
    inverse_wco,
    power_norm_growth,
    spectral_radius_estimates,
)
from wco.series import TruncatedSeries, kernel_series
from wco.space import SpaceParams, inner_product, monomial_norm_sq, orthonormal_coefficients
from wco.symbol import Symbol, as_factored, cocycle
from conftest import ball_points

SP2 = SpaceParams(2, 1.5)
PHI2 = aut.from_involution([0.25, 0.1j]).compose(aut.canonical_hyperbolic(0.4, np.array([[1j]])))
PSI2 = Symbol.from_terms(2, {(0, 0): 1.5, (0, 1): 0.5, (1, 0): -0.25j})


def test_identity_and_examples():
    T = build_matrix(Symbol.constant(2), aut.identity(2), SP2, 5)
    assert np.allclose(T.M, np.eye(T.size))
    T = build_matrix(Symbol.constant(1), aut.canonical_hyperbolic(0.5, N=1), SpaceParams(1), 10)
    assert T.M[0, 1] == pytest.approx(0.5)
    assert T.M[1, 1] == pytest.approx(0.75)


def test_shift_entries():
    sp = SpaceParams(2, 2.0)
    T = build_matrix(Symbol.from_terms(2, {(1, 0): 1.0}), aut.identity(2), sp, 4)
    from wco.series import enumerate_multiindices

    idx = enumerate_multiindices(2, 4)
    pos = {a: i for i, a in enumerate(idx)}
    for a in idx:
        b = (a[0] + 1, a[1])
        if b in pos:
            ref = np.sqrt(monomial_norm_sq(sp, b) / monomial_norm_sq(sp, a))
            assert T.M[pos[b], pos[a]] == pytest.approx(ref)
    assert np.count_nonzero(np.abs(T.M) > 1e-15) == sum(1 for a in idx if sum(a) < 4)


def test_series_and_matrix_paths_agree(rng):
    D = 30
    T = build_matrix(PSI2, PHI2, SP2, D)
    f = TruncatedSeries(2, D, (rng.normal(size=T.size) + 1j * rng.normal(size=T.size)) * 0.5 ** np.repeat(np.arange(D + 1), np.arange(1, D + 2)))
    a = T.apply(f)
    b = apply_operator_series(PSI2, PHI2, f)
    assert np.max(np.abs(a.coeffs - b.coeffs)) <= 1e-10
    one = apply_operator_series(PSI2, PHI2, TruncatedSeries.constant(2, D))
    assert np.allclose(one.coeffs, PSI2.to_series(D).coeffs)


def test_pointwise_action(rng):
    D = 40
    f = TruncatedSeries.from_terms(2, D, {(0, 0): 1, (2, 1): 0.5j, (0, 3): -1})
    g = apply_operator_series(PSI2, PHI2, f)
    z = ball_points(rng, 50, 2, radius=0.5)
    assert np.max(np.abs(g(z) - PSI2(z) * f(PHI2(z)))) <= 1e-8


def test_adjoint_on_kernel(rng):
    D = 40
    T = build_matrix(PSI2, PHI2, SP2, D)
    low = T.columns_up_to(20)
    for z in ball_points(rng, 10, 2, radius=0.5):
        x = orthonormal_coefficients(SP2, kernel_series(z, SP2.twoK, D))
        y = orthonormal_coefficients(SP2, adjoint_on_kernel(PSI2, PHI2, SP2, z, D))
        assert np.max(np.abs((T.M.conj().T @ x - y)[low])) <= 1e-6 * np.linalg.norm(y)


def test_adjoint_kernel_examples():
    sp = SpaceParams(1)
    phi = aut.canonical_hyperbolic(0.5, N=1)
    k = adjoint_on_kernel(Symbol.constant(1), phi, sp, [0.0], 30)
    assert np.allclose(k.coeffs, 0.5 ** np.arange(31))
    k3 = adjoint_on_kernel(Symbol.constant(1, 2j), phi, sp, [0.0], 30)
    assert np.allclose(k3.coeffs, -2j * 0.5 ** np.arange(31))
    for n in range(5):
        zn = TruncatedSeries.from_terms(1, 30, {(n,): 1.0})
        Czn = apply_operator_series(Symbol.constant(1), phi, zn)
        assert inner_product(sp, zn, k) == pytest.approx(np.conj(Czn.coeffs[0]))
    with pytest.raises(TruncationError):
        adjoint_on_kernel(Symbol.constant(1), phi, sp, [0.9], 10, tail_tol=1e-6)


def test_composition_matrix_law():
    sp, D = SpaceParams(1), 150
    phi1 = aut.canonical_hyperbolic(0.3, N=1)
    phi2 = aut.from_involution([0.2j])
    psi1 = Symbol.linear(1, 2.0, [0.5])
    psi2 = Symbol.linear(1, 1.0, [-0.3j])
    sym, phi = compose_wco(psi1, phi1, psi2, phi2)
    lhs = build_matrix(psi1, phi1, sp, D).M @ build_matrix(psi2, phi2, sp, D).M
    rhs = build_matrix(sym, phi, sp, D).M
    blk = np.ix_(np.arange(20), np.arange(20))
    assert np.max(np.abs(lhs - rhs)[blk]) <= 1e-8


def test_composition_special_cases(rng):
    z = ball_points(rng, 20, 2)
    one = Symbol.constant(2)
    sym, phi = compose_wco(one, PHI2, one, aut.rotation([0.1, 0.2]))
    assert np.allclose(sym(z), 1) and np.allclose(phi(z), aut.rotation([0.1, 0.2])(PHI2(z)))
    sym, _ = compose_wco(PSI2, aut.identity(2), PSI2, aut.identity(2))
    assert np.allclose(sym(z), PSI2(z) ** 2)
    sym, phi = compose_wco(PSI2, PHI2, PSI2, PHI2)
    assert np.allclose(sym(z), cocycle(PSI2, PHI2, 2)(z))
    assert phi.allclose(PHI2.iterate(2))


def test_inverse_round_trip(rng):
    z = ball_points(rng, 100, 2)
    isym, iphi = inverse_wco(PSI2, PHI2)
    s, p = compose_wco(isym, iphi, PSI2, PHI2)
    assert np.max(np.abs(s(z) - 1)) <= 1e-10 and np.max(np.abs(p(z) - z)) <= 1e-10
    csym, cphi = inverse_wco(Symbol.constant(2, 4.0), PHI2)
    assert np.allclose(csym(z), 0.25) and cphi.allclose(PHI2.inverse())
    with pytest.raises(NotInvertible):
        inverse_wco(Symbol.linear(1, 1.0, [-1.0]), aut.canonical_hyperbolic(0.5, N=1))


def test_power_law_columns():
    sp, D = SpaceParams(1), 200
    psi = Symbol.linear(1, 2.0, [0.7])
    phi = aut.from_involution([0.1 + 0.2j]).compose(aut.canonical_hyperbolic(0.3, N=1))
    T = build_matrix(psi, phi, sp, D)
    blk = np.ix_(np.arange(10), np.arange(4))
    for n in range(2, 5):
        Tn = build_matrix(cocycle(psi, phi, n), phi.iterate(n), sp, D)
        assert np.max(np.abs(T.power(n).M - Tn.M)[blk]) <= 1e-8 * np.max(np.abs(Tn.M[blk]))


def test_eigenvalue_examples():
    ev = eigenvalues(build_matrix(Symbol.constant(2), aut.identity(2), SP2, 3))
    assert np.allclose(ev, 1)
    ev = eigenvalues(build_matrix(Symbol.constant(2, 0.5 - 1j), aut.identity(2), SP2, 3))
    assert np.allclose(ev, 0.5 - 1j)
    th = np.pi / 3
    ev = eigenvalues(build_matrix(Symbol.constant(1), aut.rotation([th]), SpaceParams(1), 6))
    ref = np.exp(1j * th * np.arange(7))
    assert len(ev) == 7
    for r in ref:
        assert np.min(np.abs(ev - r)) < 1e-12


def test_power_norm_growth_and_estimates():
    T = build_matrix(Symbol.constant(2, 1.5j), aut.identity(2), SP2, 3)
    assert np.allclose(power_norm_growth(T, 10), 1.5)
    est = spectral_radius_estimates(T, 5)
    assert est["eig_max_modulus"] == pytest.approx(1.5)
    assert est["power_norm_growth"] == pytest.approx(1.5)


def test_exports():
    T = build_matrix(PSI2, PHI2, SP2, 2)
    d = json.loads(T.to_json())
    assert d["shape"] == [6, 6] and len(d["data"]) == 36
    rows = T.to_csv().strip().split("\n")
    assert len(rows) == 6 and all(len(r.split(",")) == 12 for r in rows)
    back = np.array([[float(v) for v in r.split(",")] for r in rows])
    assert np.array_equal(back[:, 0::2] + 1j * back[:, 1::2], T.M)
