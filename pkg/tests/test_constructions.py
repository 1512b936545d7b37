import numpy as np
import pytest

from wco import automorphism as aut
from wco import geometry
from wco.constructions import (
    _g_orbit_term,
    _u_sequence,
    adjoint_eigenvector,
    canonical_parameter,
    choose_p,
    circular_intertwiner,
    forward_eigenfunction,
    gram_matrix,
    hyperbolic_kernel_orbit,
    parabolic_approx_eigenvector,
    parabolic_bound,
    residuals_monotone_until_floor,
    separation_delta,
)
from wco.errors import DomainError, UnsupportedCase
from wco.space import SpaceParams, kernel_norm
from wco.symbol import Symbol, cocycle_eval
from conftest import ball_points

CANON1 = aut.canonical_hyperbolic(0.5, N=1)
CANON2 = aut.canonical_hyperbolic(0.5, np.array([[np.exp(0.4j)]]))
PSI2 = Symbol.from_terms(2, {(0, 0): 2.0, (1, 0): 1.0, (0, 1): 0.5j})


def _g_orbit(z, s, k, p, lam, psi, phi):
    # t_k(z) = lam^-k psi_(k)(z) g(phi_k z), g = (1 - z1^2)^p, evaluated pointwise
    w = phi.iterate(k)(z)
    return lam ** (-k) * cocycle_eval(psi, phi, k, z) * (1 - w[..., 0] ** 2) ** p


def test_forward_regression_one_variable():
    w = forward_eigenfunction(Symbol.constant(1), CANON1, SpaceParams(1), 1.0, 40, 60)
    assert w.residual <= 1e-6
    assert w.monotone_until_floor
    assert w.norm > 1e-8 and not w.diagnostics
    tn = w.details["term_norms"]
    assert tn[0] + tn[-1] < 1e-8


def test_forward_rejects_boundary_and_outside():
    for lam in (3**0.5, 3**-0.5, 2.0):
        with pytest.raises(DomainError):
            forward_eigenfunction(Symbol.constant(1), CANON1, SpaceParams(1), lam, 10, 20)


def test_forward_needs_canonical_first_coordinate():
    chi = aut.from_involution([0.2])
    with pytest.raises(DomainError):
        forward_eigenfunction(Symbol.constant(1), chi.compose(CANON1).compose(chi), SpaceParams(1), 1.0, 5, 10)


def test_forward_orbit_terms_match_pointwise(rng):
    s, p, N, D = 0.5, 2.0, 2, 40
    z = ball_points(rng, 40, N, radius=0.4)
    for k in (-3, 0, 2, 5):
        t = _g_orbit_term(N, D, s, k, p)
        w = CANON2.iterate(k)(z)
        assert np.max(np.abs(t(z) - (1 - w[:, 0] ** 2) ** p)) < 1e-10


def test_forward_orbit_shift_identity(rng):
    # psi(z) t_k(phi z) = lam t_{k+1}(z)
    z = ball_points(rng, 100, 2, radius=0.5)
    lam, p = 1.0 + 0.5j, 2.0
    for k in (-4, -1, 0, 3):
        lhs = PSI2(z) * _g_orbit(CANON2(z), 0.5, k, p, lam, PSI2, CANON2)
        rhs = lam * _g_orbit(z, 0.5, k + 1, p, lam, PSI2, CANON2)
        assert np.max(np.abs(lhs - rhs)) <= 1e-10 * np.max(np.abs(rhs))


def test_forward_series_matches_pointwise_sum(rng):
    lam, T, D = 2j, 6, 40
    w = forward_eigenfunction(PSI2, CANON2, SpaceParams(2), lam, T, D)
    p = w.details["p"]
    z = ball_points(rng, 100, 2, radius=0.3)
    h = sum(_g_orbit(z, 0.5, k, p, lam, PSI2, CANON2) for k in range(-T, T + 1))
    assert np.max(np.abs(w.vector(z) - h)) <= 1e-9 * np.max(np.abs(h))
    tail = lam * (_g_orbit(z, 0.5, T + 1, p, lam, PSI2, CANON2) - _g_orbit(z, 0.5, -T, p, lam, PSI2, CANON2))
    lhs = PSI2(z) * sum(_g_orbit(CANON2(z), 0.5, k, p, lam, PSI2, CANON2) for k in range(-T, T + 1)) - lam * h
    assert np.max(np.abs(lhs - tail)) <= 1e-9 * np.max(np.abs(h))


def test_forward_two_variables():
    for lam in (1.0, 2j):
        w = forward_eigenfunction(PSI2, CANON2, SpaceParams(2), lam, 40, 20)
        assert w.residual <= 1e-4
        assert w.monotone_until_floor
        assert "section_residual" in w.details


def test_choose_p_satisfies_inequalities():
    rho, K = 3.0, 1.0
    for pa, pb, lam in [(3.0, 1.0, 1.0), (3.0, 1.0, 0.4), (3.0, 1.0, 8.0), (1.0, 1.0, 1.0)]:
        p = choose_p(pa, pb, rho, lam, K)
        R1 = np.sqrt(pb / rho**K * abs(lam))
        R2 = np.sqrt(abs(lam) * pa * rho**K)
        assert pa * rho ** (-p) < R1 and pb * rho**p > R2
        assert p == int(p)
    with pytest.raises(DomainError):
        choose_p(3.0, 1.0, 1.0001, 1.0, 1.0)


def test_adjoint_regression():
    psi = Symbol.linear(1, 1.0, [-0.9])
    for lam in (0.5, 0.5j, 0.3 * np.exp(1j)):
        w = adjoint_eigenvector(psi, CANON1, SpaceParams(1), lam, 40)
        assert w.residual <= 1e-6
        assert w.monotone_until_floor
        assert np.isfinite(w.details["min_log_one_minus_norm_sq"])
        assert w.details["max_log_one_minus_norm_sq"] <= 0.0
    with pytest.raises(DomainError):
        adjoint_eigenvector(psi, CANON1, SpaceParams(1), 2.0, 10)
    with pytest.raises(DomainError):
        adjoint_eigenvector(Symbol.constant(1), CANON1, SpaceParams(1), 1.0, 10)


def test_adjoint_tail_diagnostic():
    w = adjoint_eigenvector(Symbol.linear(1, 1.0, [-0.9]), CANON1, SpaceParams(1), 0.5, 2)
    assert any("J_terms" in d for d in w.diagnostics)


def test_u_sequence_values():
    sp = SpaceParams(1)
    pts = hyperbolic_kernel_orbit(CANON1, 60)
    u = _u_sequence(Symbol.constant(1), pts, sp.K)
    i0 = 60  # position of z_0 = 0
    assert u[i0] == pytest.approx((1 / 0.75) ** 0.5)
    assert abs(u[-1]) == pytest.approx(3**0.5, rel=1e-10)


def test_adjoint_recurrence_on_kernels():
    sp = SpaceParams(2, 1.5)
    chi = aut.from_involution([0.2, 0.1j])
    phi = chi.compose(CANON2).compose(chi)
    pts = hyperbolic_kernel_orbit(phi, 8)
    u = _u_sequence(PSI2, pts, sp.K)
    for i in range(len(pts) - 1):
        assert np.allclose(phi(pts.z[i]), pts.z[i + 1], atol=1e-10)
        if min(geometry.norm_sq(pts.z[i]), geometry.norm_sq(pts.z[i + 1])) > 1 - 1e-2:
            continue  # the ball-coordinate reference loses digits there
        ref = np.conj(PSI2(pts.z[i])) * kernel_norm(sp, pts.z[i + 1]) / kernel_norm(sp, pts.z[i])
        assert abs(u[i] - ref) <= 1e-12 * abs(ref)


def test_kernel_overlap_matches_metric():
    sp = SpaceParams(2)
    pts = hyperbolic_kernel_orbit(CANON2, 4)
    G = gram_matrix(pts, sp.K)
    for i in range(len(pts)):
        for j in range(len(pts)):
            gap = geometry.pseudo_hyperbolic_gap(pts.z[i], pts.z[j])
            assert abs(abs(G[i, j]) - gap**sp.K) <= 1e-12


def test_parabolic_witness_example():
    phi = aut.parabolic_translation(1, 1.0)
    w = parabolic_approx_eigenvector(Symbol.constant(1), phi, SpaceParams(1), 1.0, 25)
    d = w.details
    assert d["bound"] == pytest.approx(np.e**2 * (np.e**2 + 1) / 25)
    assert d["ratio_sq"] <= d["bound"] and d["bound_holds"]
    assert d["norm_sq"] >= 25 / (2 * np.e**2)
    lo, hi = d["coeff_range"]
    assert 1 / np.e < lo and hi < np.e
    assert d["max_overlap"] < d["overlap_limit"]


def test_parabolic_errors():
    phi = aut.parabolic_translation(1, 1.0)
    with pytest.raises(DomainError):
        parabolic_approx_eigenvector(Symbol.constant(1), phi, SpaceParams(1), 0.5, 10)
    with pytest.raises(UnsupportedCase):
        parabolic_approx_eigenvector(Symbol.constant(1), CANON1, SpaceParams(1), 1.0, 10)


def test_separation_delta_and_bound():
    d = separation_delta(25, 1.5)
    assert (1 - d**2) ** 1.5 == pytest.approx(0.5 / (2 * np.e**4 * 25))
    assert parabolic_bound(3.0, 10) == pytest.approx(9 * np.e**2 * (np.e**2 + 1) / 10)


def test_intertwiner(rng):
    z = ball_points(rng, 200, 2)
    assert np.allclose(circular_intertwiner(CANON2, 0.0)(z), 1)
    F = circular_intertwiner(CANON2, np.pi)
    assert F.rho == pytest.approx(3.0)
    tau = lambda w: (1 + w) / (1 - w)
    assert tau(0.5) == pytest.approx(F.rho * tau(0.0))
    assert np.max(np.abs(F(CANON2(z)) / F(z) + 1)) <= 1e-10
    lo, hi = F.modulus_bounds
    assert np.all((lo <= np.abs(F(z))) & (np.abs(F(z)) <= hi))
    assert canonical_parameter(CANON2) == pytest.approx(0.5)


def test_monotone_until_floor():
    assert residuals_monotone_until_floor([1, 0.1, 0.01, 1e-3, 2e-3, 1e-3])
    assert not residuals_monotone_until_floor([1, 2, 0.1, 1e-3])
    assert residuals_monotone_until_floor([5.0])
