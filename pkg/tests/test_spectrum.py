import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from wco import automorphism as aut
from wco.errors import NotInvertible, UnsupportedCase
from wco.operator import inverse_wco
from wco.space import SpaceParams
from wco.spectrum import PointLocation, PointSpectrumNote, Shape, classify_point, predict, radius_bounds
from wco.symbol import Symbol, as_factored


def test_regression_values():
    p = predict(Symbol.constant(1), aut.canonical_hyperbolic(0.5, N=1), SpaceParams(1))
    assert p.shape is Shape.ANNULUS
    assert abs(p.r_min - 3**-0.5) <= 1e-12 and abs(p.r_max - 3**0.5) <= 1e-12
    p = predict(Symbol.linear(2, 2.0, [1.0, 0.0]), aut.canonical_hyperbolic(0.5, N=2), SpaceParams(2))
    assert abs(p.r_min - 1 / 3) <= 1e-12 and abs(p.r_max - 9) <= 1e-12
    assert p.point_spectrum_note is PointSpectrumNote.OPERATOR
    p = predict(Symbol.linear(1, 2.0, [1.0]), aut.parabolic_translation(1), SpaceParams(1))
    assert p.shape is Shape.CIRCLE and abs(p.r_min - 3) <= 1e-12 and p.r_max == p.r_min
    p = predict(Symbol.linear(1, 1.0, [-0.5]), aut.canonical_hyperbolic(0.5, N=1), SpaceParams(1))
    assert p.shape is Shape.CIRCLE and abs(p.r_min - np.sqrt(3) / 2) <= 1e-12


def test_adjoint_regime_note():
    p = predict(Symbol.linear(1, 1.0, [-0.9]), aut.canonical_hyperbolic(0.5, N=1), SpaceParams(1))
    assert p.point_spectrum_note is PointSpectrumNote.ADJOINT


def test_radius_bounds_and_points():
    psi, phi, sp = Symbol.linear(2, 2.0, [1.0, 0.0]), aut.canonical_hyperbolic(0.5, N=2), SpaceParams(2)
    assert radius_bounds(psi, phi, sp) == pytest.approx((1 / 3, 9))
    assert radius_bounds(Symbol.constant(2, -2j), aut.parabolic_translation(2), sp) == pytest.approx((2, 2))
    p = predict(psi, phi, sp)
    assert classify_point(1, p) is PointLocation.INSIDE
    assert classify_point(9, p) is PointLocation.ON_BOUNDARY_CIRCLE
    assert classify_point(-9j, p) is PointLocation.ON_BOUNDARY_CIRCLE
    assert classify_point(10, p) is PointLocation.OUTSIDE


def test_errors():
    with pytest.raises(UnsupportedCase):
        predict(Symbol.constant(1), aut.rotation([0.3]), SpaceParams(1))
    with pytest.raises(NotInvertible):
        predict(Symbol.linear(1, 1.0, [-1.0]), aut.canonical_hyperbolic(0.5, N=1), SpaceParams(1))


def test_serialisation():
    p = predict(Symbol.linear(2, 2.0, [1.0, 0.0]), aut.canonical_hyperbolic(0.5, N=2), SpaceParams(2))
    d = json.loads(p.to_json())
    assert {"shape", "r_min", "r_max", "rho", "K", "psi_at_fixed_points"} <= set(d)
    assert d["psi_at_fixed_points"]["a"] == [3.0, 0.0]


def test_inversion_duality():
    psi, sp = Symbol.from_terms(2, {(0, 0): 2.0, (1, 0): 0.5, (0, 1): 0.3j}), SpaceParams(2, 2.0)
    chi = aut.from_involution([0.2, 0.3j])
    phi = chi.compose(aut.canonical_hyperbolic(0.6, N=2)).compose(chi)
    p = predict(psi, phi, sp)
    isym, iphi = inverse_wco(psi, phi)
    q = predict(isym, iphi, sp)
    assert q.r_min == pytest.approx(1 / p.r_max, rel=1e-10)
    assert q.r_max == pytest.approx(1 / p.r_min, rel=1e-10)


@given(st.floats(0.1, 0.8), st.complex_numbers(max_magnitude=0.6), st.complex_numbers(max_magnitude=0.6), st.floats(1.0, 3.0))
def test_conjugation_invariance(s, a0, a1, gamma):
    a = np.array([a0, a1]) * 0.9
    psi, sp = Symbol.from_terms(2, {(0, 0): 2.0, (1, 0): 0.6, (0, 1): -0.4j}), SpaceParams(2, gamma)
    phi = aut.canonical_hyperbolic(s, np.array([[np.exp(0.5j)]]))
    chi = aut.from_involution(a)
    p = predict(psi, phi, sp)
    q = predict(as_factored(psi).compose(chi.inverse()), chi.compose(phi).compose(chi.inverse()), sp)
    assert abs(p.r_min - q.r_min) <= 1e-10 * p.r_max
    assert abs(p.r_max - q.r_max) <= 1e-10 * p.r_max
