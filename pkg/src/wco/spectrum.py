"""Closed-form spectra of invertible weighted composition operators.

For hyperbolic ``phi`` with Denjoy-Wolff point ``a``, repelling point ``b``
and dilation ``rho`` the spectrum is the closed annulus between
``|psi(a)| rho^K`` and ``|psi(b)| rho^-K``; for parabolic ``phi`` it is the
circle of radius ``|psi(a)|``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .automorphism import Automorphism, FixedPointReport, Kind, classify
from .errors import DomainError, UnsupportedCase
from .space import SpaceParams
from .symbol import Symbol, require_invertible

POINT_TOL = 1e-12


class Shape(str, Enum):
    ANNULUS = "annulus"
    CIRCLE = "circle"


class PointSpectrumNote(str, Enum):
    """Which operator has the interior of the annulus as eigenvalues."""

    OPERATOR = "operator"
    ADJOINT = "adjoint"
    NONE = "none"


class PointLocation(str, Enum):
    INSIDE = "inside"
    ON_BOUNDARY_CIRCLE = "on_boundary_circle"
    OUTSIDE = "outside"


@dataclass(frozen=True)
class SpectrumPrediction:
    shape: Shape
    r_min: float
    r_max: float
    point_spectrum_note: PointSpectrumNote
    kind: Kind
    rho: float | None
    K: float
    psi_at_a: complex
    psi_at_b: complex | None = None

    @property
    def radii(self) -> tuple[float, float]:
        return self.r_min, self.r_max

    def to_dict(self) -> dict:
        def c(v):
            return None if v is None else [float(np.real(v)), float(np.imag(v))]

        fixed = {"a": c(self.psi_at_a)}
        if self.psi_at_b is not None:
            fixed["b"] = c(self.psi_at_b)
        return {
            "shape": self.shape.value,
            "r_min": self.r_min,
            "r_max": self.r_max,
            "rho": self.rho,
            "K": self.K,
            "kind": self.kind.value,
            "point_spectrum": self.point_spectrum_note.value,
            "psi_at_fixed_points": fixed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _check_inputs(psi, phi, sp, report):
    if not (psi.N == phi.N == sp.N):
        raise DomainError("symbol, automorphism and space must share N")
    report = classify(phi) if report is None else report
    if report.kind is Kind.ELLIPTIC:
        raise UnsupportedCase("automorphism has an interior fixed point; only hyperbolic and parabolic cases are covered")
    return report


def predict(psi, phi: Automorphism, sp: SpaceParams, report: FixedPointReport | None = None, check_invertible: bool = True) -> SpectrumPrediction:
    """Predicted spectrum of ``C_{psi,phi}`` on the space ``sp``."""
    report = _check_inputs(psi, phi, sp, report)
    if check_invertible and isinstance(psi, Symbol):
        require_invertible(psi)
    a = report.denjoy_wolff
    pa = complex(psi(a))
    K = sp.K
    if report.kind is Kind.PARABOLIC:
        r = abs(pa)
        return SpectrumPrediction(Shape.CIRCLE, r, r, PointSpectrumNote.NONE, report.kind, None, K, pa)
    rho = float(report.rho)
    b = report.repelling
    pb = complex(psi(b))
    Ra = abs(pa) * rho**K
    Rb = abs(pb) * rho ** (-K)
    lo, hi = min(Ra, Rb), max(Ra, Rb)
    if hi - lo <= POINT_TOL * hi:
        shape, note = Shape.CIRCLE, PointSpectrumNote.NONE
    else:
        shape = Shape.ANNULUS
        note = PointSpectrumNote.OPERATOR if Rb < Ra else PointSpectrumNote.ADJOINT
    return SpectrumPrediction(shape, lo, hi, note, report.kind, rho, K, pa, pb)


def radius_bounds(psi, phi: Automorphism, sp: SpaceParams, report: FixedPointReport | None = None) -> tuple[float, float]:
    """The a-priori containment radii; they coincide with the predicted spectrum."""
    p = predict(psi, phi, sp, report)
    return p.r_min, p.r_max


def classify_point(lam: complex, p: SpectrumPrediction, tol: float = POINT_TOL) -> PointLocation:
    r = abs(complex(lam))
    if abs(r - p.r_min) <= tol or abs(r - p.r_max) <= tol:
        return PointLocation.ON_BOUNDARY_CIRCLE
    if p.r_min < r < p.r_max:
        return PointLocation.INSIDE
    return PointLocation.OUTSIDE
