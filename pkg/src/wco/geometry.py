"""Points of the unit ball, the pseudo-hyperbolic metric and the Cayley transform.

Points are plain complex numpy arrays whose last axis has length ``N``.
Most functions broadcast over leading axes.
"""

from __future__ import annotations

import numpy as np

from .errors import DomainError

EPS_BOUNDARY = 1e-9
INTERIOR_MARGIN = 1e-12


class _Infinity:
    """The point at infinity of the closed Siegel half space."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INFINITY"

    def __reduce__(self):
        return (_Infinity, ())


INFINITY = _Infinity()


def as_point(z, N: int | None = None) -> np.ndarray:
    """Coerce ``z`` to a complex array and check it is finite (and of length N)."""
    z = np.asarray(z, dtype=complex)
    if z.ndim == 0:
        z = z.reshape(1)
    if not np.all(np.isfinite(z)):
        raise DomainError("point has non-finite coordinates")
    if N is not None and z.shape[-1] != N:
        raise DomainError(f"expected points of dimension {N}, got {z.shape[-1]}")
    return z


def e1(N: int) -> np.ndarray:
    out = np.zeros(N, dtype=complex)
    out[0] = 1.0
    return out


def norm_sq(z) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    return np.sum(z.real**2 + z.imag**2, axis=-1)


def in_open_ball(z, margin: float = 0.0) -> np.ndarray:
    return np.sqrt(norm_sq(z)) < 1.0 - margin


def on_sphere(z, eps: float = EPS_BOUNDARY) -> np.ndarray:
    return np.abs(np.sqrt(norm_sq(z)) - 1.0) <= eps


def inner(z, w):
    """Hermitian inner product ``sum_j z_j conj(w_j)`` along the last axis."""
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    if z.shape[-1] != w.shape[-1]:
        raise DomainError(f"dimension mismatch: {z.shape[-1]} vs {w.shape[-1]}")
    return np.sum(z * np.conj(w), axis=-1)


def _require_interior(*points):
    for p in points:
        if not np.all(in_open_ball(p)):
            raise DomainError("pseudo-hyperbolic distance needs points in the open ball")


def pseudo_hyperbolic_gap(z, w):
    """Return ``1 - d(z, w)**2`` from the closed identity, clamped to [0, 1]."""
    z = as_point(z)
    w = as_point(w)
    _require_interior(z, w)
    num = (1.0 - norm_sq(z)) * (1.0 - norm_sq(w))
    # real arithmetic keeps the value bit-identical under z <-> w
    re = np.sum(z.real * w.real + z.imag * w.imag, axis=-1)
    im = np.sum(z.imag * w.real - z.real * w.imag, axis=-1)
    den = (1.0 - re) ** 2 + im**2
    return np.clip(num / den, 0.0, 1.0)


def pseudo_hyperbolic_distance(z, w):
    """Pseudo-hyperbolic distance ``d(z, w) = |phi_w(z)|`` for points of the open ball."""
    return np.sqrt(1.0 - pseudo_hyperbolic_gap(z, w))


def cayley(z):
    """Cayley transform ``i (e1 + z) / (1 - z[0])`` onto the Siegel half space.

    Returns ``INFINITY`` for a single point at the pole ``z[0] == 1``.
    Batched input with a pole raises ``DomainError``.
    """
    z = as_point(z)
    den = 1.0 - z[..., 0]
    pole = np.abs(den) == 0.0
    if np.any(pole):
        if z.ndim == 1:
            return INFINITY
        raise DomainError("batch contains the pole e1 of the Cayley transform")
    out = 1j * z / den[..., None]
    out[..., 0] = 1j * (1.0 + z[..., 0]) / den
    return out


def cayley_inverse(w):
    """Inverse Cayley transform; ``INFINITY`` maps to ``e1``."""
    if w is INFINITY:
        raise DomainError("dimension of INFINITY is unknown; use cayley_inverse_infinity(N)")
    w = as_point(w)
    den = w[..., 0] + 1j
    if np.any(den == 0):
        raise DomainError("point lies outside the closed Siegel half space")
    out = 2.0 * w / den[..., None]
    out[..., 0] = (w[..., 0] - 1j) / den
    return out


def cayley_inverse_infinity(N: int) -> np.ndarray:
    return e1(N)


def siegel_height(w):
    """``Im w[0] - |w'|**2``; positive inside the half space, zero on its boundary."""
    w = as_point(w)
    return w[..., 0].imag - norm_sq(w[..., 1:])


def in_half_space(w):
    if w is INFINITY:
        return False
    return siegel_height(w) > 0


def siegel_form(w, v):
    """Sesquilinear form ``(w[0] - conj(v[0])) / 2i - <w', v'>``.

    It satisfies ``1 - <z, x> = 4 form(w, v) / ((w[0] + i) conj(v[0] + i))``
    for ``z = cayley_inverse(w)``, ``x = cayley_inverse(v)``, which lets
    near-boundary overlaps be computed without cancellation.
    """
    w = as_point(w)
    v = as_point(v)
    return (w[..., 0] - np.conj(v[..., 0])) / 2j - inner(w[..., 1:], v[..., 1:])
