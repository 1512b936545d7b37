"""The weighted Hardy spaces H^2(beta, B_N) with beta(n)^2 = (1 + n)^(1 - gamma).

``gamma = 1`` is the Hardy space of the ball, ``gamma > 1`` is realised with the
exact norm of the weighted Bergman space A^2_{gamma-2}.  In both cases the
reproducing kernel is ``(1 - <z, w>)^(-2K)`` with ``K = (N - 1 + gamma) / 2``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import lgamma

import numpy as np

from .errors import DomainError
from .geometry import as_point, norm_sq
from .series import TruncatedSeries, degrees, multi_index_array


@dataclass(frozen=True)
class SpaceParams:
    N: int
    gamma: float = 1.0
    K: float = field(init=False)

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise DomainError("N must be a positive integer")
        if not np.isfinite(self.gamma) or self.gamma < 1.0:
            raise DomainError("gamma must be a real number >= 1")
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "gamma", float(self.gamma))
        object.__setattr__(self, "K", (self.N - 1 + self.gamma) / 2.0)

    @property
    def twoK(self) -> float:
        return 2.0 * self.K

    @property
    def name(self) -> str:
        if self.gamma == 1.0:
            return f"H^2(B_{self.N})"
        return f"A^2_{self.gamma - 2:g}(B_{self.N})"


def log_monomial_norm_sq(sp: SpaceParams, alpha) -> np.ndarray:
    """``log ||z^alpha||^2 = log alpha! + lgamma(N+gamma-1) - lgamma(N+gamma-1+|alpha|)``."""
    alpha = np.atleast_2d(np.asarray(alpha, dtype=np.int64))
    if alpha.shape[-1] != sp.N or np.any(alpha < 0):
        raise DomainError("invalid multi-index")
    lg = np.vectorize(lgamma, otypes=[float])
    a = sp.N + sp.gamma - 1.0
    out = lg(alpha + 1.0).sum(axis=-1) + lgamma(a) - lg(a + alpha.sum(axis=-1))
    return out


def monomial_norm_sq(sp: SpaceParams, alpha) -> float:
    return float(np.exp(log_monomial_norm_sq(sp, alpha))[0])


@lru_cache(maxsize=None)
def _norm_table(N: int, gamma: float, D: int) -> np.ndarray:
    tab = np.exp(log_monomial_norm_sq(SpaceParams(N, gamma), multi_index_array(N, D)))
    tab.setflags(write=False)
    return tab


def monomial_norm_table(sp: SpaceParams, D: int) -> np.ndarray:
    """``||z^alpha||^2`` for every alpha of degree <= D, in graded-lex order."""
    return _norm_table(sp.N, sp.gamma, int(D))


def _check(sp, *fs):
    for f in fs:
        if f.N != sp.N:
            raise DomainError(f"series in {f.N} variables for a space over B_{sp.N}")
    if len(fs) == 2 and fs[0].D != fs[1].D:
        raise DomainError("series truncated at different degrees")


def inner_product(sp: SpaceParams, f: TruncatedSeries, g: TruncatedSeries) -> complex:
    _check(sp, f, g)
    w = monomial_norm_table(sp, f.D)
    return complex(np.sum(f.coeffs * np.conj(g.coeffs) * w))


def norm(sp: SpaceParams, f: TruncatedSeries) -> float:
    _check(sp, f)
    w = monomial_norm_table(sp, f.D)
    return float(np.sqrt(np.sum(np.abs(f.coeffs) ** 2 * w)))


def kernel_norm(sp: SpaceParams, w) -> np.ndarray | float:
    """``||K_w|| = (1 - |w|^2)^(-K)``."""
    w = as_point(w, sp.N)
    r = norm_sq(w)
    if np.any(r >= 1.0):
        raise DomainError("kernel norm needs a point of the open ball")
    out = (1.0 - r) ** (-sp.K)
    return float(out) if np.ndim(out) == 0 else out


def beta_weighted_norm(sp: SpaceParams, f: TruncatedSeries) -> float:
    """``sqrt(sum_s (1+s)^(1-gamma) ||f_s||_{H^2}^2)`` over the homogeneous parts of ``f``."""
    _check(sp, f)
    h2 = monomial_norm_table(SpaceParams(sp.N, 1.0), f.D)
    s = degrees(sp.N, f.D)
    weight = (1.0 + s) ** (1.0 - sp.gamma)
    return float(np.sqrt(np.sum(weight * h2 * np.abs(f.coeffs) ** 2)))


def orthonormal_coefficients(sp: SpaceParams, f: TruncatedSeries) -> np.ndarray:
    """Coordinates of ``f`` in the orthonormal basis ``z^alpha / ||z^alpha||``."""
    _check(sp, f)
    return f.coeffs * np.sqrt(monomial_norm_table(sp, f.D))


def from_orthonormal_coefficients(sp: SpaceParams, D: int, x) -> TruncatedSeries:
    x = np.asarray(x, dtype=complex)
    return TruncatedSeries(sp.N, D, x / np.sqrt(monomial_norm_table(sp, D)))
