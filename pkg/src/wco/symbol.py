"""Polynomial weight symbols, factored symbols and the cocycles psi_(k)."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import optimize, stats

from .automorphism import Automorphism, Kind, classify
from .errors import DomainError, NotInvertible, UnsupportedCase
from .geometry import as_point
from .series import TruncatedSeries, compose, degrees, evaluate, mul, multi_index_array, reciprocal

TOL_ZERO = 1e-8
DEFAULT_SAMPLES = 2000


@lru_cache(maxsize=32)
def _sobol_sphere(N: int, n: int, seed: int) -> np.ndarray:
    # scrambled Sobol -> Gaussian -> normalise gives a low-discrepancy cloud on S_N
    sob = stats.qmc.Sobol(d=2 * N, scramble=True, seed=seed)
    u = sob.random_base2(max(0, int(np.ceil(np.log2(n)))))[:n]
    u = np.clip(u, 1e-12, 1 - 1e-12)
    g = stats.norm.ppf(u)
    z = g[:, :N] + 1j * g[:, N:]
    z /= np.linalg.norm(z, axis=1, keepdims=True)
    z.setflags(write=False)
    return z


def sphere_samples(N: int, n: int = DEFAULT_SAMPLES, seed: int = 0, extra=None) -> np.ndarray:
    """Deterministic quasi-random points of the unit sphere plus the coordinate points ``+-e_j``.

    ``extra`` points (e.g. boundary fixed points) are appended after normalisation.
    """
    if n < 1:
        raise DomainError("need at least one sample")
    pts = [np.asarray(_sobol_sphere(N, int(n), int(seed)))]
    eye = np.eye(N, dtype=complex)
    pts += [eye, -eye]
    if extra is not None:
        ex = np.atleast_2d(np.asarray(extra, dtype=complex))
        if ex.size:
            pts.append(ex / np.linalg.norm(ex, axis=1, keepdims=True))
    return np.concatenate(pts, axis=0)


class Symbol:
    """A polynomial weight ``psi`` on the ball, stored as an exact truncated series."""

    __slots__ = ("poly",)

    def __init__(self, poly: TruncatedSeries):
        d = poly.degree()
        self.poly = poly.truncate(d) if d < poly.D else poly

    @classmethod
    def constant(cls, N: int, c=1.0):
        return cls(TruncatedSeries.constant(N, 0, c))

    @classmethod
    def from_terms(cls, N: int, terms: dict):
        D = max((sum(np.atleast_1d(k)) for k in terms), default=0)
        return cls(TruncatedSeries.from_terms(N, int(D), terms))

    @classmethod
    def linear(cls, N: int, const, weights):
        return cls(TruncatedSeries.linear(N, 1, weights, const))

    @property
    def N(self) -> int:
        return self.poly.N

    @property
    def degree(self) -> int:
        return self.poly.D

    def __repr__(self):
        return f"Symbol(N={self.N}, terms={self.poly.terms(tol=0.0)})"

    def __call__(self, z):
        return evaluate(self.poly, as_point(z, self.N))

    def to_series(self, D: int) -> TruncatedSeries:
        return self.poly.truncate(D)

    def to_dict(self) -> dict:
        return {
            "N": self.N,
            "terms": [[list(k), v.real, v.imag] for k, v in sorted(self.poly.terms().items())],
        }


def as_factored(psi) -> "FactoredSymbol":
    if isinstance(psi, FactoredSymbol):
        return psi
    if isinstance(psi, Symbol):
        return FactoredSymbol(psi.N, ((psi, None, 1),))
    raise TypeError(f"not a symbol: {type(psi).__name__}")


@dataclass(frozen=True)
class FactoredSymbol:
    """``prod_i (psi_i o chi_i)^(e_i)`` with polynomial ``psi_i``, automorphisms ``chi_i`` and ``e_i = +-1``.

    ``chi_i = None`` means the identity.  Products of composed polynomials are
    not polynomials, so composite symbols are kept in this evaluable form.
    """

    N: int
    factors: tuple = ()

    def __call__(self, z):
        z = as_point(z, self.N)
        out = np.ones(z.shape[:-1], dtype=complex)
        for psi, chi, e in self.factors:
            w = z if chi is None else chi(z)
            v = psi(w)
            out = out * (v if e > 0 else 1.0 / v)
        return out if out.ndim else complex(out)

    def __mul__(self, other):
        other = as_factored(other)
        if other.N != self.N:
            raise DomainError("symbols over different balls")
        return FactoredSymbol(self.N, self.factors + other.factors)

    def compose(self, chi: Automorphism) -> "FactoredSymbol":
        """``self o chi``."""
        out = []
        for psi, c, e in self.factors:
            out.append((psi, chi if c is None else c.compose(chi), e))
        return FactoredSymbol(self.N, tuple(out))

    def reciprocal(self) -> "FactoredSymbol":
        return FactoredSymbol(self.N, tuple((p, c, -e) for p, c, e in self.factors))

    def to_series(self, D: int) -> TruncatedSeries:
        """Taylor series at 0 truncated at degree D."""
        out = TruncatedSeries.constant(self.N, D)
        for psi, chi, e in self.factors:
            f = psi.to_series(D)
            if chi is not None:
                f = compose(f, chi)
            out = mul(out, f if e > 0 else reciprocal(f))
        return out


@dataclass(frozen=True)
class CocycleValue(FactoredSymbol):
    """The cocycle ``psi_(k)`` in factored form."""

    k: int = 0


def cocycle(psi: Symbol, phi: Automorphism, k: int) -> CocycleValue:
    """``psi_(k)``: ``prod_{j<k} psi o phi_j`` for k > 0, ``prod_{j=1}^{-k} 1/(psi o phi_{-j})`` for k < 0."""
    k = int(k)
    if psi.N != phi.N:
        raise DomainError("symbol and automorphism live on different balls")
    if k >= 0:
        factors = tuple((psi, None if j == 0 else phi.iterate(j), 1) for j in range(k))
    else:
        factors = tuple((psi, phi.iterate(-j), -1) for j in range(1, -k + 1))
    return CocycleValue(psi.N, factors, k)


def cocycle_eval(psi: Symbol, phi: Automorphism, k: int, z) -> np.ndarray | complex:
    """Evaluate ``psi_(k)`` at ``z`` by walking the orbit."""
    z = as_point(z, psi.N)
    k = int(k)
    out = np.ones(z.shape[:-1], dtype=complex)
    step = phi if k >= 0 else phi.inverse()
    w = z
    for _ in range(abs(k)):
        if k > 0:
            out = out * psi(w)
            w = step(w)
        else:
            w = step(w)
            v = psi(w)
            if np.any(v == 0):
                raise NotInvertible("negative cocycle evaluated at a zero of psi")
            out = out / v
    return out if out.ndim else complex(out)


def min_modulus_on_sphere(psi: Symbol, n_samples: int = DEFAULT_SAMPLES, seed: int = 0, polish: bool = True) -> float:
    """Approximate ``min |psi|`` over the sphere (equal to the infimum over the ball for zero-free psi)."""
    if n_samples < 100:
        raise DomainError("use at least 100 sphere samples")
    N = psi.N
    pts = sphere_samples(N, n_samples, seed)
    vals = np.abs(psi(pts))
    i = int(np.argmin(vals))
    best = float(vals[i])
    if not polish or psi.degree == 0:
        return best

    def obj(x):
        z = x[:N] + 1j * x[N:]
        z = z / np.linalg.norm(z)
        return float(np.abs(psi(z)))

    x0 = np.concatenate([pts[i].real, pts[i].imag])
    res = optimize.minimize(obj, x0, method="Nelder-Mead", options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 4000})
    return min(best, float(res.fun))


def slice_root_radius(psi: Symbol, n_samples: int = DEFAULT_SAMPLES, seed: int = 0) -> float:
    """Smallest ``|t|`` with ``psi(t zeta) = 0`` over sampled directions ``zeta``.

    The sphere minimum alone cannot see zeros inside the ball; restricting to
    complex lines through 0 reduces that to one-variable root finding.
    """
    if psi.degree == 0:
        return np.inf
    pts = sphere_samples(psi.N, n_samples, seed)
    alpha = multi_index_array(psi.N, psi.degree)
    mono = np.ones((pts.shape[0], alpha.shape[0]), dtype=complex)
    for j in range(psi.N):
        mono *= pts[:, j : j + 1] ** alpha[None, :, j]
    deg = degrees(psi.N, psi.degree)
    # coefficient of t^s along the line is the degree-s homogeneous part at zeta
    slices = np.zeros((pts.shape[0], psi.degree + 1), dtype=complex)
    for s in range(psi.degree + 1):
        slices[:, s] = mono[:, deg == s] @ psi.poly.coeffs[deg == s]
    best = np.inf
    for row in slices:
        r = np.roots(row[::-1])
        if r.size:
            best = min(best, float(np.min(np.abs(r))))
    return best


def is_invertible(psi: Symbol, tol_zero: float = TOL_ZERO, n_samples: int = DEFAULT_SAMPLES) -> bool:
    """``psi`` has no zero on the closed ball and ``min |psi| > tol_zero`` on the sphere."""
    return min_modulus_on_sphere(psi, n_samples) > tol_zero and slice_root_radius(psi, n_samples) > 1.0


def require_invertible(psi: Symbol, tol_zero: float = TOL_ZERO) -> float:
    m = min_modulus_on_sphere(psi)
    if not m > tol_zero:
        raise NotInvertible(f"psi is not bounded away from zero on the ball (min |psi| ~ {m:.3g})")
    r = slice_root_radius(psi)
    if not r > 1.0:
        raise NotInvertible(f"psi vanishes inside the ball (zero at radius ~ {r:.3g})")
    return m


def boundary_fixed_points(phi: Automorphism) -> np.ndarray:
    rep = classify(phi)
    if rep.kind is Kind.ELLIPTIC or not rep.boundary_fixed:
        return np.zeros((0, phi.N), dtype=complex)
    return np.array(rep.boundary_fixed, dtype=complex)


def cocycle_sup_growth(psi: Symbol, phi: Automorphism, n_max: int, n_samples: int = DEFAULT_SAMPLES, seed: int = 0) -> np.ndarray:
    """``r_n = (max_samples |psi_(n)|)^(1/n)`` for ``n = 1..n_max``.

    The sample cloud includes the boundary fixed points of ``phi``, where
    ``psi_(n) = psi^n`` exactly, so ``r_n`` never drops below ``|psi|`` there.
    """
    if psi.N != phi.N:
        raise DomainError("symbol and automorphism live on different balls")
    rep = classify(phi)
    if rep.kind is Kind.ELLIPTIC:
        raise UnsupportedCase("cocycle growth limit is only described for fixed-point-free automorphisms")
    z = sphere_samples(psi.N, n_samples, seed, extra=rep.boundary_fixed)
    logs = np.zeros(z.shape[0])
    out = np.empty(int(n_max))
    with np.errstate(divide="ignore"):
        for n in range(1, int(n_max) + 1):
            logs += np.log(np.abs(psi(z)))
            z = phi(z)
            z /= np.linalg.norm(z, axis=1, keepdims=True)  # stay on the sphere
            out[n - 1] = np.exp(np.max(logs) / n)
    return out
