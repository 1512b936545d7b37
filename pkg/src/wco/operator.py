"""Finite sections of weighted composition operators ``f -> psi * (f o phi)``.

Matrices act on coordinates in the orthonormal monomial basis
``e_alpha = z^alpha / ||z^alpha||`` of degree <= D.  Because ``phi`` does not
fix the origin these are compressions, not restrictions: only columns of
low degree are trustworthy when comparing products of sections.
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass, field

import numpy as np

from .automorphism import Automorphism
from .errors import DomainError, EigensolverError, NotInvertible, TruncationError
from .geometry import as_point, norm_sq
from .series import (
    TruncatedSeries,
    compose,
    compose_all_monomials,
    degrees,
    kernel_series,
    mul,
    n_terms,
    product_table,
)
from .space import SpaceParams, monomial_norm_table
from .symbol import FactoredSymbol, Symbol, as_factored, require_invertible, sphere_samples

TOL_ZERO = 1e-8


@dataclass(frozen=True)
class TruncatedOperator:
    sp: SpaceParams
    D: int
    M: np.ndarray = field(repr=False)
    psi: object = field(default=None, repr=False)
    phi: Automorphism | None = field(default=None, repr=False)

    @property
    def size(self) -> int:
        return self.M.shape[0]

    def columns_up_to(self, d: int) -> np.ndarray:
        """Indices of basis vectors of degree <= d."""
        return np.nonzero(degrees(self.sp.N, self.D) <= d)[0]

    def apply(self, f: TruncatedSeries) -> TruncatedSeries:
        """Matrix action on a series (coefficients in the monomial basis)."""
        if f.N != self.sp.N or f.D != self.D:
            raise DomainError("series does not match the truncation")
        w = np.sqrt(monomial_norm_table(self.sp, self.D))
        return TruncatedSeries(self.sp.N, self.D, (self.M @ (f.coeffs * w)) / w)

    def __matmul__(self, other: "TruncatedOperator") -> "TruncatedOperator":
        if other.sp != self.sp or other.D != self.D:
            raise DomainError("truncations on different spaces")
        return TruncatedOperator(self.sp, self.D, self.M @ other.M)

    def power(self, n: int) -> "TruncatedOperator":
        return TruncatedOperator(self.sp, self.D, np.linalg.matrix_power(self.M, int(n)))

    def to_dict(self) -> dict:
        return {
            "N": self.sp.N,
            "gamma": self.sp.gamma,
            "D": self.D,
            "shape": list(self.M.shape),
            "data": [[float(v.real), float(v.imag)] for v in self.M.ravel()],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def to_csv(self) -> str:
        """Row-major CSV; each matrix row becomes ``re,im,re,im,...``."""
        buf = io.StringIO()
        for row in self.M:
            buf.write(",".join(f"{v.real:.17g},{v.imag:.17g}" for v in row))
            buf.write("\n")
        return buf.getvalue()


def multiplication_matrix(f: TruncatedSeries) -> np.ndarray:
    """Matrix of ``g -> f * g`` on monomial coefficients, truncated at f.D."""
    N, D = f.N, f.D
    n = n_terms(N, D)
    out = np.zeros((n, n), dtype=complex)
    if N == 1:
        for k in range(D + 1):
            out[k:, k] = f.coeffs[: D + 1 - k]
        return out
    left, right, target, _ = product_table(N, D)
    np.add.at(out, (target, right), f.coeffs[left])
    return out


def _symbol_series(psi, N: int, D: int) -> TruncatedSeries:
    if isinstance(psi, (Symbol, FactoredSymbol)):
        if psi.N != N:
            raise DomainError("symbol and automorphism live on different balls")
        return psi.to_series(D)
    raise TypeError(f"not a symbol: {type(psi).__name__}")


def build_matrix(psi, phi: Automorphism, sp: SpaceParams, D: int) -> TruncatedOperator:
    """``M[beta, alpha] = coeff_beta(psi * (z^alpha o phi)) * ||z^beta|| / ||z^alpha||``."""
    if phi.N != sp.N:
        raise DomainError("automorphism and space have different dimensions")
    D = int(D)
    table = compose_all_monomials(phi, D)
    comp = np.stack([t.coeffs for t in table], axis=1)
    raw = multiplication_matrix(_symbol_series(psi, sp.N, D)) @ comp
    w = np.sqrt(monomial_norm_table(sp, D))
    M = raw * w[:, None] / w[None, :]
    return TruncatedOperator(sp, D, M, psi, phi)


def apply_operator_series(psi, phi: Automorphism, f: TruncatedSeries, D: int | None = None) -> TruncatedSeries:
    """Series of ``psi * (f o phi)`` at degree D (defaults to f.D)."""
    D = f.D if D is None else int(D)
    f = f.truncate(D)
    return mul(_symbol_series(psi, f.N, D), compose(f, phi))


def kernel_tail_fraction(sp: SpaceParams, w, D: int) -> float:
    """Fraction of ``||K_w||^2`` carried by degrees above D."""
    w = as_point(w, sp.N)
    kept = np.sum(np.abs(kernel_series(w, sp.twoK, D).coeffs) ** 2 * monomial_norm_table(sp, D))
    full = (1.0 - norm_sq(w)) ** (-sp.twoK)
    return float(max(0.0, 1.0 - kept / full))


def adjoint_on_kernel(psi, phi: Automorphism, sp: SpaceParams, z, D: int, tail_tol: float | None = None) -> TruncatedSeries:
    """``C^* K_z = conj(psi(z)) K_{phi(z)}`` as a truncated series.

    With ``tail_tol`` set, raises ``TruncationError`` when the dropped part of
    ``K_{phi(z)}`` exceeds that fraction of its squared norm.
    """
    z = as_point(z, sp.N)
    w = phi(z)
    if tail_tol is not None:
        frac = kernel_tail_fraction(sp, w, D)
        if frac > tail_tol:
            raise TruncationError(f"kernel at |phi(z)|={np.sqrt(norm_sq(w)):.4f} loses {frac:.2e} of its norm at D={D}")
    return kernel_series(w, sp.twoK, D) * np.conj(complex(psi(z)))


def compose_wco(psi1, phi1: Automorphism, psi2, phi2: Automorphism):
    """``C_{psi1,phi1} C_{psi2,phi2} = C_{psi1 * (psi2 o phi1), phi2 o phi1}``."""
    sym = as_factored(psi1) * as_factored(psi2).compose(phi1)
    return sym, phi2.compose(phi1)


def inverse_wco(psi, phi: Automorphism, tol_zero: float = TOL_ZERO):
    """``C_{psi,phi}^{-1} = C_{1/(psi o phi^{-1}), phi^{-1}}``."""
    if isinstance(psi, Symbol):
        require_invertible(psi, tol_zero)
    else:
        m = float(np.min(np.abs(as_factored(psi)(sphere_samples(psi.N)))))
        if not m > tol_zero:
            raise NotInvertible(f"symbol is not bounded away from zero (min ~ {m:.3g})")
    inv = phi.inverse()
    return as_factored(psi).compose(inv).reciprocal(), inv


def _sort_eigs(ev: np.ndarray) -> np.ndarray:
    # deterministic order: modulus then argument, on rounded keys
    key = np.lexsort((np.round(np.angle(ev), 12), np.round(np.abs(ev), 12)))
    return ev[key]


def eigenvalues(T: TruncatedOperator) -> np.ndarray:
    """Eigenvalues of the finite section from LAPACK's dense non-Hermitian solver."""
    M = T.M if isinstance(T, TruncatedOperator) else np.asarray(T, dtype=complex)
    if not np.all(np.isfinite(M)):
        raise EigensolverError("matrix has non-finite entries")
    try:
        ev = np.linalg.eigvals(M)
    except np.linalg.LinAlgError as exc:
        raise EigensolverError(f"eigensolver failed ({exc}); condition number ~ {np.linalg.cond(M):.3g}") from exc
    return _sort_eigs(ev)


def power_norm_growth(T: TruncatedOperator, n_max: int) -> np.ndarray:
    """``||M^n||_2^(1/n)`` for n = 1..n_max, renormalising at each step."""
    M = T.M if isinstance(T, TruncatedOperator) else np.asarray(T, dtype=complex)
    P = np.eye(M.shape[0], dtype=complex)
    logs = 0.0
    out = np.empty(int(n_max))
    for n in range(1, int(n_max) + 1):
        P = P @ M
        c = np.linalg.norm(P, 2)
        if c == 0.0:
            out[n - 1:] = 0.0
            break
        logs += np.log(c)
        P /= c
        out[n - 1] = np.exp(logs / n)
    return out


def spectral_radius_estimates(T: TruncatedOperator, n_max: int = 50) -> dict:
    """Largest eigenvalue modulus and power-norm growth, reported side by side."""
    ev = eigenvalues(T)
    growth = power_norm_growth(T, n_max)
    return {"eig_max_modulus": float(np.max(np.abs(ev))), "power_norm_growth": float(growth[-1]), "n_max": int(n_max)}
