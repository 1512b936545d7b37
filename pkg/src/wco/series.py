"""Truncated multivariate power series.

Coefficients are stored densely in graded lexicographic order: by total
degree, then lexicographically descending in the exponent tuple (so
``z1**2`` precedes ``z1*z2`` precedes ``z2**2``).  Every operation truncates
at total degree ``D``.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import combinations
from math import comb, lgamma

import numpy as np

from .errors import DomainError

RECIPROCAL_TOL = 1e-14


@lru_cache(maxsize=None)
def multi_index_array(N: int, D: int) -> np.ndarray:
    """All exponents of total degree <= D as an ``(n, N)`` int array, graded-lex ordered."""
    if N < 1 or D < 0:
        raise DomainError("need N >= 1 and D >= 0")
    rows = []
    for deg in range(D + 1):
        # stars and bars, then sort descending lexicographically
        level = []
        for bars in combinations(range(deg + N - 1), N - 1):
            prev = -1
            exps = []
            for b in bars:
                exps.append(b - prev - 1)
                prev = b
            exps.append(deg + N - 2 - prev)
            level.append(tuple(exps))
        level.sort(reverse=True)
        rows.extend(level)
    arr = np.array(rows, dtype=np.int64).reshape(-1, N)
    arr.setflags(write=False)
    return arr


def enumerate_multiindices(N: int, D: int) -> list[tuple[int, ...]]:
    return [tuple(int(x) for x in row) for row in multi_index_array(N, D)]


def n_terms(N: int, D: int) -> int:
    return comb(N + D, N)


@lru_cache(maxsize=None)
def degrees(N: int, D: int) -> np.ndarray:
    deg = multi_index_array(N, D).sum(axis=1)
    deg.setflags(write=False)
    return deg


@lru_cache(maxsize=None)
def _keys(N: int, D: int):
    base = (D + 1) ** np.arange(N, dtype=np.int64)
    keys = multi_index_array(N, D) @ base
    order = np.argsort(keys)
    return base, keys[order], order


def rank_of(N: int, D: int, exps) -> np.ndarray:
    """Positions of exponent rows ``exps`` in the graded-lex order."""
    base, sorted_keys, order = _keys(N, D)
    k = np.asarray(exps, dtype=np.int64) @ base
    pos = np.searchsorted(sorted_keys, k)
    return order[pos]


@lru_cache(maxsize=None)
def product_table(N: int, D: int):
    """Index triples (left, right, target) for the truncated Cauchy product.

    Sorted by target degree; ``bounds[s]:bounds[s+1]`` selects pairs landing
    in degree ``s``.
    """
    alpha = multi_index_array(N, D)
    deg = degrees(N, D)
    left, right, target = [], [], []
    for i in range(alpha.shape[0]):
        js = np.nonzero(deg <= D - deg[i])[0]
        left.append(np.full(js.size, i, dtype=np.int64))
        right.append(js)
        target.append(rank_of(N, D, alpha[i] + alpha[js]))
    left = np.concatenate(left)
    right = np.concatenate(right)
    target = np.concatenate(target)
    order = np.argsort(deg[target], kind="stable")
    left, right, target = left[order], right[order], target[order]
    bounds = np.searchsorted(deg[target], np.arange(D + 2))
    for a in (left, right, target, bounds):
        a.setflags(write=False)
    return left, right, target, bounds


def _bincount_complex(idx, vals, size):
    return np.bincount(idx, vals.real, size) + 1j * np.bincount(idx, vals.imag, size)


class TruncatedSeries:
    """Power series in ``N`` variables truncated at total degree ``D``."""

    __slots__ = ("N", "D", "coeffs")

    def __init__(self, N: int, D: int, coeffs=None):
        self.N = int(N)
        self.D = int(D)
        size = n_terms(self.N, self.D)
        if coeffs is None:
            c = np.zeros(size, dtype=complex)
        else:
            c = np.array(coeffs, dtype=complex).reshape(-1)
            if c.size != size:
                raise DomainError(f"expected {size} coefficients for N={N}, D={D}, got {c.size}")
        c.setflags(write=False)
        self.coeffs = c

    # construction -------------------------------------------------------
    @classmethod
    def constant(cls, N, D, value=1.0):
        c = np.zeros(n_terms(N, D), dtype=complex)
        c[0] = value
        return cls(N, D, c)

    @classmethod
    def variable(cls, N, D, j):
        if D < 1:
            raise DomainError("a variable needs D >= 1")
        c = np.zeros(n_terms(N, D), dtype=complex)
        e = np.zeros(N, dtype=np.int64)
        e[j] = 1
        c[rank_of(N, D, e[None, :])[0]] = 1.0
        return cls(N, D, c)

    @classmethod
    def linear(cls, N, D, weights, const=0.0):
        """``const + sum_j weights[j] z_j``."""
        c = np.zeros(n_terms(N, D), dtype=complex)
        c[0] = const
        if D >= 1:
            c[1 : N + 1] = np.asarray(weights, dtype=complex)
        return cls(N, D, c)

    @classmethod
    def from_terms(cls, N, D, terms):
        """Build from ``{exponent tuple: coefficient}``; terms above degree D are dropped."""
        c = np.zeros(n_terms(N, D), dtype=complex)
        for exps, val in dict(terms).items():
            exps = tuple(int(e) for e in np.atleast_1d(exps))
            if len(exps) != N or min(exps) < 0:
                raise DomainError(f"bad exponent {exps} for N={N}")
            if sum(exps) <= D:
                c[rank_of(N, D, [exps])[0]] += val
        return cls(N, D, c)

    def terms(self, tol=0.0) -> dict:
        alpha = multi_index_array(self.N, self.D)
        return {tuple(int(x) for x in alpha[i]): complex(v) for i, v in enumerate(self.coeffs) if abs(v) > tol}

    # inspection ---------------------------------------------------------
    def __repr__(self):
        return f"TruncatedSeries(N={self.N}, D={self.D}, nnz={np.count_nonzero(self.coeffs)})"

    def coefficient(self, exps) -> complex:
        exps = np.asarray(exps, dtype=np.int64).reshape(1, self.N)
        if exps.sum() > self.D:
            return 0j
        return complex(self.coeffs[rank_of(self.N, self.D, exps)[0]])

    def degree(self, tol=0.0) -> int:
        nz = np.nonzero(np.abs(self.coeffs) > tol)[0]
        return int(degrees(self.N, self.D)[nz].max()) if nz.size else 0

    def homogeneous_part(self, s: int) -> "TruncatedSeries":
        mask = degrees(self.N, self.D) == s
        return TruncatedSeries(self.N, self.D, np.where(mask, self.coeffs, 0))

    def truncate(self, D: int) -> "TruncatedSeries":
        """Restrict (D <= self.D) or zero-pad (D > self.D) to a new degree."""
        if D <= self.D:
            return TruncatedSeries(self.N, D, self.coeffs[: n_terms(self.N, D)])
        c = np.zeros(n_terms(self.N, D), dtype=complex)
        c[: self.coeffs.size] = self.coeffs
        return TruncatedSeries(self.N, D, c)

    def __call__(self, z):
        return evaluate(self, z)

    # arithmetic ---------------------------------------------------------
    def _check(self, other):
        if not isinstance(other, TruncatedSeries):
            raise TypeError("expected a TruncatedSeries")
        if other.N != self.N or other.D != self.D:
            raise DomainError(f"series mismatch: (N={self.N}, D={self.D}) vs (N={other.N}, D={other.D})")

    def __add__(self, other):
        if isinstance(other, TruncatedSeries):
            self._check(other)
            return TruncatedSeries(self.N, self.D, self.coeffs + other.coeffs)
        c = self.coeffs.copy()
        c[0] += other
        return TruncatedSeries(self.N, self.D, c)

    __radd__ = __add__

    def __neg__(self):
        return TruncatedSeries(self.N, self.D, -self.coeffs)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, TruncatedSeries):
            return mul(self, other)
        return scale(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, TruncatedSeries):
            return mul(self, reciprocal(other))
        return scale(self, 1.0 / other)

    def __pow__(self, p):
        return binomial_power(self, p)

    def reciprocal(self):
        return reciprocal(self)


def add(f: TruncatedSeries, g: TruncatedSeries) -> TruncatedSeries:
    return f + g


def scale(f: TruncatedSeries, c) -> TruncatedSeries:
    return TruncatedSeries(f.N, f.D, f.coeffs * complex(c))


def mul(f: TruncatedSeries, g: TruncatedSeries) -> TruncatedSeries:
    """Cauchy product truncated at total degree D."""
    f._check(g)
    N, D = f.N, f.D
    if N == 1:
        return TruncatedSeries(1, D, np.convolve(f.coeffs, g.coeffs)[: D + 1])
    left, right, target, _ = product_table(N, D)
    vals = f.coeffs[left] * g.coeffs[right]
    return TruncatedSeries(N, D, _bincount_complex(target, vals, n_terms(N, D)))


def _degree_recurrence(f: TruncatedSeries, p: complex, g0: complex) -> np.ndarray:
    """Coefficients of ``g = f**p`` from ``f * E(g) = p * E(f) * g``.

    ``E`` is the Euler (degree) operator; at degree s this reads
    ``s f0 g_s = sum_{i>=1} (p i - (s - i)) f_i g_{s-i}``.
    """
    N, D = f.N, f.D
    f0 = f.coeffs[0]
    g = np.zeros(n_terms(N, D), dtype=complex)
    g[0] = g0
    if N == 1:
        fc = f.coeffs
        for s in range(1, D + 1):
            i = np.arange(1, s + 1)
            g[s] = np.sum((p * i - (s - i)) * fc[i] * g[s - i]) / (s * f0)
        return g
    left, right, target, bounds = product_table(N, D)
    deg = degrees(N, D)
    size = g.size
    for s in range(1, D + 1):
        sl = slice(bounds[s], bounds[s + 1])
        lft, rgt, tgt = left[sl], right[sl], target[sl]
        dl = deg[lft]
        keep = dl >= 1
        lft, rgt, tgt, dl = lft[keep], rgt[keep], tgt[keep], dl[keep]
        vals = (p * dl - (s - dl)) * f.coeffs[lft] * g[rgt]
        acc = _bincount_complex(tgt, vals, size)
        level = deg == s
        g[level] = acc[level] / (s * f0)
    return g


def reciprocal(f: TruncatedSeries) -> TruncatedSeries:
    """``1 / f`` by recursive division; needs ``|f(0)| > 1e-14``."""
    f0 = f.coeffs[0]
    if abs(f0) <= RECIPROCAL_TOL:
        raise DomainError("reciprocal of a series with vanishing constant term")
    return TruncatedSeries(f.N, f.D, _degree_recurrence(f, -1.0, 1.0 / f0))


def binomial_power(f: TruncatedSeries, p) -> TruncatedSeries:
    """Principal branch of ``f**p``; requires ``Re f(0) > 0``."""
    f0 = complex(f.coeffs[0])
    if not f0.real > 0.0:
        raise DomainError("binomial_power needs a constant term with positive real part")
    p = complex(p) if np.iscomplexobj(p) else float(p)
    return TruncatedSeries(f.N, f.D, _degree_recurrence(f, p, f0**p))


def evaluate(f: TruncatedSeries, z) -> np.ndarray:
    """Evaluate the truncated polynomial at points ``z`` of shape ``(..., N)``."""
    z = np.asarray(z, dtype=complex)
    if z.ndim == 0:
        z = z.reshape(1)
    if z.shape[-1] != f.N:
        raise DomainError(f"points of dimension {z.shape[-1]} for a series in {f.N} variables")
    lead = z.shape[:-1]
    zf = z.reshape(-1, f.N)
    powers = zf[:, :, None] ** np.arange(f.D + 1)[None, None, :]
    alpha = multi_index_array(f.N, f.D)
    mono = np.ones((zf.shape[0], alpha.shape[0]), dtype=complex)
    for j in range(f.N):
        mono *= powers[:, j, alpha[:, j]]
    out = mono @ f.coeffs
    return out.reshape(lead) if lead else out[0]


def _linear_parts(phi, D):
    """Numerator components and reciprocal denominator of an automorphism as series."""
    N = phi.N
    nums = [TruncatedSeries.linear(N, D, phi.A[j], phi.b[j]) for j in range(N)]
    den = TruncatedSeries.linear(N, D, phi.c, phi.d)
    return nums, den


def compose_monomial_with_automorphism(alpha, phi, D: int) -> TruncatedSeries:
    """Series of ``z**alpha o phi`` as ``prod_j (A_j z + b_j)**alpha_j * (c z + d)**(-|alpha|)``."""
    alpha = tuple(int(a) for a in alpha)
    N = phi.N
    if len(alpha) != N:
        raise DomainError("multi-index length differs from the automorphism dimension")
    nums, den = _linear_parts(phi, D)
    if abs(den.coeffs[0]) <= RECIPROCAL_TOL:
        raise DomainError("automorphism denominator vanishes at 0")
    out = TruncatedSeries.constant(N, D)
    for j, a in enumerate(alpha):
        for _ in range(a):
            out = mul(out, nums[j])
    k = sum(alpha)
    if k:
        inv = reciprocal(den)
        for _ in range(k):
            out = mul(out, inv)
    return out


def component_series(phi, D: int) -> list[TruncatedSeries]:
    """Series of the coordinate functions ``phi_j``."""
    nums, den = _linear_parts(phi, D)
    inv = reciprocal(den)
    return [mul(n, inv) for n in nums]


def compose_all_monomials(phi, D: int, max_degree: int | None = None) -> list[TruncatedSeries]:
    """``z**alpha o phi`` for every alpha of degree <= max_degree (default D), in graded-lex order.

    Each entry is built from an earlier one times a single component, so the
    whole table costs one product per monomial.
    """
    N = phi.N
    comps = component_series(phi, D)
    alpha = multi_index_array(N, D)
    top = D if max_degree is None else min(D, int(max_degree))
    out = [TruncatedSeries.constant(N, D)]
    for i in range(1, n_terms(N, top)):
        j = int(np.nonzero(alpha[i])[0][0])
        parent = alpha[i].copy()
        parent[j] -= 1
        out.append(mul(out[int(rank_of(N, D, parent[None, :])[0])], comps[j]))
    return out


def compose(f: TruncatedSeries, phi) -> TruncatedSeries:
    """Series of ``f o phi`` (terms of f above degree D are not seen)."""
    table = compose_all_monomials(phi, f.D, max_degree=f.degree())
    c = np.zeros(f.coeffs.size, dtype=complex)
    for i, t in enumerate(table):
        if f.coeffs[i] != 0:
            c += f.coeffs[i] * t.coeffs
    return TruncatedSeries(f.N, f.D, c)


def kernel_series(w, twoK: float, D: int) -> TruncatedSeries:
    """``(1 - <z, w>)**(-2K)`` expanded as ``sum_k (2K)_k / k! <z, w>**k``.

    Coefficient of ``z**beta`` is ``(2K)_{|beta|} / beta! * conj(w)**beta``.
    """
    w = np.atleast_1d(np.asarray(w, dtype=complex))
    N = w.size
    if np.sum(np.abs(w) ** 2) >= 1.0:
        raise DomainError("kernel centre must lie in the open ball")
    alpha = multi_index_array(N, D)
    deg = degrees(N, D)
    log_rising = np.array([lgamma(twoK + k) - lgamma(twoK) for k in range(D + 1)])
    log_fact = np.array([lgamma(k + 1) for k in range(D + 1)])
    log_coef = log_rising[deg] - log_fact[alpha].sum(axis=1)
    wc = np.conj(w)
    mono = np.ones(alpha.shape[0], dtype=complex)
    for j in range(N):
        mono *= wc[j] ** alpha[:, j]
    return TruncatedSeries(N, D, np.exp(log_coef) * mono)
