"""Explicit eigenvectors and approximate eigenvectors of weighted composition operators.

* ``forward_eigenfunction``: a two-sided orbit sum ``h = sum_k lam^-k psi_(k) (g o phi_k)``
  with ``g = (1 - z1^2)^p``, an eigenfunction of ``C`` for hyperbolic ``phi``.
* ``adjoint_eigenvector``: a weighted sum of normalised kernels along the orbit of 0,
  an eigenvector of ``C^*``.
* ``parabolic_approx_eigenvector``: a finite kernel sum along a well separated orbit
  giving approximate eigenvectors of ``C^*`` on the spectral circle.
* ``circular_intertwiner``: a bounded, zero-free ``F`` with ``F o phi = e^{i theta} F``.

Kernel combinations are evaluated in closed form through their Gram matrix, with
points that approach the sphere tracked in Siegel coordinates so that
``1 - |z|^2`` and ``1 - <z, w>`` keep full relative precision.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import geometry
from .automorphism import Automorphism, Kind, cayley_matrix, classify, separated_iteration_start, unitary_to_e1
from .errors import DomainError, SearchError, UnsupportedCase
from .operator import build_matrix
from .series import TruncatedSeries, binomial_power, compose, mul, reciprocal
from .space import SpaceParams, norm, orthonormal_coefficients
from .symbol import Symbol, require_invertible

FIXED_POINT_TOL = 1e-8
P_MARGIN = 1.1
P_CAP = 20.0
DEGENERATE_NORM = 1e-8
TAIL_COEFF_TOL = 1e-3


@dataclass
class EigenWitness:
    """An (approximate) eigenvector together with its measured residual.

    ``residual`` is ``||(T - lam) h|| / ||h||`` where T is C for forward witnesses
    and ``C^*`` otherwise.  ``history[i]`` is the same ratio with ``i + 1`` terms.
    """

    kind: str
    lam: complex
    residual: float
    norm: float
    terms_used: int
    history: np.ndarray = field(repr=False)
    vector: TruncatedSeries | None = field(default=None, repr=False)
    points: np.ndarray | None = field(default=None, repr=False)
    coefficients: np.ndarray | None = field(default=None, repr=False)
    floor: float | None = None
    details: dict = field(default_factory=dict)
    diagnostics: list = field(default_factory=list)

    @property
    def monotone_until_floor(self) -> bool:
        return residuals_monotone_until_floor(self.history)

    def to_dict(self) -> dict:
        def c(v):
            return [float(np.real(v)), float(np.imag(v))]

        out = {
            "kind": self.kind,
            "lambda": c(self.lam),
            "residual": float(self.residual),
            "norm": float(self.norm),
            "terms_used": int(self.terms_used),
            "floor": None if self.floor is None else float(self.floor),
            "history": [float(x) for x in self.history],
            "monotone_until_floor": bool(self.monotone_until_floor),
            "details": self.details,
            "diagnostics": list(self.diagnostics),
        }
        if self.coefficients is not None:
            out["coefficients"] = [c(v) for v in self.coefficients]
        if self.points is not None:
            out["points"] = [[c(x) for x in p] for p in self.points]
        return out


def residuals_monotone_until_floor(history, floor_factor: float = 2.0) -> bool:
    """Non-increasing up to the first entry within ``floor_factor`` of the minimum."""
    h = np.asarray(history, dtype=float)
    if h.size < 2:
        return True
    floor = float(np.min(h))
    stop = int(np.argmax(h <= floor_factor * floor))
    return bool(np.all(np.diff(h[: stop + 1]) <= 0.0))


# -- Siegel-coordinate orbits ------------------------------------------------


class _Frame:
    """Ball-to-Siegel chart sending a boundary point ``e`` to infinity."""

    def __init__(self, e):
        N = e.size
        V = unitary_to_e1(e)
        W = np.eye(N + 1, dtype=complex)
        W[:N, :N] = V
        self.N = N
        self.F = cayley_matrix(N) @ W
        self.Finv = np.linalg.inv(self.F)

    def conjugate(self, phi: Automorphism) -> np.ndarray:
        S = self.F @ phi.matrix @ self.Finv
        return S / S[-1, -1]

    def to_siegel(self, z):
        v = self.F @ np.append(z, 1.0)
        return v[:-1] / v[-1]

    def to_ball(self, w):
        v = self.Finv @ np.append(w, 1.0)
        return v[:-1] / v[-1]


def _siegel_orbit(frame: _Frame, phi: Automorphism, z0, steps: int):
    """Points ``w_k`` (Siegel) and ``z_k`` (ball) of ``phi_k(z0)``, k = 0..steps."""
    S = frame.conjugate(phi)
    w = np.empty((steps + 1, frame.N), dtype=complex)
    w[0] = frame.to_siegel(z0)
    for k in range(steps):
        v = S @ np.append(w[k], 1.0)
        w[k + 1] = v[:-1] / v[-1]
    z = np.array([frame.to_ball(x) for x in w])
    return w, z


def _log_om(w):
    # log(1 - |z|^2) = log(4 height) - log|w1 + i|^2
    return np.log(4.0 * geometry.siegel_height(w)) - 2.0 * np.log(np.abs(w[..., 0] + 1j))


def _log_one_minus_inner_siegel(wj, wi):
    # log(1 - <z_j, z_i>) for points charted in the same frame
    val = 4.0 * geometry.siegel_form(wj, wi) / ((wj[..., 0] + 1j) * np.conj(wi[..., 0] + 1j))
    return np.log(val)


@dataclass
class KernelPoints:
    """Orbit points with per-point chart data for accurate Gram matrices."""

    z: np.ndarray
    w: np.ndarray
    frame_id: np.ndarray
    log_om: np.ndarray

    def __len__(self):
        return self.z.shape[0]


def gram_matrix(pts: KernelPoints, K: float) -> np.ndarray:
    """``G[i, j] = <g_i, g_j>`` for normalised kernels ``g_i = K_{z_i} / ||K_{z_i}||``.

    ``<K_zi, K_zj> = (1 - <z_j, z_i>)^(-2K)``; pairs charted in the same frame use the
    Siegel form, mixed pairs the ball inner product.
    """
    n = len(pts)
    same = pts.frame_id[:, None] == pts.frame_id[None, :]
    wi = pts.w[:, None, :]
    wj = pts.w[None, :, :]
    Ls = _log_one_minus_inner_siegel(np.broadcast_to(wj, (n, n, pts.w.shape[1])), np.broadcast_to(wi, (n, n, pts.w.shape[1])))
    L = Ls
    if not np.all(same):
        mixed = ~same
        ii, jj = np.nonzero(mixed)
        L = Ls.copy()
        L[ii, jj] = np.log(1.0 - geometry.inner(pts.z[jj], pts.z[ii]))
    G = np.exp(K * (pts.log_om[:, None] + pts.log_om[None, :]) - 2.0 * K * L)
    np.fill_diagonal(G, 1.0)
    return G


def _quad(G, x):
    return float(np.real(x @ G @ np.conj(x)))


def _u_sequence(psi, pts: KernelPoints, K: float):
    # u_k = conj(psi(z_k)) ((1 - |z_k|^2) / (1 - |z_{k+1}|^2))^K
    return np.conj(psi(pts.z[:-1])) * np.exp(K * (pts.log_om[:-1] - pts.log_om[1:]))


# -- adjoint eigenvector -------------------------------------------------------


def _hyperbolic_data(psi, phi, sp):
    if not (psi.N == phi.N == sp.N):
        raise DomainError("symbol, automorphism and space must share N")
    rep = classify(phi)
    if rep.kind is not Kind.HYPERBOLIC:
        raise UnsupportedCase(f"needs a hyperbolic automorphism, got {rep.kind.value}")
    a, b = rep.denjoy_wolff, rep.repelling
    Ra = abs(complex(psi(a))) * rep.rho**sp.K
    Rb = abs(complex(psi(b))) * rep.rho ** (-sp.K)
    return rep, a, b, Ra, Rb


def _check_open_interval(lam, lo, hi, what):
    r = abs(complex(lam))
    if not lo < hi:
        raise DomainError(f"the {what} construction needs an annulus ({lo:.6g}, {hi:.6g}) that is empty here; the other witness applies")
    if not (lo * (1 + 1e-12) < r < hi * (1 - 1e-12)):
        raise DomainError(f"|lambda|={r:.6g} is not strictly inside ({lo:.6g}, {hi:.6g}) required by the {what} construction")


def hyperbolic_kernel_orbit(phi: Automorphism, J: int, rep=None) -> KernelPoints:
    """``z_k = phi_k(0)`` for ``k = -J .. J+1``; positive k charted at the attracting point, negative at the repelling one."""
    rep = rep or classify(phi)
    N = phi.N
    fa, fb = _Frame(rep.denjoy_wolff), _Frame(rep.repelling)
    zero = np.zeros(N, dtype=complex)
    wp, zp = _siegel_orbit(fa, phi, zero, J + 1)
    wn, zn = _siegel_orbit(fb, phi.inverse(), zero, J)
    w = np.concatenate([wn[:0:-1], wp])
    z = np.concatenate([zn[:0:-1], zp])
    fid = np.concatenate([np.ones(J, dtype=int), np.zeros(J + 2, dtype=int)])
    return KernelPoints(z, w, fid, _log_om(w))


def adjoint_eigenvector(psi: Symbol, phi: Automorphism, sp: SpaceParams, lam, J_terms: int) -> EigenWitness:
    """Eigenvector ``h = g_0 + sum_j (a_j g_j + b_j g_-j)`` of ``C^*`` for ``lam`` inside the annulus.

    Needs ``|psi(a)| rho^K < |lam| < |psi(b)| rho^-K``.  The action of ``C^*`` on
    kernels is exact, so the residual is the exact norm of the two boundary
    terms left over by truncating the sum at ``J_terms``.
    """
    require_invertible(psi)
    lam = complex(lam)
    rep, a, b, Ra, Rb = _hyperbolic_data(psi, phi, sp)
    _check_open_interval(lam, Ra, Rb, "adjoint")
    J = int(J_terms)
    if J < 1:
        raise DomainError("J_terms must be >= 1")
    K = sp.K
    pts = hyperbolic_kernel_orbit(phi, J, rep)
    u = _u_sequence(psi, pts, K)  # u[i] is u_k for k = i - J, k = -J .. J
    c = np.empty(2 * J + 1, dtype=complex)
    c[J] = 1.0
    for j in range(1, J + 1):
        c[J + j] = c[J + j - 1] * u[J + j - 1] / lam
        c[J - j] = c[J - j + 1] * lam / u[J - j]
    G = gram_matrix(pts, K)
    history = np.empty(J)
    for t in range(1, J + 1):
        sl = slice(J - t, J + t + 2)
        ct = c[J - t : J + t + 1]
        ut = u[J - t : J + t + 1]
        d = np.zeros(2 * t + 2, dtype=complex)
        d[1:] += ct * ut
        d[:-1] -= lam * ct
        Gt = G[sl, sl]
        history[t - 1] = np.sqrt(max(_quad(Gt, d), 0.0) / _quad(Gt[:-1, :-1], ct))
    hnorm = np.sqrt(_quad(G[:-1, :-1], c))
    diagnostics = []
    if max(abs(c[0]), abs(c[-1])) > TAIL_COEFF_TOL:
        diagnostics.append(f"tail coefficients |a_J|={abs(c[-1]):.3g}, |b_J|={abs(c[0]):.3g} exceed {TAIL_COEFF_TOL}; increase J_terms")
    k = np.arange(-J, J + 2)
    return EigenWitness(
        kind="adjoint",
        lam=lam,
        residual=float(history[-1]),
        norm=float(hnorm),
        terms_used=J,
        history=history,
        points=pts.z,
        coefficients=c,
        floor=float(np.min(history)),
        details={
            "regime": [Ra, Rb],
            "rho": rep.rho,
            "u_first": [float(np.real(u[J])), float(np.imag(u[J]))],
            "u_limits_modulus": [float(abs(u[-1])), float(abs(u[0]))],
            "k_range": [int(k[0]), int(k[-1])],
            # ball coordinates of far orbit points round onto the sphere; the chart keeps them inside
            "max_log_one_minus_norm_sq": float(np.max(pts.log_om)),
            "min_log_one_minus_norm_sq": float(np.min(pts.log_om)),
        },
        diagnostics=diagnostics,
    )


# -- forward eigenfunction -----------------------------------------------------


def choose_p(psi_a: float, psi_b: float, rho: float, lam, K: float, margin: float = P_MARGIN, cap: float = P_CAP, integer: bool = True) -> float:
    """Exponent for ``g = (1 - z1^2)^p``.

    With ``R_lo = |psi(-e1)| rho^-K < R1 < |lam| < R2 < R_hi = |psi(e1)| rho^K``
    (R1, R2 the geometric means), ``p`` must satisfy ``|psi(e1)| rho^-p < R1`` and
    ``|psi(-e1)| rho^p > R2``.  The larger lower bound is scaled by ``margin`` and,
    by default, rounded up to an integer so that ``g`` is a polynomial.
    """
    r = abs(complex(lam))
    R1 = np.sqrt(psi_b * rho ** (-K) * r)
    R2 = np.sqrt(r * psi_a * rho**K)
    lr = np.log(rho)
    p_min = max(np.log(psi_a / R1) / lr, np.log(R2 / psi_b) / lr, 0.0)
    p = margin * p_min
    if integer:
        p = float(max(1, int(np.ceil(p - 1e-12))))
    if p > cap:
        raise DomainError(f"required exponent p={p:.3g} exceeds the cap {cap}")
    return float(p)


def canonical_parameter(phi: Automorphism) -> float:
    """``s`` when the first coordinate of ``phi`` is ``(z1 + s) / (1 + s z1)``, else ``DomainError``."""
    N = phi.N
    M = phi.matrix / phi.matrix[N, N]
    s = float(M[0, N].real)
    top = np.zeros(N + 1, dtype=complex)
    top[0], top[N] = 1.0, s
    if not 0.0 < s < 1.0 or np.max(np.abs(M[0] - top)) > 1e-10 or np.max(np.abs(M[N] - top[::-1])) > 1e-10:
        raise DomainError("first coordinate of phi is not (z1 + s) / (1 + s z1) with 0 < s < 1; conjugate to canonical form first")
    return s


def _g_orbit_term(N: int, D: int, s: float, k: int, p: float) -> TruncatedSeries:
    # g o phi_k = (1 - s_k^2)^p (1 - z1^2)^p (1 + s_k z1)^(-2p), s_k = tanh(k artanh s)
    x = k * np.arctanh(s)
    sk = np.tanh(x)
    scale = np.cosh(x) ** (-2.0 * p)
    z1 = TruncatedSeries.variable(N, D, 0)
    g = binomial_power(1.0 - mul(z1, z1), p)
    w = np.zeros(N)
    w[0] = sk
    den = binomial_power(TruncatedSeries.linear(N, D, w, 1.0), -2.0 * p)
    return mul(g, den) * scale


def forward_eigenfunction(psi: Symbol, phi: Automorphism, sp: SpaceParams, lam, K_terms: int, D: int, p: float | None = None) -> EigenWitness:
    """Eigenfunction ``h = sum_{|k| <= K_terms} t_k``, ``t_k = lam^-k psi_(k) (g o phi_k)``, of ``C``.

    ``phi`` must have first coordinate ``(z1 + s) / (1 + s z1)`` (fixed points
    ``+-e1``, attracting at ``e1``).  Each ``t_k`` is rational and analytic across
    the sphere, and ``C t_k = lam t_{k+1}`` exactly, so ``C h - lam h`` is
    ``lam (t_{K+1} - t_{-K})``.  ``residual`` is the norm of its degree-D
    truncation over the norm of the truncated ``h``.

    ``details["section_residual"]`` instead applies the degree-D compression of C
    to the truncated h; it plateaus at the mass of h above degree D, which decays
    only algebraically because eigenfunctions behave like ``(1 -+ z1)^beta``
    at the fixed points.
    """
    require_invertible(psi)
    lam = complex(lam)
    s = canonical_parameter(phi)
    rep, a, b, Ra, Rb = _hyperbolic_data(psi, phi, sp)
    _check_open_interval(lam, Rb, Ra, "forward")
    K, N, D, T = sp.K, sp.N, int(D), int(K_terms)
    if T < 1:
        raise DomainError("K_terms must be >= 1")
    rho = (1.0 + s) / (1.0 - s)
    pa, pb = abs(complex(psi(a))), abs(complex(psi(b)))
    if p is None:
        p = choose_p(pa, pb, rho, lam, K)
    psi_s = psi.to_series(D)

    terms = {0: _g_orbit_term(N, D, s, 0, p)}
    cocycle_s = TruncatedSeries.constant(N, D)
    for k in range(1, T + 2):
        cocycle_s = mul(cocycle_s, psi_s if k == 1 else compose(psi_s, phi.iterate(k - 1)))
        terms[k] = mul(cocycle_s, _g_orbit_term(N, D, s, k, p)) * lam ** (-k)
    cocycle_s = TruncatedSeries.constant(N, D)
    for k in range(1, T + 1):
        cocycle_s = mul(cocycle_s, reciprocal(compose(psi_s, phi.iterate(-k))))
        terms[-k] = mul(cocycle_s, _g_orbit_term(N, D, s, -k, p)) * lam**k

    x = {k: orthonormal_coefficients(sp, t) for k, t in terms.items()}
    h = x[0].copy()
    history = np.empty(T)
    for t in range(1, T + 1):
        h += x[t] + x[-t]
        history[t - 1] = abs(lam) * np.linalg.norm(x[t + 1] - x[-t]) / np.linalg.norm(h)
    M = build_matrix(psi, phi, sp, D).M
    section = float(np.linalg.norm(M @ h - lam * h) / np.linalg.norm(h))
    hs = sum((terms[k] for k in range(-T, T + 1)), TruncatedSeries(N, D))
    hnorm = norm(sp, hs)
    diagnostics = []
    if hnorm < DEGENERATE_NORM:
        diagnostics.append(f"degenerate witness: ||h|| = {hnorm:.3g}")
    term_norms = [float(np.linalg.norm(x[k])) for k in range(-T, T + 2)]
    return EigenWitness(
        kind="forward",
        lam=lam,
        residual=float(history[-1]),
        norm=float(hnorm),
        terms_used=T,
        history=history,
        vector=hs,
        floor=float(np.min(history)),
        details={
            "p": p,
            "s": s,
            "regime": [Rb, Ra],
            "rho": rho,
            "D": D,
            "section_residual": section,
            "term_norms": term_norms,
            "h0": [float(hs.coeffs[0].real), float(hs.coeffs[0].imag)],
        },
        diagnostics=diagnostics,
    )


# -- parabolic approximate eigenvectors ----------------------------------------


def separation_delta(m: int, K: float, safety: float = 0.5) -> float:
    """``delta`` with ``(1 - delta^2)^K = safety / (2 e^4 m)``."""
    gap = (safety / (2.0 * np.e**4 * m)) ** (1.0 / K)
    return float(np.sqrt(1.0 - gap))


def parabolic_bound(psi_e1: float, m: int) -> float:
    """``|psi(e1)|^2 e^2 (e^2 + 1) / m``, the bound on the squared residual ratio."""
    return float(psi_e1**2 * np.e**2 * (np.e**2 + 1.0) / m)


def parabolic_approx_eigenvector(psi: Symbol, phi: Automorphism, sp: SpaceParams, lam, m: int, n_budget: int = 1_000_000) -> EigenWitness:
    """Approximate eigenvector ``h_m = sum_{j<m} a_j g_{n0+j}`` of ``C^*`` with ``|lam| = |psi(e1)|``.

    ``a_0 = 1`` and ``a_j = lam^-j prod_{k<j} u_{n0+k}``; the residual ratio squared
    must stay below ``|psi(e1)|^2 e^2 (e^2 + 1) / m``.
    """
    require_invertible(psi)
    lam = complex(lam)
    m = int(m)
    if m < 2:
        raise DomainError("m must be >= 2")
    if not (psi.N == phi.N == sp.N):
        raise DomainError("symbol, automorphism and space must share N")
    rep = classify(phi)
    if rep.kind is not Kind.PARABOLIC:
        raise UnsupportedCase(f"needs a parabolic automorphism, got {rep.kind.value}")
    N, K = sp.N, sp.K
    e = geometry.e1(N)
    if np.max(np.abs(rep.denjoy_wolff - e)) > FIXED_POINT_TOL:
        raise DomainError("parabolic construction needs the fixed point at e1")
    pe = abs(complex(psi(e)))
    if abs(abs(lam) - pe) > 1e-10:
        raise DomainError(f"|lambda| must equal |psi(e1)| = {pe:.12g}")
    delta = separation_delta(m, K)
    z0 = separated_iteration_start(phi, delta, m)
    frame = _Frame(e)
    S = frame.conjugate(phi)

    # walk the orbit until m consecutive |u_n / lam| fall inside (1 - 1/m, 1 + 1/m)
    w = frame.to_siegel(z0)
    chunk = 4096
    run = 0
    n = 0
    ws = [w]
    while True:
        block = [ws[-1]]
        for _ in range(chunk):
            v = S @ np.append(block[-1], 1.0)
            block.append(v[:-1] / v[-1])
        ws.extend(block[1:])
        wa = np.array(ws[n : n + chunk + 1])
        za = np.array([frame.to_ball(x) for x in wa])
        lo = _log_om(wa)
        u = np.conj(psi(za[:-1])) * np.exp(K * (lo[:-1] - lo[1:]))
        ok = np.abs(np.abs(u / lam) - 1.0) < 1.0 / m
        found = None
        for i, flag in enumerate(ok):
            run = run + 1 if flag else 0
            if run == m:
                found = n + i - m + 1
                break
        if found is not None:
            n0 = found
            break
        n += chunk
        if n >= n_budget:
            raise SearchError(f"|u_n / lambda| did not settle within 1/{m} in {n_budget} steps", best={"n": n})
    wsel = np.array(ws[n0 : n0 + m + 1])
    zsel = np.array([frame.to_ball(x) for x in wsel])
    pts = KernelPoints(zsel, wsel, np.zeros(m + 1, dtype=int), _log_om(wsel))
    u = _u_sequence(psi, pts, K)
    a = np.empty(m, dtype=complex)
    a[0] = 1.0
    for j in range(1, m):
        a[j] = a[j - 1] * u[j - 1] / lam
    d = np.zeros(m + 1, dtype=complex)
    d[1:] += a * u
    d[:-1] -= lam * a
    G = gram_matrix(pts, K)
    h2 = _quad(G[:-1, :-1], a)
    r2 = _quad(G, d)
    ratio = np.sqrt(max(r2, 0.0) / h2)
    bound = parabolic_bound(pe, m)
    off = np.abs(G[:-1, :-1] - np.eye(m))
    diagnostics = []
    if not ratio**2 <= bound:
        diagnostics.append(f"residual ratio^2 {ratio**2:.4g} exceeds the bound {bound:.4g}")
    details = {
        "m": m,
        "n0": int(n0),
        "delta": delta,
        "z0": [[float(x.real), float(x.imag)] for x in z0],
        "ratio_sq": float(ratio**2),
        "bound": bound,
        "bound_holds": bool(ratio**2 <= bound),
        "norm_sq": h2,
        "norm_sq_lower": m / (2.0 * np.e**2),
        "max_overlap": float(off.max()) if m > 1 else 0.0,
        "overlap_limit": 1.0 / (2.0 * np.e**4 * m),
        "coeff_range": [float(np.min(np.abs(a))), float(np.max(np.abs(a)))],
    }
    return EigenWitness(
        kind="parabolic",
        lam=lam,
        residual=float(ratio),
        norm=float(np.sqrt(h2)),
        terms_used=m,
        history=np.array([ratio]),
        points=zsel[:-1],
        coefficients=a,
        details=details,
        diagnostics=diagnostics,
    )


# -- circular intertwiner ------------------------------------------------------


@dataclass(frozen=True)
class CircularIntertwiner:
    """``F(z) = tau(z1)^(i c)`` with ``tau(w) = (1 + w) / (1 - w)`` and ``c = theta / log rho``."""

    theta: float
    rho: float

    @property
    def c(self) -> float:
        return self.theta / np.log(self.rho)

    @property
    def modulus_bounds(self) -> tuple[float, float]:
        b = np.exp(abs(self.c) * np.pi / 2)
        return 1.0 / b, b

    def __call__(self, z):
        z = geometry.as_point(z)
        z1 = z[..., 0]
        return np.exp(1j * self.c * np.log((1.0 + z1) / (1.0 - z1)))


def circular_intertwiner(phi: Automorphism, theta: float) -> CircularIntertwiner:
    """Intertwiner for a hyperbolic map whose first coordinate is ``(z1 + s) / (1 + s z1)``."""
    s = canonical_parameter(phi)
    return CircularIntertwiner(float(theta), (1.0 + s) / (1.0 - s))
