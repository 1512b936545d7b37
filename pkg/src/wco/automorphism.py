"""Automorphisms of the unit ball as projective J-unitary matrices.

An automorphism is stored as an ``(N+1, N+1)`` matrix ``M = [[A, b], [c^T, d]]``
acting by ``z -> (A z + b) / (c^T z + d)``.  With ``J = diag(1, ..., 1, -1)``
every representative satisfies ``M^H J M = lam J`` for some ``lam > 0``; the
stored matrix is scaled so that ``lam = 1`` and ``d`` is real positive, which
makes the representative unique.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import geometry
from .errors import AmbiguousClassification, DomainError, SearchError

UNITARY_TOL = 1e-12
J_UNITARY_TOL = 1e-8
HYPERBOLIC_GAP = 1e-3
CLUSTER_TOL = 2e-3
COALESCE_TOL = 1e-8
INTERIOR_TOL = 1e-8


def j_matrix(N: int) -> np.ndarray:
    J = np.eye(N + 1)
    J[N, N] = -1.0
    return J


def _normalize(M: np.ndarray) -> np.ndarray:
    M = np.asarray(M, dtype=complex)
    n = M.shape[0]
    det = np.linalg.det(M)
    if not np.isfinite(det) or abs(det) == 0.0:
        raise DomainError("singular matrix cannot represent an automorphism")
    return _fix_phase(M / abs(det) ** (1.0 / n))


def _fix_phase(M: np.ndarray) -> np.ndarray:
    d = M[-1, -1]
    if abs(d) == 0.0:
        raise DomainError("corner entry vanishes; not a ball automorphism")
    return M * (np.conj(d) / abs(d))


@dataclass(frozen=True, eq=False)
class Automorphism:
    """Element of Aut(B_N) held as a normalized projective matrix."""

    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        M = _normalize(self.matrix)
        M.setflags(write=False)
        object.__setattr__(self, "matrix", M)

    @classmethod
    def _from_unit_product(cls, M) -> "Automorphism":
        # products and J-adjoints of normalized matrices already have |det| = 1;
        # recomputing det would lose everything once the matrix is ill conditioned
        obj = object.__new__(cls)
        M = _fix_phase(np.asarray(M, dtype=complex))
        M.setflags(write=False)
        object.__setattr__(obj, "matrix", M)
        return obj

    @property
    def N(self) -> int:
        return self.matrix.shape[0] - 1

    @property
    def A(self):
        return self.matrix[:-1, :-1]

    @property
    def b(self):
        return self.matrix[:-1, -1]

    @property
    def c(self):
        return self.matrix[-1, :-1]

    @property
    def d(self):
        return self.matrix[-1, -1]

    def __repr__(self):
        return f"Automorphism(N={self.N})"

    def __call__(self, z):
        return self.apply(z)

    def apply(self, z):
        z = geometry.as_point(z, self.N)
        num = z @ self.A.T + self.b
        den = z @ self.c + self.d
        if np.any(np.abs(den) < 1e-300):
            raise DomainError("denominator vanished; point outside the closed ball?")
        return num / den[..., None]

    def denominator(self, z):
        """Affine denominator ``c^T z + d`` of the action."""
        z = geometry.as_point(z, self.N)
        return z @ self.c + self.d

    def compose(self, other: "Automorphism") -> "Automorphism":
        """Return ``self o other`` (apply ``other`` first)."""
        if other.N != self.N:
            raise DomainError("dimension mismatch in compose")
        return Automorphism._from_unit_product(self.matrix @ other.matrix)

    def __matmul__(self, other):
        return self.compose(other)

    def inverse(self) -> "Automorphism":
        J = j_matrix(self.N)
        return Automorphism._from_unit_product(J @ self.matrix.conj().T @ J)

    def iterate(self, k: int) -> "Automorphism":
        """k-th iterate; negative k iterates the inverse, ``k == 0`` is the identity."""
        k = int(k)
        if k == 0:
            return identity(self.N)
        base = self.matrix if k > 0 else self.inverse().matrix
        return Automorphism._from_unit_product(np.linalg.matrix_power(base, abs(k)))

    def jacobian(self, z) -> np.ndarray:
        """Complex Jacobian ``(A - phi(z) c^T) / (c^T z + d)``."""
        z = geometry.as_point(z, self.N)
        den = self.denominator(z)
        w = self.apply(z)
        return (self.A - w[..., :, None] * self.c[None, :]) / den[..., None, None]

    def preimage_of_origin(self) -> np.ndarray:
        return self.inverse().apply(np.zeros(self.N))

    def j_defect(self) -> float:
        J = j_matrix(self.N)
        return float(np.max(np.abs(self.matrix.conj().T @ J @ self.matrix - J)))

    def allclose(self, other: "Automorphism", atol: float = 1e-10) -> bool:
        return other.N == self.N and np.allclose(self.matrix, other.matrix, rtol=0, atol=atol)


def from_matrix(M, tol: float = J_UNITARY_TOL) -> Automorphism:
    """Wrap a raw matrix after checking that it preserves the ball."""
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] < 2:
        raise DomainError("automorphism matrix must be square of size N+1 >= 2")
    phi = Automorphism(M)
    defect = phi.j_defect()
    if defect > tol:
        raise DomainError(f"matrix is not J-unitary up to scale (defect {defect:.3e})")
    return phi


def identity(N: int) -> Automorphism:
    return Automorphism(np.eye(N + 1, dtype=complex))


def _check_unitary(U, n: int) -> np.ndarray:
    if U is None:
        return np.eye(n, dtype=complex)
    U = np.asarray(U, dtype=complex).reshape(n, n) if n else np.zeros((0, 0), complex)
    if n and np.max(np.abs(U.conj().T @ U - np.eye(n))) > UNITARY_TOL:
        raise DomainError("matrix is not unitary to 1e-12")
    return U


def unitary(U) -> Automorphism:
    U = np.atleast_2d(np.asarray(U, dtype=complex))
    N = U.shape[0]
    U = _check_unitary(U, N)
    M = np.eye(N + 1, dtype=complex)
    M[:N, :N] = U
    return Automorphism(M)


def rotation(angles) -> Automorphism:
    """Diagonal unitary ``z_j -> exp(i angles[j]) z_j``."""
    return unitary(np.diag(np.exp(1j * np.asarray(angles, dtype=float))))


def from_involution(a) -> Automorphism:
    """Involution ``phi_a`` exchanging 0 and ``a``.

    ``phi_a(z) = (a - P_a z - sqrt(1 - |a|^2) Q_a z) / (1 - <z, a>)``; for
    ``a = 0`` this is ``z -> -z``.
    """
    a = geometry.as_point(a)
    if a.ndim != 1:
        raise DomainError("from_involution expects a single point")
    if not geometry.in_open_ball(a):
        raise DomainError("involution centre must lie in the open ball")
    N = a.size
    r2 = float(geometry.norm_sq(a))
    sa = np.sqrt(1.0 - r2)
    if r2 == 0.0:
        P = np.zeros((N, N), dtype=complex)
    else:
        P = np.outer(a, a.conj()) / r2
    Q = np.eye(N) - P
    M = np.zeros((N + 1, N + 1), dtype=complex)
    M[:N, :N] = -P - sa * Q
    M[:N, N] = a
    M[N, :N] = -a.conj()
    M[N, N] = 1.0
    return Automorphism(M)


def canonical_hyperbolic(s: float, U=None, N: int | None = None) -> Automorphism:
    """Hyperbolic normal form with fixed points ``+-e1`` and Denjoy-Wolff point ``e1``.

    ``z -> ((z1 + s) / (1 + s z1), U sqrt(1 - s^2) z' / (1 + s z1))``.
    ``N`` is inferred from ``U`` unless given; ``U=None`` means the identity.
    """
    s = float(s)
    if not 0.0 < s < 1.0:
        raise DomainError("canonical hyperbolic parameter s must lie in (0, 1)")
    if N is None:
        N = 1 if U is None else np.atleast_2d(np.asarray(U)).shape[0] + 1
        if U is not None and np.asarray(U).size == 0:
            N = 1
    U = _check_unitary(U, N - 1)
    r = np.sqrt(1.0 - s * s)
    M = np.zeros((N + 1, N + 1), dtype=complex)
    M[0, 0] = 1.0
    M[1:N, 1:N] = r * U
    M[0, N] = s
    M[N, 0] = s
    M[N, N] = 1.0
    return Automorphism(M)


def cayley_matrix(N: int) -> np.ndarray:
    """Projective matrix of the Cayley transform ``i (e1 + z) / (1 - z1)``."""
    C = np.zeros((N + 1, N + 1), dtype=complex)
    C[0, 0] = 1j
    C[0, N] = 1j
    C[1:N, 1:N] = 1j * np.eye(N - 1)
    C[N, 0] = -1.0
    C[N, N] = 1.0
    return C


def heisenberg_matrix(U, a) -> np.ndarray:
    """Siegel-space matrix of ``w -> (w1 + a1 + 2i<U w', a'>, U w' + a')``."""
    a = geometry.as_point(a)
    N = a.size
    U = _check_unitary(U, N - 1)
    S = np.eye(N + 1, dtype=complex)
    S[0, 1:N] = 2j * (a[1:].conj() @ U)
    S[0, N] = a[0]
    S[1:N, 1:N] = U
    S[1:N, N] = a[1:]
    return S


def parabolic_from_siegel(a, U=None) -> Automorphism:
    """Automorphism fixing ``e1`` whose Cayley conjugate is the Heisenberg map (U, a).

    ``a`` must lie on the boundary of the Siegel half space.
    """
    a = geometry.as_point(a)
    if abs(float(geometry.siegel_height(a))) > 1e-10:
        raise DomainError("Heisenberg translation parameter must satisfy Im a1 = |a'|^2")
    C = cayley_matrix(a.size)
    return Automorphism(np.linalg.solve(C, heisenberg_matrix(U, a) @ C))


def parabolic_translation(N: int, t: float = 1.0) -> Automorphism:
    """Cayley conjugate of the real translation ``w -> w + t e1``."""
    a = np.zeros(N, dtype=complex)
    a[0] = t
    return parabolic_from_siegel(a)


def unitary_to_e1(a) -> np.ndarray:
    """A unitary ``V`` with ``V a = e1`` for a unit vector ``a``."""
    a = geometry.as_point(a)
    N = a.size
    a = a / np.sqrt(geometry.norm_sq(a))
    Q, _ = np.linalg.qr(np.column_stack([a, np.eye(N, dtype=complex)]), mode="complete")
    Q = Q[:, :N]
    c = Q[:, 0] @ a.conj()
    c = c / abs(c)
    V = (Q.conj().T) * c
    # Q[:,0] = a / c up to roundoff, so (c Q^H) a = e1
    return V


class Kind(str, Enum):
    ELLIPTIC = "elliptic"
    HYPERBOLIC = "hyperbolic"
    PARABOLIC = "parabolic"


@dataclass
class FixedPointReport:
    kind: Kind
    interior_fixed: np.ndarray | None = None
    boundary_fixed: list = field(default_factory=list)
    denjoy_wolff: np.ndarray | None = None
    rho: float | None = None
    s: float | None = None

    @property
    def repelling(self):
        """The boundary fixed point other than the Denjoy-Wolff point (hyperbolic only)."""
        if self.kind is not Kind.HYPERBOLIC:
            return None
        for p in self.boundary_fixed:
            if np.max(np.abs(p - self.denjoy_wolff)) > COALESCE_TOL:
                return p
        return None

    def to_dict(self) -> dict:
        def pt(p):
            return None if p is None else [[float(x.real), float(x.imag)] for x in p]

        return {
            "kind": self.kind.value,
            "interior_fixed": pt(self.interior_fixed),
            "boundary_fixed": [pt(p) for p in self.boundary_fixed],
            "denjoy_wolff": pt(self.denjoy_wolff),
            "rho": self.rho,
            "s": self.s,
        }


def _spectral_radius(A) -> float:
    return float(np.max(np.abs(np.linalg.eigvals(A))))


def _vector_to_point(v):
    if abs(v[-1]) < 1e-14 * np.max(np.abs(v)):
        return None
    return v[:-1] / v[-1]


def _cluster(values, tol):
    groups = []
    for i, mu in enumerate(values):
        hits = [g for g in groups if np.min(np.abs(values[g] - mu)) < tol]
        merged = [i]
        for g in hits:
            merged.extend(g)
            groups.remove(g)
        groups.append(merged)
    return [sorted(g) for g in groups]


def _null_space(A, rtol=1e-7):
    _, sv, vh = np.linalg.svd(A)
    scale = max(1.0, sv[0])
    mask = sv <= rtol * scale
    return vh[mask].conj().T, sv


def _coalesce(points, tol=COALESCE_TOL):
    out = []
    for p in points:
        if all(np.max(np.abs(p - q)) >= tol for q in out):
            out.append(p)
    return out


def _denjoy_wolff_by_iteration(phi, candidates, steps=2000):
    z = np.zeros(phi.N, dtype=complex)
    for _ in range(steps):
        z = phi.apply(z)
    dists = [np.linalg.norm(z - p) for p in candidates]
    return candidates[int(np.argmin(dists))]


def classify(phi: Automorphism) -> FixedPointReport:
    """Fixed points and elliptic/hyperbolic/parabolic type from the eigenstructure of M."""
    M = phi.matrix
    N = phi.N
    J = j_matrix(N)
    mu, vecs = np.linalg.eig(M)
    logmod = np.log(np.abs(mu))
    spread = float(np.max(logmod) - np.min(logmod))

    if spread > HYPERBOLIC_GAP:
        pts = []
        for idx in (int(np.argmax(logmod)), int(np.argmin(logmod))):
            p = _vector_to_point(vecs[:, idx])
            if p is None or not geometry.on_sphere(p, 1e-6):
                raise AmbiguousClassification(
                    "extremal eigenvector of a hyperbolic matrix is not on the sphere",
                    gaps={"log_modulus_spread": spread},
                )
            pts.append(p / np.sqrt(geometry.norm_sq(p)))
        radii = [_spectral_radius(phi.jacobian(p)) for p in pts]
        attracting = [i for i, r in enumerate(radii) if r < 1.0]
        if len(attracting) == 1 and abs(radii[attracting[0]] - 1.0) > 1e-6:
            ia = attracting[0]
        else:
            ia = 0 if _denjoy_wolff_by_iteration(phi, pts) is pts[0] else 1
        a, b = pts[ia], pts[1 - ia]
        rho = _spectral_radius(phi.jacobian(b))
        return FixedPointReport(
            kind=Kind.HYPERBOLIC,
            boundary_fixed=[a, b],
            denjoy_wolff=a,
            rho=rho,
            s=(rho - 1.0) / (rho + 1.0),
        )

    interior, boundary = [], []
    gaps = {"log_modulus_spread": spread}
    for group in _cluster(mu, CLUSTER_TOL):
        mean = np.mean(mu[group])
        V, sv = _null_space(M - mean * np.eye(N + 1))
        if V.shape[1] == 0:
            gaps["cluster"] = [complex(x) for x in mu[group]]
            gaps["smallest_singular_value"] = float(sv[-1])
            raise AmbiguousClassification(
                "near-degenerate eigenvalues without a numerical eigenvector", gaps=gaps
            )
        G = V.conj().T @ J @ V
        w, E = np.linalg.eigh((G + G.conj().T) / 2)
        for val, e in zip(w, E.T):
            p = _vector_to_point(V @ e)
            if p is None:
                continue
            r = float(np.sqrt(geometry.norm_sq(p)))
            if val < -INTERIOR_TOL and r < 1.0 - INTERIOR_TOL:
                interior.append(p)
            elif abs(val) <= INTERIOR_TOL or abs(r - 1.0) <= 1e-6:
                boundary.append(p / r)

    boundary = _coalesce(boundary)
    if interior:
        return FixedPointReport(kind=Kind.ELLIPTIC, interior_fixed=interior[0], boundary_fixed=boundary)
    if len(boundary) != 1:
        gaps["boundary_fixed_count"] = len(boundary)
        raise AmbiguousClassification(
            "unimodular spectrum without interior fixed point must fix exactly one boundary point",
            gaps=gaps,
        )
    return FixedPointReport(kind=Kind.PARABOLIC, boundary_fixed=boundary, denjoy_wolff=boundary[0], rho=1.0)


def hyperbolic_normal_form(phi: Automorphism, report: FixedPointReport | None = None):
    """Conjugate a hyperbolic automorphism to its canonical form.

    Returns ``(chi, s, U)`` such that ``chi o phi o chi^{-1}`` equals
    ``canonical_hyperbolic(s, U)``; ``chi`` sends the Denjoy-Wolff point to
    ``e1`` and the repelling fixed point to ``-e1``.
    """
    report = report or classify(phi)
    if report.kind is not Kind.HYPERBOLIC:
        raise DomainError(f"hyperbolic_normal_form needs a hyperbolic map, got {report.kind.value}")
    N = phi.N
    V = unitary_to_e1(report.denjoy_wolff)
    chi1 = unitary(V)
    b1 = chi1.apply(report.repelling)
    beta = geometry.cayley(b1)
    h = np.empty(N, dtype=complex)
    h[1:] = -beta[1:]
    # translation by h sends beta to 0 = Phi(-e1); pin h exactly onto the boundary
    h[0] = complex(-beta[0].real, float(geometry.norm_sq(h[1:])))
    C = cayley_matrix(N)
    chi2 = Automorphism(np.linalg.solve(C, heisenberg_matrix(None, h) @ C))
    chi = chi2.compose(chi1)
    canon = chi.compose(phi).compose(chi.inverse()).matrix
    s = float((canon[0, N] / canon[N, N]).real)
    U = np.array(canon[1:N, 1:N]) if N > 1 else np.zeros((0, 0), dtype=complex)
    return chi, s, U


def parabolic_siegel_form(phi: Automorphism, report: FixedPointReport | None = None, tol: float = 1e-8):
    """Heisenberg data ``(U, a)`` of a parabolic map with Denjoy-Wolff point ``e1``.

    ``Phi o phi o Phi^{-1}(w) = (w1 + a1 + 2i<U w', a'>, U w' + a')``.
    """
    report = report or classify(phi)
    if report.kind is not Kind.PARABOLIC:
        raise DomainError(f"parabolic_siegel_form needs a parabolic map, got {report.kind.value}")
    N = phi.N
    if np.max(np.abs(report.denjoy_wolff - geometry.e1(N))) > 1e-6:
        raise DomainError("rotate the Denjoy-Wolff point to e1 before taking the Siegel form")
    C = cayley_matrix(N)
    S = C @ phi.matrix @ np.linalg.inv(C)
    S = S / S[N, N]
    if np.max(np.abs(S[N, :N])) > tol or abs(S[0, 0] - 1.0) > tol:
        raise DomainError("Cayley conjugate is not a Heisenberg translation")
    a = np.array(S[:N, N])
    U = np.array(S[1:N, 1:N]) if N > 1 else np.zeros((0, 0), dtype=complex)
    return U, a


def separated_iteration_start(phi: Automorphism, delta: float, k_max: int, radii=None) -> np.ndarray:
    """Find ``z0 = -r e1`` whose orbit is ``delta``-separated in the pseudo-hyperbolic metric.

    By invariance of the metric only ``d(z0, phi_k(z0))`` for ``1 <= k <= k_max``
    has to be checked.  Comparisons use ``1 - d^2`` so separations very close
    to 1 stay resolvable.
    """
    if not 0.0 < delta < 1.0:
        raise DomainError("delta must lie in (0, 1)")
    N = phi.N
    gap_target = (1.0 - delta) * (1.0 + delta)
    if radii is None:
        radii = np.concatenate([[0.0], np.linspace(0.1, 0.9, 9), 1.0 - np.logspace(-2, -12, 41)])
    best = (np.inf, None)
    for r in radii:
        z0 = np.zeros(N, dtype=complex)
        z0[0] = -r
        one_minus = (1.0 - r) * (1.0 + r)
        z = z0
        worst = 0.0
        for _ in range(k_max):
            z = phi.apply(z)
            num = one_minus * (1.0 - float(geometry.norm_sq(z)))
            gap = num / abs(1.0 - geometry.inner(z0, z)) ** 2
            worst = max(worst, gap)
            if worst >= gap_target:
                break
        if worst < gap_target:
            return z0
        if worst < best[0]:
            best = (worst, r)
    raise SearchError(
        f"no start on the radius grid separates {k_max} iterates by delta={delta}",
        best={"best_delta": float(np.sqrt(max(0.0, 1.0 - best[0]))), "radius": best[1]},
    )
