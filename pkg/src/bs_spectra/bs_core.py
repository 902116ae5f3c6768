"""Discretized Birman-Schwinger operator ``A_V(z) = -(H0 - z)^(-1/2) V (H0 - z)^(-1/2)``.

In frequency space ``A_V(z)`` has kernel

    -(2 pi)^(-1/2) s(xi) V^(xi - eta) s(eta),   s = (xi^2 - z)^(-1/2),

and the Nystrom matrix on a :class:`FrequencyGrid` is
``M_jk = -(2 pi)^(-1/2) sqrt(w_j) s_j V^(xi_j - xi_k) s_k sqrt(w_k)``.

Point masses make the kernel a finite-rank sum of products
``s(xi) exp(-i xi x_j) * s(eta) exp(i eta x_j)``, whose factors decay only like
``1/|xi|``.  Truncating those at the grid cutoff costs ``O(1/cutoff)``, so by default
(``tail="exact"``) the part beyond the cutoff is represented by a small Galerkin
basis spanned by the truncated factors themselves; its Gram matrix is known in
closed form.  The regular part of V is sampled on all grid nodes (core and
mapped tail).  With ``tail="nodes"`` the point-mass factors are simply sampled on
the grid nodes too; that variant is a plain Nystrom matrix and is what the
resolvent module uses so that discrete algebraic identities hold exactly.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.linalg as sla
from scipy.sparse.linalg import LinearOperator, eigsh, svds, ArpackNoConvergence

from .errors import BadParameter, EigenFailure, SpectrumPoint
from .fourier import SQRT_2PI, FrequencyGrid, tail_cos_quad, tail_lorentzian
from .potential import DistributionalPotential, weighted_norm_sq

log = logging.getLogger(__name__)

DENSE_LIMIT = 700  # below this size dense LAPACK beats ARPACK


def sqrt_branch(w):
    """Square root with ``arg(w)`` taken in ``[0, 2 pi)``, so ``Im`` of the result is ``>= 0``."""
    r = np.sqrt(np.asarray(w, dtype=complex))
    r = np.where(r.imag < 0, -r, r)
    return complex(r) if r.ndim == 0 else r


@dataclass(frozen=True)
class SpectralParameter:
    """A point ``z`` off the spectrum ``[0, inf)`` of the free Laplacian."""

    z: complex

    def __post_init__(self):
        z = complex(self.z)
        if not (np.isfinite(z.real) and np.isfinite(z.imag)):
            raise BadParameter("spectral parameter must be finite")
        if abs(z.imag) <= 1e-14 and z.real >= -1e-14:
            raise SpectrumPoint(f"z = {z} lies on [0, inf)")
        object.__setattr__(self, "z", z)

    @classmethod
    def from_kappa(cls, kappa: float) -> "SpectralParameter":
        if not kappa > 0:
            raise BadParameter("kappa must be positive")
        return cls(-float(kappa) ** 2)

    @property
    def is_negative_real(self) -> bool:
        return self.z.imag == 0 and self.z.real < 0

    @property
    def kappa(self) -> complex | float:
        """``(-z)^(1/2)`` with positive real part; real for negative real ``z``."""
        k = np.sqrt(-self.z)
        return float(k.real) if self.is_negative_real else complex(k)

    def symbol(self, xi) -> np.ndarray:
        """``s(xi) = (xi^2 - z)^(-1/2)``; real when ``z`` is negative real."""
        xi = np.asarray(xi, dtype=float)
        if self.is_negative_real:
            return 1.0 / np.sqrt(xi * xi - self.z.real)
        return 1.0 / sqrt_branch(xi * xi - self.z)


def _as_param(z) -> SpectralParameter:
    return z if isinstance(z, SpectralParameter) else SpectralParameter(z)


def embedding_constant(kappa: float) -> float:
    """Constant ``C(kappa) = max(1, 1/kappa)`` relating kappa-weighted and plain H^1 norms."""
    if not kappa > 0:
        raise BadParameter("kappa must be positive")
    return max(1.0, 1.0 / kappa)


# ---------------------------------------------------------------------------
# structured operator
# ---------------------------------------------------------------------------

class BSOperator:
    """Birman-Schwinger discretization of one potential on one grid, reusable across z.

    The z-independent regular kernel ``V^_reg(xi_a - xi_b)`` is built once.
    """

    def __init__(self, V: DistributionalPotential, grid: FrequencyGrid, *,
                 tail: str = "exact", block: int = 512):
        if tail not in ("exact", "nodes"):
            raise BadParameter("tail must be 'exact' or 'nodes'")
        self.V = V
        self.grid = grid
        self.tail = tail
        self.nodes = grid.all_nodes
        self.weights = grid.all_weights
        self.sqrt_w = np.sqrt(self.weights)
        self.core = grid.core_mask
        self._strengths = V.strengths
        self._locations = V.locations
        keep = self._strengths != 0
        self._strengths = self._strengths[keep]
        self._locations = self._locations[keep]
        self.kernel = None
        if V.has_regular_part:
            n = len(self.nodes)
            K = np.empty((n, n), dtype=complex)
            for i in range(0, n, block):
                K[i:i + block] = V.regular_fourier(self.nodes[i:i + block, None] - self.nodes[None, :])
            self.kernel = K

    @property
    def point_only(self) -> bool:
        return self.kernel is None

    def _tail_basis(self, sp: SpectralParameter):
        """Galerkin data for the point-mass factors beyond the cutoff.

        Returns ``(beta, gamma, X)``: coordinates of the truncated ket factors in an
        orthonormal tail basis, the bra factors applied to that basis, and the
        change of basis (basis = truncated kets @ X).
        """
        x = self._locations
        J = len(x)
        cut = self.grid.cutoff
        d = x[:, None] - x[None, :]
        if sp.is_negative_real:
            k = sp.kappa
            T = tail_lorentzian(d.ravel(), cut, k).reshape(J, J)
            U = T
        else:
            z = sp.z
            T = np.empty((J, J))
            U = np.empty((J, J), dtype=complex)
            for i in range(J):
                for j in range(i, J):
                    dij = abs(d[i, j])
                    T[i, j] = T[j, i] = tail_cos_quad(lambda t: 1.0 / abs(t * t - z), dij, cut)
                    re = tail_cos_quad(lambda t: (1.0 / (t * t - z)).real, dij, cut)
                    im = tail_cos_quad(lambda t: (1.0 / (t * t - z)).imag, dij, cut)
                    U[i, j] = U[j, i] = re + 1j * im
        T = 0.5 * (T + T.T)
        lam, Q = np.linalg.eigh(T)
        keep = lam > 1e-13 * max(lam.max(initial=0.0), 1e-300)
        lam, Q = lam[keep], Q[:, keep]
        X = Q / np.sqrt(lam)
        beta = np.sqrt(lam)[:, None] * Q.conj().T
        gamma = U @ X
        return beta, gamma, X

    def factors(self, z):
        """Low-rank point-mass factors ``(P, Q, coeff, X)`` with ``M_point = P diag(coeff) Q^T``."""
        sp = _as_param(z)
        s = sp.symbol(self.nodes)
        d = self.sqrt_w * s
        ph = np.exp(-1j * np.outer(self.nodes, self._locations))
        P = d[:, None] * ph
        Q = d[:, None] * np.conj(ph)
        coeff = -self._strengths / (2 * np.pi)
        X = None
        if self.tail == "exact" and len(self._locations):
            P[~self.core] = 0.0
            Q[~self.core] = 0.0
            beta, gamma, X = self._tail_basis(sp)
            P = np.vstack([P, beta])
            Q = np.vstack([Q, gamma.T])
        return P, Q, coeff, X, d

    def assemble(self, z) -> "BSMatrix":
        sp = _as_param(z)
        P, Q, coeff, _, d = self.factors(sp)
        herm = bool(self.V.real and sp.is_negative_real)
        return BSMatrix(self, sp, P, Q, coeff, d, herm)


@dataclass(eq=False)
class BSMatrix:
    """Discretized ``A_V(z)`` as ``smooth + P diag(coeff) Q^T``.

    ``entries`` materializes the dense matrix on demand.  When there is no regular
    part every quantity is computed from ``J x J`` matrices, J the number of point
    masses, with no dense ``N x N`` work at all.
    """

    operator: BSOperator
    z: SpectralParameter
    P: np.ndarray
    Q: np.ndarray
    coeff: np.ndarray
    scaling: np.ndarray
    hermitian: bool

    @property
    def grid(self) -> FrequencyGrid:
        return self.operator.grid

    @property
    def potential(self) -> DistributionalPotential:
        return self.operator.V

    @property
    def n_nodes(self) -> int:
        return len(self.scaling)

    @property
    def dim(self) -> int:
        return max(self.n_nodes, self.P.shape[0])

    @property
    def point_only(self) -> bool:
        return self.operator.point_only

    def _pad(self, A):
        A = np.asarray(A)
        if A.shape[0] == self.dim:
            return A
        out = np.zeros((self.dim,) + A.shape[1:], dtype=A.dtype)
        out[:A.shape[0]] = A
        return out

    @cached_property
    def entries(self) -> np.ndarray:
        n = self.n_nodes
        M = np.zeros((self.dim, self.dim), dtype=complex)
        if self.operator.kernel is not None:
            d = self.scaling
            M[:n, :n] = (-1.0 / SQRT_2PI) * (d[:, None] * self.operator.kernel * d[None, :])
        if self.coeff.size:
            P = self._pad(self.P)
            Q = self._pad(self.Q)
            M += (P * self.coeff) @ Q.T
        if self.hermitian:
            dev = np.max(np.abs(M - M.conj().T), initial=0.0)
            scale = np.max(np.abs(M), initial=0.0)
            if dev > 1e-12 * scale:
                raise BadParameter(f"real potential gave a non-Hermitian matrix (dev {dev:.3g})")
        M.setflags(write=False)
        return M

    def smooth_matvec(self, v):
        """Regular-potential part of ``M v`` on the grid nodes."""
        d = self.scaling
        n = self.n_nodes
        return (-1.0 / SQRT_2PI) * d * (self.operator.kernel @ (d * np.asarray(v)[:n]))

    def matvec(self, v):
        v = np.asarray(v, dtype=complex)
        out = np.zeros(self.dim, dtype=complex)
        n = self.n_nodes
        if self.operator.kernel is not None:
            out[:n] = self.smooth_matvec(v)
        if self.coeff.size:
            m = self.P.shape[0]
            out[:m] += self.P @ (self.coeff * (self.Q.T @ v[:m]))
        return out

    def as_linear_operator(self) -> LinearOperator:
        return LinearOperator((self.dim, self.dim), matvec=self.matvec, dtype=complex)

    # --- small-space representation for point-only potentials --------------

    @cached_property
    def _gram(self):
        return self.Q.T @ self.P  # J x J, bra_i(ket_j)

    def small(self) -> np.ndarray:
        """``diag(coeff) Q^T P``: shares all nonzero eigenvalues with the point-mass part."""
        return self.coeff[:, None] * self._gram

    def _qr_core(self):
        _, Ru = np.linalg.qr(self.P)
        _, Rw = np.linalg.qr(self.Q)
        return (Ru * self.coeff) @ Rw.T


# ---------------------------------------------------------------------------
# public operations
# ---------------------------------------------------------------------------

def assemble(V: DistributionalPotential, grid: FrequencyGrid, z, *, tail: str = "exact") -> BSMatrix:
    """Nystrom matrix of ``A_V(z)`` on ``grid``; raises SpectrumPoint for z on ``[0, inf)``."""
    sp = _as_param(z)
    return BSOperator(V, grid, tail=tail).assemble(sp)


def hs_norm(M: BSMatrix) -> float:
    """Frobenius norm of the discretization."""
    if M.point_only:
        if not M.coeff.size:
            return 0.0
        return float(np.linalg.norm(M._qr_core()))
    return float(np.linalg.norm(M.entries))


def trace(M: BSMatrix) -> complex:
    if M.point_only:
        return complex(np.sum(M.coeff * np.diag(M._gram)))
    return complex(np.trace(M.entries))


def hs_norm_formula(V: DistributionalPotential, kappa: float) -> float:
    """``((1/kappa) \\int |V^|^2 / (xi^2 + 4 kappa^2) dxi)^(1/2)``, point masses in closed form."""
    if not kappa > 0:
        raise BadParameter("kappa must be positive")
    return float(np.sqrt(max(weighted_norm_sq(V, 2.0 * kappa), 0.0) / kappa))


def trace_formula(V: DistributionalPotential, kappa: float) -> complex:
    """``-(1/(2 kappa)) \\int V dx``."""
    if not kappa > 0:
        raise BadParameter("kappa must be positive")
    return complex(-V.integral() / (2.0 * kappa))


def operator_norm(M: BSMatrix) -> float:
    """Largest singular value."""
    if M.point_only:
        if not M.coeff.size:
            return 0.0
        return float(np.linalg.svd(M._qr_core(), compute_uv=False)[0])
    if M.dim <= DENSE_LIMIT:
        return float(sla.svdvals(M.entries)[0])
    try:
        if M.hermitian:
            w = eigsh(M.as_linear_operator(), k=1, which="LM", v0=np.ones(M.dim),
                      return_eigenvectors=False, tol=1e-13)
            return float(np.abs(w).max())
        s = svds(M.entries, k=1, v0=np.ones(M.dim), return_singular_vectors=False, tol=1e-13)
        return float(s.max())
    except ArpackNoConvergence as exc:
        raise EigenFailure(f"ARPACK did not converge: {exc}") from exc


def spectrum(M: BSMatrix) -> np.ndarray:
    """All eigenvalues, descending by real part (real dtype in the Hermitian case)."""
    try:
        if M.point_only:
            mu = np.linalg.eigvals(M.small()) if M.coeff.size else np.empty(0)
            mu = np.concatenate([mu, np.zeros(M.dim - len(mu))])
        elif M.hermitian:
            mu = sla.eigvalsh(M.entries)
        else:
            mu = sla.eigvals(M.entries)
    except (np.linalg.LinAlgError, sla.LinAlgError) as exc:
        raise EigenFailure(str(exc)) from exc
    if M.hermitian:
        mu = np.real(mu)
    return mu[np.argsort(-np.real(mu), kind="stable")]


def top_eigenpairs(M: BSMatrix, k: int):
    """``k`` largest (real) eigenvalues with eigenvectors for a Hermitian discretization."""
    if not M.hermitian:
        raise BadParameter("top_eigenpairs needs a Hermitian discretization")
    try:
        if M.point_only:
            if not M.coeff.size:
                return np.zeros(0), np.zeros((M.dim, 0), dtype=complex)
            # symmetric form: G^(1/2) C G^(1/2) with G = P^H P
            G = M._gram
            G = 0.5 * (G + G.conj().T)
            lam, W = np.linalg.eigh(G)
            lam = np.clip(lam, 0.0, None)
            Gh = (W * np.sqrt(lam)) @ W.conj().T
            S = Gh @ (M.coeff.real[:, None] * Gh)
            mu, Y = np.linalg.eigh(0.5 * (S + S.conj().T))
            # eigenvector of P C Q^T: P C G^(1/2) y
            vecs = M.P @ (M.coeff.real[:, None] * (Gh @ Y))
            order = np.argsort(-mu)[:k]
            mu, vecs = mu[order], M._pad(vecs[:, order])
            norms = np.linalg.norm(vecs, axis=0)
            vecs = vecs / np.where(norms > 0, norms, 1.0)
            return mu, vecs
        if M.dim <= 200 or k >= M.dim // 4:
            mu, vecs = sla.eigh(M.entries)
        else:
            mu, vecs = eigsh(M.as_linear_operator(), k=k, which="LA", v0=np.ones(M.dim), tol=1e-13)
    except (ArpackNoConvergence, np.linalg.LinAlgError, sla.LinAlgError) as exc:
        raise EigenFailure(str(exc)) from exc
    order = np.argsort(-mu)[:k]
    return mu[order], vecs[:, order]


def fredholm_det(M: BSMatrix) -> complex:
    """``det(I - M) = prod(1 - mu_i)`` (LU of ``I - M``; small matrix for point masses)."""
    if M.point_only:
        if not M.coeff.size:
            return 1.0 + 0j
        return complex(np.linalg.det(np.eye(len(M.coeff)) - M.small()))
    A = np.eye(M.dim) - M.entries
    sign, logdet = np.linalg.slogdet(A)
    return complex(sign * np.exp(logdet))


def verify_hypothesis(V: DistributionalPotential, *, bound: float = 0.5, max_doublings: int = 60) -> float:
    """Return ``E0 = -kappa0^2`` with ``hs_norm_formula(V, kappa0) <= bound``, doubling from 1."""
    kappa = 1.0
    for _ in range(max_doublings):
        if hs_norm_formula(V, kappa) <= bound:
            return -kappa * kappa
        kappa *= 2.0
    raise BadParameter("no admissible kappa found; is V in H^-1?")
