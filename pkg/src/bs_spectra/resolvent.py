"""Resolvent of ``H = H0 + V`` through ``R(z) = S [I - A_V(z)]^(-1) S``, ``S = (H0 - z)^(-1/2)``.

Everything happens in weighted frequency coordinates ``u_j = sqrt(w_j) f^(xi_j)``,
where the grid quadrature turns L^2 inner products into Euclidean ones.  The
point masses are sampled on all grid nodes (plain Nystrom, ``tail="nodes"``) so
that the discrete resolvent is exactly ``(diag(xi^2) - z + V_grid)^(-1)`` and the
algebraic identities between resolvents hold to rounding.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.linalg as sla
from scipy.sparse.linalg import LinearOperator, svds

from .bs_core import BSMatrix, BSOperator, SpectralParameter, _as_param
from .errors import BadParameter, GridMismatch, NearPole
from .fourier import FrequencyGrid, GridFunction, random_packets
from .potential import DistributionalPotential

POLE_THRESHOLD = 1e-12


def _smallest_singular_value(M: BSMatrix, A: np.ndarray) -> float:
    """Smallest singular value of ``A = I - M``, cheaply when M has low rank."""
    if M.point_only:
        if not M.coeff.size:
            return 1.0
        P, Q = M.P, M.Q
        B, _ = np.linalg.qr(np.hstack([P, np.conj(Q)]))
        # I - M = (I - B B^H) + B (I - S) B^H with S = B^H M B
        S = (B.conj().T @ P * M.coeff) @ (Q.T @ B)
        sv = np.linalg.svd(np.eye(B.shape[1]) - S, compute_uv=False)
        smin = float(sv.min())
        return smin if B.shape[1] >= M.dim else min(smin, 1.0)
    if M.hermitian:
        return float(np.abs(sla.eigvalsh(A)).min())
    return float(sla.svdvals(A).min())


class ResolventHandle:
    """LU factorization of ``I - A_V(z)`` on one grid, ready to apply ``R(z)``.

    Construction fails with NearPole when the smallest singular value of
    ``I - A_V(z)`` is below 1e-12, i.e. z is (numerically) an eigenvalue of H.
    Immutable after construction; ``apply`` only reads the factorization.
    """

    def __init__(self, V: DistributionalPotential, grid: FrequencyGrid, z, *,
                 operator: BSOperator | None = None):
        self.z = _as_param(z)
        self.V = V
        self.grid = grid
        op = operator if operator is not None else BSOperator(V, grid, tail="nodes")
        if op.tail != "nodes":
            raise BadParameter("resolvent needs a node-sampled discretization")
        self.operator = op
        self.matrix = op.assemble(self.z)
        A = np.eye(self.matrix.dim) - self.matrix.entries
        self.sigma_min = _smallest_singular_value(self.matrix, A)
        if not self.sigma_min >= POLE_THRESHOLD:
            raise NearPole(f"I - A_V(z) is numerically singular at z = {self.z.z} "
                           f"(smallest singular value {self.sigma_min:.3g})")
        self.lu = sla.lu_factor(A)
        self.sqrt_w = op.sqrt_w
        self.s = self.matrix.scaling / op.sqrt_w  # (xi^2 - z)^(-1/2) on the nodes

    @property
    def dim(self) -> int:
        return self.matrix.dim

    def _weighted(self, rhs) -> np.ndarray:
        if isinstance(rhs, GridFunction):
            if not rhs.grid.same_as(self.grid):
                raise GridMismatch("right-hand side lives on another grid")
            return self.sqrt_w * rhs.nodal()
        u = np.asarray(rhs, dtype=complex)
        if u.shape[0] != self.dim:
            raise GridMismatch("right-hand side has the wrong length")
        return u

    def solve(self, u: np.ndarray) -> np.ndarray:
        """``[I - A]^(-1) u`` in weighted coordinates (vectors or column blocks)."""
        return sla.lu_solve(self.lu, u)

    def apply_weighted(self, u: np.ndarray) -> np.ndarray:
        s = self.s if np.ndim(u) == 1 else self.s[:, None]
        return s * self.solve(s * u)

    def apply_recast_weighted(self, u: np.ndarray) -> np.ndarray:
        """``R0 u + S A [I - A]^(-1) S u``."""
        s = self.s if np.ndim(u) == 1 else self.s[:, None]
        t = self.solve(s * u)
        return s * s * u + s * (self.matrix.entries @ t)

    def apply(self, rhs) -> GridFunction:
        """``R(z) rhs``: multiply by S, solve with the factorization, multiply by S."""
        u = self._weighted(rhs)
        return GridFunction(self.grid, self.apply_weighted(u) / self.sqrt_w)

    def apply_recast(self, rhs) -> GridFunction:
        u = self._weighted(rhs)
        return GridFunction(self.grid, self.apply_recast_weighted(u) / self.sqrt_w)

    def dense(self) -> np.ndarray:
        """The discrete ``R(z)`` in weighted coordinates (materialized; for checks only)."""
        return self.s[:, None] * self.solve(np.diag(self.s.astype(complex)))

    def difference_operator(self) -> LinearOperator:
        """``R(z) - R0(z) = S A [I - A]^(-1) S`` as a matrix-free operator."""
        M = self.matrix.entries
        s = self.s
        lu = self.lu

        def mv(v):
            v = np.ravel(v)
            return s * (M @ sla.lu_solve(lu, s * v))

        def rmv(v):
            v = np.ravel(v)
            return np.conj(s) * sla.lu_solve(lu, M.conj().T @ (np.conj(s) * v), trans=2)

        return LinearOperator((self.dim, self.dim), matvec=mv, rmatvec=rmv, dtype=complex)

    def difference_dense(self) -> np.ndarray:
        M = self.matrix.entries
        return self.s[:, None] * (M @ self.solve(np.diag(self.s.astype(complex))))


def _handle(V, grid, z, cache):
    key = complex(_as_param(z).z)
    if key not in cache:
        op = cache.get("op")
        if op is None:
            op = cache["op"] = BSOperator(V, grid, tail="nodes")
        cache[key] = ResolventHandle(V, grid, z, operator=op)
    return cache[key]


def apply(handle: ResolventHandle, rhs) -> GridFunction:
    return handle.apply(rhs)


def resolvent_identity_residual(V: DistributionalPotential, z1, z2, trials: int,
                                grid: FrequencyGrid, *, seed: int = 0) -> float:
    """Max over random Gaussian right-hand sides of
    ``||[R(z1) - R(z2) - (z1 - z2) R(z1) R(z2)] f|| / ||f||``."""
    p1, p2 = _as_param(z1), _as_param(z2)
    if p1.z == p2.z:
        raise BadParameter("z1 and z2 must differ")
    cache: dict = {}
    h1 = _handle(V, grid, p1, cache)
    h2 = _handle(V, grid, p2, cache)
    worst = 0.0
    for phi in random_packets(np.random.default_rng(seed), trials):
        u = h1.sqrt_w * phi.fourier(grid.all_nodes)
        r = h1.apply_weighted(u) - h2.apply_weighted(u) - (p1.z - p2.z) * h1.apply_weighted(
            h2.apply_weighted(u))
        worst = max(worst, float(np.linalg.norm(r) / np.linalg.norm(u)))
    return worst


def recast_deviation(V: DistributionalPotential, z, trials: int, grid: FrequencyGrid, *,
                     seed: int = 0) -> float:
    """Max relative gap between the two algebraically equal resolvent formulas."""
    h = ResolventHandle(V, grid, z)
    worst = 0.0
    for phi in random_packets(np.random.default_rng(seed), trials):
        u = h.sqrt_w * phi.fourier(grid.all_nodes)
        a = h.apply_weighted(u)
        b = h.apply_recast_weighted(u)
        worst = max(worst, float(np.linalg.norm(a - b) / np.linalg.norm(a)))
    return worst


def resolvent_difference_svals(V: DistributionalPotential, z, k: int, grid: FrequencyGrid, *,
                               handle: ResolventHandle | None = None) -> np.ndarray:
    """Leading ``k`` singular values of ``R(z) - R0(z)``, descending."""
    h = handle or ResolventHandle(V, grid, z)
    if not 1 <= k <= h.dim:
        raise BadParameter("need 1 <= k <= N")
    M = h.matrix
    if M.point_only:
        out = np.zeros(k)
        if M.coeff.size:
            G = M.Q.T @ M.P
            core = M.coeff[:, None] * np.linalg.inv(np.eye(len(M.coeff)) - G * M.coeff[None, :])
            _, Ru = np.linalg.qr(h.s[:, None] * M.P)
            _, Rw = np.linalg.qr(h.s[:, None] * M.Q)
            sv = np.linalg.svd(Ru @ core @ Rw.T, compute_uv=False)
            out[:min(k, len(sv))] = sv[:k]
        return out
    if k >= h.dim // 4 or h.dim <= 400:
        return sla.svdvals(h.difference_dense())[:k]
    sv = svds(h.difference_operator(), k=k, v0=np.ones(h.dim), return_singular_vectors=False,
              tol=1e-12)
    return np.sort(sv)[::-1]


def resolvent_difference_hs(V: DistributionalPotential, z, grid: FrequencyGrid) -> float:
    """Hilbert-Schmidt norm of ``R(z) - R0(z)`` (square root of the sum of all sigma_i^2)."""
    h = ResolventHandle(V, grid, z)
    if h.matrix.point_only:
        sv = resolvent_difference_svals(V, z, min(h.dim, 8), grid, handle=h)
        return float(np.sqrt(np.sum(sv**2)))
    return float(np.linalg.norm(h.difference_dense()))


def hermitian_deviation(V: DistributionalPotential, z, grid: FrequencyGrid) -> float:
    """``max |R - R^H| / max |R|`` for the discrete resolvent."""
    R = ResolventHandle(V, grid, z).dense()
    return float(np.max(np.abs(R - R.conj().T)) / np.max(np.abs(R)))
