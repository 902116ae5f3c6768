"""Bound states from the crossings ``mu_i(kappa) = 1`` of Birman-Schwinger eigenvalue curves.

For real V and ``z = -kappa^2`` the discretized operator is Hermitian and its
eigenvalues, sorted descending, are continuous in kappa.  ``-kappa^2`` is an
eigenvalue of H exactly when one of them equals 1, and the number of such
eigenvalues equals the dimension of the eigenspace of H.
"""
from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .bs_core import (BSOperator, SpectralParameter, fredholm_det, top_eigenpairs,
                      verify_hypothesis)
from .errors import BadParameter, BisectionStall, GridMismatch
from .fourier import SQRT_2PI, FrequencyGrid, GridFunction, LorentzianTerms, random_packets
from .potential import DistributionalPotential

log = logging.getLogger(__name__)

CLUSTER_TOL = 1e-6


def thread_count() -> int:
    """Worker count for kappa scans, from ``BS_SPECTRA_THREADS`` (default 1)."""
    try:
        return max(1, int(os.environ.get("BS_SPECTRA_THREADS", "1")))
    except ValueError:
        return 1


def _parallel_map(fn, items):
    items = list(items)
    n = thread_count()
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))  # map keeps input order


@dataclass(frozen=True, eq=False)
class BoundState:
    kappa: float
    energy: float
    multiplicity: int
    g_vectors: np.ndarray            # columns, unit norm, weighted-coordinate eigenvectors
    eigen_residual: float            # max ||A g - g|| over stored vectors
    functions: tuple = ()            # GridFunction per g vector
    x: np.ndarray | None = None      # dual real-space grid
    f_samples: np.ndarray | None = None  # columns match g_vectors

    @property
    def E(self) -> float:
        return self.energy


# ---------------------------------------------------------------------------
# eigenvalue curves
# ---------------------------------------------------------------------------

def _require_real(V: DistributionalPotential):
    if not V.real:
        raise BadParameter("eigenvalue curves need a real-valued potential")


def eigencurves(V: DistributionalPotential, kappas, grid: FrequencyGrid, *, count: int = 8,
                operator: BSOperator | None = None) -> np.ndarray:
    """Top ``count`` eigenvalues of ``A_V(-kappa^2)`` along ``kappas``, continuity-matched.

    Row ``i`` holds the values at ``kappas[i]``; column ``j`` follows one curve,
    matched between neighbouring kappas by minimal total displacement.  For a
    potential with fewer than ``count`` nonzero eigenvalues the extra columns are 0.
    """
    _require_real(V)
    kappas = np.asarray(kappas, dtype=float)
    if np.any(kappas <= 0) or np.any(np.diff(kappas) <= 0):
        raise BadParameter("kappas must be positive and increasing")
    op = operator or BSOperator(V, grid)

    def values(k):
        mu, _ = top_eigenpairs(op.assemble(-k * k), count)
        out = np.zeros(count)
        out[:len(mu)] = mu
        return np.sort(out)[::-1]

    rows = _parallel_map(values, kappas)
    curves = np.empty((len(kappas), count))
    curves[0] = rows[0]
    for i in range(1, len(rows)):
        cost = np.abs(curves[i - 1][:, None] - rows[i][None, :])
        _, col = linear_sum_assignment(cost)
        curves[i] = rows[i][col]
    return curves


# ---------------------------------------------------------------------------
# root finding
# ---------------------------------------------------------------------------

class _Scan:
    """Cached sorted top eigenvalues of ``A_V(-kappa^2)``."""

    def __init__(self, op: BSOperator, k: int):
        self.op = op
        self.k = k
        self.cache: dict[float, tuple[np.ndarray, np.ndarray]] = {}

    def pairs(self, kappa: float):
        if kappa not in self.cache:
            mu, vec = top_eigenpairs(self.op.assemble(-kappa * kappa), self.k)
            self.cache[kappa] = (mu, vec)
        return self.cache[kappa]

    def count_above_one(self, kappa: float) -> int:
        return int(np.sum(self.pairs(kappa)[0] > 1.0))

    def mu(self, kappa: float, i: int) -> float:
        mu = self.pairs(kappa)[0]
        return float(mu[i]) if i < len(mu) else 0.0


def find_bound_states(V: DistributionalPotential, kappa_min: float, kappa_max: float,
                      grid: FrequencyGrid, tol: float = 1e-10, *, scan_points: int = 64,
                      reconstruct: bool = True, operator: BSOperator | None = None) -> list[BoundState]:
    """All bound states with ``kappa`` in ``[kappa_min, kappa_max]``, sorted by energy.

    The i-th largest eigenvalue minus one is scanned on ``scan_points``
    log-spaced kappas; every sign change is bisected until the bracket is
    shorter than ``tol``.  Roots whose eigenvalue clusters overlap are merged
    into one state with multiplicity equal to the cluster size.
    """
    _require_real(V)
    if not 0 < kappa_min < kappa_max:
        raise BadParameter("need 0 < kappa_min < kappa_max")
    if not tol > 0:
        raise BadParameter("tol must be positive")
    verify_hypothesis(V)
    op = operator or BSOperator(V, grid)
    kappas = np.geomspace(kappa_min, kappa_max, scan_points)

    # enough eigenvalues to see every crossing in the scan range
    k = 4
    scan = _Scan(op, k)
    while True:
        counts = _parallel_map(scan.count_above_one, kappas)
        if max(counts) < k or k >= 256:
            break
        k *= 4
        scan = _Scan(op, k)
    counts = np.array(counts)

    roots = []
    for a, b, ca, cb in zip(kappas[:-1], kappas[1:], counts[:-1], counts[1:]):
        if ca == cb:
            continue
        lo_c, hi_c = min(ca, cb), max(ca, cb)
        for i in range(lo_c, hi_c):
            roots.append(_bisect(scan, i, a, b, tol))
    # a curve touching 1 between scan points without a sign change is not reported
    merged = []
    for kappa in sorted(roots, reverse=True):
        if merged and abs(merged[-1] - kappa) <= max(10 * tol, 1e-9 * kappa):
            continue
        merged.append(kappa)
    out = [_make_state(op, scan, kappa, reconstruct) for kappa in merged]
    out.sort(key=lambda s: s.energy)
    return out


def _bisect(scan: _Scan, i: int, a: float, b: float, tol: float) -> float:
    fa = scan.mu(a, i) - 1.0
    fb = scan.mu(b, i) - 1.0
    if fa * fb > 0:
        raise BisectionStall(f"curve {i} lost its sign change on [{a}, {b}]")
    for _ in range(200):
        if b - a < tol:
            break
        m = 0.5 * (a + b)
        fm = scan.mu(m, i) - 1.0
        if fm == 0:
            return m
        if (fm > 0) == (fa > 0):
            a, fa = m, fm
        else:
            b, fb = m, fm
    else:
        raise BisectionStall("bisection did not reach the requested tolerance")
    return 0.5 * (a + b)


def _make_state(op: BSOperator, scan: _Scan, kappa: float, reconstruct: bool) -> BoundState:
    M = op.assemble(-kappa * kappa)
    mu, vecs = top_eigenpairs(M, scan.k)
    sel = np.abs(mu - 1.0) < CLUSTER_TOL
    if not np.any(sel):
        sel = np.zeros_like(mu, dtype=bool)
        sel[np.argmin(np.abs(mu - 1.0))] = True
    g = vecs[:, sel]
    res = max(float(np.linalg.norm(M.matvec(g[:, j]) - g[:, j])) for j in range(g.shape[1]))
    state = BoundState(kappa=float(kappa), energy=-float(kappa) ** 2, multiplicity=int(sel.sum()),
                       g_vectors=g, eigen_residual=res)
    if reconstruct:
        state = reconstruct_eigenfunction(M, state)
    return state


# ---------------------------------------------------------------------------
# eigenfunctions
# ---------------------------------------------------------------------------

def reconstruct_eigenfunction(M, state: BoundState) -> BoundState:
    """Attach ``f = (H0 + kappa^2)^(-1/2) g`` for each stored ``g``.

    ``M`` is the discretization (a BSMatrix) the state was found with.  On the
    nodes ``f^ = s g / sqrt(w)``; since ``g = M g`` this is evaluated through the
    right-hand side (Nystrom interpolation), which splits ``f^`` into a nodal
    piece from the regular potential and closed-form Lorentzians from the point
    masses.  Samples on the dual real-space grid get unit discrete L^2 norm and
    the largest sample is made real positive.
    """
    grid = M.grid
    g = state.g_vectors
    if g.shape[0] != M.dim:
        raise GridMismatch("eigenvector does not match this discretization")
    if abs(M.z.z + state.kappa**2) > 1e-12 * max(1.0, state.kappa**2):
        raise GridMismatch("discretization was built at a different energy")
    x = grid.real_space()
    dx = x[1] - x[0]
    w = M.operator.weights
    m = M.P.shape[0]
    funcs, samples = [], []
    for j in range(g.shape[1]):
        gj = g[:, j]
        vals = np.zeros(M.n_nodes, dtype=complex)
        if M.operator.kernel is not None:
            vals = M.scaling * M.smooth_matvec(gj) / w
        analytic = None
        if M.coeff.size:
            b = M.coeff * (M.Q.T @ gj[:m])
            analytic = LorentzianTerms(state.kappa, M.operator._locations.copy(), b)
        f = GridFunction(grid, vals, analytic)
        fx = f.at(x)
        norm = np.sqrt(np.sum(np.abs(fx) ** 2) * dx)
        if norm == 0:
            raise BadParameter("eigenfunction vanished on the real-space grid")
        peak = fx[np.argmax(np.abs(fx))]
        c = np.conj(peak) / abs(peak) / norm
        funcs.append(f * c)
        samples.append(fx * c)
    return BoundState(state.kappa, state.energy, state.multiplicity, state.g_vectors,
                      state.eigen_residual, tuple(funcs), x, np.column_stack(samples))


# ---------------------------------------------------------------------------
# weak-form residual
# ---------------------------------------------------------------------------

def weak_residual(V: DistributionalPotential, state: BoundState, test_count: int = 20, *,
                  seed: int = 0, index: int = 0, operator: BSOperator | None = None) -> float:
    """Max over Gaussian test functions of the weak Schroedinger residual.

    For test function ``phi`` this is
    ``|<phi', f'> + <phi, V f> - E <phi, f>| / ||phi||_{H^1}`` with the first and
    last terms combined as ``\\int conj(phi^) (xi^2 + kappa^2) f^``, the point masses
    contributing ``c_j conj(phi(x_j)) f(x_j)`` and the regular part its
    convolution quadrature.
    """
    if not state.functions:
        raise BadParameter("state carries no reconstructed eigenfunction")
    f = state.functions[index]
    grid = f.grid
    xi = grid.all_nodes
    w = grid.all_weights
    kappa = state.kappa
    packets = random_packets(np.random.default_rng(seed), test_count)
    fvals = f.nodal()
    kernel = None
    if V.has_regular_part:
        if operator is not None and operator.kernel is not None and operator.grid.same_as(grid):
            kernel = operator.kernel
        else:
            kernel = BSOperator(V, grid).kernel
        Vf = kernel @ (w * fvals) / SQRT_2PI
    f_at_points = f.at(V.locations) if V.has_point_masses else np.empty(0)
    worst = 0.0
    for phi in packets:
        ph = phi.fourier(xi)
        val = np.sum(w * np.conj(ph) * (xi * xi + kappa * kappa) * fvals)
        if V.has_point_masses:
            val += np.sum(V.strengths * np.conj(phi(V.locations)) * f_at_points)
        if kernel is not None:
            val += np.sum(w * np.conj(ph) * Vf)
        h1 = np.sqrt(np.sum(w * (1 + xi * xi) * np.abs(ph) ** 2))
        worst = max(worst, abs(val) / h1)
    return float(worst)


# ---------------------------------------------------------------------------
# complex zeros of the Fredholm determinant
# ---------------------------------------------------------------------------

def count_determinant_zeros(V: DistributionalPotential, rectangle, grid: FrequencyGrid, *,
                            points_per_side: int = 200, operator: BSOperator | None = None) -> int:
    """Winding number of ``det(I - A_V(z))`` around a rectangle in ``C \\ [0, inf)``.

    ``rectangle = (re_min, re_max, im_min, im_max)``.  The boundary is sampled
    uniformly (trapezoid rule for the change of argument); the sampling must be
    fine enough that consecutive phase increments stay below pi.
    """
    r0, r1, i0, i1 = map(float, rectangle)
    if not (r0 < r1 and i0 < i1):
        raise BadParameter("degenerate rectangle")
    if r1 >= 0 and i0 <= 0 <= i1:
        raise BadParameter("rectangle intersects [0, inf)")
    op = operator or BSOperator(V, grid)
    n = points_per_side
    t = np.linspace(0.0, 1.0, n, endpoint=False)
    path = np.concatenate([
        r0 + (r1 - r0) * t + 1j * i0,
        r1 + 1j * (i0 + (i1 - i0) * t),
        r1 - (r1 - r0) * t + 1j * i1,
        r0 + 1j * (i1 - (i1 - i0) * t),
    ])
    dets = np.array(_parallel_map(lambda z: fredholm_det(op.assemble(SpectralParameter(z))), path))
    if np.any(dets == 0):
        raise BadParameter("determinant vanishes on the contour")
    steps = np.angle(np.roll(dets, -1) / dets)
    if np.max(np.abs(steps)) > 0.5 * np.pi:
        log.warning("large phase step on contour; increase points_per_side")
    return int(round(np.sum(steps) / (2 * np.pi)))
