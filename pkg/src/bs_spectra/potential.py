"""Distributional potentials in H^{-1}(R) described by closed-form Fourier transforms.

A potential is a sum of point masses ``c_j delta(x - x_j)``, smooth terms with known
transforms, and derivative terms ``q'`` where only ``q^`` is supplied.  Keeping the
point masses separate lets the rest of the package use exact Lorentzian formulas
for them, while the smooth and derivative terms (the *regular* part) decay fast
in frequency and are handled by quadrature.

Pairings are conjugate-linear in the test-function slot: ``<h, V> = \\int conj(h^) V^``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import BadParameter, GridMismatch, UndefinedIntegral
from .fourier import SQRT_2PI, GridFunction, integrate_line


# ---------------------------------------------------------------------------
# regular terms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GaussianTerm:
    """``A exp(-(x - center)^2 / (2 width^2))``."""

    amplitude: complex
    width: float
    center: float = 0.0

    def __post_init__(self):
        if not self.width > 0:
            raise BadParameter("gaussian width must be positive")

    def fourier(self, xi):
        xi = np.asarray(xi, dtype=float)
        return (self.amplitude * self.width * np.exp(-0.5 * (self.width * xi) ** 2)
                * np.exp(-1j * xi * self.center))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return self.amplitude * np.exp(-((x - self.center) ** 2) / (2 * self.width**2))

    @property
    def is_real(self):
        return np.imag(self.amplitude) == 0

    def dilated(self, lam):
        return GaussianTerm(lam**2 * self.amplitude, self.width / lam, self.center / lam)

    def scaled(self, a):
        return GaussianTerm(a * self.amplitude, self.width, self.center)


@dataclass(frozen=True)
class Sech2Term:
    """``A sech^2(x / width)``; with ``A = -l(l+1)``, width 1 this is the Poeschl-Teller well."""

    amplitude: complex
    width: float

    def __post_init__(self):
        if not self.width > 0:
            raise BadParameter("sech2 width must be positive")

    def fourier(self, xi):
        xi = np.asarray(xi, dtype=float)
        u = 0.5 * np.pi * self.width * xi
        small = np.abs(u) < 1e-8
        safe = np.where(small, 1.0, u)
        # u/sinh(u), guarded at 0 and against overflow
        ratio = np.where(small, 1.0 - u**2 / 6.0,
                         np.where(np.abs(safe) > 700, 0.0, safe / np.sinh(np.clip(safe, -700, 700))))
        return self.amplitude * self.width * 2.0 * ratio / SQRT_2PI

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return self.amplitude / np.cosh(x / self.width) ** 2

    @property
    def is_real(self):
        return np.imag(self.amplitude) == 0

    def dilated(self, lam):
        return Sech2Term(lam**2 * self.amplitude, self.width / lam)

    def scaled(self, a):
        return Sech2Term(a * self.amplitude, self.width)


@dataclass(frozen=True)
class DerivativeGaussianTerm:
    """``q'`` with ``q(x) = A exp(-x^2 / (2 width^2))``; transform ``i xi q^(xi)``."""

    amplitude: complex
    width: float

    def __post_init__(self):
        if not self.width > 0:
            raise BadParameter("derivative_gaussian width must be positive")

    def q_fourier(self, xi):
        xi = np.asarray(xi, dtype=float)
        return self.amplitude * self.width * np.exp(-0.5 * (self.width * xi) ** 2)

    def fourier(self, xi):
        return 1j * np.asarray(xi, dtype=float) * self.q_fourier(xi)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return -x / self.width**2 * self.amplitude * np.exp(-x**2 / (2 * self.width**2))

    @property
    def is_real(self):
        return np.imag(self.amplitude) == 0

    def dilated(self, lam):
        return DerivativeGaussianTerm(lam * self.amplitude, self.width / lam)

    def scaled(self, a):
        return DerivativeGaussianTerm(a * self.amplitude, self.width)


@dataclass(frozen=True)
class FourierTerm:
    """Arbitrary term given only by a vectorized transform evaluator.

    ``derivative=True`` means the evaluator returns ``q^`` and the term is ``q'``.
    """

    evaluator: Callable
    derivative: bool = False
    real: bool = False

    def fourier(self, xi):
        xi = np.asarray(xi, dtype=float)
        v = np.asarray(self.evaluator(xi), dtype=complex)
        return 1j * xi * v if self.derivative else v

    @property
    def is_real(self):
        return self.real

    def scaled(self, a):
        ev = self.evaluator
        return FourierTerm(lambda xi: a * ev(xi), self.derivative, self.real and np.isreal(a))


def _compact(c):
    c = complex(c)
    return c.real if c.imag == 0 else c


# ---------------------------------------------------------------------------
# the potential
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DistributionalPotential:
    """``sum_j c_j delta(x - x_j)`` plus regular terms.

    ``point_masses`` is a tuple of ``(strength, location)`` pairs.  ``real`` is a
    declared flag; :meth:`check_real` validates it against the transform.
    """

    point_masses: tuple = ()
    terms: tuple = ()
    real: bool = True
    label: str = ""

    def __post_init__(self):
        pm = tuple((_compact(c), float(x)) for c, x in self.point_masses)
        object.__setattr__(self, "point_masses", pm)
        object.__setattr__(self, "terms", tuple(self.terms))
        for _, x in pm:
            if not np.isfinite(x):
                raise BadParameter("point-mass location must be finite")

    # --- construction helpers ------------------------------------------------

    @classmethod
    def delta(cls, strength=1.0, at=0.0, **kw):
        return cls(point_masses=((strength, at),), **kw)

    @classmethod
    def zero(cls):
        return cls(label="zero")

    @property
    def strengths(self) -> np.ndarray:
        return np.array([c for c, _ in self.point_masses], dtype=complex)

    @property
    def locations(self) -> np.ndarray:
        return np.array([x for _, x in self.point_masses], dtype=float)

    @property
    def has_point_masses(self) -> bool:
        return any(c != 0 for c, _ in self.point_masses)

    @property
    def has_regular_part(self) -> bool:
        return len(self.terms) > 0

    @property
    def is_zero(self) -> bool:
        return not self.has_point_masses and not self.has_regular_part

    def __add__(self, other: "DistributionalPotential") -> "DistributionalPotential":
        return DistributionalPotential(self.point_masses + other.point_masses,
                                       self.terms + other.terms,
                                       self.real and other.real)

    def __mul__(self, a) -> "DistributionalPotential":
        return DistributionalPotential(tuple((a * c, x) for c, x in self.point_masses),
                                       tuple(t.scaled(a) for t in self.terms),
                                       self.real and bool(np.isreal(a)), self.label)

    __rmul__ = __mul__

    def dilated(self, lam: float) -> "DistributionalPotential":
        """``lam^2 V(lam x)``; energies of the dilated operator scale by ``lam^2``."""
        if not lam > 0:
            raise BadParameter("dilation factor must be positive")
        pm = tuple((lam * c, x / lam) for c, x in self.point_masses)
        return DistributionalPotential(pm, tuple(t.dilated(lam) for t in self.terms),
                                       self.real, self.label)

    # --- evaluation ------------------------------------------------------------

    def point_fourier(self, xi) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        out = np.zeros(xi.shape, dtype=complex)
        for c, x in self.point_masses:
            out += c * np.exp(-1j * xi * x)
        return out / SQRT_2PI

    def regular_fourier(self, xi) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        out = np.zeros(xi.shape, dtype=complex)
        for t in self.terms:
            out += t.fourier(xi)
        return out

    def fourier(self, xi) -> np.ndarray:
        return self.point_fourier(xi) + self.regular_fourier(xi)

    def integral(self) -> complex:
        """``\\int V dx``, defined as ``(2 pi)^(1/2) V^(0)``."""
        v0 = self.fourier(np.array([0.0]))[0]
        eps = 1e-7
        side = self.fourier(np.array([-eps, eps]))
        if not np.all(np.isfinite(side)) or np.max(np.abs(side - v0)) > 1e-4 * (1 + abs(v0)):
            raise UndefinedIntegral("transform is not continuous at the origin")
        return SQRT_2PI * v0

    def check_real(self, nodes, rtol: float = 1e-12) -> bool:
        """Hermitian symmetry ``V^(-xi) = conj(V^(xi))`` on the given nodes."""
        nodes = np.asarray(nodes, dtype=float)
        a = self.fourier(nodes)
        b = np.conj(self.fourier(-nodes))
        scale = max(np.max(np.abs(a)), 1e-300) if a.size else 1.0
        return bool(np.max(np.abs(a - b), initial=0.0) <= rtol * scale)


def fourier_at(V: DistributionalPotential, xi) -> complex:
    """``V^(xi)`` for a scalar (or array) ``xi``."""
    out = V.fourier(np.atleast_1d(np.asarray(xi, dtype=float)))
    return complex(out[0]) if np.ndim(xi) == 0 else out


# ---------------------------------------------------------------------------
# weighted L^2 norms of the transform
# ---------------------------------------------------------------------------

def point_lorentzian_sum(V: DistributionalPotential, m: float) -> float:
    """``\\int |P^(xi)|^2 / (xi^2 + m^2) dxi`` for the point-mass part P, in closed form."""
    c = V.strengths
    if c.size == 0:
        return 0.0
    x = V.locations
    d = np.abs(x[:, None] - x[None, :])
    val = np.sum(c[:, None] * np.conj(c[None, :]) * np.exp(-m * d)) / (2 * m)
    return float(val.real)


def weighted_norm_sq(V: DistributionalPotential, m: float, rtol: float = 1e-10) -> float:
    """``\\int |V^(xi)|^2 / (xi^2 + m^2) dxi``.

    The point-mass part is summed in closed form; what remains (regular part
    and its cross terms with the point masses) decays fast and is integrated
    adaptively.  Raises NonIntegrable when that remainder diverges.
    """
    if not m > 0:
        raise BadParameter("weight parameter must be positive")
    total = point_lorentzian_sum(V, m)
    if V.has_regular_part:
        def rem(xi):
            p = V.point_fourier(xi)
            r = V.regular_fourier(xi)
            return (np.abs(r) ** 2 + 2 * np.real(np.conj(p) * r)) / (xi**2 + m * m)

        total += float(np.real(integrate_line(rem, scale=max(1.0, m), rtol=rtol,
                                              atol=1e-15 * max(total, 1e-300))))
    return total


def h_minus_one_norm(V: DistributionalPotential) -> float:
    """``(\\int |V^|^2 / (1 + xi^2))^(1/2)``."""
    return float(np.sqrt(max(weighted_norm_sq(V, 1.0, rtol=1e-8), 0.0)))


# ---------------------------------------------------------------------------
# duality pairing
# ---------------------------------------------------------------------------

def pairing(V: DistributionalPotential, h: GridFunction) -> complex:
    """``<h, V> = \\int conj(h^(xi)) V^(xi) dxi`` by quadrature on ``h``'s grid.

    Lorentzian terms carried by ``h`` are paired with the point masses exactly.
    """
    if h is None or getattr(h, "grid", None) is None:
        raise GridMismatch("test function has no grid")
    grid = h.grid
    xi = grid.all_nodes
    if h.analytic is None or not V.has_point_masses:
        return complex(grid.integrate(np.conj(h.nodal()) * V.fourier(xi)))
    val = grid.integrate(np.conj(h.values) * V.fourier(xi))
    val += grid.integrate(np.conj(h.analytic.fourier(xi)) * V.regular_fourier(xi))
    t = h.analytic
    d = np.abs(np.subtract.outer(t.positions, V.locations))
    val += (np.conj(t.coefficients) @ (np.exp(-t.kappa * d) @ V.strengths)) * (
        np.sqrt(np.pi / 2) / t.kappa)
    return complex(val)


# ---------------------------------------------------------------------------
# config parsing
# ---------------------------------------------------------------------------

def _num(v):
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return complex(float(v[0]), float(v[1]))
    if isinstance(v, str):
        return complex(v.replace(" ", ""))
    return float(v)


def from_config(cfg: dict) -> DistributionalPotential:
    """Build a potential from a JSON-style dict.

    Keys: ``point_masses: [[c, x], ...]``, ``gaussian: {amplitude, width, center}``,
    ``sech2: {amplitude, width}``, ``derivative_gaussian: {amplitude, width}``,
    optional ``real`` (default: inferred from the coefficients).  ``gaussian``
    and friends may also be lists of such dicts.  Complex numbers are written as
    ``[re, im]`` pairs or strings like ``"1-2j"``.
    """
    if not isinstance(cfg, dict):
        raise BadParameter("potential config must be a mapping")
    known = {"point_masses", "gaussian", "sech2", "derivative_gaussian", "real", "label"}
    extra = set(cfg) - known
    if extra:
        raise BadParameter(f"unknown potential keys: {sorted(extra)}")
    try:
        pm = tuple((_num(c), float(x)) for c, x in cfg.get("point_masses", []))
        terms = []

        def many(key):
            v = cfg.get(key)
            if v is None:
                return []
            return v if isinstance(v, list) else [v]

        for g in many("gaussian"):
            terms.append(GaussianTerm(_num(g["amplitude"]), float(g["width"]),
                                      float(g.get("center", 0.0))))
        for s in many("sech2"):
            terms.append(Sech2Term(_num(s["amplitude"]), float(s["width"])))
        for d in many("derivative_gaussian"):
            terms.append(DerivativeGaussianTerm(_num(d["amplitude"]), float(d["width"])))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, BadParameter):
            raise
        raise BadParameter(f"malformed potential config: {exc}") from exc
    inferred = all(np.isreal(c) for c, _ in pm) and all(t.is_real for t in terms)
    real = bool(cfg.get("real", inferred))
    V = DistributionalPotential(pm, tuple(terms), real, str(cfg.get("label", "")))
    if real and not V.check_real(np.linspace(-50, 50, 201)):
        raise BadParameter("potential flagged real but its transform is not Hermitian")
    return V


def random_potential(rng: np.random.Generator, family: str) -> DistributionalPotential:
    """Random member of one supported family (used by property tests and ``verify``)."""
    if family == "delta":
        n = int(rng.integers(1, 4))
        pm = tuple((float(rng.uniform(-3, 3)), float(rng.uniform(-2, 2))) for _ in range(n))
        return DistributionalPotential(pm, label="delta")
    if family == "gaussian":
        return DistributionalPotential(terms=(GaussianTerm(float(rng.uniform(-3, 3)),
                                                           float(rng.uniform(0.3, 2.0)),
                                                           float(rng.uniform(-1, 1))),),
                                       label="gaussian")
    if family == "sech2":
        return DistributionalPotential(terms=(Sech2Term(float(rng.uniform(-3, 3)),
                                                        float(rng.uniform(0.3, 2.0))),),
                                       label="sech2")
    if family == "derivative_gaussian":
        return DistributionalPotential(terms=(DerivativeGaussianTerm(
            float(rng.uniform(-3, 3)), float(rng.uniform(0.3, 2.0))),), label="derivative_gaussian")
    raise BadParameter(f"unknown family {family!r}")


FAMILIES: Sequence[str] = ("delta", "gaussian", "sech2", "derivative_gaussian")


def sesquilinear_form(V: DistributionalPotential, phi, psi, grid) -> complex:
    """``\\int V conj(phi) psi``, i.e. ``<phi conj(psi), V>``, for Gaussian packets."""
    h = phi * psi.conj()
    return pairing(V, GridFunction.from_fourier(grid, h.fourier))
