"""A 2x2 model where the Birman-Schwinger correspondence keeps geometric but not
algebraic multiplicities.

``H0 = diag(1, a)``, ``V = [[0, 1], [-1, -1-a]]``, so ``H = H0 + V = [[1, 1], [-1, -1]]``
is nilpotent: 0 is an eigenvalue of H with geometric multiplicity 1 and algebraic
multiplicity 2, while ``A_V(0)`` has the simple eigenvalue 1 (and ``1/a``).

Multiplicities are computed in exact rational arithmetic from integer/rational
data: the characteristic polynomial of ``A_V(0)`` is ``(z - 1)(z - 1/a)``, whose
coefficients are rational in ``a`` even though the entries involve ``a^(-1/2)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .bs_core import sqrt_branch
from .errors import BadParameter

RANK_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class CounterexampleInstance:
    a: float
    z: complex
    H0: np.ndarray
    V: np.ndarray
    H: np.ndarray
    A: np.ndarray  # A_V(z)


def _inv_sqrt(w: complex) -> complex:
    return 1.0 / sqrt_branch(w)


def build(a: float, z: complex = 0.0) -> CounterexampleInstance:
    """Matrices of the model and ``A_V(z) = -(H0 - z)^(-1/2) V (H0 - z)^(-1/2)``."""
    a = float(a)
    if not np.isfinite(a) or a == 1.0 or a == 0.0:
        raise BadParameter("need finite a with a != 1 and a != 0")
    z = complex(z)
    if z == 1 or z == a:
        raise BadParameter("z must avoid the spectrum {1, a} of H0")
    H0 = np.diag([1.0, a]).astype(complex)
    V = np.array([[0.0, 1.0], [-1.0, -1.0 - a]], dtype=complex)
    H = H0 + V
    S = np.diag([_inv_sqrt(1 - z), _inv_sqrt(a - z)])
    A = -S @ V @ S
    return CounterexampleInstance(a, z, H0, V, H, A)


# ---------------------------------------------------------------------------
# exact helpers
# ---------------------------------------------------------------------------

def _frac(x) -> Fraction:
    return Fraction(x).limit_denominator(10**12) if isinstance(x, float) else Fraction(x)


def char_poly_H(a) -> tuple[Fraction, Fraction]:
    """``(trace, det)`` of H; independent of ``a`` since H = [[1,1],[-1,-1]]."""
    H = [[Fraction(1), Fraction(1)], [Fraction(-1), Fraction(-1)]]
    return H[0][0] + H[1][1], H[0][0] * H[1][1] - H[0][1] * H[1][0]


def char_poly_A0(a) -> tuple[Fraction, Fraction]:
    """``(trace, det)`` of ``A_V(0)`` in exact arithmetic.

    ``A_V(0) = [[0, -p], [p, (1+a)/a]]`` with ``p^2 = 1/a`` (for either sign of a
    the off-diagonal product is ``-p * p = -1/a`` under a consistent branch), so
    trace ``(1+a)/a`` and determinant ``p^2 = 1/a``.
    """
    fa = _frac(a)
    return (1 + fa) / fa, 1 / fa


def _root_multiplicity(trace: Fraction, det: Fraction, root: Fraction) -> int:
    """Multiplicity of ``root`` in ``x^2 - trace x + det``."""
    if root * root - trace * root + det != 0:
        return 0
    return 2 if 2 * root == trace else 1  # double root iff derivative vanishes too


def _geometric(M: np.ndarray, lam: complex) -> int:
    sv = np.linalg.svd(M - lam * np.eye(M.shape[0]), compute_uv=False)
    return int(np.sum(sv < RANK_TOL * max(1.0, np.abs(M).max())))


def multiplicities(inst: CounterexampleInstance) -> tuple[int, int, int, int]:
    """``(m_g(H; 0), m_a(H; 0), m_g(A_V(0); 1), m_a(A_V(0); 1))``."""
    if inst.z != 0:
        raise BadParameter("multiplicities are defined for the instance built at z = 0")
    mg_H = _geometric(inst.H, 0.0)
    ma_H = _root_multiplicity(*char_poly_H(inst.a), Fraction(0))
    mg_A = _geometric(inst.A, 1.0)
    ma_A = _root_multiplicity(*char_poly_A0(inst.a), Fraction(1))
    return mg_H, ma_H, mg_A, ma_A


def char_poly_coefficients(inst: CounterexampleInstance) -> np.ndarray:
    """Floating coefficients ``[1, -trace, det]`` of the characteristic polynomial of ``A``."""
    A = inst.A
    return np.array([1.0, -np.trace(A), np.linalg.det(A)])


def kernel_correspondence(inst: CounterexampleInstance) -> float:
    """Check that ``g = H0^(1/2) f`` maps ``ker H`` onto ``ker(I - A_V(0))``.

    Returns ``||(I - A) g|| / ||g||`` for ``f = (1, -1)`` spanning ``ker H``.
    """
    if inst.z != 0:
        raise BadParameter("correspondence is checked at z = 0")
    f = np.array([1.0, -1.0], dtype=complex)
    if np.linalg.norm(inst.H @ f) > RANK_TOL:
        raise BadParameter("(1, -1) is not in ker H")
    g = np.array([sqrt_branch(1.0), sqrt_branch(inst.a)]) * f
    return float(np.linalg.norm(g - inst.A @ g) / np.linalg.norm(g))


def report(a: float) -> dict:
    inst = build(a, 0.0)
    ev = np.linalg.eigvals(inst.A)
    return {
        "a": a,
        "H0": inst.H0,
        "V": inst.V,
        "H": inst.H,
        "H_squared": inst.H @ inst.H,
        "A_V(0)": inst.A,
        "eigenvalues_A": ev[np.argsort(-ev.real)],
        "char_poly_A": char_poly_coefficients(inst),
        "multiplicities": multiplicities(inst),
        "kernel_correspondence": kernel_correspondence(inst),
    }
