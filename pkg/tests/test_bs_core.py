import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bs_spectra import bs_core
from bs_spectra.bs_core import (
    BSOperator, SpectralParameter, assemble, embedding_constant, fredholm_det, hs_norm,
    hs_norm_formula, operator_norm, spectrum, sqrt_branch, top_eigenpairs, trace, trace_formula,
    verify_hypothesis,
)
from bs_spectra.errors import BadParameter, SpectrumPoint
from bs_spectra.fourier import make_grid
from bs_spectra.potential import (
    DerivativeGaussianTerm, DistributionalPotential, GaussianTerm, Sech2Term, h_minus_one_norm,
)


# --- branch and parameters -------------------------------------------------------

@pytest.mark.parametrize("w,root", [(4, 2), (-1, 1j), (-2j, -1 + 1j)])
def test_sqrt_branch_examples(w, root):
    assert sqrt_branch(w) == pytest.approx(root, abs=1e-15)


@settings(max_examples=100, deadline=None)
@given(st.complex_numbers(max_magnitude=1e6, allow_nan=False, allow_infinity=False).filter(lambda w: abs(w) > 1e-6))
def test_sqrt_branch_upper_half_plane(w):
    r = sqrt_branch(w)
    assert r.imag >= 0
    assert abs(r * r - w) <= 1e-14 * abs(w)


@pytest.mark.parametrize("z", [0.0, 1.0, 3 + 1e-15j, -1e-15])
def test_spectral_parameter_rejects_spectrum(z):
    with pytest.raises(SpectrumPoint):
        SpectralParameter(z)


def test_spectral_parameter_kappa():
    assert SpectralParameter.from_kappa(1.5).z == -2.25
    assert SpectralParameter(-4.0).kappa == 2.0
    k = SpectralParameter(1 + 1j).kappa
    assert k.real > 0 and k * k == pytest.approx(-(1 + 1j))


@pytest.mark.parametrize("kappa,c", [(0.5, 2.0), (1.0, 1.0), (3.0, 1.0)])
def test_embedding_constant(kappa, c):
    assert embedding_constant(kappa) == c


def test_assemble_on_spectrum_fails(point_grid, delta_well):
    with pytest.raises(SpectrumPoint):
        assemble(delta_well, point_grid, 0.5)


# --- structure of the matrix -------------------------------------------------------

def test_delta_matrix_is_rank_one_outer_product(delta_well):
    g = make_grid(50.0, 32, 8)
    M = assemble(delta_well, g, -1.0, tail="nodes")
    u = np.sqrt(g.all_weights) / np.sqrt(g.all_nodes**2 + 1)
    np.testing.assert_allclose(M.entries, (2 / (2 * np.pi)) * np.outer(u, u), atol=1e-15)
    assert np.linalg.matrix_rank(M.entries, tol=1e-12) == 1


def test_delta_top_eigenvalue_tends_to_one(delta_well):
    errs = []
    for panels in (8, 32, 128):
        g = make_grid(50.0, panels, 8)
        mu = spectrum(assemble(delta_well, g, -1.0, tail="nodes"))[0]
        errs.append(abs(mu - 1))
    assert errs[2] < errs[0]
    # with the exact tail only the core quadrature error is left
    assert abs(spectrum(assemble(delta_well, make_grid(50.0, 64, 16), -1.0))[0] - 1) < 1e-13


def test_zero_potential_matrix(point_grid):
    M = assemble(DistributionalPotential.zero(), point_grid, -1.0)
    assert hs_norm(M) == 0 and operator_norm(M) == 0
    assert fredholm_det(M) == 1
    assert np.all(spectrum(M) == 0)


def test_real_gaussian_is_hermitian(gaussian_well, smooth_grid):
    M = assemble(gaussian_well, smooth_grid, -1.0)
    assert M.hermitian
    np.testing.assert_allclose(M.entries, M.entries.conj().T, atol=1e-15)


def test_complex_z_is_not_hermitian(gaussian_well, smooth_grid):
    M = assemble(gaussian_well, smooth_grid, -1 + 0.5j)
    assert not M.hermitian
    with pytest.raises(BadParameter):
        top_eigenpairs(M, 2)


def test_matvec_matches_dense(smooth_grid, rng):
    V = DistributionalPotential(((-1.0, 0.4),), (GaussianTerm(-0.8, 1.0),))
    M = assemble(V, smooth_grid, -2.0)
    v = rng.normal(size=M.dim) + 1j * rng.normal(size=M.dim)
    np.testing.assert_allclose(M.matvec(v), M.entries @ v, atol=1e-13)


def test_operator_reuse_across_z(gaussian_well, smooth_grid):
    op = BSOperator(gaussian_well, smooth_grid)
    for z in (-1.0, -3.0 + 1j):
        np.testing.assert_array_equal(op.assemble(z).entries,
                                      assemble(gaussian_well, smooth_grid, z).entries)


def test_bad_tail_mode(delta_well, smooth_grid):
    with pytest.raises(BadParameter):
        BSOperator(delta_well, smooth_grid, tail="none")


# --- closed forms ---------------------------------------------------------------------

@pytest.mark.parametrize("kappa,value", [(1.0, 0.5), (2.0, 0.25)])
def test_hs_formula_delta(kappa, value):
    assert hs_norm_formula(DistributionalPotential.delta(1.0), kappa) == pytest.approx(value, rel=1e-15)


def test_hs_formula_zero():
    assert hs_norm_formula(DistributionalPotential.zero(), 1.0) == 0


def test_trace_formula_examples():
    assert trace_formula(DistributionalPotential.delta(-1.0), 1.0) == pytest.approx(0.5)
    gauss = DistributionalPotential(terms=(GaussianTerm(-1.0, 1 / np.sqrt(2)),))
    assert trace_formula(gauss, 1.0) == pytest.approx(np.sqrt(np.pi) / 2, rel=1e-14)
    deriv = DistributionalPotential(terms=(DerivativeGaussianTerm(2.0, 0.5),))
    assert trace_formula(deriv, 1.0) == 0


@pytest.mark.parametrize("fn", [hs_norm_formula, trace_formula])
def test_formulas_need_positive_kappa(fn):
    with pytest.raises(BadParameter):
        fn(DistributionalPotential.delta(1.0), 0.0)


@pytest.mark.parametrize("kappa", [0.3, 1.0, 2.5])
def test_point_mass_matrix_is_exact(kappa, point_grid):
    V = DistributionalPotential(((-2.0, -0.7), (1.5, 0.2), (-0.5, 1.1)))
    M = assemble(V, point_grid, -kappa * kappa)
    assert hs_norm(M) == pytest.approx(hs_norm_formula(V, kappa), rel=1e-11)
    assert trace(M) == pytest.approx(trace_formula(V, kappa), rel=1e-11)


def test_two_delta_eigenvalues(point_grid):
    """-2(delta_{-1/2} + delta_{1/2}): eigenvalues (1/kappa)(1 +- e^{-kappa})."""
    V = DistributionalPotential(((-2.0, -0.5), (-2.0, 0.5)))
    for kappa in (0.5, 1.0, 3.0):
        mu = spectrum(assemble(V, point_grid, -kappa * kappa))[:3]
        expected = [(1 + np.exp(-kappa)) / kappa, (1 - np.exp(-kappa)) / kappa, 0.0]
        np.testing.assert_allclose(mu, expected, atol=1e-11)


def test_gaussian_matrix_hs_and_trace():
    g = make_grid(400.0, 128, 16)
    V = DistributionalPotential(terms=(GaussianTerm(-1.0, 1.0),))
    for kappa in (0.5, 2.0):
        M = assemble(V, g, -kappa * kappa)
        f = hs_norm_formula(V, kappa)
        assert abs(hs_norm(M) - f) / f < 1e-4
        assert abs(trace(M) - trace_formula(V, kappa)) / abs(trace_formula(V, kappa)) < 1e-8


def test_sech2_trace():
    V = DistributionalPotential(terms=(Sech2Term(-2.0, 1.0),))  # integral -4
    assert trace_formula(V, 2.0) == pytest.approx(1.0, rel=1e-14)


@settings(max_examples=30, deadline=None)
@given(st.floats(-3, 3).filter(lambda c: abs(c) > 0.01), st.floats(-2, 2),
       st.floats(0.2, 5), st.floats(0.3, 3))
def test_dilation_covariance_of_hs_formula(c, x0, kappa, lam):
    V = DistributionalPotential(((c, x0),), (GaussianTerm(c, 0.8, x0),))
    assert hs_norm_formula(V.dilated(lam), lam * kappa) == pytest.approx(hs_norm_formula(V, kappa), rel=1e-8)


# --- eigen machinery ------------------------------------------------------------------

def test_point_only_spectrum_matches_dense(point_grid):
    V = DistributionalPotential(((-2.0, -1.0), (1.0, 0.0), (-1.0, 1.3)))
    M = assemble(V, make_grid(40.0, 16, 8), -1.3)
    dense = np.sort(np.linalg.eigvals(M.entries).real)[::-1]
    np.testing.assert_allclose(spectrum(M)[:3].real, dense[:3], atol=1e-12)
    mu, vecs = top_eigenpairs(M, 2)
    for j in range(2):
        np.testing.assert_allclose(M.entries @ vecs[:, j], mu[j] * vecs[:, j], atol=1e-12)


def test_top_eigenpairs_iterative_matches_dense():
    g = make_grid(30.0, 32, 16)
    V = DistributionalPotential(terms=(Sech2Term(-6.0, 1.0),))
    M = assemble(V, g, -0.5)
    mu, vecs = top_eigenpairs(M, 3)
    dense = np.sort(np.linalg.eigvalsh(M.entries))[::-1][:3]
    np.testing.assert_allclose(mu, dense, atol=1e-11)
    np.testing.assert_allclose(np.abs(vecs.conj().T @ vecs), np.eye(3), atol=1e-9)


def test_operator_norm_bounds_spectral_radius(gaussian_well, smooth_grid):
    M = assemble(gaussian_well, smooth_grid, -1 + 1j)
    assert operator_norm(M) >= np.abs(spectrum(M)).max() - 1e-13
    assert operator_norm(M) <= hs_norm(M) + 1e-13


def test_fredholm_det_delta(point_grid, delta_well):
    assert abs(fredholm_det(assemble(delta_well, point_grid, -1.0))) < 1e-12
    assert fredholm_det(assemble(delta_well, point_grid, -4.0)) == pytest.approx(0.5, abs=1e-12)


def test_fredholm_det_equals_eigenvalue_product(smooth_grid):
    V = DistributionalPotential(((-1.0, 0.0),), (GaussianTerm(-0.5, 1.0),))
    M = assemble(V, smooth_grid, -2.0)
    mu = np.linalg.eigvals(M.entries)
    assert fredholm_det(M) == pytest.approx(np.prod(1 - mu), rel=1e-10)


# --- hypothesis check ---------------------------------------------------------------------

def test_verify_hypothesis_delta():
    assert verify_hypothesis(DistributionalPotential.delta(-2.0)) <= -4.0


def test_verify_hypothesis_zero():
    assert verify_hypothesis(DistributionalPotential.zero()) == -1.0


def test_verify_hypothesis_large_norm_terminates_quickly():
    V = DistributionalPotential(terms=(GaussianTerm(-1.0, 0.5),))
    V = V * (10.0 / h_minus_one_norm(V))
    assert h_minus_one_norm(V) == pytest.approx(10.0, rel=1e-6)
    E0 = verify_hypothesis(V)
    assert E0 >= -(2.0**6) ** 2
    assert hs_norm_formula(V, np.sqrt(-E0)) <= 0.5
