import numpy as np
import pytest
from scipy.optimize import brentq

from bs_spectra import spectral_solver as ss
from bs_spectra.bs_core import BSOperator, assemble
from bs_spectra.errors import BadParameter, GridMismatch
from bs_spectra.fourier import default_grid, make_grid
from bs_spectra.potential import DistributionalPotential, GaussianTerm, Sech2Term


def fixed_point(sign, d):
    """Root of kappa = 1 + sign * exp(-kappa d): bound states of -2 delta at +-d/2."""
    return brentq(lambda k: k - 1 - sign * np.exp(-k * d), 0.01, 5.0, xtol=1e-15)


@pytest.fixture(scope="module")
def grid4096():
    return default_grid(200.0, 256, 16)


@pytest.fixture(scope="module")
def pt_grid():
    return make_grid(40.0, 32, 16)


# --- eigencurves ---------------------------------------------------------------------

def test_delta_curve_is_one_over_kappa(point_grid, delta_well):
    kappas = np.linspace(0.3, 4, 12)
    curves = ss.eigencurves(delta_well, kappas, point_grid, count=3)
    np.testing.assert_allclose(curves[:, 0], 1 / kappas, rtol=1e-11)
    assert np.all(np.abs(curves[:, 1:]) < 1e-12)


def test_zero_potential_curves(point_grid):
    curves = ss.eigencurves(DistributionalPotential.zero(), [0.5, 1.0, 2.0], point_grid, count=4)
    assert np.all(curves == 0)


def test_double_delta_curves(point_grid):
    V = DistributionalPotential(((-2.0, -0.5), (-2.0, 0.5)))
    kappas = np.geomspace(0.2, 5, 15)
    curves = ss.eigencurves(V, kappas, point_grid, count=2)
    np.testing.assert_allclose(curves[:, 0], (1 + np.exp(-kappas)) / kappas, rtol=1e-10)
    np.testing.assert_allclose(curves[:, 1], (1 - np.exp(-kappas)) / kappas, rtol=1e-9)


def test_curves_follow_continuity_through_crossing(point_grid):
    # an attractive and a repulsive-shifted pair: the matched curves stay smooth
    V = DistributionalPotential(((-2.0, -3.0), (-1.0, 3.0)))
    kappas = np.linspace(0.5, 3, 40)
    curves = ss.eigencurves(V, kappas, point_grid, count=2)
    assert np.max(np.abs(np.diff(curves, 2, axis=0))) < 0.05


def test_eigencurves_reject_bad_ladder(point_grid, delta_well):
    with pytest.raises(BadParameter):
        ss.eigencurves(delta_well, [1.0, 0.5], point_grid)


# --- bound states -------------------------------------------------------------------

def test_single_delta(point_grid, delta_well):
    states = ss.find_bound_states(delta_well, 0.05, 4.0, point_grid)
    assert len(states) == 1
    s = states[0]
    assert abs(s.kappa - 1) < 1e-6 and abs(s.energy + 1) < 2e-6
    assert s.multiplicity == 1 and s.E == s.energy
    assert s.eigen_residual < 1e-8


def test_double_delta_at_half(point_grid):
    """Separation 1 sits exactly at the odd-state threshold (alpha d / 2 = 1): one state."""
    V = DistributionalPotential(((-2.0, -0.5), (-2.0, 0.5)))
    states = ss.find_bound_states(V, 0.01, 4.0, point_grid, reconstruct=False)
    assert len(states) == 1
    assert states[0].kappa == pytest.approx(fixed_point(+1, 1.0), rel=1e-8)


def test_double_delta_at_one(point_grid):
    """Separation 2: kappa = 1 +- exp(-2 kappa), roots near 1.109 and 0.797."""
    V = DistributionalPotential(((-2.0, -1.0), (-2.0, 1.0)))
    even, odd = ss.find_bound_states(V, 0.05, 4.0, point_grid, reconstruct=False)
    assert even.kappa == pytest.approx(1.109, abs=1e-3)
    assert odd.kappa == pytest.approx(0.797, abs=1e-3)
    assert even.kappa == pytest.approx(fixed_point(+1, 2.0), rel=1e-8)
    assert odd.kappa == pytest.approx(fixed_point(-1, 2.0), rel=1e-8)


def test_repulsive_delta_has_no_states(point_grid):
    assert ss.find_bound_states(DistributionalPotential.delta(2.0), 0.1, 10.0, point_grid) == []


def test_poschl_teller(pt_grid):
    V = DistributionalPotential(terms=(Sech2Term(-6.0, 1.0),))
    states = ss.find_bound_states(V, 0.1, 5.0, pt_grid)
    np.testing.assert_allclose([s.energy for s in states], [-4.0, -1.0], atol=1e-8)


def test_gaussian_well_energy_matches_finite_differences():
    V = DistributionalPotential(terms=(GaussianTerm(-3.0, 1.0),))
    states = ss.find_bound_states(V, 0.05, 5.0, make_grid(40.0, 32, 16), reconstruct=False)
    # independent oracle: 4th-order finite differences in real space
    L, n = 20.0, 2000
    x = np.linspace(-L, L, n)
    h = x[1] - x[0]
    main = np.full(n, 5 / 2) / h**2 + V.terms[0](x)
    off1 = np.full(n - 1, -4 / 3) / h**2
    off2 = np.full(n - 2, 1 / 12) / h**2
    H = np.diag(main) + np.diag(off1, 1) + np.diag(off1, -1) + np.diag(off2, 2) + np.diag(off2, -2)
    E = np.linalg.eigvalsh(H)
    E = E[E < -0.01]
    np.testing.assert_allclose([s.energy for s in states], E, atol=1e-6)


def test_dilated_energies_scale(point_grid, delta_well):
    e1 = ss.find_bound_states(delta_well, 0.05, 4.0, point_grid, reconstruct=False)[0].energy
    e2 = ss.find_bound_states(delta_well.dilated(1.5), 0.05, 8.0, point_grid, reconstruct=False)[0].energy
    assert e2 == pytest.approx(1.5**2 * e1, rel=1e-9)


def test_threads_do_not_change_results(point_grid, monkeypatch):
    V = DistributionalPotential(((-2.0, -1.0), (-3.0, 1.0)))
    serial = ss.find_bound_states(V, 0.05, 4.0, point_grid, reconstruct=False)
    monkeypatch.setenv("BS_SPECTRA_THREADS", "4")
    assert ss.thread_count() == 4
    parallel = ss.find_bound_states(V, 0.05, 4.0, point_grid, reconstruct=False)
    assert [s.kappa for s in serial] == [s.kappa for s in parallel]


def test_thread_count_ignores_garbage(monkeypatch):
    monkeypatch.setenv("BS_SPECTRA_THREADS", "many")
    assert ss.thread_count() == 1


@pytest.mark.parametrize("args", [(0.0, 1.0), (2.0, 1.0)])
def test_bad_kappa_range(point_grid, delta_well, args):
    with pytest.raises(BadParameter):
        ss.find_bound_states(delta_well, *args, point_grid)


def test_complex_potential_rejected(point_grid):
    with pytest.raises(BadParameter):
        ss.find_bound_states(DistributionalPotential.delta(-1j, real=False), 0.1, 2.0, point_grid)


# --- eigenfunctions -------------------------------------------------------------------

def test_delta_eigenfunction_is_exponential(grid4096, delta_well):
    s = ss.find_bound_states(delta_well, 0.05, 4.0, grid4096)[0]
    dx = s.x[1] - s.x[0]
    dev = np.sqrt(np.sum(np.abs(s.f_samples[:, 0] - np.exp(-np.abs(s.x))) ** 2) * dx)
    assert dev < 1e-4


def test_double_delta_parity(grid4096):
    V = DistributionalPotential(((-2.0, -1.0), (-2.0, 1.0)))
    even, odd = ss.find_bound_states(V, 0.05, 4.0, grid4096)
    fe, fo = even.f_samples[:, 0], odd.f_samples[:, 0]
    # the dual grid is symmetric, so reversing the samples is x -> -x
    assert np.max(np.abs(fe - fe[::-1])) < 1e-6
    assert np.max(np.abs(fo + fo[::-1])) < 1e-6
    assert np.max(np.abs(fo)) > 0.1


def test_poschl_teller_ground_state_shape(pt_grid):
    V = DistributionalPotential(terms=(Sech2Term(-2.0, 1.0),))
    (s,) = ss.find_bound_states(V, 0.1, 3.0, pt_grid)
    x = np.linspace(-5, 5, 11)
    np.testing.assert_allclose(s.functions[0].at(x).real, np.sqrt(0.5) / np.cosh(x), atol=1e-8)


def test_reconstruct_rejects_wrong_energy(point_grid, delta_well):
    s = ss.find_bound_states(delta_well, 0.05, 4.0, point_grid, reconstruct=False)[0]
    with pytest.raises(GridMismatch):
        ss.reconstruct_eigenfunction(assemble(delta_well, point_grid, -2.0), s)


# --- weak residual --------------------------------------------------------------------

def test_weak_residual_single_delta(point_grid, delta_well):
    s = ss.find_bound_states(delta_well, 0.05, 4.0, point_grid)[0]
    assert ss.weak_residual(delta_well, s) < 1e-4


def test_weak_residual_double_delta(point_grid):
    V = DistributionalPotential(((-2.0, -0.5), (-2.0, 0.5)))
    for s in ss.find_bound_states(V, 0.05, 4.0, point_grid):
        assert ss.weak_residual(V, s) < 1e-3


def test_weak_residual_negative_control(point_grid, delta_well):
    s = ss.find_bound_states(delta_well, 0.05, 4.0, point_grid)[0]
    # the delta eigenfunction is not an eigenfunction of the free operator
    assert ss.weak_residual(DistributionalPotential.zero(), s) > 0.05


def test_weak_residual_needs_eigenfunction(point_grid, delta_well):
    s = ss.find_bound_states(delta_well, 0.05, 4.0, point_grid, reconstruct=False)[0]
    with pytest.raises(BadParameter):
        ss.weak_residual(delta_well, s)


# --- determinant zeros in the complex plane ----------------------------------------------

def test_determinant_winding_counts_bound_states(pt_grid):
    V = DistributionalPotential(terms=(Sech2Term(-6.0, 1.0),))
    op = BSOperator(V, pt_grid)
    assert ss.count_determinant_zeros(V, (-5, -0.5, -0.3, 0.3), pt_grid, points_per_side=40, operator=op) == 2
    assert ss.count_determinant_zeros(V, (-3.5, -1.5, -0.3, 0.3), pt_grid, points_per_side=40, operator=op) == 0


def test_determinant_winding_rejects_spectrum(point_grid, delta_well):
    with pytest.raises(BadParameter):
        ss.count_determinant_zeros(delta_well, (-1, 1, -1, 1), point_grid)
