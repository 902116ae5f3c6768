"""Resolvents built from A_V(z), and a 2x2 model where multiplicities differ.

Run: python demos/resolvent_and_counterexample.py

For -2 delta the difference R(z) - R0(z) has rank one with norm
|c| / |1 + c/(2 kappa)| / (4 kappa^3).  At the bound state z = -1 the
factorization of I - A_V(z) breaks down, which the library reports.
"""
import numpy as np

from bs_spectra import BSOperator, DistributionalPotential, NearPole, ResolventHandle, default_grid
from bs_spectra import finite_dim, resolvent
from bs_spectra.spectral_solver import find_bound_states

grid = default_grid(200.0, 128, 16)
V = DistributionalPotential.delta(-2.0)
for kappa in (1.5, 2.0, 3.0):
    sv = resolvent.resolvent_difference_svals(V, -kappa**2, 2, grid)
    exact = 2 / abs(1 - 1 / kappa) / (4 * kappa**3)
    print(f"z = {-kappa**2:5.2f}: sigma = {sv[0]:.10f} (closed form {exact:.10f}), sigma2/sigma1 = {sv[1] / sv[0]:.1e}")

print("first resolvent identity residual:", f"{resolvent.resolvent_identity_residual(V, -4, -9, 10, grid):.1e}")

op = BSOperator(V, grid, tail="nodes")
(state,) = find_bound_states(V, 0.05, 4.0, grid, tol=1e-15, operator=op, reconstruct=False)
try:
    ResolventHandle(V, grid, state.energy, operator=op)
except NearPole as exc:
    print("at the bound state:", exc)

print()
for a in (4.0, -3.0):
    rep = finite_dim.report(a)
    print(f"a = {a}: eigenvalues of A_V(0) = {np.round(rep['eigenvalues_A'], 12)}, "
          f"(m_g(H), m_a(H), m_g(A), m_a(A)) = {rep['multiplicities']}")
