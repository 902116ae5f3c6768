"""Smooth and derivative-type potentials: levels, norms and trace identities.

Run: python demos/smooth_wells.py

The Poeschl-Teller well -l(l+1) sech^2 x has levels -n^2, n = 1..l.  For any
potential the Hilbert-Schmidt norm and trace of A_V(-kappa^2) are known in
closed form from the Fourier transform of V; the table compares them with the
discretized operator.
"""
import numpy as np

from bs_spectra import (
    DistributionalPotential, assemble, find_bound_states, hs_norm, hs_norm_formula, make_grid,
    trace, trace_formula,
)
from bs_spectra.potential import DerivativeGaussianTerm, GaussianTerm, Sech2Term

grid = make_grid(40.0, 32, 16)
for l in (1, 2, 3):
    V = DistributionalPotential(terms=(Sech2Term(-l * (l + 1.0), 1.0),))
    energies = [s.energy for s in find_bound_states(V, 0.1, l + 1.0, grid, reconstruct=False)]
    print(f"sech^2 well, l = {l}: E = {np.round(energies, 10).tolist()}")

wide = make_grid(400.0, 128, 16)
cases = {
    "gaussian": DistributionalPotential(terms=(GaussianTerm(-1.0, 1.0),)),
    "gaussian + derivative": DistributionalPotential(terms=(GaussianTerm(-1.0, 1.0),
                                                            DerivativeGaussianTerm(0.7, 0.5))),
}
print("\nkappa   HS(matrix)      HS(formula)     trace(matrix)   trace(formula)")
for name, V in cases.items():
    print(name)
    for kappa in (0.5, 1.0, 2.0):
        M = assemble(V, wide, -kappa**2)
        print(f"  {kappa:4.1f}  {hs_norm(M):.12f}  {hs_norm_formula(V, kappa):.12f}"
              f"  {trace(M).real:.12f}  {trace_formula(V, kappa).real:.12f}")
