"""Bound states of one and two attractive point interactions.

Run: python demos/delta_wells.py

A single well -2 delta has one level at E = -1 with eigenfunction exp(-|x|).
Two wells -2 delta at +-d/2 split into an even and an odd level; the odd one
exists only once the wells are far enough apart (d > 1 for strength 2).
"""
import numpy as np
from scipy.optimize import brentq

from bs_spectra import DistributionalPotential, default_grid, eigencurves, find_bound_states

grid = default_grid()  # 4096 nodes on [-200, 200]

print("single well, strength -2")
(state,) = find_bound_states(DistributionalPotential.delta(-2.0), 0.05, 4.0, grid)
x, f = state.x, state.f_samples[:, 0].real
err = np.sqrt(np.sum((f - np.exp(-np.abs(x))) ** 2) * (x[1] - x[0]))
print(f"  E = {state.energy:.12f}, L2 distance to exp(-|x|) = {err:.2e}")

print("\ntwo wells, strength -2 each: kappa solves kappa = 1 +- exp(-kappa d)")
for d in (0.5, 1.0, 1.5, 2.0, 4.0):
    V = DistributionalPotential(((-2.0, -d / 2), (-2.0, d / 2)))
    states = find_bound_states(V, 0.01, 4.0, grid, reconstruct=False)
    exact = [brentq(lambda k: k - 1 - np.exp(-k * d), 0.5, 5)]
    if d > 1:
        exact.append(brentq(lambda k: k - 1 + np.exp(-k * d), 1e-6, 5))
    found = ", ".join(f"{s.kappa:.10f}" for s in states)
    print(f"  d = {d:3.1f}: found [{found}]  closed form {np.round(exact, 10).tolist()}")

print("\nBirman-Schwinger eigenvalues along kappa for d = 2 (level crossings of 1 are bound states)")
V = DistributionalPotential(((-2.0, -1.0), (-2.0, 1.0)))
kappas = np.array([0.5, 0.797, 1.0, 1.109, 1.5, 2.0])
for k, row in zip(kappas, eigencurves(V, kappas, grid, count=2)):
    print(f"  kappa = {k:5.3f}: mu = {row[0]:.6f}, {row[1]:.6f}")
