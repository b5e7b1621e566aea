"""
Bloch vectors and windowed Holevo bounds
========================================

Every bright grid point is a pure polarization state. Averaging them over a
wavelength window gives a mixed state whose entropy bounds what an
eavesdropper can learn. Sampling fewer delays usually shrinks the spread.
"""

import numpy as np

from fwmsec.config import SynthesisConfig
from fwmsec.qstate import (
    density_from_bloch,
    ensemble_average,
    grid_bloch_vectors,
    holevo_bound,
    holevo_expansion,
    state_from_fields,
    von_neumann_entropy,
    windowed_holevo_report,
)
from fwmsec.response import synthesize_field

# a few hand-made states first
for fields in [(1, 0), (1, 1), (1, 1j)]:
    s = state_from_fields(*fields)
    print(fields, "-> bloch", np.round(s.bloch, 6))

pair = [state_from_fields(1, 0), state_from_fields(1, 1)]
r_bar, rho = ensemble_average(pair)
print("H and D averaged: r_bar =", r_bar, " chi =", round(holevo_bound(pair), 6))
print("entropy of the mean state:", round(von_neumann_entropy(rho), 6))

# close to the maximally mixed state the entropy is nearly quadratic
for r in (0.05, 0.2, 0.4):
    exact = von_neumann_entropy(density_from_bloch((r, 0, 0)))
    print(f"|r|={r}: exact {exact:.6f}  expansion {holevo_expansion(r):.6f}")

syn = SynthesisConfig()
grid = synthesize_field(syn.params, syn.amplitudes, syn.axes)
r, dark = grid_bloch_vectors(grid)
print("grid", grid.shape, "dark points:", int(dark.sum()),
      " max | |r| - 1 |:", float(np.max(np.abs(np.linalg.norm(r[~dark], axis=-1) - 1))))

for comp in windowed_holevo_report(grid, [(495, 505), (515, 525), (535, 545)], tau0=0.0):
    lo, hi = comp.window
    print(f"{lo:.0f}-{hi:.0f} nm  chi(tau,T,lam) = {comp.full.chi:.3f}  chi(T,lam) = {comp.reduced.chi:.3f}"
          f"  delta = {comp.delta_chi:+.3f}  (|r_bar| {comp.full.r_norm:.3f})")
