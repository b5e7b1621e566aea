"""
Signal fields, contrast and the wave plate
==========================================

Build a small synthetic grid from the three-resonance model, look at the
polarization contrast along the coherence delay, and see what a
quarter-wave plate in front of the analyzer does to it.
"""

import numpy as np

from fwmsec.response import AmplitudeSet, ModelParams, synthesize_field
from fwmsec.signal import (
    DetectionSettings,
    GridAxes,
    detected_contrast,
    polarization_contrast,
    relative_phase,
    split_scp_ocp,
)

params = ModelParams()
amps = AmplitudeSet.from_params(params)
print("amplitudes at T=0  H:", amps.H0)
print("                   V:", amps.V0)

axes = GridAxes(np.arange(0, 10.01, 0.5), [0.0, 100.0, 300.0], [500.0, 520.0, 540.0])
grid = synthesize_field(params, amps, axes)

# contrast is -1 for pure V, +1 for pure H
C = polarization_contrast(grid)
for k, lam in enumerate(axes.lam):
    print(f"{lam:.0f} nm  contrast at tau=0 for T = 0/100/300 fs:", np.round(C[0, :, k], 3))

# the horizontal channel fades with spin relaxation, so the contrast runs to -1

phase = relative_phase(grid)
print("relative phase arg(S_V/S_H) at 540 nm, T=0, first five delays:", np.round(phase[:5, 0, 2], 3))

# S_H and S_V come from the SCP/OCP sum and difference; split them back
scp, ocp = split_scp_ocp(grid)
print("|SCP|, |OCP| at (0, 0, 540 nm):", abs(scp[0, 0, 2]), abs(ocp[0, 0, 2]))

# rotating the wave plate changes which Stokes component the analyzer sees
for theta in (0.0, np.pi / 8, np.pi / 4):
    Cd = detected_contrast(grid, DetectionSettings(theta))
    print(f"theta_qwp = {theta:.3f} rad : detected contrast at 540 nm, tau=0, T=0 -> {float(Cd[0, 0, 2]):+.4f}")

# the combined rephasing + non-rephasing response oscillates along tau at
# the optical beat period
fine = GridAxes(np.round(np.arange(0, 5.001, 0.05), 10), [0.0], [520.0])
comb = synthesize_field(params, amps, fine, pathway="combined")
c = np.ma.getdata(polarization_contrast(comb))[:, 0, 0]
print("combined-pathway contrast, peak-to-peak over 0-5 fs:", round(float(np.ptp(c)), 3))
