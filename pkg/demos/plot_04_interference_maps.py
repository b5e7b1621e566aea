"""
Exciton-biexciton interference maps
===================================

Sweep the spectral overlap between the exciton and each biexciton and the
population time in units of the spin lifetime, for three detection
wavelengths and two coherence delays. All six panels share one
normalization, and each is written out as an SVG heatmap.
"""

from pathlib import Path

import numpy as np

from fwmsec.response import ModelParams, interference_panels
from fwmsec.svg import heatmap_svg

params = ModelParams()
print("overlap parameters of the material:", round(params.xi("par"), 4), round(params.xi("perp"), 4))

xi, tnorm, panels = interference_panels(params, grid_density=120)
for (lam, tau), v in sorted(panels.items()):
    i, j = np.unravel_index(np.argmax(v), v.shape)
    print(f"{lam:.0f} nm, tau={tau:.0f} fs: max {v.max():.3f} at Xi={xi[i]:.2f}, T/t_spin={tnorm[j]:.2f}")

# the spin factor exp(-2T/t_spin) makes every column smaller than the last
v = panels[(520.0, 0.0)]
print("T-profile of the 520 nm panel (max over Xi):", np.round(v.max(axis=0)[::20], 4))

out = Path("demo_maps")
out.mkdir(exist_ok=True)
for (lam, tau), v in panels.items():
    svg = heatmap_svg(v, xi, tnorm, f"|r_int| {lam:g} nm, tau {tau:g} fs", "Xi", "T / t_spin")
    (out / f"map_{lam:g}nm_tau{tau:g}.svg").write_text(svg, encoding="utf-8")
print("wrote", len(panels), "heatmaps to", out.resolve())
