"""Growth rates of flat-film perturbations across the instability onset.

The flat film h = 1 is stationary for every Marangoni number M.  Its
linearisation has growth rate lambda(k) = -|k|^4 - (g - M/4)|k|^2, so for
M <= 4g every nonzero wave number decays, while for M = 4g + 4*k0^2 the
band 0 < |k| < k0 grows: a conserved long-wave instability.  This script
tabulates the three regimes and writes an SVG plot.
"""

import os

import numpy as np

from thinfilm import critical_marangoni, dispersion
from thinfilm.render import svg_line_plot

out = os.environ.get("THINFILM_OUTDIR", "demo_out")
os.makedirs(out, exist_ok=True)

g = 1.0
print(f"g = {g}: onset at M* = {critical_marangoni(g, 0.0)}; "
      f"patterns with k0 = 1 bifurcate at M*(k0) = {critical_marangoni(g, 1.0)}")

ks = np.linspace(0, 1.6, 321)
curves = []
for M in (3.0, 4.0, 8.0):
    lam = np.array([dispersion(k, M, g) for k in ks])
    curves.append((ks, lam, f"M={M:g}"))
    band = ks[lam > 0]
    if band.size:
        print(f"M = {M:g}: unstable band |k| in ({band.min():.3f}, {band.max():.3f})")
    else:
        print(f"M = {M:g}: stable (growth rate <= 0 everywhere)")

path = os.path.join(out, "dispersion.svg")
svg_line_plot(path, curves, xlabel="|k|", ylabel="growth rate",
              title="flat-film dispersion relation, g = 1")
print(f"wrote {path}")
