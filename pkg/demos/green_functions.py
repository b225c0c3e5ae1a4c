"""Time-domain Green functions at one wavenumber.

Steps G and H on a uniform grid, splits them into the undamped oscillation
and a regular remainder, cross-checks a few times against a Bromwich contour
integral, and fits the late-time decay of the electric remainder.
"""
import numpy as np

from vm_landau import equilibrium as eqm
from vm_landau import green as grn

eq = eqm.maxwellian()
k = 0.5
grid = grn.time_grid(eq, k, 40.0, dt=2e-3)
G = grn.decompose(grn.resolvent_G(eq, k, grid))
H = grn.decompose(grn.greens_H(eq, k, grid))
print(f"dt={grid.dt:.4g}, steps={grid.n_steps}")
print("residues a:", G.residues, " b:", H.residues)
for t in (5.0, 20.0, 40.0):
    i = int(round(t / grid.dt))
    print(f"t={t:5.1f}  G={G.values[i].real:+.8f} (Bromwich {grn.bromwich_invert(eq, 'G', k, t).real:+.8f})"
          f"  H={H.values[i].real:+.8f} (Bromwich {grn.bromwich_invert(eq, 'H', k, t).real:+.8f})")

ts = np.linspace(20.0, 600.0, 1200)
reg = grn.regular_part_spectral(eq, "G", k, ts)
fit = grn.fit_decay(reg, ts, k, "kt")
print(f"regular part of G: local log-log slope {fit['slope']:.2f} over kt in {fit['window']}")
