"""Ground-state energy and excitation gap across the mass range.

E0(m) interpolates between two harmonic oscillators: the envelope
(spring constant k = 1) at small mass and the corrugation well at the
origin (spring constant ~ 99.7) at large mass.  The gap shows a long
flat segment through the middle decades, where the first excited level
pairs up with a degenerate partner localized in the side wells.
"""

import numpy as np

from anneal1d.eigensolver import lowest_eigenpairs, oscillator_gap
from anneal1d.grid import build_grid
from anneal1d.potential import PotentialParams

params = PotentialParams(1.0, 0.2, 0.2)


def grid_for(m):
    # box wide enough for the small-mass state, spacing fine enough for
    # the large-mass one (see converged_grid for the searched version)
    if m <= 30.0:
        return build_grid(6.0, 2048)
    if m <= 3e4:
        return build_grid(1.2, 2048)
    return build_grid(0.5, 2048)


print("mass        E0          gap         outer-osc   inner-osc")
for log_m in np.arange(0.0, 6.1, 0.5):
    m = 10.0**log_m
    grid = grid_for(m)
    res = lowest_eigenpairs(grid, params, m, count=2)
    gap = res.energies[1] - res.energies[0]
    note = "  <- degenerate pair" if res.degenerate_first_excited else ""
    print(
        f"1e{log_m:3.1f}   {res.energies[0]:.7f}   {gap:.6f}   "
        f"{oscillator_gap(params, m):.6f}   {oscillator_gap(params, m, inner=True):.6f}{note}"
    )

print("""
Reading the table:
 * E0 tracks 0.5*sqrt(1/m) at the top and 0.5*sqrt(99.7/m) at the bottom.
 * The gap hugs the band between the two oscillator curves, with a flat
   stretch through m ~ 1e3..1e5 where it barely moves per decade.
""")
