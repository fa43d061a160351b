"""Classical simulated annealing: step size decides everything.

Metropolis walkers anneal from beta ~ 15 to beta ~ 93 under a linear
inverse-temperature ramp - cold enough that side minima become real
traps.  With a hop-capable step size (s/2 > w0) the excess energy over
instantaneous equilibrium decays as 1/T; with a small step the walkers
must hill-climb out of side minima and the curve all but stalls.
"""

import numpy as np

from anneal1d.classical_mc import windowed_residual
from anneal1d.experiments import fit_power_law
from anneal1d.potential import PotentialParams
from anneal1d.schedules import BetaSchedule

params = PotentialParams(1.0, 0.2, 0.2)
beta_i, beta_f = 10.0**1.18, 10.0**1.97
N = 100_000
# keep the sweep where the demo-sized ensemble still resolves the lag
Ts = np.geomspace(100.0, 560.0, 5)

for s, label in ((0.5, "hop-capable step s = 0.5"), (0.1, "small step s = 0.1")):
    rows = []
    for T in Ts:
        sched = BetaSchedule("linear", beta_i=beta_i, beta_f=beta_f, total_time=float(T))
        r, lo, hi, _ = windowed_residual(params, sched, s, N, seed=7)
        rows.append((float(T), r))
    print(f"{label}:")
    for T, r in rows:
        print(f"  T = {T:7.1f}   residual = {r:.3e}")
    if all(r > 0 for _, r in rows):
        fit = fit_power_law(rows, mode="all_points")
        print(f"  fitted exponent: {fit.exponent:+.2f}\n")
    else:
        print("  (residuals at the statistical floor; raise N to fit)\n")

print("The hop-capable curve tracks 1/T; the small-step curve sits orders")
print("of magnitude higher and decays far slower - walkers trapped behind")
print("barriers they cannot jump in one move.")
