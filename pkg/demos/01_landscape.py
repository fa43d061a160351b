"""Tour of the optimization landscape.

The potential is a harmonic envelope carrying a cosine corrugation.  Its
difficulty knob is the number of local minima, which this script counts
directly and maps over a small patch of the (h0, w0) plane.
"""

import numpy as np

from anneal1d.potential import (
    PotentialParams,
    count_minima,
    evaluate,
    phase_diagram,
    second_derivative_at_origin,
)

params = PotentialParams(k=1.0, h0=0.2, w0=0.2)

print("reference landscape: k=1, h0=0.2, w0=0.2")
print(f"  V(0)       = {evaluate(params, 0.0)}")
print(f"  V(w0/2)    = {evaluate(params, params.w0 / 2):.4f}   (top of the first barrier)")
print(f"  V(w0)      = {evaluate(params, params.w0):.4f}   (bottom of the first side well)")
print(f"  curvature at the origin = {second_derivative_at_origin(params):.3f}")
print(f"  local minima at x > 0   = {count_minima(params)}")

# sample the potential around the global minimum
x = np.linspace(-0.5, 0.5, 11)
print("\n  x:    " + "  ".join(f"{v:+.2f}" for v in x))
print("  V(x): " + "  ".join(f"{evaluate(params, v):.3f}" for v in x))

# a small patch of the minima-count phase diagram
print("\nminima counts over a coarse (h0, w0) patch:")
cells = phase_diagram((0.0, 2.0), (0.2, 1.0), (5, 5))
w0_vals = sorted({c.w0 for c in cells})
print("  h0\\w0 " + " ".join(f"{w:5.2f}" for w in w0_vals))
for h0 in sorted({c.h0 for c in cells}):
    row = [c.n_min for c in cells if c.h0 == h0]
    print(f"  {h0:4.1f}: " + " ".join(f"{n:5d}" for n in row))

print("\nThe count grows toward small w0 / large h0: more, deeper traps.")
