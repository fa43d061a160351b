"""Corrugated-well optimization landscape.

The potential is a harmonic envelope with a cosine corrugation,

    V(x) = 1/2 k x^2 + (h0/2) [1 - cos(2 pi x / w0)],

which has a unique global minimum at x = 0 surrounded by a finite ladder
of local minima.  ``h0`` sets the barrier height between neighboring
minima and ``w0`` their spacing; the quadratic envelope smooths the
corrugation out far from the origin, so the number of local minima is
finite for any w0 > 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "PotentialParams",
    "PhaseDiagramCell",
    "evaluate",
    "derivative",
    "second_derivative_at_origin",
    "count_minima",
    "phase_diagram",
]

# Below this barrier height the corrugation is lost in floating-point
# noise of the quadratic term; treat as exactly harmonic.
_H0_HARMONIC_CUTOFF = 1e-15


@dataclass(frozen=True)
class PotentialParams:
    """Parameters (k, h0, w0) of the corrugated well.

    k is the spring constant of the harmonic envelope, h0 the corrugation
    barrier height, w0 the spacing between adjacent minima.  Dimensionless
    (atomic-style) units throughout.
    """

    k: float = 1.0
    h0: float = 0.2
    w0: float = 0.2

    def __post_init__(self):
        if not self.k > 0:
            raise ValueError(f"spring constant k must be positive, got {self.k}")
        if self.h0 < 0:
            raise ValueError(f"barrier height h0 must be nonnegative, got {self.h0}")
        if not self.w0 > 0:
            raise ValueError(f"minimum spacing w0 must be positive, got {self.w0}")

    @property
    def is_harmonic(self) -> bool:
        return self.h0 < _H0_HARMONIC_CUTOFF


@dataclass(frozen=True)
class PhaseDiagramCell:
    """One (h0, w0) cell of the minima-count phase diagram."""

    h0: float
    w0: float
    n_min: int


def evaluate(params: PotentialParams, x):
    """Evaluate V(x).  Accepts scalars or arrays; even in x."""
    x = np.asarray(x, dtype=float)
    v = 0.5 * params.k * x * x
    if not params.is_harmonic:
        v = v + 0.5 * params.h0 * (1.0 - np.cos(2.0 * np.pi * x / params.w0))
    return v if v.ndim else float(v)

def derivative(params: PotentialParams, x):
    """dV/dx = k x + (pi h0 / w0) sin(2 pi x / w0)."""
    x = np.asarray(x, dtype=float)
    d = params.k * x
    if not params.is_harmonic:
        d = d + (np.pi * params.h0 / params.w0) * np.sin(2.0 * np.pi * x / params.w0)
    return d if d.ndim else float(d)


def second_derivative_at_origin(params: PotentialParams) -> float:
    """Curvature at the global minimum: k + (h0/2)(2 pi / w0)^2.

    This is the spring constant of the quadratic approximation around
    x = 0, i.e. of the oscillator that governs the large-mass /
    low-temperature limit.
    """
    return params.k + 0.5 * params.h0 * (2.0 * np.pi / params.w0) ** 2


def _scan_cutoff(params: PotentialParams) -> float:
    # Beyond pi*h0/(k*w0) the envelope slope dominates the corrugation
    # slope, so dV/dx > 0; one extra period of margin.
    return 2.0 * np.pi * params.h0 / (params.k * params.w0) + params.w0


def count_minima(params: PotentialParams, *, resolution: int = 64) -> int:
    """Number of strict local minima of V at x > 0.

    Scans dV/dx for negative-to-positive sign changes on a grid of
    ``resolution`` samples per corrugation period, then refines each
    crossing by bisection to 1e-12 in x.  The scan range is chosen so
    that no minima can exist beyond it.
    """
    if params.is_harmonic:
        return 0
    x_cut = _scan_cutoff(params)
    step = params.w0 / resolution
    xs = np.arange(0.0, x_cut + step, step)
    d = derivative(params, xs)
    # Local minimum between xs[i] and xs[i+1] where dV/dx crosses - to +.
    crossings = np.nonzero((d[:-1] < 0.0) & (d[1:] >= 0.0))[0]
    count = 0
    for i in crossings:
        lo, hi = xs[i], xs[i + 1]
        for _ in range(200):
            if hi - lo <= 1e-12:
                break
            mid = 0.5 * (lo + hi)
            if derivative(params, mid) < 0.0:
                lo = mid
            else:
                hi = mid
        root = 0.5 * (lo + hi)
        if root > 0.0:
            count += 1
    return count


def phase_diagram(h0_range, w0_range, resolution) -> list[PhaseDiagramCell]:
    """Minima counts over a rectangular (h0, w0) sweep.

    ``h0_range`` and ``w0_range`` are (low, high) pairs, sampled at
    ``resolution`` points each (resolution may also be a (n_h0, n_w0)
    pair).  Returns cells in row-major order, h0 varying slowest.
    """
    if np.isscalar(resolution):
        n_h0 = n_w0 = int(resolution)
    else:
        n_h0, n_w0 = (int(r) for r in resolution)
    if n_h0 < 2 or n_w0 < 2:
        raise ValueError("phase diagram needs at least 2 samples per axis")
    h0_lo, h0_hi = h0_range
    w0_lo, w0_hi = w0_range
    if h0_lo < 0 or w0_lo <= 0:
        raise ValueError("h0 must be nonnegative and w0 positive over the sweep")
    cells = []
    for h0 in np.linspace(h0_lo, h0_hi, n_h0):
        for w0 in np.linspace(w0_lo, w0_hi, n_w0):
            p = PotentialParams(k=1.0, h0=float(h0), w0=float(w0))
            cells.append(PhaseDiagramCell(h0=float(h0), w0=float(w0), n_min=count_minima(p)))
    return cells
