"""Uniform periodic position grid with a spectral (DFT) kinetic operator.

All wavefunction work lives on these grids.  Wavenumbers follow DFT
ordering with spacing pi / x_max; hbar = 1 throughout, so the mass is the
only quantum scale.  Boundary conditions are periodic; the grid-selection
procedure guarantees negligible amplitude at the edges, which keeps
periodicity artifacts below the tolerances used anywhere else.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft

__all__ = [
    "Grid",
    "Wavefunction",
    "GridConvergenceError",
    "build_grid",
    "apply_kinetic",
    "inner_product",
    "converged_grid",
]

EDGE_DENSITY_TOL = 1e-12   # max |psi|^2 at the boundary, relative to peak
REFINEMENT_RTOL = 1e-7     # E0 stability across 1024/2048/4096 points


class GridConvergenceError(RuntimeError):
    """Raised when no grid passes the edge/refinement criteria."""


@dataclass(frozen=True, eq=False)
class Grid:
    """Uniform grid of n_points over [-x_max, x_max), n_points a power of two."""

    x_max: float
    n_points: int
    dx: float = field(init=False)
    points: np.ndarray = field(init=False)
    wavenumbers: np.ndarray = field(init=False)

    def __post_init__(self):
        dx = 2.0 * self.x_max / self.n_points
        object.__setattr__(self, "dx", dx)
        object.__setattr__(
            self, "points", -self.x_max + dx * np.arange(self.n_points)
        )
        object.__setattr__(
            self, "wavenumbers", 2.0 * np.pi * sfft.fftfreq(self.n_points, d=dx)
        )

    def same_as(self, other: "Grid") -> bool:
        return self.n_points == other.n_points and self.x_max == other.x_max

    @property
    def key(self) -> tuple[float, int]:
        return (self.x_max, self.n_points)


@dataclass
class Wavefunction:
    """Complex amplitudes on a grid, normalized so sum |psi|^2 dx = 1."""

    grid: Grid
    values: np.ndarray

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2) * self.grid.dx))

    def normalized(self) -> "Wavefunction":
        return Wavefunction(self.grid, self.values / self.norm())

    def density(self) -> np.ndarray:
        return np.abs(self.values) ** 2


def build_grid(x_max: float, n_points: int) -> Grid:
    """Construct a grid, rejecting invalid sizes."""
    if x_max <= 0:
        raise ValueError(f"x_max must be positive, got {x_max}")
    n = int(n_points)
    if n < 8 or (n & (n - 1)) != 0:
        raise ValueError(f"n_points must be a power of two >= 8, got {n_points}")
    return Grid(x_max=float(x_max), n_points=n)


def apply_kinetic(grid: Grid, psi: Wavefunction, mass: float) -> Wavefunction:
    """(-1/2m) d^2 psi / dx^2 via forward DFT, multiply by k^2/2m, inverse DFT."""
    if mass <= 0:
        raise ValueError("mass must be positive")
    out = sfft.ifft(grid.wavenumbers**2 * sfft.fft(psi.values)) / (2.0 * mass)
    return Wavefunction(grid, out)


def inner_product(a: Wavefunction, b: Wavefunction) -> complex:
    """<a|b> = sum conj(a_j) b_j dx."""
    if not a.grid.same_as(b.grid):
        raise ValueError("wavefunctions live on different grids")
    return complex(np.sum(np.conj(a.values) * b.values) * a.grid.dx)


def _edge_density_ratio(psi: np.ndarray) -> float:
    d = np.abs(psi) ** 2
    return max(d[0], d[-1]) / d.max()


_converged_cache: dict[tuple, Grid] = {}


def converged_grid(params, m_initial: float, m_final: float, n_points: int = 2048) -> Grid:
    """Select a grid that resolves the ground state at both mass endpoints.

    x_max is chosen as (nearly) the smallest half-width at which the
    m_initial ground state carries < 1e-12 relative density at the grid
    edge; E0 at both masses must then be stable to 1e-7 relative across
    {1024, 2048, 4096} points.  Returns the n_points (default 2048) grid.

    Raises GridConvergenceError naming the failing endpoint.
    """
    from . import eigensolver  # local import; eigensolver depends on this module

    if not (0 < m_initial <= m_final):
        raise ValueError("need 0 < m_initial <= m_final")
    key = (params, float(m_initial), float(m_final), int(n_points))
    if key in _converged_cache:
        return _converged_cache[key]

    def edge_ratio(x_max: float) -> float:
        g = build_grid(x_max, n_points)
        res = eigensolver.lowest_eigenpairs(g, params, m_initial, count=1)
        return _edge_density_ratio(res.states[0].values)

    # Harmonic-envelope estimate of where |psi|^2 drops below 1e-12.
    sigma_scale = (m_initial * params.k) ** -0.25
    x_max = 5.3 * sigma_scale + params.w0
    grew = 0
    while edge_ratio(x_max) >= EDGE_DENSITY_TOL:
        x_max *= 1.25
        grew += 1
        if grew > 40:
            raise GridConvergenceError(
                "could not contain the initial-mass ground state "
                f"(m={m_initial}, reached x_max={x_max:.3g})"
            )
    if not grew:
        # Shrink toward the minimal passing width to keep dx small.
        while x_max > 8.0 * params.w0 and edge_ratio(0.9 * x_max) < EDGE_DENSITY_TOL:
            x_max *= 0.9

    for label, mass in (("initial", m_initial), ("final", m_final)):
        energies = [
            eigensolver.lowest_eigenpairs(build_grid(x_max, n), params, mass, count=1).energies[0]
            for n in (1024, 2048, 4096)
        ]
        spread = (max(energies) - min(energies)) / abs(energies[1])
        if spread > REFINEMENT_RTOL:
            raise GridConvergenceError(
                f"E0 at the {label} mass (m={mass}) varies by {spread:.2e} relative "
                f"across 1024/2048/4096 points on x_max={x_max:.4g}"
            )

    g = build_grid(x_max, n_points)
    _converged_cache[key] = g
    return g
