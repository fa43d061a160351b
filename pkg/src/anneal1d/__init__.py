"""anneal1d: quantum and classical annealing of a 1D corrugated well.

A numerical laboratory for comparing time-dependent Schrodinger
annealing (mass schedules) against Metropolis simulated annealing
(temperature schedules) on the same multi-minimum potential: residual
energy scaling laws, eigenstructure curves, and probability-current
diagnostics.
"""

__version__ = "0.1.0"

from .potential import PotentialParams, PhaseDiagramCell, count_minima, phase_diagram
from .grid import Grid, Wavefunction, build_grid, converged_grid
from .schedules import BetaSchedule, MassSchedule, beta_at, f_n, mass_at
from .eigensolver import EigenResult, energy_curve, gap_curve, lowest_eigenpairs
from .quantum_dynamics import (
    PropagationConfig,
    Trajectory,
    propagate,
    probability_current,
    residual_energy_qa,
)
from .classical_mc import (
    anneal_ensemble,
    alpha_eq,
    boltzmann_average,
    internal_energy,
    log_schedule_run,
    sample_boltzmann,
)
from .experiments import ExperimentConfig, fit_power_law, run_experiment, stage_table

__all__ = [
    "PotentialParams",
    "PhaseDiagramCell",
    "count_minima",
    "phase_diagram",
    "Grid",
    "Wavefunction",
    "build_grid",
    "converged_grid",
    "MassSchedule",
    "BetaSchedule",
    "f_n",
    "mass_at",
    "beta_at",
    "EigenResult",
    "lowest_eigenpairs",
    "energy_curve",
    "gap_curve",
    "PropagationConfig",
    "Trajectory",
    "propagate",
    "probability_current",
    "residual_energy_qa",
    "boltzmann_average",
    "internal_energy",
    "alpha_eq",
    "sample_boltzmann",
    "anneal_ensemble",
    "log_schedule_run",
    "ExperimentConfig",
    "run_experiment",
    "fit_power_law",
    "stage_table",
]
