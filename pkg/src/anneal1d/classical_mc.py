"""Classical statistical mechanics of the corrugated well.

Two halves:

* exact equilibrium via quadrature -- partition function, thermal average
  of the potential, internal energy U(beta) = 1/(2 beta) + <V>_beta (the
  kinetic term integrates out analytically at m = 1), and log-log slopes
  of <V>_beta;

* Metropolis ensembles -- N independent walkers, one proposal per walker
  per dt = 0.1 tick, annealed under linear-in-beta or logarithmic
  schedules, with residual-energy and decay-exponent measurements.

Randomness is counter based: every uniform is a pure function of
(seed, particle index, tick, draw channel), so runs are bit-reproducible
regardless of chunking or thread count, and the numba and pure-numpy
drivers produce identical trajectories.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

from .fitting import DecayFit, InsufficientPointsError, loglog_slope
from .potential import PotentialParams, evaluate, second_derivative_at_origin
from .schedules import BetaSchedule, beta_at

try:
    from . import _mc_kernels

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dep, but stay importable
    _mc_kernels = None
    _HAVE_NUMBA = False

__all__ = [
    "TICK_DT",
    "EquilibriumResult",
    "Ensemble",
    "AnnealSeries",
    "LogRunResult",
    "DecayFit",
    "QuadratureError",
    "boltzmann_average",
    "log_partition",
    "internal_energy",
    "alpha_eq",
    "equilibrium_log_slope",
    "sample_boltzmann",
    "metropolis_step",
    "anneal_ensemble",
    "residual_energy_sa",
    "log_schedule_run",
]

TICK_DT = 0.1                 # time advanced per Metropolis sweep
BOLTZMANN_EXP_CUTOFF = 46.0   # e^-46 < 1e-20: integrand support ends here
N_SUBENSEMBLES = 10


class QuadratureError(RuntimeError):
    pass


@dataclass(frozen=True)
class EquilibriumResult:
    """Equilibrium quantities at one inverse temperature."""

    beta: float
    avg_potential: float
    internal_energy: float
    partition_log: float


@dataclass
class Ensemble:
    """Walker positions plus the bookkeeping that defines their RNG.

    Streams are not stored: the uniform for (particle, tick, channel) is
    recomputed from the seed on demand, which is what makes chunked and
    threaded execution reproducible.
    """

    positions: np.ndarray
    seed: int
    step_size: float
    time: float = 0.0

    @property
    def n(self) -> int:
        return len(self.positions)


@dataclass
class AnnealSeries:
    """Ensemble mean of V at the record times, with sub-ensemble spread."""

    times: np.ndarray
    avg_potential: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    n_particles: int
    seed: int
    step_size: float


@dataclass
class LogRunResult:
    series: AnnealSeries
    fit: DecayFit
    beta_final: float


# ---------------------------------------------------------------------------
# Equilibrium quadrature
# ---------------------------------------------------------------------------

def _support_halfwidth(params: PotentialParams, beta: float) -> float:
    return math.sqrt(2.0 * BOLTZMANN_EXP_CUTOFF / (beta * params.k)) + params.w0


def _panel_nodes(params: PotentialParams, beta: float, n_per: int):
    # Panels must resolve both the corrugation period and the thermal
    # width around the origin at large beta.
    k_inner = second_derivative_at_origin(params)
    width = min(params.w0 / 2.0, 1.0 / math.sqrt(beta * k_inner))
    x_cut = _support_halfwidth(params, beta)
    n_panels = int(np.ceil(2.0 * x_cut / width))
    edges = np.linspace(-x_cut, x_cut, n_panels + 1)
    xg, wg = leggauss(n_per)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    nodes = (mid[:, None] + half[:, None] * xg[None, :]).ravel()
    weights = (half[:, None] * np.broadcast_to(wg, (n_panels, n_per))).ravel()
    return nodes, weights


def boltzmann_average(params: PotentialParams, beta: float, integrand, rtol: float = 1e-8):
    """Thermal average of ``integrand(x)`` under exp(-beta V) / Z.

    Composite Gauss-Legendre quadrature truncated where beta V > 46;
    refined once to confirm the relative error target.
    """
    if beta <= 0:
        raise ValueError("beta must be positive")
    results = []
    for n_per in (12, 24):
        x, w = _panel_nodes(params, beta, n_per)
        boltz = np.exp(-beta * evaluate(params, x))
        z = float(np.sum(w * boltz))
        results.append(float(np.sum(w * integrand(x) * boltz)) / z)
    if abs(results[1] - results[0]) > rtol * max(abs(results[1]), 1e-300):
        raise QuadratureError(
            f"quadrature for beta={beta:g} did not converge: "
            f"{results[0]!r} vs {results[1]!r}"
        )
    return results[1]


def log_partition(params: PotentialParams, beta: float) -> float:
    """log of the configurational partition function."""
    x, w = _panel_nodes(params, beta, 24)
    return float(np.log(np.sum(w * np.exp(-beta * evaluate(params, x)))))


def internal_energy(params: PotentialParams, beta: float) -> EquilibriumResult:
    """U(beta) = 1/(2 beta) + <V>_beta, with the pieces it is made of."""
    avg_v = boltzmann_average(params, beta, lambda x: evaluate(params, x))
    return EquilibriumResult(
        beta=float(beta),
        avg_potential=avg_v,
        internal_energy=0.5 / beta + avg_v,
        partition_log=log_partition(params, beta),
    )


def _log10_avg_v(params: PotentialParams, log10_beta: float) -> float:
    return math.log10(
        boltzmann_average(params, 10.0**log10_beta, lambda x: evaluate(params, x))
    )


def alpha_eq(params: PotentialParams, beta: float, step: float = 0.01) -> float:
    """Local tangent d log10 <V>_beta / d log10 beta, centered difference.

    Note the tangent oscillates where side minima freeze out, so values
    at a point can differ noticeably from the slope of the same curve
    over a finite window (see ``equilibrium_log_slope``).
    """
    lb = math.log10(beta)
    return (_log10_avg_v(params, lb + step) - _log10_avg_v(params, lb - step)) / (2.0 * step)


def equilibrium_log_slope(params: PotentialParams, beta_lo: float, beta_hi: float) -> float:
    """Chord slope of log10 <V>_beta between two inverse temperatures.

    This is the equilibrium prediction for the decay exponent measured
    over an annealing window that traverses [beta_lo, beta_hi].
    """
    lb_lo, lb_hi = math.log10(beta_lo), math.log10(beta_hi)
    return (_log10_avg_v(params, lb_hi) - _log10_avg_v(params, lb_lo)) / (lb_hi - lb_lo)


# ---------------------------------------------------------------------------
# Counter-based uniforms (numpy side; the numba kernels mirror this exactly)
# ---------------------------------------------------------------------------

_U64 = np.uint64
_GOLD = _U64(0x9E3779B97F4A7C15)
_MIX1 = _U64(0xBF58476D1CE4E5B9)
_MIX2 = _U64(0x94D049BB133111EB)
_PARTICLE_PAD = _U64(0xD6E8FEB86659FD93)
_TICK_MULT = _U64(0xA0761D6478BD642F)
_INV_2_53 = 1.0 / 9007199254740992.0

INIT_DRAW_CHANNEL = 2  # channel used when sampling the initial ensemble


def _mix64(z):
    z = (z ^ (z >> _U64(30))) * _MIX1
    z = (z ^ (z >> _U64(27))) * _MIX2
    return z ^ (z >> _U64(31))


def uniform_streams(seed: int, particles, tick: int, draw: int) -> np.ndarray:
    """u in [0, 1) for each particle index at (tick, draw channel)."""
    particles = np.asarray(particles, dtype=np.uint64)
    with np.errstate(over="ignore"):  # uint64 wraparound is the point
        z = _U64(seed) * _GOLD
        z = z ^ _mix64(particles + _PARTICLE_PAD)
        z = _mix64(z + _U64(tick) * _TICK_MULT + _U64(draw))
    return (z >> _U64(11)).astype(np.float64) * _INV_2_53


# ---------------------------------------------------------------------------
# Sampling and stepping
# ---------------------------------------------------------------------------

INVERSE_CDF_POINTS = 1 << 16


def sample_boltzmann(params: PotentialParams, beta: float, n: int, seed: int) -> np.ndarray:
    """n i.i.d. positions from exp(-beta V)/Z via a tabulated inverse CDF.

    The cumulative is tabulated on 2^16 points across the quadrature
    support and inverted by linear interpolation.
    """
    if n < 1:
        raise ValueError("need n >= 1")
    x_cut = _support_halfwidth(params, beta)
    xs = np.linspace(-x_cut, x_cut, INVERSE_CDF_POINTS)
    w = np.exp(-beta * evaluate(params, xs))
    cdf = np.empty_like(xs)
    cdf[0] = 0.0
    np.cumsum(0.5 * (w[1:] + w[:-1]) * (xs[1] - xs[0]), out=cdf[1:])
    cdf /= cdf[-1]
    u = uniform_streams(seed, np.arange(n), tick=0, draw=INIT_DRAW_CHANNEL)
    return np.interp(u, cdf, xs)


def metropolis_step(x: float, params: PotentialParams, beta: float, s: float, rng) -> float:
    """One Metropolis update of a single walker (reference semantics).

    Proposes x' = x + dx with dx uniform on [-s/2, s/2] and accepts with
    probability min{1, exp(-beta [V(x') - V(x)])}.
    """
    if s <= 0:
        raise ValueError("step size must be positive")
    x_new = x + s * (rng.random() - 0.5)
    dv = evaluate(params, x_new) - evaluate(params, x)
    if dv <= 0.0 or rng.random() < math.exp(-beta * dv):
        return x_new
    return x


# Acceptance uses a shared tabulated exp so the numba and numpy drivers
# agree bitwise; the table spans the full support of exp(-beta dV) > 1e-20.
_EXP_TABLE_POINTS = 1 << 17
_EXP_LO = -BOLTZMANN_EXP_CUTOFF
_EXP_TABLE = np.exp(np.linspace(_EXP_LO, 0.0, _EXP_TABLE_POINTS))
_EXP_INV_DX = (_EXP_TABLE_POINTS - 1) / (0.0 - _EXP_LO)


def _potential_table(params: PotentialParams, x_half: float):
    n_tab = 1 << 18
    xs = np.linspace(-x_half, x_half, n_tab)
    return xs[0], (n_tab - 1) / (2.0 * x_half), evaluate(params, xs)


def _advance_numpy(positions, seed, tick0, betas, s, tab_lo, tab_inv_dx, vtab, params):
    """Reference driver; must match the numba kernel bit for bit."""
    n = len(positions)
    idx = np.arange(n, dtype=np.uint64)
    x = positions
    tab_hi = tab_lo + (len(vtab) - 1) / tab_inv_dx

    def v_of(xs):
        inside = (xs >= tab_lo) & (xs <= tab_hi)
        f = (xs - tab_lo) * tab_inv_dx
        j = np.clip(f.astype(np.int64), 0, len(vtab) - 2)
        w = f - j
        v = vtab[j] * (1.0 - w) + vtab[j + 1] * w
        if not inside.all():
            v = np.where(inside, v, evaluate(params, xs))
        return v

    v = v_of(x)
    for j, beta in enumerate(betas):
        tick = tick0 + j
        u1 = uniform_streams(seed, idx, tick, 0)
        xp = x + s * (u1 - 0.5)
        vp = v_of(xp)
        dv = vp - v
        u2 = uniform_streams(seed, idx, tick, 1)
        z = -beta * dv
        zc = np.clip(z, _EXP_LO, 0.0)
        f = (zc - _EXP_LO) * _EXP_INV_DX
        jj = np.clip(f.astype(np.int64), 0, _EXP_TABLE_POINTS - 2)
        w = f - jj
        p = _EXP_TABLE[jj] * (1.0 - w) + _EXP_TABLE[jj + 1] * w
        accept = (dv <= 0.0) | ((z > _EXP_LO) & (u2 < p))
        x = np.where(accept, xp, x)
        v = np.where(accept, vp, v)
    positions[:] = x


def _advance(positions, seed, tick0, betas, s, params, x_half):
    tab_lo, tab_inv_dx, vtab = _potential_table(params, x_half)
    if _HAVE_NUMBA:
        _mc_kernels.advance(
            positions, _U64(seed), _U64(tick0), betas, float(s),
            tab_lo, tab_inv_dx, vtab,
            _EXP_LO, _EXP_INV_DX, _EXP_TABLE,
            params.k, params.h0, params.w0,
        )
    else:
        _advance_numpy(positions, seed, tick0, betas, s, tab_lo, tab_inv_dx, vtab, params)


def _subensemble_stats(values: np.ndarray):
    splits = np.array_split(values, N_SUBENSEMBLES)
    means = np.array([s.mean() for s in splits])
    return float(values.mean()), float(means.min()), float(means.max())


def _run_schedule(
    params: PotentialParams,
    schedule: BetaSchedule,
    s: float,
    n: int,
    seed: int,
    record_ticks: list[int],
) -> AnnealSeries:
    if s <= 0:
        raise ValueError("step size must be positive")
    if n < 1:
        raise ValueError("need at least one particle")
    beta0 = beta_at(schedule, 0.0)
    positions = sample_boltzmann(params, beta0, n, seed)
    # Walkers live inside the beta0 support; step-size margin keeps the
    # potential lookup table in range for all proposals.
    x_half = _support_halfwidth(params, beta0) + 4.0 * s

    times, avgs, los, his = [], [], [], []

    def record(tick):
        v = evaluate(params, positions)
        mean, lo, hi = _subensemble_stats(v)
        times.append(tick * TICK_DT)
        avgs.append(mean)
        los.append(lo)
        his.append(hi)

    ticks_done = 0
    record_ticks = sorted(set(int(t) for t in record_ticks))
    if record_ticks[0] == 0:
        record(0)
        record_ticks = record_ticks[1:]
    for target in record_ticks:
        # move in bounded chunks so the beta arrays stay small
        while ticks_done < target:
            chunk = min(target - ticks_done, 200_000)
            tick_times = (ticks_done + np.arange(chunk)) * TICK_DT
            betas = np.asarray(beta_at(schedule, tick_times), dtype=float)
            _advance(positions, seed, ticks_done, betas, s, params, x_half)
            ticks_done += chunk
        record(ticks_done)

    return AnnealSeries(
        times=np.asarray(times),
        avg_potential=np.asarray(avgs),
        lo=np.asarray(los),
        hi=np.asarray(his),
        n_particles=n,
        seed=int(seed),
        step_size=float(s),
    )


def anneal_ensemble(
    params: PotentialParams,
    schedule: BetaSchedule,
    s: float,
    n: int,
    seed: int,
    record_times,
) -> AnnealSeries:
    """Anneal N walkers under a beta schedule; record <V> with spread.

    Each walker takes one Metropolis step per dt = 0.1 tick with
    beta(t) read from the schedule at the tick start.  The ensemble is
    initialized from the exact Boltzmann distribution at beta(0).
    Spread bars are the min/max over ten equal sub-ensembles.
    """
    record_ticks = [int(round(t / TICK_DT)) for t in np.atleast_1d(record_times)]
    if schedule.kind == "linear":
        max_tick = int(round(schedule.total_time / TICK_DT))
        if any(t > max_tick for t in record_ticks):
            raise ValueError("record time beyond the schedule's total_time")
    return _run_schedule(params, schedule, s, n, seed, record_ticks)


def residual_energy_sa(series: AnnealSeries, params: PotentialParams, beta_f: float) -> float:
    """<V>_(t=T) minus the equilibrium <V> at the final temperature."""
    target = boltzmann_average(params, beta_f, lambda x: evaluate(params, x))
    return float(series.avg_potential[-1]) - target


def windowed_residual(
    params: PotentialParams,
    schedule: BetaSchedule,
    s: float,
    n: int,
    seed: int,
    window_frac: float = 0.2,
    n_window_records: int = 48,
):
    """Excess energy over instantaneous equilibrium, averaged over a tail
    window of the anneal.

    The point estimator <V>_(t=T) - <V>_beta_f carries the full thermal
    variance sigma_V^2 / N, which at desk-scale N drowns the residual
    long before the annealing-time range of interest.  This estimator
    instead averages the lag <V>_t - <V>_(beta(t)) over t in ((1-f)T, T].
    Every T traverses the same beta window, so a 1/T residual stays
    exactly 1/T (the window average only rescales it by a constant),
    while the noise drops by roughly sqrt(window ticks / correlation
    time).  As window_frac -> 0 it converges to the point estimator.

    Returns (residual, lo, hi, series).  The spread bounds average the
    per-record sub-ensemble min/max, which overstates the spread of the
    time-averaged mean (conservative bars).  The series holds the raw
    window records.
    """
    if schedule.kind != "linear":
        raise ValueError("windowed residual applies to finite-time schedules")
    if not (0.0 < window_frac < 1.0):
        raise ValueError("window_frac must be in (0, 1)")
    T = schedule.total_time
    t_lo = T * (1.0 - window_frac)
    window = np.unique(np.concatenate([[0.0], np.linspace(t_lo, T, n_window_records)]))
    series = anneal_ensemble(params, schedule, s, n, seed, window)
    sel = series.times >= t_lo - 0.5 * TICK_DT
    targets = np.array(
        [
            boltzmann_average(params, beta_at(schedule, min(t, T)), lambda x: evaluate(params, x))
            for t in series.times[sel]
        ]
    )
    res = float((series.avg_potential[sel] - targets).mean())
    lo = float((series.lo[sel] - targets).mean())
    hi = float((series.hi[sel] - targets).mean())
    return res, lo, hi, series


def log_schedule_run(
    params: PotentialParams,
    beta_i: float,
    s: float,
    n: int,
    seed: int,
    t_max: float,
    fit_window_start: float = 0.5,
    n_records: int = 48,
) -> LogRunResult:
    """Anneal under beta(t) = beta_i log10(t + 10) and fit the decay.

    Record times are log-log spaced; the fit is log10 <V> against
    log10 log10 t restricted to log10 log10 t > fit_window_start.  The
    window must hold at least four records, otherwise the run is
    rejected as too short to say anything about the asymptote.
    """
    schedule = BetaSchedule(kind="logarithmic", beta_i=beta_i)
    uu_max = math.log10(math.log10(t_max))
    if uu_max <= fit_window_start + 0.05:
        raise InsufficientPointsError(
            f"t_max={t_max:g} leaves no fit window beyond {fit_window_start}"
        )
    uu = np.linspace(0.1, uu_max, n_records)
    record_ticks = sorted(set(int(round(10.0 ** (10.0**u) / TICK_DT)) for u in uu) | {0})
    series = _run_schedule(params, schedule, s, n, seed, record_ticks)

    t = series.times
    in_window = t > 0
    uu_t = np.full_like(t, -np.inf)
    uu_t[in_window] = np.log10(np.log10(np.maximum(t[in_window], 1.0 + 1e-9)))
    sel = uu_t > fit_window_start
    if sel.sum() < 4:
        raise InsufficientPointsError(
            f"only {int(sel.sum())} records beyond log10 log10 t = {fit_window_start}"
        )
    fit = loglog_slope(uu_t[sel], np.log10(series.avg_potential[sel]))
    return LogRunResult(
        series=series,
        fit=fit,
        beta_final=float(beta_at(schedule, t_max)),
    )
