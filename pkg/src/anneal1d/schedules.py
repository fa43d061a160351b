"""Annealing schedules: mass ramps for quantum runs, inverse-temperature
ramps for classical runs.

A schedule is a pure, immutable description of the control parameter over
[0, T]; time discretization belongs to the propagator or sampler that
consumes it.  The polynomial family f_n produces ramps whose first n-1
derivatives vanish at both ends, so annealing starts and finishes slowly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "MASS_SCHEDULE_KINDS",
    "BETA_SCHEDULE_KINDS",
    "MassSchedule",
    "BetaSchedule",
    "f_n",
    "f_n_derivative",
    "mass_at",
    "beta_at",
    "schedule_derivative_at_endpoints",
]

MASS_SCHEDULE_KINDS = (
    "poly_order_1",
    "poly_order_2",
    "poly_order_3",
    "poly_order_4",
    "plain_quadratic",
)
BETA_SCHEDULE_KINDS = ("linear", "logarithmic")


def f_n(n: int, s):
    """Smooth ramp polynomial of order n on [0, 1].

    f1 = s
    f2 = s^2 (3 - 2s)
    f3 = s^3 (10 - 15s + 6s^2)
    f4 = s^4 (35 - 84s + 70s^2 - 20s^3)

    All satisfy f_n(0) = 0 and f_n(1) = 1 exactly; for n >= 2 the first
    n-1 derivatives vanish at both endpoints.
    """
    s = np.asarray(s, dtype=float)
    if np.any(s < 0.0) or np.any(s > 1.0):
        raise ValueError("ramp argument must lie in [0, 1]")
    if n == 1:
        out = s
    elif n == 2:
        out = s * s * (3.0 - 2.0 * s)
    elif n == 3:
        out = s**3 * (10.0 + s * (-15.0 + 6.0 * s))
    elif n == 4:
        out = s**4 * (35.0 + s * (-84.0 + s * (70.0 - 20.0 * s)))
    else:
        raise ValueError(f"ramp order must be in 1..4, got {n}")
    return out if out.ndim else float(out)


def f_n_derivative(n: int, s):
    """d f_n / ds; nonnegative on [0, 1]."""
    s = np.asarray(s, dtype=float)
    if n == 1:
        out = np.ones_like(s)
    elif n == 2:
        out = 6.0 * s * (1.0 - s)
    elif n == 3:
        out = 30.0 * s**2 * (1.0 - s) ** 2
    elif n == 4:
        out = 140.0 * s**3 * (1.0 - s) ** 3
    else:
        raise ValueError(f"ramp order must be in 1..4, got {n}")
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class MassSchedule:
    """Mass ramp m(t) = m_i (1 - g(t/T)) + m_f g(t/T) over [0, T].

    g is f_n for the poly_order_n kinds and (t/T)^2 for plain_quadratic.
    The plain quadratic starts slowly but ends at full speed, which is
    exactly the property the f-family is built to avoid; it is kept as a
    separate kind because that endpoint behavior is worth probing.
    """

    kind: str
    m_i: float
    m_f: float
    total_time: float

    def __post_init__(self):
        if self.kind not in MASS_SCHEDULE_KINDS:
            raise ValueError(f"unknown mass schedule kind {self.kind!r}")
        if self.m_i <= 0 or self.m_f <= 0:
            raise ValueError("masses must be positive")
        if self.total_time <= 0:
            raise ValueError("total_time must be positive")

    @property
    def order(self) -> int | None:
        if self.kind.startswith("poly_order_"):
            return int(self.kind[-1])
        return None


@dataclass(frozen=True)
class BetaSchedule:
    """Inverse-temperature schedule.

    linear:       beta(t) = beta_i (1 - t/T) + beta_f (t/T) on [0, T]
    logarithmic:  beta(t) = beta_i log10(t + 10) on [0, inf);
                  beta(0) = beta_i since log10(10) = 1.
    """

    kind: str
    beta_i: float
    beta_f: float | None = None
    total_time: float | None = None

    def __post_init__(self):
        if self.kind not in BETA_SCHEDULE_KINDS:
            raise ValueError(f"unknown beta schedule kind {self.kind!r}")
        if self.beta_i <= 0:
            raise ValueError("beta_i must be positive")
        if self.kind == "linear":
            if self.beta_f is None or self.total_time is None:
                raise ValueError("linear beta schedule needs beta_f and total_time")
            if self.beta_f <= 0 or self.total_time <= 0:
                raise ValueError("beta_f and total_time must be positive")


def _ramp(schedule: MassSchedule, s):
    if schedule.kind == "plain_quadratic":
        s = np.asarray(s, dtype=float)
        out = s * s
        return out if out.ndim else float(out)
    return f_n(schedule.order, s)


def mass_at(schedule: MassSchedule, t):
    """m(t).  The two-sided form makes the endpoints bit-exact."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0.0) or np.any(t > schedule.total_time):
        raise ValueError("time outside [0, total_time]")
    g = _ramp(schedule, t / schedule.total_time)
    out = schedule.m_i * (1.0 - np.asarray(g)) + schedule.m_f * np.asarray(g)
    return out if out.ndim else float(out)


def beta_at(schedule: BetaSchedule, t):
    """beta(t) for either schedule kind."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0.0):
        raise ValueError("time must be nonnegative")
    if schedule.kind == "linear":
        if np.any(t > schedule.total_time):
            raise ValueError("time outside [0, total_time]")
        s = t / schedule.total_time
        out = schedule.beta_i * (1.0 - s) + schedule.beta_f * s
    else:
        out = schedule.beta_i * np.log10(t + 10.0)
    return out if out.ndim else float(out)


def schedule_derivative_at_endpoints(schedule: MassSchedule) -> tuple[float, float]:
    """(dm/dt at t=0, dm/dt at t=T), analytically.

    For poly_order_n with n >= 2 both vanish; plain_quadratic vanishes
    only at the start.
    """
    span = schedule.m_f - schedule.m_i
    T = schedule.total_time
    if schedule.kind == "plain_quadratic":
        return (0.0, 2.0 * span / T)
    n = schedule.order
    return (
        span * f_n_derivative(n, 0.0) / T,
        span * f_n_derivative(n, 1.0) / T,
    )
