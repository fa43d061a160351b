"""Least-squares decay-exponent fits on log-transformed data."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["DecayFit", "InsufficientPointsError", "loglog_slope", "crest_indices"]


class InsufficientPointsError(ValueError):
    pass


@dataclass(frozen=True)
class DecayFit:
    """Fitted slope on log axes, the abscissa window used, and R^2."""

    exponent: float
    window: tuple[float, float]
    residual: float


def loglog_slope(xs: np.ndarray, ys: np.ndarray) -> DecayFit:
    """Straight-line fit of ys against xs (both already log-scaled)."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if len(xs) < 2:
        raise InsufficientPointsError("need at least 2 points for a slope")
    slope, intercept = np.polyfit(xs, ys, 1)
    pred = slope * xs + intercept
    ss_res = float(np.sum((ys - pred) ** 2))
    ss_tot = float(np.sum((ys - ys.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return DecayFit(exponent=float(slope), window=(float(xs.min()), float(xs.max())), residual=r2)


def crest_indices(values: np.ndarray) -> np.ndarray:
    """Indices of interior local maxima of a sampled curve."""
    v = np.asarray(values, dtype=float)
    if len(v) < 3:
        return np.array([], dtype=int)
    return np.nonzero((v[1:-1] >= v[:-2]) & (v[1:-1] >= v[2:]))[0] + 1
