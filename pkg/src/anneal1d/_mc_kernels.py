"""Numba kernels for the Metropolis ensembles.

These mirror ``classical_mc._advance_numpy`` operation for operation:
same counter-based uniforms, same table interpolation arithmetic, same
acceptance logic.  Both drivers therefore produce bit-identical
trajectories, and prange over particles is deterministic because no
state is shared between walkers.
"""

from __future__ import annotations

import numpy as np
from numba import config as _numba_config
from numba import njit, prange, uint64

# workqueue is always available and suits these coarse-grained loops;
# selecting it up front also avoids the TBB version probe warning.
_numba_config.THREADING_LAYER = "workqueue"

_GOLD = uint64(0x9E3779B97F4A7C15)
_MIX1 = uint64(0xBF58476D1CE4E5B9)
_MIX2 = uint64(0x94D049BB133111EB)
_PARTICLE_PAD = uint64(0xD6E8FEB86659FD93)
_TICK_MULT = uint64(0xA0761D6478BD642F)
_INV_2_53 = 1.0 / 9007199254740992.0


@njit(uint64(uint64), inline="always", cache=True)
def _mix64(z):
    z = (z ^ (z >> uint64(30))) * _MIX1
    z = (z ^ (z >> uint64(27))) * _MIX2
    return z ^ (z >> uint64(31))


@njit(inline="always", cache=True)
def _u01(seed, particle, tick, draw):
    z = seed * _GOLD
    z = z ^ _mix64(particle + _PARTICLE_PAD)
    z = _mix64(z + tick * _TICK_MULT + draw)
    return (z >> uint64(11)) * _INV_2_53


@njit(inline="always", cache=True)
def _table_v(x, tab_lo, tab_inv_dx, vtab, k, h0, w0):
    n = vtab.shape[0]
    f = (x - tab_lo) * tab_inv_dx
    if f < 0.0 or f > n - 1.0:
        # proposals essentially never leave the table; exact fallback
        return 0.5 * k * x * x + 0.5 * h0 * (1.0 - np.cos(2.0 * np.pi * x / w0))
    j = int(f)
    if j < 0:
        j = 0
    elif j > n - 2:
        j = n - 2
    w = f - j
    return vtab[j] * (1.0 - w) + vtab[j + 1] * w


@njit(parallel=True, fastmath=False, cache=True)
def advance(
    positions,
    seed,
    tick0,
    betas,
    s,
    tab_lo,
    tab_inv_dx,
    vtab,
    exp_lo,
    exp_inv_dx,
    exptab,
    k,
    h0,
    w0,
):
    n = positions.shape[0]
    n_ticks = betas.shape[0]
    n_exp = exptab.shape[0]
    for i in prange(n):
        pid = uint64(i)
        xi = positions[i]
        vi = _table_v(xi, tab_lo, tab_inv_dx, vtab, k, h0, w0)
        for j in range(n_ticks):
            tick = tick0 + uint64(j)
            u1 = _u01(seed, pid, tick, uint64(0))
            xp = xi + s * (u1 - 0.5)
            vp = _table_v(xp, tab_lo, tab_inv_dx, vtab, k, h0, w0)
            dv = vp - vi
            if dv <= 0.0:
                xi = xp
                vi = vp
            else:
                z = -betas[j] * dv
                if z > exp_lo:
                    u2 = _u01(seed, pid, tick, uint64(1))
                    zc = z
                    if zc > 0.0:
                        zc = 0.0
                    f = (zc - exp_lo) * exp_inv_dx
                    jj = int(f)
                    if jj < 0:
                        jj = 0
                    elif jj > n_exp - 2:
                        jj = n_exp - 2
                    w = f - jj
                    p = exptab[jj] * (1.0 - w) + exptab[jj + 1] * w
                    if u2 < p:
                        xi = xp
                        vi = vp
        positions[i] = xi
