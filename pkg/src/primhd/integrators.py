"""Integrating-factor SSP Runge-Kutta steps for y' = -|k|^2 y + N(y).

Diffusion is integrated exactly per mode; the explicit stages only see the
dealiased nonlinear tendency.  Writing E(s) = exp(-|k|^2 s):

RK2 (Heun / SSP(2,2))::

    y1 = E(dt) (y + dt N(y))
    y+ = 1/2 E(dt) y + 1/2 (y1 + dt N(y1))

RK3 (Shu-Osher SSP(3,3))::

    y1 = E(dt) (y + dt N(y))
    y2 = 3/4 E(dt/2) y + 1/4 E(-dt/2) (y1 + dt N(y1))
    y+ = 1/3 E(dt) y + 2/3 E(dt/2) (y2 + dt N(y2))

Both reduce to the exact solution when N vanishes.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

SCHEMES = ("RK2", "RK3")


@lru_cache(maxsize=32)
def integrating_factors(grid, dt):
    """(E(dt), E(dt/2), E(-dt/2)) on the spectral shape.

    The growing factor E(-dt/2) multiplies a quantity already damped by
    E(dt); where it would overflow it is set to zero, since the damped mode
    has underflowed to zero as well.
    """
    k2 = grid.k2
    full = np.exp(-k2 * dt)
    half = np.exp(-k2 * (0.5 * dt))
    arg = k2 * (0.5 * dt)
    grow = np.where(arg < 700.0, np.exp(np.minimum(arg, 700.0)), 0.0)
    for a in (full, half, grow):
        a.setflags(write=False)
    return full, half, grow


def if_rk_step(y, dt, grid, tendency, scheme="RK3"):
    """Advance the stacked coefficient array ``y`` by one step.

    ``tendency(y, stage)`` returns the dealiased nonlinear tendency.  The
    stage index lets callers collect diagnostics on the first evaluation.
    """
    full, half, grow = integrating_factors(grid, float(dt))
    if scheme == "RK2":
        y1 = full * (y + dt * tendency(y, 0))
        return 0.5 * full * y + 0.5 * (y1 + dt * tendency(y1, 1))
    if scheme == "RK3":
        y1 = full * (y + dt * tendency(y, 0))
        y2 = 0.75 * half * y + 0.25 * grow * (y1 + dt * tendency(y1, 1))
        return (1.0 / 3.0) * full * y + (2.0 / 3.0) * half * (y2 + dt * tendency(y2, 2))
    raise ValueError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")
