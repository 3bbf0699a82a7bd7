"""Scaled incompressible MHD on the fixed box, aspect ratio eps.

After dividing the vertical equations by eps^2 the system reads

    du_H = -d_j T_jH - grad_H p          + Lap u_H
    du_3 = -d_j T_j3 - eps^-2 d_z p      + Lap u_3
    db   = -d_j W_j.                      + Lap b

with T_ji = u_j u_i - b_j b_i and W_ji = u_j b_i - b_j u_i.  The pressure
solves (Lap_H + eps^-2 d_z^2) p = div N, which is exactly the anisotropic
projection of the pressure-free tendency N.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import spectral as sp
from .fields import FULL_PARITY, SMHDState, aniso_projection, project_components
from .integrators import if_rk_step
from .pem import StepperConfig, check_courant, check_finite, courant_number

__all__ = ["SMHDTendency", "smhd_rhs", "smhd_pressure", "step_smhd", "StepperConfig"]

# index pairs (j, i) of the stored flux entries
_SYM = ((0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2))
_ANTI = ((0, 1), (0, 2), (1, 2))


@dataclass(frozen=True)
class SMHDTendency:
    du: np.ndarray
    db: np.ndarray


def _check_eps(eps):
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")


def _pressure_free(grid, u, b):
    """Flux divergences without pressure, plus physical velocity samples."""
    U = sp.inverse_transform(grid, u, check=False)
    B = sp.inverse_transform(grid, b, check=False)
    prods = [U[j] * U[i] - B[j] * B[i] for j, i in _SYM]
    prods += [U[j] * B[i] - B[j] * U[i] for j, i in _ANTI]
    F = sp.dealias(grid, sp.forward_transform(grid, np.stack(prods)))
    T = {}
    for n, (j, i) in enumerate(_SYM):
        T[j, i] = T[i, j] = F[n]
    W = {}
    for n, (j, i) in enumerate(_ANTI):
        W[j, i] = F[6 + n]
        W[i, j] = -F[6 + n]
    ik = (1j * grid.dkx, 1j * grid.dky, 1j * grid.dkz)
    du = np.stack([-sum(ik[j] * T[j, i] for j in range(3)) for i in range(3)])
    db = np.stack([-sum(ik[j] * W[j, i] for j in range(3) if j != i) for i in range(3)])
    return du, db, U


def smhd_pressure(state: SMHDState, provisional: SMHDTendency):
    """Pressure making the velocity tendency divergence-free."""
    _check_eps(state.eps)
    g = state.grid
    n = provisional.du
    rhs = 1j * (g.dkx * n[0] + g.dky * n[1] + g.dkz * n[2])
    return sp.solve_poisson_aniso_3d(g, rhs, state.eps)


def _apply_pressure(grid, du, p, eps):
    return np.stack(
        [
            du[0] - 1j * grid.dkx * p,
            du[1] - 1j * grid.dky * p,
            du[2] - 1j * grid.dkz * p / eps**2,
        ]
    )


def smhd_rhs(state: SMHDState) -> SMHDTendency:
    """Full time derivative of (u, b) at fixed eps."""
    _check_eps(state.eps)
    g = state.grid
    du, db, _ = _pressure_free(g, state.u, state.b)
    du = du - g.k2 * state.u
    db = db - g.k2 * state.b
    p = smhd_pressure(state, SMHDTendency(du, db))
    return SMHDTendency(_apply_pressure(g, du, p, state.eps), db)


def step_smhd(state: SMHDState, cfg: StepperConfig) -> SMHDState:
    """One integrating-factor RK step with parity and divergence re-projection."""
    g, eps = state.grid, state.eps
    _check_eps(eps)
    courant = []

    def tendency(y, stage):
        du, db, U = _pressure_free(g, y[:3], y[3:])
        if stage == 0:
            courant.append(courant_number(g, U, cfg.dt))
        return np.concatenate([aniso_projection(g, du, eps), db])

    check_finite(state.stacked(), state.time)
    y = if_rk_step(state.stacked(), cfg.dt, g, tendency, cfg.scheme)
    time = state.time + cfg.dt
    check_finite(y, time)
    check_courant(courant[0], cfg, state.time)
    u = aniso_projection(g, project_components(g, y[:3], FULL_PARITY), eps)
    b = aniso_projection(g, project_components(g, y[3:], FULL_PARITY), eps)
    return SMHDState(g, u, b, eps, time)
