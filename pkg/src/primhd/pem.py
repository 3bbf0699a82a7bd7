"""Hydrostatic MHD (primitive equations with a magnetic field).

The prognostic unknowns are the horizontal velocity and magnetic field;
the verticals follow from incompressibility and the pressure is 2D.  The
nonlinear terms are assembled in flux form,

    du_i = -d_j (u_j u_i - b_j b_i) - d_i p + Lap u_i
    db_i = -d_j (u_j b_i - b_j u_i)         + Lap b_i,

which equals the advective form for divergence-free (u, b) and keeps the
truncated energy budget exact.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import spectral as sp
from .errors import BlowUpError, CFLError
from .fields import (
    HORIZONTAL_PARITY,
    PEMState,
    barotropic_projection,
    project_components,
    recover_vertical,
)
from .integrators import SCHEMES, if_rk_step

_SCHEME_ALIASES = {"IMEX-RK2": "RK2", "IMEX-RK3": "RK3", "RK2": "RK2", "RK3": "RK3"}


@dataclass(frozen=True)
class StepperConfig:
    dt: float = 1e-3
    scheme: str = "RK3"
    cfl_limit: float = 0.5
    clean_magnetic_barotropic: bool = False

    def __post_init__(self):
        if not (np.isfinite(self.dt) and self.dt > 0):
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not 0 < self.cfl_limit <= 1:
            raise ValueError(f"cfl_limit must lie in (0, 1], got {self.cfl_limit}")
        scheme = _SCHEME_ALIASES.get(str(self.scheme).upper())
        if scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        object.__setattr__(self, "scheme", scheme)
        object.__setattr__(self, "dt", float(self.dt))


@dataclass(frozen=True)
class PEMTendency:
    du: np.ndarray
    db: np.ndarray


def courant_number(grid, velocity_samples, dt):
    """dt * max(|u1|/dx + |u2|/dy + |u3|/dz) over the grid."""
    dx, dy, dz = grid.spacing
    U = velocity_samples
    return dt * float(np.max(np.abs(U[0]) / dx + np.abs(U[1]) / dy + np.abs(U[2]) / dz))


def check_courant(courant, cfg, time):
    if courant > 4 * cfg.cfl_limit:
        raise CFLError(f"Courant number {courant:.3g} exceeds 4 x cfl_limit at t = {time:.6g}", time)
    if courant > cfg.cfl_limit:
        warnings.warn(f"Courant number {courant:.3g} above cfl_limit at t = {time:.6g}", stacklevel=3)


def check_finite(y, time):
    if not np.all(np.isfinite(y)):
        raise BlowUpError(f"non-finite coefficients at t = {time:.6g}", time)


def _fluxes(grid, u, b):
    """Dealiased flux coefficients plus the physical velocity samples."""
    U = sp.inverse_transform(grid, np.concatenate([u, recover_vertical(grid, u)[None]]), check=False)
    B = sp.inverse_transform(grid, np.concatenate([b, recover_vertical(grid, b)[None]]), check=False)
    products = np.stack(
        [
            U[0] * U[0] - B[0] * B[0],  # T11
            U[0] * U[1] - B[0] * B[1],  # T12
            U[1] * U[1] - B[1] * B[1],  # T22
            U[2] * U[0] - B[2] * B[0],  # T31
            U[2] * U[1] - B[2] * B[1],  # T32
            U[0] * B[1] - B[0] * U[1],  # W12
            U[2] * B[0] - B[2] * U[0],  # W31
            U[2] * B[1] - B[2] * U[1],  # W32
        ]
    )
    return sp.dealias(grid, sp.forward_transform(grid, products)), U


def _pressure_from_fluxes(grid, F):
    kx, ky = grid.kx[0], grid.ky[0]
    T11, T12, T22 = F[0, 0], F[1, 0], F[2, 0]
    rhs = kx * kx * T11 + 2 * kx * ky * T12 + ky * ky * T22
    return sp.solve_poisson_2d(grid, rhs)


def _nonlinear(grid, u, b):
    F, U = _fluxes(grid, u, b)
    ikx, iky, ikz = 1j * grid.dkx, 1j * grid.dky, 1j * grid.dkz
    T11, T12, T22, T31, T32, W12, W31, W32 = F
    du = np.stack([-(ikx * T11 + iky * T12 + ikz * T31), -(ikx * T12 + iky * T22 + ikz * T32)])
    db = np.stack([iky * W12 - ikz * W31, -(ikx * W12 + ikz * W32)])
    p = _pressure_from_fluxes(grid, F)
    du[0, 0] -= 1j * grid.dkx[0] * p
    du[1, 0] -= 1j * grid.dky[0] * p
    return du, db, U


def barotropic_pressure(state: PEMState):
    """Zero-mean 2D pressure enforcing the z-averaged horizontal incompressibility."""
    F, _ = _fluxes(state.grid, state.u, state.b)
    return _pressure_from_fluxes(state.grid, F)


def pem_rhs(state: PEMState) -> PEMTendency:
    """Full time derivative (nonlinear, Lorentz, pressure and diffusion)."""
    g = state.grid
    du, db, _ = _nonlinear(g, state.u, state.b)
    return PEMTendency(du - g.k2 * state.u, db - g.k2 * state.b)


def step_pem(state: PEMState, cfg: StepperConfig) -> PEMState:
    """One integrating-factor RK step followed by the constraint projections."""
    g = state.grid
    courant = []

    def tendency(y, stage):
        du, db, U = _nonlinear(g, y[:2], y[2:])
        if stage == 0:
            courant.append(courant_number(g, U, cfg.dt))
        return np.concatenate([du, db])

    check_finite(state.stacked(), state.time)
    y = if_rk_step(state.stacked(), cfg.dt, g, tendency, cfg.scheme)
    time = state.time + cfg.dt
    check_finite(y, time)
    check_courant(courant[0], cfg, state.time)
    u = barotropic_projection(g, project_components(g, y[:2], HORIZONTAL_PARITY))
    b = project_components(g, y[2:], HORIZONTAL_PARITY)
    if cfg.clean_magnetic_barotropic:
        b = barotropic_projection(g, b)
    return PEMState(g, u, b, time)
