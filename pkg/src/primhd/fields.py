"""Field algebra under the structural constraints of the models.

Vector fields are stacked spectral arrays: a horizontal field has shape
``(2, Nz, Ny, Nx//2+1)`` and a full 3D field ``(3, Nz, Ny, Nx//2+1)``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace

import numpy as np

from . import spectral as sp
from .errors import ConstraintError, GridMismatchError


class ParityZ(enum.Enum):
    EVEN = "even"
    ODD = "odd"


# parity class of each stored component
HORIZONTAL_PARITY = (ParityZ.EVEN, ParityZ.EVEN)
FULL_PARITY = (ParityZ.EVEN, ParityZ.EVEN, ParityZ.ODD)


def project_symmetry(grid, c, parity):
    """Even or odd part in z of a scalar field (or a stack of them)."""
    flipped = c[..., grid.zflip, :, :]
    if ParityZ(parity) is ParityZ.EVEN:
        return 0.5 * (c + flipped)
    return 0.5 * (c - flipped)


def project_components(grid, v, parities):
    return np.stack([project_symmetry(grid, v[i], p) for i, p in enumerate(parities)])


def parity_residual(grid, v, parities):
    """Largest coefficient of the wrong-parity part over the components of ``v``."""
    res = 0.0
    for i, p in enumerate(parities):
        other = ParityZ.ODD if ParityZ(p) is ParityZ.EVEN else ParityZ.EVEN
        res = max(res, float(np.max(np.abs(project_symmetry(grid, v[i], other)))))
    return res


def horizontal_divergence(grid, h):
    return 1j * grid.dkx * h[0] + 1j * grid.dky * h[1]


def divergence(grid, v):
    """d_x v1 + d_y v2 + d_z v3 for a 3-component spectral field."""
    if v.shape[0] != 3:
        raise GridMismatchError(f"divergence needs three components, got {v.shape[0]}")
    grid.check_spectral(v)
    return horizontal_divergence(grid, v) + 1j * grid.dkz * v[2]


def barotropic_divergence(grid, h):
    """Horizontal divergence of the vertical average, as 2D coefficients."""
    return horizontal_divergence(grid, h)[0]


def _scale(a):
    return max(1.0, float(np.max(np.abs(a), initial=0.0)))


def recover_vertical(grid, h, tol=sp.CONSTRAINT_TOL):
    """Vertical component w = -int_0^z div_H h from an even horizontal field.

    Raises :class:`ConstraintError` if the vertically averaged horizontal
    divergence does not vanish, since w would then fail to be periodic.
    """
    grid.check_spectral(h)
    d = horizontal_divergence(grid, h)
    bad = float(np.max(np.abs(d[0])))
    if bad > tol * _scale(h):
        raise ConstraintError(f"vertically averaged horizontal divergence is {bad:.3e}")
    kz = grid.dkz
    safe = np.where(kz == 0, 1.0, kz)
    prim = np.where(kz == 0, 0.0, d / (1j * safe))
    w = -prim
    # int_0^z exp(i kz s) ds = (exp(i kz z) - 1) / (i kz): pin w(z=0) = 0
    w[0] = prim.sum(axis=0)
    return w


def barotropic_projection(grid, h):
    """Remove the gradient part of the z-average of a horizontal field."""
    out = h.copy()
    kx, ky = grid.dkx[0], grid.dky[0]
    k2 = kx**2 + ky**2
    safe = np.where(k2 == 0, 1.0, k2)
    phi = np.where(k2 == 0, 0.0, (kx * h[0, 0] + ky * h[1, 0]) / safe)
    out[0, 0] -= kx * phi
    out[1, 0] -= ky * phi
    return out


def aniso_projection(grid, v, eps):
    """Project a 3D field onto d_x v1 + d_y v2 + d_z v3 = 0.

    The removed part is (d_H phi, eps^-2 d_z phi), which makes the projection
    orthogonal in the weighted energy |v_H|^2 + eps^2 |v_3|^2.
    """
    kx, ky, kz = grid.dkx, grid.dky, grid.dkz
    d = kx**2 + ky**2 + kz**2 / eps**2
    safe = np.where(d == 0, 1.0, d)
    phi = np.where(d == 0, 0.0, (kx * v[0] + ky * v[1] + kz * v[2]) / safe)
    return np.stack([v[0] - kx * phi, v[1] - ky * phi, v[2] - kz * phi / eps**2])


def elsasser(u, b):
    """(A, A*) = (u + b, u - b)."""
    if np.shape(u) != np.shape(b):
        raise GridMismatchError("velocity and magnetic field shapes differ")
    return u + b, u - b


def from_elsasser(A, Astar):
    return 0.5 * (A + Astar), 0.5 * (A - Astar)


def _as_stack(grid, v, n):
    v = np.asarray(v, dtype=complex)
    if v.shape != (n,) + grid.spectral_shape:
        raise GridMismatchError(f"expected shape {(n,) + grid.spectral_shape}, got {v.shape}")
    return v


@dataclass(frozen=True, eq=False)
class PEMState:
    """Horizontal velocity and magnetic field of the hydrostatic model.

    Vertical components are diagnostic; use :meth:`full_velocity` and
    :meth:`full_magnetic`.
    """

    grid: sp.Grid
    u: np.ndarray
    b: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "u", _as_stack(self.grid, self.u, 2))
        object.__setattr__(self, "b", _as_stack(self.grid, self.b, 2))
        object.__setattr__(self, "time", float(self.time))

    model = "PEM"

    @classmethod
    def zeros(cls, grid, time=0.0):
        z = np.zeros((2,) + grid.spectral_shape, dtype=complex)
        return cls(grid, z, z.copy(), time)

    @classmethod
    def from_physical(cls, grid, u, b, time=0.0):
        return cls(grid, sp.forward_transform(grid, u), sp.forward_transform(grid, b), time)

    def stacked(self):
        return np.concatenate([self.u, self.b])

    def from_stacked(self, y, time):
        return PEMState(self.grid, y[:2], y[2:], time)

    def with_time(self, time):
        return replace(self, time=time)

    def full_velocity(self):
        return np.concatenate([self.u, recover_vertical(self.grid, self.u)[None]])

    def full_magnetic(self):
        return np.concatenate([self.b, recover_vertical(self.grid, self.b)[None]])

    def horizontal(self):
        return self.u, self.b

    def constraint_residuals(self):
        g = self.grid
        res = {
            "parity_u": parity_residual(g, self.u, HORIZONTAL_PARITY),
            "parity_b": parity_residual(g, self.b, HORIZONTAL_PARITY),
            "baro_div_u": float(np.max(np.abs(barotropic_divergence(g, self.u)))),
            "baro_div_b": float(np.max(np.abs(barotropic_divergence(g, self.b)))),
        }
        res["div_u"] = float(np.max(np.abs(divergence(g, self.full_velocity()))))
        res["div_b"] = float(np.max(np.abs(divergence(g, self.full_magnetic()))))
        return res


@dataclass(frozen=True, eq=False)
class SMHDState:
    """Full velocity and magnetic field of the scaled MHD model at aspect ratio eps."""

    grid: sp.Grid
    u: np.ndarray
    b: np.ndarray
    eps: float = 1.0
    time: float = 0.0

    model = "SMHD"

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError(f"eps must be positive, got {self.eps}")
        object.__setattr__(self, "u", _as_stack(self.grid, self.u, 3))
        object.__setattr__(self, "b", _as_stack(self.grid, self.b, 3))
        object.__setattr__(self, "eps", float(self.eps))
        object.__setattr__(self, "time", float(self.time))

    @classmethod
    def zeros(cls, grid, eps, time=0.0):
        z = np.zeros((3,) + grid.spectral_shape, dtype=complex)
        return cls(grid, z, z.copy(), eps, time)

    @classmethod
    def well_prepared(cls, pem, eps):
        """Lift a hydrostatic state, taking the verticals from incompressibility."""
        return cls(pem.grid, pem.full_velocity(), pem.full_magnetic(), eps, pem.time)

    def stacked(self):
        return np.concatenate([self.u, self.b])

    def from_stacked(self, y, time):
        return SMHDState(self.grid, y[:3], y[3:], self.eps, time)

    def with_time(self, time):
        return replace(self, time=time)

    def full_velocity(self):
        return self.u

    def full_magnetic(self):
        return self.b

    def horizontal(self):
        return self.u[:2], self.b[:2]

    def constraint_residuals(self):
        g = self.grid
        return {
            "parity_u": parity_residual(g, self.u, FULL_PARITY),
            "parity_b": parity_residual(g, self.b, FULL_PARITY),
            "baro_div_u": float(np.max(np.abs(barotropic_divergence(g, self.u[:2])))),
            "baro_div_b": float(np.max(np.abs(barotropic_divergence(g, self.b[:2])))),
            "div_u": float(np.max(np.abs(divergence(g, self.u)))),
            "div_b": float(np.max(np.abs(divergence(g, self.b)))),
        }
