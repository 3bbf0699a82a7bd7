"""Fourier machinery on the periodic box M x (-1, 1).

Physical samples are stored with shape ``(Nz, Ny, Nx)`` so that ``x`` is the
fastest varying index.  Spectral coefficients use the real-to-complex
half spectrum, shape ``(Nz, Ny, Nx//2 + 1)``: ``mz`` along axis 0 and ``my``
along axis 1 in FFT order, non-negative ``mx`` along axis 2.

The coefficients are normalised so that the field is the plain sum

    f(x, y, z) = sum_m c_m exp(i (kx x + ky y + kz z)),

with kx = 2 pi mx / L1, ky = 2 pi my / L2 and kz = pi mz.  The z samples sit
at z_k = -1 + 2 k / Nz, so the grid is symmetric about z = 0 and parity in z
is an exact symmetry of the sample set.

Every function accepts arbitrary leading batch axes (vector components).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import cached_property
from typing import ClassVar

import numpy as np
import scipy.fft as sfft

from .errors import ConstraintError, GridMismatchError, HermitianError

AXES3 = (-3, -2, -1)
AXES2 = (-2, -1)

#: absolute tolerance (scaled by the field magnitude when that exceeds one)
#: for zero-mean and Hermitian checks
CONSTRAINT_TOL = 1e-10

#: smallest aspect ratio accepted without a warning
MIN_EPS = 1e-3


def _signed_modes(n):
    return np.rint(sfft.fftfreq(n) * n).astype(int)


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on (0, L1) x (0, L2) x (-1, 1)."""

    Nx: int = 32
    Ny: int = 32
    Nz: int = 32
    L1: float = 1.0
    L2: float = 1.0

    Lz: ClassVar[float] = 2.0

    def __post_init__(self):
        for name in ("Nx", "Ny", "Nz"):
            n = getattr(self, name)
            if int(n) != n or n < 4 or n % 2:
                raise ValueError(f"{name} must be an even integer >= 4, got {n}")
            object.__setattr__(self, name, int(n))
        for name in ("L1", "L2"):
            length = float(getattr(self, name))
            if not np.isfinite(length) or length <= 0:
                raise ValueError(f"{name} must be positive, got {length}")
            object.__setattr__(self, name, length)

    @classmethod
    def cube(cls, n, L1=1.0, L2=1.0):
        return cls(n, n, n, L1, L2)

    # -- shapes and coordinates -------------------------------------------

    @property
    def shape(self):
        return (self.Nz, self.Ny, self.Nx)

    @property
    def spectral_shape(self):
        return (self.Nz, self.Ny, self.Nx // 2 + 1)

    @property
    def hshape(self):
        return (self.Ny, self.Nx)

    @property
    def hspectral_shape(self):
        return (self.Ny, self.Nx // 2 + 1)

    @property
    def size(self):
        return self.Nx * self.Ny * self.Nz

    @property
    def volume(self):
        return self.Lz * self.L1 * self.L2

    @property
    def area(self):
        return self.L1 * self.L2

    @property
    def spacing(self):
        return (self.L1 / self.Nx, self.L2 / self.Ny, self.Lz / self.Nz)

    @cached_property
    def x(self):
        return np.arange(self.Nx) * (self.L1 / self.Nx)

    @cached_property
    def y(self):
        return np.arange(self.Ny) * (self.L2 / self.Ny)

    @cached_property
    def z(self):
        return -1.0 + np.arange(self.Nz) * (self.Lz / self.Nz)

    def mesh(self):
        """Broadcastable coordinate arrays ``(X, Y, Z)`` of shape ``grid.shape``."""
        Z, Y, X = np.meshgrid(self.z, self.y, self.x, indexing="ij")
        return X, Y, Z

    def refine(self, factor):
        """Grid with every sample count multiplied by ``factor``."""
        return Grid(self.Nx * factor, self.Ny * factor, self.Nz * factor, self.L1, self.L2)

    # -- mode indices and wavenumbers ---------------------------------------

    @cached_property
    def mx(self):
        return np.arange(self.Nx // 2 + 1)[None, None, :]

    @cached_property
    def my(self):
        return _signed_modes(self.Ny)[None, :, None]

    @cached_property
    def mz(self):
        return _signed_modes(self.Nz)[:, None, None]

    @cached_property
    def kx(self):
        return 2 * np.pi * self.mx / self.L1

    @cached_property
    def ky(self):
        return 2 * np.pi * self.my / self.L2

    @cached_property
    def kz(self):
        return np.pi * self.mz.astype(float)

    def _odd_symbol(self, k, m, n):
        # first derivatives of the Nyquist mode are not real-representable
        return np.where(np.abs(m) == n // 2, 0.0, k)

    @cached_property
    def dkx(self):
        return self._odd_symbol(self.kx, self.mx, self.Nx)

    @cached_property
    def dky(self):
        return self._odd_symbol(self.ky, self.my, self.Ny)

    @cached_property
    def dkz(self):
        return self._odd_symbol(self.kz, self.mz, self.Nz)

    @cached_property
    def kh2(self):
        """|k_H|^2, shape (1, Ny, Nx//2+1)."""
        return self.kx**2 + self.ky**2

    @cached_property
    def k2(self):
        """|k|^2 on the full spectral shape."""
        return self.kh2 + self.kz**2

    @cached_property
    def dealias_mask(self):
        return (
            (np.abs(self.mx) <= self.Nx // 3)
            & (np.abs(self.my) <= self.Ny // 3)
            & (np.abs(self.mz) <= self.Nz // 3)
        )

    @cached_property
    def band(self):
        return (self.Nx // 3, self.Ny // 3, self.Nz // 3)

    @cached_property
    def hweights(self):
        """Multiplicity of each stored mx column in the full spectrum."""
        w = np.full(self.Nx // 2 + 1, 2.0)
        w[0] = 1.0
        w[-1] = 1.0
        return w

    @cached_property
    def _zsign(self):
        return np.where(self.mz % 2 == 0, 1.0, -1.0)

    @cached_property
    def zflip(self):
        """Index map mz -> -mz along the spectral z axis."""
        return (-np.arange(self.Nz)) % self.Nz

    @cached_property
    def yflip(self):
        return (-np.arange(self.Ny)) % self.Ny

    def check_spectral(self, c, ndim=3):
        want = self.spectral_shape if ndim == 3 else self.hspectral_shape
        if np.shape(c)[-ndim:] != want:
            raise GridMismatchError(f"spectral array shape {np.shape(c)} does not match grid {want}")

    def check_physical(self, f, ndim=3):
        want = self.shape if ndim == 3 else self.hshape
        if np.shape(f)[-ndim:] != want:
            raise GridMismatchError(f"sample array shape {np.shape(f)} does not match grid {want}")


# -- transforms ---------------------------------------------------------------


def forward_transform(grid, f):
    """Samples ``(..., Nz, Ny, Nx)`` -> coefficients ``(..., Nz, Ny, Nx//2+1)``."""
    f = np.asarray(f, dtype=float)
    grid.check_physical(f)
    if not np.all(np.isfinite(f)):
        raise ValueError("samples must be finite")
    return sfft.rfftn(f, axes=AXES3, norm="forward") * grid._zsign


def hermitian_residual(grid, c):
    """Largest anti-Hermitian part in the self-conjugate planes mx = 0 and mx = Nx/2."""
    res = 0.0
    for col in (0, grid.Nx // 2):
        plane = c[..., col]
        mirrored = np.conj(plane[..., grid.zflip, :][..., :, grid.yflip])
        res = max(res, float(np.max(np.abs(plane - mirrored), initial=0.0)) / 2)
    return res


def inverse_transform(grid, c, check=True):
    """Coefficients -> real samples; raises :class:`HermitianError` for non-real input."""
    grid.check_spectral(c)
    if check:
        scale = max(1.0, float(np.max(np.abs(c), initial=0.0)))
        res = hermitian_residual(grid, c)
        if res > CONSTRAINT_TOL * scale:
            raise HermitianError(f"coefficients are not Hermitian (residual {res:.3e})")
    return sfft.irfftn(c * grid._zsign, s=grid.shape, axes=AXES3, norm="forward")


def forward_transform_h(grid, f):
    """Horizontal (z-independent) samples ``(..., Ny, Nx)`` -> ``(..., Ny, Nx//2+1)``."""
    f = np.asarray(f, dtype=float)
    grid.check_physical(f, ndim=2)
    return sfft.rfftn(f, axes=AXES2, norm="forward")


def inverse_transform_h(grid, c):
    grid.check_spectral(c, ndim=2)
    return sfft.irfftn(c, s=grid.hshape, axes=AXES2, norm="forward")


def barotropic(c):
    """The mz = 0 plane, i.e. the vertical average, as a 2D spectral field."""
    return c[..., 0, :, :]


def lift(grid, c2):
    """Embed a 2D spectral field as a z-independent 3D one."""
    out = np.zeros(c2.shape[:-2] + grid.spectral_shape, dtype=complex)
    out[..., 0, :, :] = c2
    return out


# -- spectral calculus --------------------------------------------------------


def derivative(grid, c, axis):
    """Spectral derivative along ``axis`` in {'x', 'y', 'z'} (or 0, 1, 2)."""
    k = {"x": grid.dkx, "y": grid.dky, "z": grid.dkz, 0: grid.dkx, 1: grid.dky, 2: grid.dkz}[axis]
    return 1j * k * c


def gradient(grid, c):
    """Stack of (d/dx, d/dy, d/dz) along a new axis placed before the grid axes."""
    return np.stack([1j * grid.dkx * c, 1j * grid.dky * c, 1j * grid.dkz * c], axis=-4)


def laplacian(grid, c):
    return -grid.k2 * c


def horizontal_laplacian(grid, c):
    return -grid.kh2 * c


def dealias(grid, c):
    """Zero every mode with |m| > floor(N/3) on any axis."""
    return np.where(grid.dealias_mask, c, 0.0)


# -- quadrature ---------------------------------------------------------------


def inner(grid, a, b):
    """Integral of the product of two real fields given by their coefficients.

    Leading axes are summed too, so vectors give the dot-product integral.
    """
    s = np.real(a * np.conj(b)) * grid.hweights
    return grid.volume * float(np.sum(s))


def norm2(grid, c):
    """||f||_2^2 via Parseval."""
    return inner(grid, c, c)


def integrate(grid, f):
    """Uniform-grid (trapezoidal) integral of physical samples over the box."""
    return float(np.sum(f)) * grid.volume / f.shape[-1] / f.shape[-2] / f.shape[-3]


def mean(c):
    return c[..., 0, 0, 0]


def resample(c, src, dst):
    """Move coefficients between grids with the same periods.

    Modes with |m| < N/2 present on both grids are copied; the rest are zero.
    Both padding to a finer grid and truncating to a coarser one are exact for
    fields without Nyquist content.
    """
    if (src.L1, src.L2) != (dst.L1, dst.L2):
        raise GridMismatchError("resampling requires equal periods")
    src.check_spectral(c)
    out = np.zeros(c.shape[:-3] + dst.spectral_shape, dtype=complex)
    kz = min(src.Nz, dst.Nz) // 2
    ky = min(src.Ny, dst.Ny) // 2
    kx = min(src.Nx, dst.Nx) // 2
    zi = np.r_[0:kz, -kz + 1 : 0]
    yi = np.r_[0:ky, -ky + 1 : 0]
    sub = c[..., zi, :, :][..., :, yi, :][..., :kx]
    out[..., zi[:, None], yi[None, :], :kx] = sub
    return out


def oversampled_samples(grid, c, factor=2):
    """Physical samples of a band-limited field on the ``factor``-times finer grid."""
    if factor == 1:
        return inverse_transform(grid, c, check=False), grid
    fine = grid.refine(factor)
    return inverse_transform(fine, resample(c, grid, fine), check=False), fine


# -- elliptic solves ----------------------------------------------------------


def _check_zero_mean(value, scale, what):
    tol = CONSTRAINT_TOL * max(1.0, scale)
    if np.any(np.abs(value) > tol):
        raise ConstraintError(
            f"{what} has nonzero mean coefficient {np.max(np.abs(value)):.3e} (tolerance {tol:.1e})"
        )


def solve_poisson_2d(grid, rhs):
    """Solve Delta_H p = rhs on M for zero-mean p; ``rhs`` has shape ``(..., Ny, Nx//2+1)``."""
    grid.check_spectral(rhs, ndim=2)
    _check_zero_mean(rhs[..., 0, 0], float(np.max(np.abs(rhs), initial=0.0)), "Poisson right-hand side")
    kh2 = grid.kh2[0]
    safe = np.where(kh2 == 0, 1.0, kh2)
    p = np.where(kh2 == 0, 0.0, -rhs / safe)
    return p


def solve_poisson_aniso_3d(grid, rhs, eps):
    """Solve (Delta_H + eps^-2 d_z^2) p = rhs on the box for zero-mean p."""
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    if eps < MIN_EPS:
        warnings.warn(f"eps = {eps} is below {MIN_EPS}; anisotropic Poisson is ill-conditioned", stacklevel=2)
    grid.check_spectral(rhs)
    _check_zero_mean(mean(rhs), float(np.max(np.abs(rhs), initial=0.0)), "Poisson right-hand side")
    return _aniso_inverse(grid, rhs, eps)


def aniso_symbol(grid, eps):
    return grid.kh2 + grid.kz**2 / eps**2


def _aniso_inverse(grid, rhs, eps):
    d = aniso_symbol(grid, eps)
    safe = np.where(d == 0, 1.0, d)
    return np.where(d == 0, 0.0, -rhs / safe)
