"""Initial states and seeded random band-limited fields.

Random coefficients are drawn on a fixed cube of mode indices
``[-band, band]^3`` independent of the grid, so the same seed gives the same
field on every grid that resolves the band.
"""

from __future__ import annotations

import numpy as np

from . import spectral as sp
from .fields import (
    HORIZONTAL_PARITY,
    PEMState,
    barotropic_projection,
    project_components,
)

PRESETS = ("random-smooth", "shear", "taylor-green-mhd")

#: mode cube and spectral slope of the "random-smooth" preset
SMOOTH_BAND = 2
SMOOTH_ALPHA = 3.0


def random_modes(grid, rng, ncomp, band, alpha=2.0):
    """Real zero-mean random fields with |c(m)| ~ |m|^-alpha for |m_i| <= band.

    Returns spectral coefficients of shape ``(ncomp, *grid.spectral_shape)``.
    """
    if band < 1:
        raise ValueError("band must be at least 1")
    if band > min(grid.band):
        raise ValueError(f"band {band} exceeds the dealiased band {grid.band} of the grid")
    n = 2 * band + 1
    m = np.arange(-band, band + 1)
    MZ, MY, MX = np.meshgrid(m, m, m, indexing="ij")
    r = np.sqrt(MX**2 + MY**2 + MZ**2)
    amp = np.where(r == 0, 0.0, np.power(np.where(r == 0, 1.0, r), -alpha))
    c = (rng.standard_normal((ncomp, n, n, n)) + 1j * rng.standard_normal((ncomp, n, n, n))) * amp
    # Hermitian completion: c(-m) = conj(c(m))
    c = 0.5 * (c + np.conj(c[:, ::-1, ::-1, ::-1]))
    out = np.zeros((ncomp,) + grid.spectral_shape, dtype=complex)
    zi = m % grid.Nz
    yi = m % grid.Ny
    out[:, zi[:, None, None], yi[None, :, None], np.arange(band + 1)[None, None, :]] = c[:, :, :, band:]
    return out


def random_horizontal(grid, rng, band=SMOOTH_BAND, alpha=SMOOTH_ALPHA):
    """Even-in-z horizontal field with barotropically divergence-free mean."""
    c = random_modes(grid, rng, 2, band, alpha)
    c = project_components(grid, c, HORIZONTAL_PARITY)
    return barotropic_projection(grid, c)


def _rms(grid, c):
    return np.sqrt(sp.norm2(grid, c) / grid.volume)


def random_smooth(grid, seed=0, amplitude=1.0, band=SMOOTH_BAND, alpha=SMOOTH_ALPHA):
    """Seeded smooth state whose velocity and magnetic field each have rms ``amplitude``."""
    rng = np.random.default_rng(seed)
    u = random_horizontal(grid, rng, band, alpha)
    b = random_horizontal(grid, rng, band, alpha)
    u *= amplitude / _rms(grid, u)
    b *= amplitude / _rms(grid, b)
    return PEMState(grid, u, b)


def random_perturbation(grid, seed, size):
    """Admissible (X, Y) pair scaled so that ||X||^2 + ||Y||^2 = size^2."""
    rng = np.random.default_rng(seed)
    x = random_horizontal(grid, rng)
    y = random_horizontal(grid, rng)
    norm = np.sqrt(sp.norm2(grid, x) + sp.norm2(grid, y))
    return x * (size / norm), y * (size / norm)


def shear_velocity(grid, t, amplitude=1.0):
    """Exact shear solution u1 = a sin(2 pi y / L2) exp(-(2 pi / L2)^2 t) on the grid."""
    k = 2 * np.pi / grid.L2
    _, Y, _ = grid.mesh()
    u1 = amplitude * np.sin(k * Y) * np.exp(-(k**2) * t)
    return np.stack([u1, np.zeros_like(u1)])


def shear(grid, amplitude=1.0):
    """Shear state built from its two Fourier coefficients, free of transform roundoff."""
    u = np.zeros((2,) + grid.spectral_shape, dtype=complex)
    u[0, 0, 1, 0] = -0.5j * amplitude
    u[0, 0, -1, 0] = 0.5j * amplitude
    return PEMState(grid, u, np.zeros_like(u))


def taylor_green_mhd(grid, amplitude=1.0):
    """Taylor-Green cells modulated by cos(pi z) with a crossed magnetic field.

    The velocity is horizontally divergence-free level by level, so its
    vertical component vanishes; the magnetic field has a depth-dependent
    shear in x and a barotropic component in y.
    """
    kx, ky = 2 * np.pi / grid.L1, 2 * np.pi / grid.L2
    X, Y, Z = grid.mesh()
    cz = np.cos(np.pi * Z)
    u = amplitude * np.stack(
        [
            np.sin(kx * X) * np.cos(ky * Y) * cz,
            -(kx / ky) * np.cos(kx * X) * np.sin(ky * Y) * cz,
        ]
    )
    b = 0.5 * amplitude * np.stack([np.sin(ky * Y) * cz, np.sin(kx * X)])
    return PEMState.from_physical(grid, u, b)


def preset(name, grid, seed=0, amplitude=1.0):
    if name == "random-smooth":
        return random_smooth(grid, seed, amplitude)
    if name == "shear":
        return shear(grid, amplitude)
    if name == "taylor-green-mhd":
        return taylor_green_mhd(grid, amplitude)
    raise ValueError(f"unknown initial condition {name!r}; expected one of {PRESETS}")
