"""Empirical constants of interpolation and trilinear inequalities.

Each evaluator returns a :class:`RatioSample` holding the left side, the
right-hand structure with the constant set to one, and their ratio; the
largest ratio over many random fields estimates the sharp constant.

Inequality ids:

``t24``   ||f||_{L4(M)}   vs ||f||_{L2(M)}^1/2 ||f||_{H1(M)}^1/2  (2D)
``t25``   ||f||_3         vs ||f||_2^1/2 ||f||_{H1}^1/2
``t26``   ||f||_6         vs ||f||_{H1}
``t27``   Minkowski: || int_z |f| dz ||_{L^p(M)} vs int_z ||f||_{L^p(M)} dz
``l22a``  |int_M (int f dz)(int g h dz)| vs |f|^1/2 (|f|^1/2 + |grad_H f|^1/2) |g| |h|^1/2 (|h|^1/2 + |grad_H h|^1/2)
``l22b``  same left side vs |f| |g|^1/2 (|g|^1/2 + |grad_H g|^1/2) |h|^1/2 (|h|^1/2 + |grad_H h|^1/2)
``l23``   |int (phi . grad q) psi| vs |grad phi_H|^1/2 |Lap phi_H|^1/2 |grad q|^1/2 |Lap q|^1/2 |psi|

Unlabelled norms are L2 over the box.  Polynomial integrands are evaluated
on a grid fine enough to make the uniform rule exact; |f|^3 and |f|^p are
sampled on the working grid, so refining the grid is a genuine check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import spectral as sp
from .diagnostics import grad_norm2, l2_norm2, lap_norm2
from .errors import ConstraintError
from .fields import ParityZ, barotropic_projection, divergence, project_symmetry, recover_vertical
from .initial import random_modes

LEMMA_IDS = ("t24", "t25", "t26", "t27", "l22a", "l22b", "l23")


@dataclass(frozen=True)
class FieldConstraint:
    zero_mean: bool = True
    divergence_free: bool = False
    vanishes_at_z0: bool = False
    parity: ParityZ | None = None
    band: int = 8
    alpha: float = 2.0
    seed: int = 0


@dataclass(frozen=True)
class RatioSample:
    lhs: float
    rhs: float
    ratio: float
    flagged: bool

    @classmethod
    def of(cls, lhs, rhs):
        if rhs > 0:
            return cls(float(lhs), float(rhs), float(lhs / rhs), False)
        return cls(float(lhs), float(rhs), math.nan, True)


# -- generation -----------------------------------------------------------------


def _mean_offset(rng, zero_mean):
    return 0.0 if zero_mean else rng.standard_normal()


def random_field(constraint: FieldConstraint, grid, rng=None):
    """Seeded random field honouring ``constraint``.

    Returns a scalar field ``(Nz, Ny, Nx//2+1)`` or, with
    ``divergence_free``, a 3-vector whose horizontal part is even in z and
    whose third component is recovered by vertical integration.
    """
    c = constraint
    if rng is None:
        rng = np.random.default_rng(c.seed)
    if c.divergence_free:
        if c.parity is not None and ParityZ(c.parity) is ParityZ.ODD:
            raise ConstraintError("divergence-free fields are built with even horizontal parts")
        if not c.zero_mean:
            raise ConstraintError("divergence-free fields are generated with zero mean")
        h = random_modes(grid, rng, 2, c.band, c.alpha)
        h = barotropic_projection(grid, project_symmetry(grid, h, ParityZ.EVEN))
        w = recover_vertical(grid, h)
        phi = np.concatenate([h, w[None]])
        check_lemma23_hypotheses(grid, phi, tol=1e-12)
        return phi
    f = random_modes(grid, rng, 1, c.band, c.alpha)[0]
    f[0, 0, 0] = _mean_offset(rng, c.zero_mean)
    if c.vanishes_at_z0:
        if c.parity is not None and ParityZ(c.parity) is ParityZ.EVEN:
            raise ConstraintError("an even field cannot be required to vanish at z = 0")
        if not c.zero_mean:
            raise ConstraintError("vanishing at z = 0 forces a zero mean")
        return project_symmetry(grid, f, ParityZ.ODD)
    if c.parity is not None:
        if not c.zero_mean and ParityZ(c.parity) is ParityZ.ODD:
            raise ConstraintError("an odd field has zero mean")
        f = project_symmetry(grid, f, c.parity)
    return f


def random_field_2d(constraint: FieldConstraint, grid, rng=None):
    """Random field on M (2D coefficients) from the mz = 0 layer of the mode cube."""
    if rng is None:
        rng = np.random.default_rng(constraint.seed)
    f = random_modes(grid, rng, 1, constraint.band, constraint.alpha)[0, 0]
    f[0, 0] = _mean_offset(rng, constraint.zero_mean)
    return f


def values_at_z0(c):
    """2D coefficients of f(x, y, 0)."""
    return c.sum(axis=-3)


def check_lemma23_hypotheses(grid, phi, tol=sp.CONSTRAINT_TOL):
    scale = max(1.0, float(np.max(np.abs(phi))))
    div = float(np.max(np.abs(divergence(grid, phi))))
    if div > tol * scale:
        raise ConstraintError(f"phi is not divergence-free (residual {div:.3e})")
    mean = float(np.max(np.abs(phi[:, 0, 0, 0])))
    if mean > tol * scale:
        raise ConstraintError(f"phi has nonzero mean ({mean:.3e})")
    trace = float(np.max(np.abs(values_at_z0(phi[2]))))
    if trace > tol * scale:
        raise ConstraintError(f"phi_3 does not vanish at z = 0 ({trace:.3e})")


# -- quadrature helpers ------------------------------------------------------------


def _max_mode(grid, c):
    """Largest |m| on any axis carrying a nonzero coefficient."""
    nz = np.nonzero(np.abs(c) > 0)
    if nz[0].size == 0:
        return 0
    idx = nz[-3:]
    mz = np.abs(grid.mz.ravel()[idx[0]])
    my = np.abs(grid.my.ravel()[idx[1]])
    mx = grid.mx.ravel()[idx[2]]
    return int(max(mz.max(), my.max(), mx.max()))


def _factor(grid, degree, *arrays):
    """Refinement making a degree-``degree`` product integrate exactly."""
    m = max(_max_mode(grid, a) for a in arrays)
    n = min(grid.Nx, grid.Ny, grid.Nz)
    return max(1, math.ceil((degree * m + 1) / n))


def _samples(grid, c, factor):
    return sp.oversampled_samples(grid, c, factor)


def _h1_2d(grid, c2):
    kx, ky = grid.dkx[0], grid.dky[0]
    w = grid.hweights
    l2 = grid.area * float(np.sum(np.abs(c2) ** 2 * w))
    g2 = grid.area * float(np.sum(np.abs(c2) ** 2 * (kx**2 + ky**2) * w))
    return l2, g2


def _hgrad_norm2(grid, c):
    return grid.volume * float(np.sum(np.abs(c) ** 2 * (grid.dkx**2 + grid.dky**2) * grid.hweights))


# -- evaluators ------------------------------------------------------------------------


def eval_t24(grid, f2):
    """2D Ladyzhenskaya on M for 2D coefficients ``f2``."""
    l2, g2 = _h1_2d(grid, f2)
    factor = _factor(grid, 4, f2[None])
    fine = grid.refine(factor) if factor > 1 else grid
    c = f2 if factor == 1 else sp.resample(sp.lift(grid, f2), grid, fine)[0]
    vals = sp.inverse_transform_h(fine, c)
    lhs = (float(np.mean(vals**4)) * grid.area) ** 0.25
    rhs = math.sqrt(math.sqrt(l2) * math.sqrt(l2 + g2))
    return RatioSample.of(lhs, rhs)


def eval_t25(grid, f):
    vals = sp.inverse_transform(grid, f, check=False)
    lhs = sp.integrate(grid, np.abs(vals) ** 3) ** (1 / 3)
    l2 = l2_norm2(grid, f)
    rhs = math.sqrt(math.sqrt(l2) * math.sqrt(l2 + grad_norm2(grid, f)))
    return RatioSample.of(lhs, rhs)


def eval_t26(grid, f):
    vals, fine = _samples(grid, f, _factor(grid, 6, f))
    lhs = sp.integrate(fine, vals**6) ** (1 / 6)
    rhs = math.sqrt(l2_norm2(grid, f) + grad_norm2(grid, f))
    return RatioSample.of(lhs, rhs)


def eval_t27(grid, f, p=2.0):
    """Minkowski with the horizontal plane as the outer and z as the inner variable."""
    vals = np.abs(sp.inverse_transform(grid, f, check=False))
    dz = grid.Lz / grid.Nz
    dA = grid.area / (grid.Nx * grid.Ny)
    inner_z = vals.sum(axis=0) * dz
    lhs = (float(np.sum(inner_z**p)) * dA) ** (1 / p)
    per_level = (np.sum(vals**p, axis=(1, 2)) * dA) ** (1 / p)
    rhs = float(np.sum(per_level)) * dz
    return RatioSample.of(lhs, rhs)


def lemma22_lhs(grid, f, g, h):
    """|int_M (int f dz)(int g h dz) dx dy| by nested quadrature."""
    factor = _factor(grid, 3, f, g, h)
    F, fine = _samples(grid, f, factor)
    G, _ = _samples(grid, g, factor)
    H, _ = _samples(grid, h, factor)
    dz = fine.Lz / fine.Nz
    dA = fine.area / (fine.Nx * fine.Ny)
    outer = (F.sum(axis=0) * dz) * ((G * H).sum(axis=0) * dz)
    return abs(float(np.sum(outer)) * dA)


def _half_term(n2, g2):
    return n2**0.25 * (n2**0.25 + g2**0.25)


def eval_lemma22(grid, f, g, h):
    """Both right-hand structures for the trilinear depth-integrated form."""
    lhs = lemma22_lhs(grid, f, g, h)
    nf, ng, nh = l2_norm2(grid, f), l2_norm2(grid, g), l2_norm2(grid, h)
    gf, gg, gh = _hgrad_norm2(grid, f), _hgrad_norm2(grid, g), _hgrad_norm2(grid, h)
    rhs_a = _half_term(nf, gf) * math.sqrt(ng) * _half_term(nh, gh)
    rhs_b = math.sqrt(nf) * _half_term(ng, gg) * _half_term(nh, gh)
    return RatioSample.of(lhs, rhs_a), RatioSample.of(lhs, rhs_b)


def eval_lemma23(grid, phi, q, psi, tol=sp.CONSTRAINT_TOL):
    """|int (phi . grad q) psi| against the anisotropic right-hand structure."""
    check_lemma23_hypotheses(grid, phi, tol)
    gq = sp.gradient(grid, q)
    factor = _factor(grid, 3, phi, q, psi)
    P, fine = _samples(grid, phi, factor)
    GQ, _ = _samples(grid, gq, factor)
    S, _ = _samples(grid, psi, factor)
    lhs = abs(sp.integrate(fine, np.sum(P * GQ, axis=0) * S))
    rhs = (
        (grad_norm2(grid, phi[:2]) * lap_norm2(grid, phi[:2]) * grad_norm2(grid, q) * lap_norm2(grid, q))
        ** 0.25
        * math.sqrt(l2_norm2(grid, psi))
    )
    return RatioSample.of(lhs, rhs)


# -- sweeps ------------------------------------------------------------------------------


def draw_sample(which, grid, seed, band=8, alpha=2.0):
    """Seeded random arguments for lemma ``which``; identical on every grid resolving ``band``."""
    rng = np.random.default_rng(seed)
    c = FieldConstraint(band=band, alpha=alpha, seed=seed)
    if which == "t24":
        return (random_field_2d(c, grid, rng),)
    if which in ("t25", "t26", "t27"):
        return (random_field(c, grid, rng),)
    if which in ("l22a", "l22b"):
        return tuple(random_field(c, grid, rng) for _ in range(3))
    if which == "l23":
        phi = random_field(FieldConstraint(divergence_free=True, band=band, alpha=alpha), grid, rng)
        return phi, random_field(c, grid, rng), random_field(c, grid, rng)
    raise ValueError(f"unknown lemma id {which!r}")


def evaluate(which, grid, args):
    if which == "t24":
        return eval_t24(grid, *args)
    if which == "t25":
        return eval_t25(grid, *args)
    if which == "t26":
        return eval_t26(grid, *args)
    if which == "t27":
        return eval_t27(grid, *args)
    if which == "l22a":
        return eval_lemma22(grid, *args)[0]
    if which == "l22b":
        return eval_lemma22(grid, *args)[1]
    if which == "l23":
        return eval_lemma23(grid, *args)
    raise ValueError(f"unknown lemma id {which!r}")


def sample_ratios(n, which, grid, base_seed=0, band=8, alpha=2.0):
    """RatioSamples for seeds base_seed, ..., base_seed + n - 1."""
    return [evaluate(which, grid, draw_sample(which, grid, base_seed + i, band, alpha)) for i in range(n)]


def summarize(samples):
    ratios = np.array([s.ratio for s in samples if not s.flagged])
    flagged = sum(s.flagged for s in samples)
    if ratios.size == 0:
        raise ValueError("every sample was flagged; no ratio statistics available")
    return {
        "max": float(ratios.max()),
        "mean": float(ratios.mean()),
        "p99": float(np.percentile(ratios, 99)),
        "n": int(ratios.size),
        "flagged": int(flagged),
    }


def constant_sweep(n, constraint: FieldConstraint, which, grid):
    """{max, mean, p99, n, flagged} of the ratio over ``n`` seeded samples."""
    if n < 1:
        raise ValueError("constant_sweep needs n >= 1")
    return summarize(sample_ratios(n, which, grid, constraint.seed, constraint.band, constraint.alpha))
