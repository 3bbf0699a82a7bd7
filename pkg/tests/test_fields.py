import numpy as np
import pytest

from primhd import spectral as sp
from primhd.errors import ConstraintError, GridMismatchError
from primhd.fields import (
    FULL_PARITY,
    HORIZONTAL_PARITY,
    ParityZ,
    PEMState,
    SMHDState,
    aniso_projection,
    barotropic_divergence,
    barotropic_projection,
    divergence,
    elsasser,
    from_elsasser,
    parity_residual,
    project_symmetry,
    recover_vertical,
)
from primhd.initial import random_horizontal

from conftest import random_band_limited


def test_even_projection_keeps_cosine(grid8):
    _, _, Z = grid8.mesh()
    c = sp.forward_transform(grid8, np.cos(np.pi * Z))
    assert np.allclose(project_symmetry(grid8, c, ParityZ.EVEN), c, atol=1e-16)


def test_even_projection_removes_sine(grid8):
    _, _, Z = grid8.mesh()
    c = sp.forward_transform(grid8, np.sin(np.pi * Z))
    assert np.max(np.abs(project_symmetry(grid8, c, ParityZ.EVEN))) <= 1e-16


def test_parity_parts_sum_to_field(grid8, rng):
    c = random_band_limited(grid8, rng)
    total = project_symmetry(grid8, c, ParityZ.EVEN) + project_symmetry(grid8, c, ParityZ.ODD)
    assert np.allclose(total, c, rtol=0, atol=1e-16)


def test_parity_matches_physical_reflection(grid8, rng):
    c = random_band_limited(grid8, rng)
    f = sp.inverse_transform(grid8, project_symmetry(grid8, c, ParityZ.ODD))
    # z_k = -1 + 2k/N, so z -> -z maps index k to (N - k) mod N
    reflected = f[(-np.arange(grid8.Nz)) % grid8.Nz]
    assert np.allclose(reflected, -f, atol=1e-13)


def test_recover_vertical_single_layer_mode():
    g = sp.Grid(16, 8, 16, L1=1.0, L2=1.0)
    X, Y, Z = g.mesh()
    k = 2 * np.pi / g.L1
    G = np.sin(k * X) * np.cos(2 * np.pi * Y)
    h = sp.forward_transform(g, np.stack([G * np.cos(np.pi * Z), np.zeros_like(G)]))
    w = sp.inverse_transform(g, recover_vertical(g, h))
    expected = -k * np.cos(k * X) * np.cos(2 * np.pi * Y) * np.sin(np.pi * Z) / np.pi
    assert np.max(np.abs(w - expected)) <= 1e-10


def test_recover_vertical_barotropic_field_gives_zero(grid8, rng):
    h = random_horizontal(grid8, rng)
    h[:, 1:] = 0
    assert np.max(np.abs(recover_vertical(grid8, h))) <= 1e-15


def test_recover_vertical_closes_divergence(grid16, rng):
    h = random_horizontal(grid16, rng, band=5, alpha=1.0)
    w = recover_vertical(grid16, h)
    v = np.concatenate([h, w[None]])
    assert np.max(np.abs(divergence(grid16, v))) <= 1e-10
    assert parity_residual(grid16, w[None], (ParityZ.ODD,)) <= 1e-15
    assert np.max(np.abs(sp.inverse_transform(grid16, w)[grid16.Nz // 2])) <= 1e-12  # w(z = 0) = 0


def test_recover_vertical_rejects_barotropic_divergence(grid8):
    X, _, _ = grid8.mesh()
    h = sp.forward_transform(grid8, np.stack([np.sin(2 * np.pi * X), np.zeros(grid8.shape)]))
    with pytest.raises(ConstraintError):
        recover_vertical(grid8, h)


def test_divergence_of_constant_and_shear(grid8):
    _, Y, _ = grid8.mesh()
    const = sp.forward_transform(grid8, np.ones((3,) + grid8.shape))
    shear = sp.forward_transform(grid8, np.stack([np.sin(2 * np.pi * Y), 0 * Y, 0 * Y]))
    assert not np.any(divergence(grid8, const))
    assert np.max(np.abs(divergence(grid8, shear))) <= 1e-15


def test_divergence_needs_three_components(grid8):
    with pytest.raises(GridMismatchError):
        divergence(grid8, np.zeros((2,) + grid8.spectral_shape, dtype=complex))


def test_barotropic_projection(grid8, rng):
    h = project_symmetry(grid8, random_band_limited(grid8, rng, 2), ParityZ.EVEN)
    p = barotropic_projection(grid8, h)
    assert np.max(np.abs(barotropic_divergence(grid8, p))) <= 1e-14
    assert np.array_equal(p[:, 1:], h[:, 1:])
    assert np.allclose(barotropic_projection(grid8, p), p, atol=1e-15)


@pytest.mark.parametrize("eps", [1.0, 0.3, 0.05])
def test_aniso_projection_is_orthogonal_in_weighted_energy(grid8, rng, eps):
    v = random_band_limited(grid8, rng, 3)
    p = aniso_projection(grid8, v, eps)
    assert np.max(np.abs(divergence(grid8, p))) <= 1e-12
    r = v - p
    weighted = sp.inner(grid8, p[:2], r[:2]) + eps**2 * sp.inner(grid8, p[2:], r[2:])
    assert abs(weighted) <= 1e-12 * sp.norm2(grid8, v)


def test_elsasser_examples():
    A, As = elsasser(np.array([1.0, 0.0]), np.array([0.0, 1.0]))
    assert A.tolist() == [1.0, 1.0] and As.tolist() == [1.0, -1.0]
    u = np.array([0.3, -2.0])
    A, As = elsasser(u, np.zeros(2))
    assert np.array_equal(A, u) and np.array_equal(As, u)


def test_elsasser_round_trip(rng):
    # dyadic values make sums and halvings exact; generic doubles agree to rounding
    u, b = rng.integers(-2**20, 2**20, (2, 5, 4)) / 2.0**10
    back_u, back_b = from_elsasser(*elsasser(u, b))
    assert np.array_equal(back_u, u) and np.array_equal(back_b, b)
    u, b = rng.standard_normal((2, 5, 4))
    back_u, back_b = from_elsasser(*elsasser(u, b))
    assert np.allclose(back_u, u, rtol=0, atol=1e-15) and np.allclose(back_b, b, rtol=0, atol=1e-15)


class TestStates:
    def test_pem_state_shapes(self, grid8):
        s = PEMState.zeros(grid8)
        assert s.u.shape == (2,) + grid8.spectral_shape
        with pytest.raises(GridMismatchError):
            PEMState(grid8, np.zeros((3,) + grid8.spectral_shape), s.b)

    def test_pem_constraints_of_random_state(self, pem16):
        res = pem16.constraint_residuals()
        assert max(res.values()) <= 1e-10

    def test_full_velocity_is_divergence_free(self, pem16):
        v = pem16.full_velocity()
        assert v.shape[0] == 3
        assert np.max(np.abs(divergence(pem16.grid, v))) <= 1e-10

    def test_well_prepared_smhd(self, pem16):
        s = SMHDState.well_prepared(pem16, 0.1)
        assert np.array_equal(s.u[:2], pem16.u)
        assert max(s.constraint_residuals().values()) <= 1e-10
        assert parity_residual(s.grid, s.u, FULL_PARITY) <= 1e-15
        assert parity_residual(s.grid, s.u[:2], HORIZONTAL_PARITY) <= 1e-15

    def test_smhd_rejects_bad_eps(self, grid8):
        with pytest.raises(ValueError):
            SMHDState.zeros(grid8, 0.0)

    def test_stacked_round_trip(self, pem16):
        y = pem16.stacked()
        back = pem16.from_stacked(y, 0.5)
        assert np.array_equal(back.u, pem16.u) and np.array_equal(back.b, pem16.b) and back.time == 0.5
