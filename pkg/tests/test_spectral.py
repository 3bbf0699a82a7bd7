import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from primhd import spectral as sp
from primhd.errors import ConstraintError, HermitianError

from conftest import random_band_limited, random_samples


class TestGrid:
    def test_defaults(self):
        g = sp.Grid()
        assert g.shape == (32, 32, 32)
        assert g.spectral_shape == (32, 32, 17)
        assert g.Lz == 2
        assert g.volume == pytest.approx(2.0)

    @pytest.mark.parametrize("bad", [dict(Nx=7), dict(Ny=2), dict(L1=0.0), dict(L2=-1.0)])
    def test_rejects_invalid(self, bad):
        with pytest.raises(ValueError):
            sp.Grid(**bad)

    def test_wavenumbers(self):
        g = sp.Grid(8, 4, 6, L1=2.0, L2=0.5)
        assert np.allclose(g.kx.ravel(), 2 * np.pi * np.arange(5) / 2.0)
        assert np.allclose(g.ky.ravel(), 2 * np.pi * np.array([0, 1, -2, -1]) / 0.5)
        assert np.allclose(g.kz.ravel(), np.pi * np.array([0, 1, 2, -3, -2, -1]))

    def test_z_nodes_span_period(self, grid8):
        assert grid8.z[0] == -1.0
        assert np.allclose(np.diff(grid8.z), 0.25)


class TestTransforms:
    def test_round_trip_random(self, grid8, rng):
        f = random_samples(grid8, rng)
        back = sp.inverse_transform(grid8, sp.forward_transform(grid8, f))
        assert np.max(np.abs(back - f)) <= 1e-12 * np.max(np.abs(f))

    def test_sine_has_two_imaginary_coefficients(self):
        g = sp.Grid(8, 8, 8, L1=1.5)
        X, _, _ = g.mesh()
        c = sp.forward_transform(g, np.sin(2 * np.pi * X / g.L1))
        nz = np.argwhere(np.abs(c) > 1e-14)
        # rfft keeps mx >= 0 only: the mx = -1 partner is implied by symmetry
        assert nz.tolist() == [[0, 0, 1]]
        assert c[0, 0, 1] == pytest.approx(-0.5j, abs=1e-15)

    def test_parseval_against_trapezoid(self, grid8, rng):
        f = random_samples(grid8, rng)
        c = sp.forward_transform(grid8, f)
        quad = np.sum(f**2) * grid8.volume / f.size
        assert sp.norm2(grid8, c) == pytest.approx(quad, rel=1e-12)

    def test_zero_coefficients(self, grid8):
        c = np.zeros(grid8.spectral_shape, dtype=complex)
        assert not np.any(sp.inverse_transform(grid8, c))

    def test_single_mode_synthesis(self):
        g = sp.Grid(8, 8, 8, L1=2.0)
        c = np.zeros(g.spectral_shape, dtype=complex)
        c[0, 0, 1] = -0.5j
        X, _, _ = g.mesh()
        assert np.max(np.abs(sp.inverse_transform(g, c) - np.sin(2 * np.pi * X / g.L1))) <= 1e-12

    def test_round_trip_band_limited(self, grid8, rng):
        c = random_band_limited(grid8, rng)
        back = sp.forward_transform(grid8, sp.inverse_transform(grid8, c))
        assert np.max(np.abs(back - c)) <= 1e-12

    def test_cos_z_uses_mode_one(self, grid8):
        _, _, Z = grid8.mesh()
        c = sp.forward_transform(grid8, np.cos(np.pi * Z))
        assert abs(c[1, 0, 0]) == pytest.approx(0.5)
        assert abs(c[-1, 0, 0]) == pytest.approx(0.5)

    def test_non_hermitian_rejected(self, grid8):
        c = np.zeros(grid8.spectral_shape, dtype=complex)
        c[0, 1, 0] = 1.0
        with pytest.raises(HermitianError):
            sp.inverse_transform(grid8, c)

    def test_shape_mismatch(self, grid8):
        with pytest.raises(ValueError):
            sp.forward_transform(grid8, np.zeros((4, 8, 8)))

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 2**31 - 1))
    def test_round_trip_property(self, seed):
        g = sp.Grid(8, 4, 6)
        f = np.random.default_rng(seed).standard_normal(g.shape)
        assert np.allclose(sp.inverse_transform(g, sp.forward_transform(g, f)), f, atol=1e-12)


class TestDerivatives:
    def test_x_derivative_of_sine(self):
        g = sp.Grid(16, 8, 8, L1=0.7)
        X, _, _ = g.mesh()
        k = 2 * np.pi / g.L1
        d = sp.derivative(g, sp.forward_transform(g, np.sin(k * X)), "x")
        assert np.max(np.abs(sp.inverse_transform(g, d) - k * np.cos(k * X))) <= 1e-10

    def test_constant_has_zero_derivative(self, grid8):
        c = sp.forward_transform(grid8, np.full(grid8.shape, 3.0))
        for axis in "xyz":
            assert not np.any(sp.derivative(grid8, c, axis))

    def test_z_derivative_of_cosine(self, grid8):
        _, _, Z = grid8.mesh()
        d = sp.derivative(grid8, sp.forward_transform(grid8, np.cos(np.pi * Z)), "z")
        assert np.max(np.abs(sp.inverse_transform(grid8, d) + np.pi * np.sin(np.pi * Z))) <= 1e-10

    def test_laplacian_is_divergence_of_gradient(self, grid8, rng):
        c = random_band_limited(grid8, rng)
        g = sp.gradient(grid8, c)
        div = sum(sp.derivative(grid8, g[i], i) for i in range(3))
        assert np.allclose(div, sp.laplacian(grid8, c), atol=1e-12)


class TestDealias:
    def test_in_band_unchanged(self, grid8, rng):
        c = random_band_limited(grid8, rng)
        assert np.array_equal(sp.dealias(grid8, c), c)

    def test_nyquist_removed(self, grid8):
        X, _, _ = grid8.mesh()
        c = sp.forward_transform(grid8, np.cos(np.pi * grid8.Nx * X / grid8.L1))
        assert abs(c[0, 0, -1]) == pytest.approx(1.0)
        assert not np.any(sp.dealias(grid8, c))

    def test_square_of_sine(self):
        g = sp.Grid(8, 8, 8)
        X, _, _ = g.mesh()
        m = 2  # inside the band (2 <= 8 // 3), 2m = 4 is outside
        k = 2 * np.pi * m / g.L1
        c = sp.dealias(g, sp.forward_transform(g, np.sin(k * X) ** 2))
        expected = np.zeros(g.spectral_shape, dtype=complex)
        expected[0, 0, 0] = 0.5
        assert np.allclose(c, expected, atol=1e-15)


class TestPoisson:
    def test_2d_sine(self):
        g = sp.Grid(16, 8, 4, L1=1.3)
        X, _, _ = g.mesh()
        k = 2 * np.pi / g.L1
        rhs = sp.forward_transform_h(g, -(k**2) * np.sin(k * X[0]))
        p = sp.inverse_transform_h(g, sp.solve_poisson_2d(g, rhs))
        assert np.max(np.abs(p - np.sin(k * X[0]))) <= 1e-12

    def test_2d_zero(self, grid8):
        rhs = np.zeros(grid8.hspectral_shape, dtype=complex)
        assert not np.any(sp.solve_poisson_2d(grid8, rhs))

    def test_2d_round_trip(self, grid8, rng):
        rhs = random_band_limited(grid8, rng)[0]
        rhs[0, 0] = 0
        p = sp.solve_poisson_2d(grid8, rhs)
        assert np.allclose(-grid8.kh2[0] * p, rhs, atol=1e-12)

    def test_2d_rejects_mean(self, grid8):
        rhs = np.zeros(grid8.hspectral_shape, dtype=complex)
        rhs[0, 0] = 1.0
        with pytest.raises(ConstraintError):
            sp.solve_poisson_2d(grid8, rhs)

    @pytest.mark.parametrize("eps, expected", [(1.0, 4 * np.pi**2 + np.pi**2), (0.1, 4 * np.pi**2 + 100 * np.pi**2)])
    def test_aniso_symbol(self, grid8, eps, expected):
        assert sp.aniso_symbol(grid8, eps)[1, 0, 1] == pytest.approx(expected, rel=1e-14)

    def test_aniso_round_trip(self, grid8, rng):
        rhs = random_band_limited(grid8, rng)
        rhs[0, 0, 0] = 0
        p = sp.solve_poisson_aniso_3d(grid8, rhs, 0.5)
        applied = sp.horizontal_laplacian(grid8, p) - 4 * grid8.kz**2 * p
        assert np.allclose(applied, rhs, atol=1e-12)

    def test_aniso_rejects_nonpositive_eps(self, grid8):
        with pytest.raises(ValueError):
            sp.solve_poisson_aniso_3d(grid8, np.zeros(grid8.spectral_shape, dtype=complex), 0.0)

    def test_aniso_warns_for_tiny_eps(self, grid8):
        with pytest.warns(UserWarning):
            sp.solve_poisson_aniso_3d(grid8, np.zeros(grid8.spectral_shape, dtype=complex), 1e-4)


class TestResample:
    def test_padding_preserves_samples(self, grid8, rng):
        c = random_band_limited(grid8, rng)
        fine = grid8.refine(2)
        v = sp.inverse_transform(fine, sp.resample(c, grid8, fine))
        assert np.allclose(v[::2, ::2, ::2], sp.inverse_transform(grid8, c), atol=1e-13)

    def test_truncation_inverts_padding(self, grid8, rng):
        c = random_band_limited(grid8, rng)
        fine = grid8.refine(2)
        assert np.allclose(sp.resample(sp.resample(c, grid8, fine), fine, grid8), c, atol=1e-15)
