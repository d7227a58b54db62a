import numpy as np
import pytest

from pkslab.errors import NonZeroMeanError
from pkslab.spectral import (SpectralScalar, dealias, derivative,
                             helmholtz_solve, inv_laplacian, laplacian,
                             make_grid, mode_mask, project)


def grid16(ly=4.0, frac=2.0 / 3.0):
    return make_grid(16, 16, 16, ly=ly, dealias_fraction=frac)


def coords(g):
    return np.meshgrid(g.x, g.y, g.z, indexing="ij")


def random_field(g, seed=0, decay=1.5):
    rng = np.random.default_rng(seed)
    c = (rng.standard_normal(g.spectral_shape)
         + 1j * rng.standard_normal(g.spectral_shape)) \
        * (1.0 + g.ksq) ** (-decay)
    c = g.hermitianize(c)
    c[~g.dealias_mask] = 0.0
    return SpectralScalar(g, c)


class TestMakeGrid:
    def test_k2_spacing(self):
        g = make_grid(16, 16, 16, ly=4.0)
        assert g.k2[0, 1, 0] == pytest.approx(0.25)

    def test_dealias_band_8(self):
        g = make_grid(8, 8, 8, ly=1.0)
        j1 = np.fft.fftfreq(8, 1 / 8)
        kept = sorted(j1[g.dealias_mask.any(axis=(1, 2))])
        assert kept == [-2, -1, 0, 1, 2]

    def test_odd_size_rejected(self):
        with pytest.raises(ValueError):
            make_grid(7, 8, 8, ly=1.0)

    def test_tiny_size_rejected(self):
        with pytest.raises(ValueError):
            make_grid(8, 8, 6, ly=1.0)

    def test_bad_fraction_rejected(self):
        with pytest.raises(ValueError):
            make_grid(8, 8, 8, ly=1.0, dealias_fraction=0.0)
        with pytest.raises(ValueError):
            make_grid(8, 8, 8, ly=1.0, dealias_fraction=1.2)

    def test_bad_ly_rejected(self):
        with pytest.raises(ValueError):
            make_grid(8, 8, 8, ly=-1.0)


class TestParseval:
    def test_random_field_parseval(self):
        g = grid16()
        rng = np.random.default_rng(1)
        phys = rng.standard_normal((16, 16, 16))
        c = g.to_spectral(phys)
        assert g.l2norm(c) == pytest.approx(g.lp_norm(phys, 2), rel=1e-12)

    def test_single_mode_norm(self):
        g = grid16(ly=1.0)
        x, _, _ = coords(g)
        f = SpectralScalar.from_physical(g, np.cos(2 * x))
        # |cos(2x)|_2^2 = volume / 2
        assert f.l2() ** 2 == pytest.approx(g.volume / 2.0, rel=1e-12)

    def test_roundtrip(self):
        g = grid16()
        f = random_field(g, 2)
        back = g.to_spectral(g.to_physical(f.data))
        assert np.allclose(back, f.data, atol=1e-14)


class TestDerivative:
    def test_cos_x(self):
        g = grid16()
        x, _, _ = coords(g)
        f = SpectralScalar.from_physical(g, np.cos(x))
        df = derivative(f, "x", 1).to_physical()
        assert np.max(np.abs(df + np.sin(x))) < 1e-13

    def test_cos_2z_second(self):
        g = grid16()
        _, _, z = coords(g)
        f = SpectralScalar.from_physical(g, np.cos(2 * z))
        ddf = derivative(f, "z", 2).to_physical()
        assert np.max(np.abs(ddf + 4 * np.cos(2 * z))) < 1e-12

    def test_composition_oracle(self):
        g = grid16()
        f = random_field(g, 3)
        twice = derivative(derivative(f, "x", 1), "x", 1)
        once = derivative(f, "x", 2)
        scale = np.max(np.abs(once.data)) or 1.0
        assert np.max(np.abs(twice.data - once.data)) / scale < 1e-12

    def test_bad_order(self):
        g = grid16()
        with pytest.raises(ValueError):
            derivative(random_field(g), "x", 4)

    def test_commutes_with_project(self):
        g = grid16()
        f = random_field(g, 4)
        a = derivative(project(f, "nonzero"), "y", 1)
        b = project(derivative(f, "y", 1), "nonzero")
        assert np.array_equal(a.data, b.data)


class TestInvLaplacian:
    def test_cos_x(self):
        g = grid16()
        x, _, _ = coords(g)
        f = SpectralScalar.from_physical(g, np.cos(x))
        got = inv_laplacian(f).to_physical()
        assert np.max(np.abs(got + np.cos(x))) < 1e-13

    def test_cos_2z(self):
        g = grid16()
        _, _, z = coords(g)
        f = SpectralScalar.from_physical(g, np.cos(2 * z))
        got = inv_laplacian(f).to_physical()
        assert np.max(np.abs(got + np.cos(2 * z) / 4.0)) < 1e-13

    def test_constant_rejected(self):
        g = grid16()
        f = SpectralScalar.from_physical(g, np.ones((16, 16, 16)))
        with pytest.raises(NonZeroMeanError):
            inv_laplacian(f)

    def test_residual_and_inverse(self):
        g = grid16()
        f = random_field(g, 5)
        f.data[0, 0, 0] = 0.0
        sol = inv_laplacian(f)
        res = laplacian(sol) - f
        assert res.l2() <= 1e-10 * f.l2()
        round2 = inv_laplacian(laplacian(f))
        assert (round2 - f).l2() <= 1e-12 * f.l2()


class TestHelmholtz:
    def test_cos_x_half(self):
        g = grid16()
        x, _, _ = coords(g)
        f = SpectralScalar.from_physical(g, np.cos(x))
        got = helmholtz_solve(f).to_physical()
        assert np.max(np.abs(got - np.cos(x) / 2.0)) < 1e-13

    def test_constant_passthrough(self):
        g = grid16()
        f = SpectralScalar.from_physical(g, 3.7 * np.ones((16, 16, 16)))
        got = helmholtz_solve(f).to_physical()
        assert np.max(np.abs(got - 3.7)) < 1e-12

    def test_residual(self):
        g = grid16()
        n = random_field(g, 6)
        c = helmholtz_solve(n)
        res = laplacian(c) + n - c
        assert res.l2() <= 1e-10 * n.l2()

    def test_energy_identity(self):
        # |lap c|^2 + 2 |grad c|^2 + |c|^2 = |n|^2
        g = grid16()
        n = random_field(g, 7)
        c = helmholtz_solve(n)
        kabs = np.sqrt(g.ksq)
        lhs = (g.l2norm_weighted(c.data, g.ksq) ** 2
               + 2.0 * g.l2norm_weighted(c.data, kabs) ** 2
               + c.l2() ** 2)
        assert lhs == pytest.approx(n.l2() ** 2, rel=1e-10)


class TestProject:
    def test_xmode_has_no_zero_part(self):
        g = grid16()
        x, y, z = coords(g)
        f = SpectralScalar.from_physical(g, np.cos(x) * np.exp(-y**2)
                                         * np.cos(z))
        assert project(f, "zero").l2() < 1e-14

    def test_yz_field_is_pure_zero_mode(self):
        g = grid16()
        _, y, z = coords(g)
        f = SpectralScalar.from_physical(g, np.exp(-y**2) * np.sin(z))
        assert (project(f, "zero") - f).l2() < 1e-14
        assert project(f, "nonzero").l2() < 1e-14

    def test_partition_of_lattice(self):
        g = grid16()
        f = random_field(g, 8)
        total = (project(f, "zz_zero") + project(f, "zz_nonzero")
                 + project(f, "nonzero"))
        assert np.max(np.abs(total.data - f.data)) < 1e-14 * max(
            1.0, np.max(np.abs(f.data)))

    def test_bad_class(self):
        g = grid16()
        with pytest.raises(ValueError):
            mode_mask(g, "weird")


class TestDealias:
    def test_in_band_unchanged(self):
        g = grid16()
        f = random_field(g, 9)
        assert np.array_equal(dealias(f).data, f.data)

    def test_idempotent(self):
        g = grid16()
        c = np.ones(g.spectral_shape, dtype=complex)
        f = SpectralScalar(g, c)
        once = dealias(f)
        assert np.array_equal(dealias(once).data, once.data)

    def test_product_matches_continuum(self):
        # cos(3x) * cos(4x) = (cos(7x) + cos(x))/2; with a 2/3 cut at
        # |k| < 16/3 the 7-mode is truncated away
        g = grid16(ly=1.0)
        x, _, _ = coords(g)
        prod = SpectralScalar.from_physical(g, np.cos(3 * x) * np.cos(4 * x))
        res = dealias(prod).to_physical()
        assert np.max(np.abs(res - 0.5 * np.cos(x))) < 1e-13
