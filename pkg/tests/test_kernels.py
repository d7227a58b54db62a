import numpy as np
import pytest

from pkslab import _kernels_py, kernels

try:
    from pkslab import _kernels
except ImportError:
    _kernels = None


def axis_vectors(nx=12, ny=20, nz=8, ly=2.0):
    k1 = np.ascontiguousarray(np.fft.fftfreq(nx, 1.0 / nx))
    k2 = np.ascontiguousarray(np.fft.fftfreq(ny, 1.0 / ny) / ly)
    k3 = np.ascontiguousarray(np.arange(nz // 2 + 1, dtype=float))
    return k1, k2, k3


def test_backend_selected():
    assert kernels.BACKEND in ("cython", "numpy")


def test_diffusion_factor_matches_direct_integral():
    k1, k2, k3 = axis_vectors()
    t0, t1, inv_a = 1.3, 1.45, 1e-2
    got = _kernels_py.diffusion_factor(k1, k2, k3, t0, t1, inv_a)
    # Simpson quadrature of r(s) per mode (exact: quadratic integrand)
    from scipy.integrate import simpson
    s = np.linspace(t0, t1, 101)
    k1g = k1.reshape(-1, 1, 1, 1)
    k2g = k2.reshape(1, -1, 1, 1)
    k3g = k3.reshape(1, 1, -1, 1)
    r = k1g**2 + (k2g - s * k1g) ** 2 + k3g**2
    ref = np.exp(-simpson(r, x=s, axis=-1) * inv_a)
    assert np.max(np.abs(got - ref)) < 1e-13


@pytest.mark.skipif(_kernels is None, reason="compiled core unavailable")
def test_backends_agree():
    k1, k2, k3 = axis_vectors()
    a = _kernels_py.diffusion_factor(k1, k2, k3, 0.7, 0.9, 0.05)
    b = _kernels.diffusion_factor(k1, k2, k3, 0.7, 0.9, 0.05)
    assert np.max(np.abs(a - b)) < 1e-15

    a = _kernels_py.shear_ksq(k1, k2, k3, 3.0)
    b = _kernels.shear_ksq(k1, k2, k3, 3.0)
    assert np.array_equal(a, b)

    rng = np.random.default_rng(0)
    shape = (k1.size, k2.size, k3.size)
    u = [np.ascontiguousarray(rng.standard_normal(shape)
                              + 1j * rng.standard_normal(shape))
         for _ in range(3)]
    ua = [x.copy() for x in u]
    ub = [x.copy() for x in u]
    _kernels_py.leray_project(*ua, k1, k2, k3, 2.5)
    _kernels.leray_project(*ub, k1, k2, k3, 2.5)
    for x, y in zip(ua, ub):
        assert np.max(np.abs(x - y)) < 1e-13


def test_leray_kills_divergence():
    k1, k2, k3 = axis_vectors()
    rng = np.random.default_rng(1)
    shape = (k1.size, k2.size, k3.size)
    u = [np.ascontiguousarray(rng.standard_normal(shape)
                              + 1j * rng.standard_normal(shape))
         for _ in range(3)]
    t = 1.7
    kernels.leray_project(u[0], u[1], u[2], k1, k2, k3, t)
    k1g = k1.reshape(-1, 1, 1)
    k2g = k2.reshape(1, -1, 1) - t * k1g
    k3g = k3.reshape(1, 1, -1)
    div = k1g * u[0] + k2g * u[1] + k3g * u[2]
    assert np.max(np.abs(div)) < 1e-12 * max(np.max(np.abs(u[0])), 1.0)
