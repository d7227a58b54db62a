"""NumPy reference implementations of the per-mode hot kernels.

These mirror pkslab._kernels (the Cython core) exactly; the compiled
version only fuses the loops.  Axis wavenumber vectors come in 1D:
k1x[nx], k2y[ny], k3z[nz//2+1].
"""

import numpy as np


def diffusion_factor(k1x, k2y, k3z, t0, t1, inv_a, out=None):
    """exp(-(r1(t1)-r1(t0))/A) per mode, with the sheared heat exponent
    r1(t) = int_0^t k1^2 + (k2 - s k1)^2 + k3^2 ds (centered, exact form)."""
    dt = t1 - t0
    tm = 0.5 * (t0 + t1)
    k1 = k1x.reshape(-1, 1, 1)
    k2 = k2y.reshape(1, -1, 1)
    k3 = k3z.reshape(1, 1, -1)
    m = k2 - tm * k1
    expo = (k1 * k1 + k3 * k3 + m * m + k1 * k1 * (dt * dt) / 12.0) * (dt * inv_a)
    if out is None:
        return np.exp(-expo)
    np.exp(-expo, out=out)
    return out


def shear_ksq(k1x, k2y, k3z, t, out=None):
    """|k_eff|^2 = k1^2 + (k2 - t k1)^2 + k3^2 per mode."""
    k1 = k1x.reshape(-1, 1, 1)
    k2 = k2y.reshape(1, -1, 1)
    k3 = k3z.reshape(1, 1, -1)
    k2e = k2 - t * k1
    res = k1 * k1 + k2e * k2e + k3 * k3
    if out is None:
        return res
    out[...] = res
    return out


def leray_project(u1, u2, u3, k1x, k2y, k3z, t):
    """In-place projection onto fields divergence-free in the sheared
    gradient (ik1, i(k2 - t k1), ik3); the k = 0 mode is untouched."""
    k1 = k1x.reshape(-1, 1, 1)
    k2 = k2y.reshape(1, -1, 1)
    k3 = k3z.reshape(1, 1, -1)
    k2e = k2 - t * k1
    ksq = k1 * k1 + k2e * k2e + k3 * k3
    ksq_safe = np.where(ksq == 0.0, 1.0, ksq)
    d = (k1 * u1 + k2e * u2 + k3 * u3) / ksq_safe
    u1 -= k1 * d
    u2 -= k2e * d
    u3 -= k3 * d
