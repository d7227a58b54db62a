# cython: boundscheck=False, wraparound=False, cdivision=True
"""Fused per-mode kernels for the sheared spectral solver.

Same contracts as pkslab._kernels_py; see there for documentation.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp

cnp.import_array()


def diffusion_factor(double[::1] k1x, double[::1] k2y, double[::1] k3z,
                     double t0, double t1, double inv_a, out=None):
    cdef Py_ssize_t nx = k1x.shape[0], ny = k2y.shape[0], nz = k3z.shape[0]
    if out is None:
        out = np.empty((nx, ny, nz), dtype=np.float64)
    cdef double[:, :, ::1] o = out
    cdef double dt = t1 - t0
    cdef double tm = 0.5 * (t0 + t1)
    cdef double cdt = dt * dt / 12.0
    cdef Py_ssize_t i, j, l
    cdef double k1, k1sq, base, m
    for i in range(nx):
        k1 = k1x[i]
        k1sq = k1 * k1
        for j in range(ny):
            m = k2y[j] - tm * k1
            base = (k1sq + m * m + k1sq * cdt) * dt * inv_a
            for l in range(nz):
                o[i, j, l] = exp(-(base + k3z[l] * k3z[l] * dt * inv_a))
    return out


def shear_ksq(double[::1] k1x, double[::1] k2y, double[::1] k3z,
              double t, out=None):
    cdef Py_ssize_t nx = k1x.shape[0], ny = k2y.shape[0], nz = k3z.shape[0]
    if out is None:
        out = np.empty((nx, ny, nz), dtype=np.float64)
    cdef double[:, :, ::1] o = out
    cdef Py_ssize_t i, j, l
    cdef double k1, k2e, base
    for i in range(nx):
        k1 = k1x[i]
        for j in range(ny):
            k2e = k2y[j] - t * k1
            base = k1 * k1 + k2e * k2e
            for l in range(nz):
                o[i, j, l] = base + k3z[l] * k3z[l]
    return out


def leray_project(cnp.complex128_t[:, :, ::1] u1,
                  cnp.complex128_t[:, :, ::1] u2,
                  cnp.complex128_t[:, :, ::1] u3,
                  double[::1] k1x, double[::1] k2y, double[::1] k3z,
                  double t):
    cdef Py_ssize_t nx = k1x.shape[0], ny = k2y.shape[0], nz = k3z.shape[0]
    cdef Py_ssize_t i, j, l
    cdef double k1, k2e, k3, ksq
    cdef double complex d
    for i in range(nx):
        k1 = k1x[i]
        for j in range(ny):
            k2e = k2y[j] - t * k1
            for l in range(nz):
                k3 = k3z[l]
                ksq = k1 * k1 + k2e * k2e + k3 * k3
                if ksq == 0.0:
                    continue
                d = (k1 * u1[i, j, l] + k2e * u2[i, j, l]
                     + k3 * u3[i, j, l]) / ksq
                u1[i, j, l] = u1[i, j, l] - k1 * d
                u2[i, j, l] = u2[i, j, l] - k2e * d
                u3[i, j, l] = u3[i, j, l] - k3 * d
