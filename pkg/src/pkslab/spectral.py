"""Fourier representation of real fields on the periodic box
[0,2pi) x [-pi*ly, pi*ly) x [0,2pi).

Coefficients follow the convention  f(x) = sum_k  fhat(k) exp(i k.x)  with
k = (k1, k2, k3), k1,k3 integers and k2 on the (1/ly)-lattice.  Storage is
real-to-complex over the z axis (k3 >= 0); the k3 < 0 half is implied by
Hermitian symmetry.
"""

import numpy as np
import scipy.fft as sfft

from .errors import NonZeroMeanError

TWO_THIRDS = 2.0 / 3.0


class Grid:
    """Spectral grid: wavenumber tables, dealias mask and transforms."""

    def __init__(self, nx, ny, nz, ly=4.0, dealias_fraction=TWO_THIRDS,
                 workers=1):
        for name, n in (("nx", nx), ("ny", ny), ("nz", nz)):
            if n % 2 != 0 or n < 8:
                raise ValueError(f"{name} must be even and >= 8, got {n}")
        if ly <= 0:
            raise ValueError(f"ly must be positive, got {ly}")
        if not 0.0 < dealias_fraction <= 1.0:
            raise ValueError(
                f"dealias_fraction must be in (0, 1], got {dealias_fraction}")

        self.nx, self.ny, self.nz = nx, ny, nz
        self.ly = float(ly)
        self.dealias_fraction = float(dealias_fraction)
        self.workers = int(workers)

        self.x = 2.0 * np.pi * np.arange(nx) / nx
        self.y = 2.0 * np.pi * self.ly * np.arange(ny) / ny - np.pi * self.ly
        self.z = 2.0 * np.pi * np.arange(nz) / nz

        # integer mode indices; k2 carries the 1/ly spacing
        j1 = np.fft.fftfreq(nx, 1.0 / nx)
        j2 = np.fft.fftfreq(ny, 1.0 / ny)
        j3 = np.arange(nz // 2 + 1, dtype=float)
        self.k1 = j1.reshape(nx, 1, 1)
        self.k2 = (j2 / self.ly).reshape(1, ny, 1)
        self.k3 = j3.reshape(1, 1, nz // 2 + 1)
        self.ksq = self.k1**2 + self.k2**2 + self.k3**2

        cut1 = dealias_fraction * nx / 2.0
        cut2 = dealias_fraction * ny / 2.0
        cut3 = dealias_fraction * nz / 2.0
        self.dealias_mask = ((np.abs(j1).reshape(nx, 1, 1) < cut1)
                             & (np.abs(j2).reshape(1, ny, 1) < cut2)
                             & (j3.reshape(1, 1, -1) < cut3))
        self.kmax_dealias = (np.floor(np.nextafter(cut1, 0)),
                             np.floor(np.nextafter(cut2, 0)) / self.ly,
                             np.floor(np.nextafter(cut3, 0)))

        # rfft double-counts nothing; interior k3 planes stand for +/-k3
        w3 = np.full(nz // 2 + 1, 2.0)
        w3[0] = 1.0
        if nz % 2 == 0:
            w3[-1] = 1.0
        self.parseval_w = w3.reshape(1, 1, -1)

        self.volume = (2.0 * np.pi) ** 3 * self.ly
        self.cell_volume = self.volume / (nx * ny * nz)
        self.spectral_shape = (nx, ny, nz // 2 + 1)

    # ---- transforms ----------------------------------------------------

    def to_spectral(self, phys):
        """Physical real field -> Fourier coefficients."""
        return sfft.rfftn(phys, norm="forward", workers=self.workers)

    def to_physical(self, coeff):
        """Fourier coefficients -> physical real field."""
        return sfft.irfftn(coeff, s=(self.nx, self.ny, self.nz),
                           norm="forward", workers=self.workers)

    def zero_coeffs(self):
        return np.zeros(self.spectral_shape, dtype=complex)

    def hermitianize(self, coeff):
        """Force the k3 = 0 (and Nyquist) planes to be conjugate-symmetric
        under k -> -k so the field is real; other planes are free."""
        out = coeff.copy()
        for i3 in {0, self.nz // 2}:
            plane = out[:, :, i3]
            flipped = np.conj(np.roll(np.flip(plane, axis=(0, 1)), 1, axis=(0, 1)))
            out[:, :, i3] = 0.5 * (plane + flipped)
        # drop Nyquist rows; they cannot carry a clean +/-k pair
        out[self.nx // 2, :, :] = 0.0
        out[:, self.ny // 2, :] = 0.0
        return out

    # ---- effective (sheared) wavenumbers -------------------------------

    def k2_eff(self, t_shear):
        """y-wavenumber in the frame sheared by t_shear: k2 - t*k1."""
        return self.k2 - t_shear * self.k1

    def ksq_eff(self, t_shear):
        return self.k1**2 + self.k2_eff(t_shear) ** 2 + self.k3**2

    # ---- quadrature ----------------------------------------------------

    def l2norm(self, coeff):
        """Physical L2 norm by Parseval."""
        total = np.sum(self.parseval_w * np.abs(coeff) ** 2)
        return float(np.sqrt(self.volume * total))

    def l2norm_weighted(self, coeff, weight):
        """L2 norm of the field whose coefficients are weight * coeff."""
        total = np.sum(self.parseval_w * np.abs(weight) ** 2
                       * np.abs(coeff) ** 2)
        return float(np.sqrt(self.volume * total))

    def integral(self, coeff):
        """Integral over the box (the mean coefficient times the volume)."""
        return float(coeff[0, 0, 0].real * self.volume)

    def lp_norm(self, phys, p):
        """Grid-quadrature L^p norm of a physical field."""
        return float((np.sum(np.abs(phys) ** p) * self.cell_volume) ** (1.0 / p))

    def linf_norm(self, phys):
        return float(np.max(np.abs(phys)))


class SpectralScalar:
    """A real scalar field held as Fourier coefficients on a Grid."""

    __slots__ = ("grid", "data")

    def __init__(self, grid, data=None):
        self.grid = grid
        self.data = grid.zero_coeffs() if data is None else data

    @classmethod
    def from_physical(cls, grid, phys):
        return cls(grid, grid.to_spectral(phys))

    def to_physical(self):
        return self.grid.to_physical(self.data)

    def copy(self):
        return SpectralScalar(self.grid, self.data.copy())

    def l2(self):
        return self.grid.l2norm(self.data)

    def integral(self):
        return self.grid.integral(self.data)

    def __add__(self, other):
        return SpectralScalar(self.grid, self.data + other.data)

    def __sub__(self, other):
        return SpectralScalar(self.grid, self.data - other.data)

    def __mul__(self, scalar):
        return SpectralScalar(self.grid, self.data * scalar)

    __rmul__ = __mul__


class SpectralVector:
    """Three scalar components sharing one grid (a velocity field)."""

    __slots__ = ("grid", "c")

    def __init__(self, grid, components=None):
        self.grid = grid
        if components is None:
            self.c = [grid.zero_coeffs() for _ in range(3)]
        else:
            self.c = list(components)

    def copy(self):
        return SpectralVector(self.grid, [a.copy() for a in self.c])

    def scalar(self, j):
        return SpectralScalar(self.grid, self.c[j])

    def l2(self):
        return float(np.sqrt(sum(self.grid.l2norm(a) ** 2 for a in self.c)))


# ---- operators (diagonal in Fourier space) ------------------------------

_AXIS_INDEX = {"x": 0, "y": 1, "z": 2, 0: 0, 1: 1, 2: 2}


def _kaxis(grid, axis):
    return (grid.k1, grid.k2, grid.k3)[_AXIS_INDEX[axis]]


def derivative(f, axis, order=1):
    """Spectral derivative (i k_axis)^order applied to f."""
    if order not in (1, 2, 3):
        raise ValueError(f"order must be 1, 2 or 3, got {order}")
    k = _kaxis(f.grid, axis)
    return SpectralScalar(f.grid, (1j * k) ** order * f.data)


def laplacian(f):
    return SpectralScalar(f.grid, -f.grid.ksq * f.data)


def inv_laplacian(f, mean_tol=1e-12):
    """Solve Lap(g) = f for the zero-mean g; f must be mean-free."""
    g = f.grid
    scale = np.sqrt(np.sum(g.parseval_w * np.abs(f.data) ** 2))
    if abs(f.data[0, 0, 0]) > mean_tol * max(scale, 1e-300):
        raise NonZeroMeanError(
            f"mean coefficient {f.data[0, 0, 0]:.3e} exceeds tolerance; "
            "Poisson problem is ill-posed")
    ksq = g.ksq.copy()
    ksq[0, 0, 0] = 1.0
    out = -f.data / ksq
    out[0, 0, 0] = 0.0
    return SpectralScalar(g, out)


def helmholtz_solve(n):
    """Solve Lap(c) + n - c = 0, i.e. c = (1 - Lap)^(-1) n."""
    return SpectralScalar(n.grid, n.data / (1.0 + n.grid.ksq))


_MODE_CLASSES = ("zero", "nonzero", "zz_zero", "zz_nonzero")


def mode_mask(grid, cls):
    """Boolean coefficient mask for one of the four mode classes."""
    k1zero = grid.k1 == 0
    k3zero = grid.k3 == 0
    if cls == "zero":
        return np.broadcast_to(k1zero, grid.spectral_shape)
    if cls == "nonzero":
        return np.broadcast_to(~k1zero, grid.spectral_shape)
    if cls == "zz_zero":
        return np.broadcast_to(k1zero & k3zero, grid.spectral_shape)
    if cls == "zz_nonzero":
        return np.broadcast_to(k1zero & ~k3zero, grid.spectral_shape)
    raise ValueError(f"mode class must be one of {_MODE_CLASSES}, got {cls!r}")


def project(f, cls):
    """Keep one mode class: P0, Pneq, P(0,0) or P(0,neq)."""
    return SpectralScalar(f.grid, np.where(mode_mask(f.grid, cls), f.data, 0.0))


def dealias(f):
    """Zero all coefficients outside the dealias band (idempotent)."""
    return SpectralScalar(f.grid, np.where(f.grid.dealias_mask, f.data, 0.0))


def make_grid(nx, ny, nz, ly=4.0, dealias_fraction=TWO_THIRDS, workers=1):
    """Construct a Grid; rejects odd/tiny sizes and bad fractions."""
    return Grid(nx, ny, nz, ly=ly, dealias_fraction=dealias_fraction,
                workers=workers)
