"""pkslab: pseudo-spectral chemotaxis-in-shear laboratory.

Simulation of an advected parabolic-elliptic chemotaxis system near a
strong linear shear, plus the diagnostic norms, the zero-mode mass ODE,
and discrete verification of the supporting functional inequalities.
"""

from .kernels import BACKEND as KERNEL_BACKEND
from .spectral import (Grid, SpectralScalar, SpectralVector, dealias,
                       derivative, helmholtz_solve, inv_laplacian, laplacian,
                       make_grid, project)

__version__ = "0.1.0"

__all__ = [
    "Grid", "SpectralScalar", "SpectralVector", "make_grid", "derivative",
    "laplacian", "inv_laplacian", "helmholtz_solve", "project", "dealias",
    "KERNEL_BACKEND", "__version__",
]
