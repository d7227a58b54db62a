"""Kernel backend selection: compiled Cython core if available, NumPy
fallback otherwise.  Set PKSLAB_KERNELS=numpy to force the fallback."""

import os

from . import _kernels_py

if os.environ.get("PKSLAB_KERNELS", "").lower() in ("numpy", "py", "python"):
    _impl = _kernels_py
    BACKEND = "numpy"
else:
    try:
        from . import _kernels as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "numpy"

diffusion_factor = _impl.diffusion_factor
shear_ksq = _impl.shear_ksq
leray_project = _impl.leray_project
