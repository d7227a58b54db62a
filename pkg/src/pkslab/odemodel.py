"""Scalar dynamical model for the squared L2 mass of the doubly-averaged
cell density: h' = 2H(h) with a cubic-minus-quadratic H, its equilibrium
analysis, the perturbed (forced) bound, and phase-portrait sampling.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .errors import PkslabError

SQRT2 = np.sqrt(2.0)
# classification threshold on the total mass: 24*pi^2/5
MASS_THRESHOLD = 24.0 * np.pi**2 / 5.0


@dataclass(frozen=True)
class OdeParams:
    a: float = 1.0            # flow amplitude (time scale 1/a)
    m1: float = 1.0           # zonal mass, total mass / (2*pi)^2
    c1: float = SQRT2         # Young splitting constant in (0, 2*sqrt(2))
    eps1: float = 0.1         # slack of the perturbed bound, in (0, 1)
    ghat_bound: float = 0.0   # cap on the accumulated forcing

    def __post_init__(self):
        if self.a < 1:
            raise ValueError(f"a must be >= 1, got {self.a}")
        if self.m1 < 0:
            raise ValueError(f"m1 must be >= 0, got {self.m1}")
        if not 0.0 < self.c1 < 2.0 * SQRT2:
            raise ValueError(f"c1 must lie in (0, 2*sqrt(2)), got {self.c1}")
        if not 0.0 < self.eps1 < 1.0:
            raise ValueError(f"eps1 must lie in (0, 1), got {self.eps1}")
        if self.ghat_bound < 0:
            raise ValueError("ghat_bound must be >= 0")


@dataclass
class OdeTrajectory:
    t: np.ndarray
    h: np.ndarray
    h_star: float             # largest positive root of H (stable point)
    h_stagnation: float       # where the widened cubic's slope vanishes
    params: OdeParams = field(repr=False, default=None)

    @property
    def sup_h(self):
        return float(np.max(self.h))


def _cubic_coeffs(params, widened):
    """(alpha, beta) of H(h) = -(alpha h^3 - beta h^2)/a; the widened
    variant shrinks the cubic coefficient by the eps1 slack."""
    slack = (SQRT2 / 2.0) * params.eps1 if widened else 0.0
    gap = 2.0 * SQRT2 - params.c1 - slack
    if gap <= 0:
        raise ValueError("eps1 slack closes the coefficient gap; "
                         "reduce eps1 or c1")
    if params.m1 == 0.0:
        return np.inf, 1.0 / (2.0 * SQRT2 * params.c1)
    alpha = 4.0 * SQRT2 * np.pi**2 * gap / (27.0 * params.m1**4)
    beta = 1.0 / (2.0 * SQRT2 * params.c1)
    return alpha, beta


def ode_rhs(h, params, widened=False):
    """dh/dt = 2 H(h); rejects negative h."""
    h = np.asarray(h, dtype=float)
    if np.any(h < 0):
        raise ValueError("h must be non-negative")
    alpha, beta = _cubic_coeffs(params, widened)
    if not np.isfinite(alpha):
        if np.any(h > 0):
            raise ValueError("m1 = 0 admits only the trivial state h = 0")
        return np.zeros_like(h) if h.ndim else 0.0
    out = (-2.0 / params.a) * (alpha * h**3 - beta * h**2)
    return out if h.ndim else float(out)


def equilibrium(params):
    """(h_star, h_stagnation, stable).  h_star is the largest positive
    root of H; the stagnation point comes from the eps1-widened cubic.
    m1 = 0 degenerates to h_star = 0 (flagged unstable)."""
    if params.m1 == 0.0:
        return 0.0, 0.0, False
    gap0 = 2.0 * SQRT2 - params.c1
    h_star = 27.0 * params.m1**4 / (16.0 * np.pi**2 * gap0 * params.c1)
    gap1 = 2.0 * SQRT2 - params.c1 - (SQRT2 / 2.0) * params.eps1
    h_stag = 9.0 * params.m1**4 / (8.0 * np.pi**2 * gap1 * params.c1)
    return float(h_star), float(h_stag), True


def integrate(h0, params, t_max, n_samples=400, forcing=None, widened=None,
              rtol=1e-8, atol=1e-10):
    """Adaptive RK45 trajectory of h' = 2H(h) + forcing'(t).

    forcing, if given, is the time derivative of the accumulated
    perturbation (non-negative, with integral <= params.ghat_bound);
    forced runs use the eps1-widened cubic unless overridden.
    """
    if h0 < 0:
        raise ValueError(f"h0 must be >= 0, got {h0}")
    if widened is None:
        widened = forcing is not None
    h_star, h_stag, _ = equilibrium(params)

    if params.m1 == 0.0:
        if h0 > 0.0:
            raise ValueError("m1 = 0 admits only the trivial state h = 0")
        t = np.linspace(0.0, t_max, n_samples)
        return OdeTrajectory(t, np.zeros_like(t), 0.0, 0.0, params)
    alpha, beta = _cubic_coeffs(params, widened)

    def rhs(t, y):
        h = max(y[0], 0.0)
        dh = (-2.0 / params.a) * (alpha * h**3 - beta * h**2) \
            if np.isfinite(alpha) else 0.0
        if forcing is not None:
            dh += forcing(t)
        return [dh]

    t_eval = np.linspace(0.0, t_max, n_samples)
    sol = solve_ivp(rhs, (0.0, t_max), [float(h0)], method="RK45",
                    t_eval=t_eval, rtol=rtol, atol=atol)
    if not sol.success:
        raise PkslabError(f"ODE integration failed: {sol.message}")
    return OdeTrajectory(sol.t, sol.y[0], h_star, h_stag, params)


def perturbed_bound(h0, params):
    """Closed-form sup bound for forced trajectories at c1 = sqrt(2):
    max(h0 + eps1, (27 m1^4 / 32 pi^2)(1 + eps1) + eps1)."""
    if params.ghat_bound > params.eps1:
        raise PkslabError(
            f"forcing regime violated: ghat_bound={params.ghat_bound} "
            f"exceeds eps1={params.eps1}")
    base = 27.0 * params.m1**4 / (32.0 * np.pi**2)
    return float(max(h0 + params.eps1, base * (1.0 + params.eps1) + params.eps1))


def phase_portrait_grid(params, h_range, n_samples=200, levels=(0.0,)):
    """Sample (h, dh/dt) along level sets of (1/2)dh/dt - H(h) = c.

    levels c <= 0; c = 0 is the orbit actually followed by trajectories.
    Returns a dict with the h grid, one dh/dt row per level, and the
    equilibrium marker.
    """
    lo, hi = h_range
    if lo < 0 or hi <= lo:
        raise ValueError(f"h_range must satisfy 0 <= lo < hi, got {h_range}")
    h = np.linspace(lo, hi, n_samples)
    h_star, h_stag, stable = equilibrium(params)
    rows = {}
    for c in levels:
        if c > 0:
            raise ValueError("level constants must be <= 0")
        rows[c] = ode_rhs(h, params) + 2.0 * c
    return {"h": h, "levels": rows, "h_star": h_star,
            "h_stagnation": h_stag, "stable": stable}


def mass_threshold_check(mass):
    """Classify a total mass against 24*pi^2/5."""
    if mass < 0:
        raise ValueError(f"mass must be >= 0, got {mass}")
    return "below" if mass < MASS_THRESHOLD else "above"
