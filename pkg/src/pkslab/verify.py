"""Discrete verification of the exact-constant inequalities, elliptic
identities and sheared heat-kernel bounds on random band-limited
ensembles.

Checks with an exact constant are asserted (tolerance 1e-8 for
inequalities, 1e-10 relative for equalities); checks whose constant the
analysis leaves unspecified are only reported against a configurable cap.
"""

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import kernels
from .spectral import Grid, mode_mask

NASH_CONST = (16.0 * np.pi**2 / 27.0) ** (-1.0 / 6.0)
INEQ_TOL = 1e-8
EQ_TOL = 1e-10
RATIO_CAP = 100.0


@dataclass
class VerificationReport:
    name: str
    asserted: bool                 # exact-constant check vs reported-only
    passed: bool
    worst_ratio: float
    tolerance: float
    count: int
    worst_case: str = ""
    notes: dict = dc_field(default_factory=dict)

    def to_dict(self):
        return {"name": self.name, "asserted": self.asserted,
                "passed": bool(self.passed),
                "worst_ratio": float(self.worst_ratio),
                "tolerance": self.tolerance, "count": self.count,
                "worst_case": self.worst_case, "notes": self.notes}


def _report(name, ratios, tol, asserted=True, cap=None, notes=None):
    ratios = np.asarray(ratios, dtype=float)
    worst = float(np.max(ratios)) if ratios.size else 0.0
    limit = (1.0 + tol) if asserted else (cap if cap is not None else RATIO_CAP)
    return VerificationReport(
        name=name, asserted=asserted, passed=bool(worst <= limit),
        worst_ratio=worst, tolerance=tol, count=int(ratios.size),
        worst_case=f"field {int(np.argmax(ratios))}" if ratios.size else "",
        notes=notes or {})


@dataclass(frozen=True)
class EnsembleSpec:
    count: int = 100
    nx: int = 16
    ny: int = 64
    nz: int = 16
    ly: float = 3.0
    decay: float = 2.0            # spectral amplitude ~ (1+|k|^2)^(-decay/2)
    seed: int = 2024
    field_class: str = "generic"  # generic | x_mean_free | divergence_free
    #                             | nonneg_bump
    width: float = 1.0            # y localization for windowed classes

    def make_grid(self):
        return Grid(self.nx, self.ny, self.nz, ly=self.ly)


def random_scalar(grid, rng, decay=2.0, window_width=None, x_mean_free=False):
    """Random band-limited real scalar, optionally y-windowed."""
    shape = grid.spectral_shape
    coeff = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) \
        * (1.0 + grid.ksq) ** (-decay / 2.0)
    coeff = grid.hermitianize(coeff)
    coeff[~grid.dealias_mask] = 0.0
    if window_width is not None:
        phys = grid.to_physical(coeff)
        phys *= np.exp(-grid.y[None, :, None] ** 2
                       / (2.0 * window_width**2))
        coeff = grid.to_spectral(phys)
        coeff[~grid.dealias_mask] = 0.0
    if x_mean_free:
        coeff[0, :, :] = 0.0
    return coeff


def random_nonneg(grid, rng, decay=2.0, width=1.0):
    """Non-negative localized field: bump * (1 + 0.9 * normalized noise)."""
    noise = random_scalar(grid, rng, decay)
    phys = grid.to_physical(noise)
    peak = np.max(np.abs(phys))
    if peak > 0:
        phys *= 0.9 / peak
    bump = np.exp(-grid.y[None, :, None] ** 2 / (2.0 * width**2))
    return grid.to_spectral(bump * (1.0 + phys))


def random_divfree(grid, rng, decay=2.0):
    """Divergence-free x-mean-free random velocity (static projection)."""
    u = [random_scalar(grid, rng, decay, x_mean_free=True) for _ in range(3)]
    k1x = np.ascontiguousarray(grid.k1.ravel())
    k2y = np.ascontiguousarray(grid.k2.ravel())
    k3z = np.ascontiguousarray(grid.k3.ravel())
    kernels.leray_project(u[0], u[1], u[2], k1x, k2y, k3z, 0.0)
    return u


def make_ensemble(spec):
    grid = spec.make_grid()
    rng = np.random.default_rng(spec.seed)
    out = []
    for _ in range(spec.count):
        if spec.field_class == "generic":
            out.append(random_scalar(grid, rng, spec.decay,
                                     window_width=spec.width))
        elif spec.field_class == "x_mean_free":
            out.append(random_scalar(grid, rng, spec.decay,
                                     window_width=spec.width,
                                     x_mean_free=True))
        elif spec.field_class == "nonneg_bump":
            out.append(random_nonneg(grid, rng, spec.decay, spec.width))
        elif spec.field_class == "divergence_free":
            out.append(random_divfree(grid, rng, spec.decay))
        else:
            raise ValueError(f"unknown field class {spec.field_class!r}")
    return grid, out


# --------------------------------------------------------------------------
# one-dimensional sharp-constant inequalities (fine line quadrature)
# --------------------------------------------------------------------------

def _line_grid(ly=6.0, n=4096):
    y = 2.0 * np.pi * ly * np.arange(n) / n - np.pi * ly
    return y, 2.0 * np.pi * ly / n


def _line_profile(rng, width, nonneg, n_modes=12, base_freq=0.5):
    """Callable Gaussian-windowed random trig polynomial; profile(y)
    returns (h, h') so dilations can be evaluated exactly."""
    ks = base_freq * np.arange(1, n_modes + 1)
    a = rng.standard_normal(n_modes) / (1.0 + np.arange(n_modes))
    b = rng.standard_normal(n_modes) / (1.0 + np.arange(n_modes))
    peak = float(np.sum(np.abs(a)) + np.sum(np.abs(b)))
    if nonneg and peak > 0:
        a, b = 0.9 * a / peak, 0.9 * b / peak

    def profile(y):
        trig = sum(a[j] * np.cos(ks[j] * y) + b[j] * np.sin(ks[j] * y)
                   for j in range(n_modes))
        dtrig = sum(-a[j] * ks[j] * np.sin(ks[j] * y)
                    + b[j] * ks[j] * np.cos(ks[j] * y)
                    for j in range(n_modes))
        if nonneg:
            trig = 1.0 + trig
        g = np.exp(-(y**2) / (2.0 * width**2))
        dg = -y / width**2 * g
        return g * trig, dg * trig + g * dtrig

    return profile


def _line_family(rng, y, width, nonneg, n_modes=12):
    return _line_profile(rng, width, nonneg, n_modes)(y)


def check_gn_1d(count=100, seed=7, width=1.0):
    """|h|_inf <= |h|_2^(1/2) |h'|_2^(1/2) on localized line profiles."""
    rng = np.random.default_rng(seed)
    y, dy = _line_grid()
    ratios = []
    for _ in range(count):
        h, dh = _line_family(rng, y, width, nonneg=False)
        sup = np.max(np.abs(h))
        rhs = math.sqrt(math.sqrt(np.sum(h**2) * dy)
                        * math.sqrt(np.sum(dh**2) * dy))
        ratios.append(sup / rhs)
    return _report("gn_1d_sup", ratios, INEQ_TOL)


def check_nash_1d(count=100, seed=8, width=1.0):
    """|h|_2 <= (16 pi^2/27)^(-1/6) |h|_1^(2/3) |h'|_2^(1/3), h >= 0."""
    rng = np.random.default_rng(seed)
    y, dy = _line_grid()
    ratios = []
    for _ in range(count):
        h, dh = _line_family(rng, y, width, nonneg=True)
        l2 = math.sqrt(np.sum(h**2) * dy)
        l1 = float(np.sum(np.abs(h)) * dy)
        dl2 = math.sqrt(np.sum(dh**2) * dy)
        ratios.append(l2 / (NASH_CONST * l1 ** (2.0 / 3.0)
                            * dl2 ** (1.0 / 3.0)))
    return _report("nash_1d_sharp", ratios, INEQ_TOL)


def nash_ratio_invariance(seed=9, width=0.8):
    """The Nash ratio is exactly invariant under amplitude scaling and
    dilation; returns the worst deviation over a small family."""
    rng = np.random.default_rng(seed)
    y, dy = _line_grid()

    def ratio(h, dh):
        l2 = math.sqrt(np.sum(h**2) * dy)
        l1 = float(np.sum(np.abs(h)) * dy)
        dl2 = math.sqrt(np.sum(dh**2) * dy)
        return l2 / (l1 ** (2.0 / 3.0) * dl2 ** (1.0 / 3.0))

    profile = _line_profile(rng, width, nonneg=True)
    h, dh = profile(y)
    base = ratio(h, dh)
    devs = [abs(ratio(lam * h, lam * dh) - base) / base
            for lam in (1e-3, 0.5, 7.0, 1e3)]
    for sigma in (0.5, 2.0):
        # dilated profile h(y/sigma) sampled on the same grid
        hs, dhs = profile(y / sigma)
        devs.append(abs(ratio(hs, dhs / sigma) - base) / base)
    return max(devs)


# --------------------------------------------------------------------------
# elliptic identities (Helmholtz energy relations)
# --------------------------------------------------------------------------

def _helm(grid, n_coeff):
    return n_coeff / (1.0 + grid.ksq)


def check_elliptic_identities(spec=None):
    """Energy equalities of the Helmholtz solve per mode class, the
    gradient sup bound, and the mass-based sup bound."""
    spec = spec or EnsembleSpec(field_class="generic")
    grid, fields = make_ensemble(spec)
    k2, k3 = grid.k2, grid.k3
    kabs = np.sqrt(grid.ksq)
    m0 = mode_mask(grid, "zero")
    m00 = mode_mask(grid, "zz_zero")
    m0n = mode_mask(grid, "zz_nonzero")

    def wl2(coeff, w=None, mask=None):
        mag = np.abs(coeff) ** 2
        if w is not None:
            mag = mag * np.abs(w) ** 2
        if mask is not None:
            mag = np.where(mask, mag, 0.0)
        return float(grid.volume * np.sum(grid.parseval_w * mag))

    eq_ratios, sup_ratios = [], []
    for n in fields:
        c = _helm(grid, n)
        # zero mode: |lap c0|^2 + 2|grad c0|^2 + |c0|^2 = |n0|^2
        lhs = wl2(c, grid.ksq, m0) + 2.0 * wl2(c, kabs, m0) + wl2(c, None, m0)
        rhs = wl2(n, None, m0)
        eq_ratios.append(abs(lhs - rhs) / max(rhs, 1e-300))
        # z-average class, y-only operator
        lhs = wl2(c, k2**2, m00) + 2.0 * wl2(c, np.abs(k2), m00) \
            + wl2(c, None, m00)
        rhs = wl2(n, None, m00)
        eq_ratios.append(abs(lhs - rhs) / max(rhs, 1e-300))
        # z-part nonzero class with dz^j weights
        for j in (0, 1, 2):
            w = k3**j
            lhs = wl2(c, w * grid.ksq, m0n) + 2.0 * wl2(c, w * kabs, m0n) \
                + wl2(c, w, m0n)
            rhs = wl2(n, w, m0n)
            eq_ratios.append(abs(lhs - rhs) / max(rhs, 1e-300))
        # gradient sup bound on the doubly-averaged class
        n00 = np.where(m00, n, 0.0)
        c00 = _helm(grid, n00)
        dyc = grid.to_physical(1j * k2 * c00)
        sup_ratios.append(np.max(np.abs(dyc)) ** 2
                          / max(0.5 * wl2(n00), 1e-300))
    eq_rep = _report("elliptic_energy_identities", eq_ratios, EQ_TOL,
                     notes={"kind": "abs deviation over rhs"})
    eq_rep.passed = bool(eq_rep.worst_ratio <= EQ_TOL)
    sup_rep = _report("elliptic_grad_sup_bound", sup_ratios, INEQ_TOL)

    # mass bound on non-negative profiles
    nonneg = EnsembleSpec(count=spec.count, nx=spec.nx, ny=spec.ny,
                          nz=spec.nz, ly=spec.ly, seed=spec.seed + 1,
                          field_class="nonneg_bump", width=spec.width)
    gridn, nfields = make_ensemble(nonneg)
    mass_ratios = []
    for n in nfields:
        n00 = np.where(mode_mask(gridn, "zz_zero"), n, 0.0)
        c00 = n00 / (1.0 + gridn.ksq)
        csup = np.max(np.abs(gridn.to_physical(c00)))
        l1 = gridn.integral(n00)  # n00 >= 0, so the integral is the L1 norm
        mass_ratios.append(csup**2 / max(l1**2 / 4.0, 1e-300))
    mass_rep = _report("elliptic_mass_sup_bound", mass_ratios, INEQ_TOL)
    return [eq_rep, sup_rep, mass_rep]


# --------------------------------------------------------------------------
# velocity identities
# --------------------------------------------------------------------------

def check_velocity_identities(spec=None):
    spec = spec or EnsembleSpec(field_class="divergence_free", count=100)
    if spec.field_class != "divergence_free":
        raise ValueError("velocity identities need divergence_free fields")
    grid, fields = make_ensemble(spec)
    k1, k2, k3 = grid.k1, grid.k2, grid.k3
    mneq = mode_mask(grid, "nonzero")

    def wl2sq(coeff, w=None, mask=None):
        mag = np.abs(coeff) ** 2
        if w is not None:
            mag = mag * np.abs(w) ** 2
        if mask is not None:
            mag = np.where(mask, mag, 0.0)
        return float(grid.volume * np.sum(grid.parseval_w * mag))

    eq_ratios, ptw_ratios = [], []
    for u in fields:
        w2 = 1j * k3 * u[0] - 1j * k1 * u[2]
        lhs = wl2sq(w2, None, mneq) + wl2sq(u[1], k2, mneq)
        rhs = (wl2sq(u[0], k1, mneq) + wl2sq(u[0], k3, mneq)
               + wl2sq(u[2], k1, mneq) + wl2sq(u[2], k3, mneq))
        eq_ratios.append(abs(lhs - rhs) / max(rhs, 1e-300))
        # pointwise spectral relation:
        # dx w2 + dz dy u2 = -(dxx + dzz) u3
        lhs_ptw = 1j * k1 * w2 + (1j * k3) * (1j * k2) * u[1]
        rhs_ptw = (k1**2 + k3**2) * u[2]
        scale = np.max(np.abs(rhs_ptw)) or 1.0
        ptw_ratios.append(np.max(np.abs(np.where(mneq, lhs_ptw - rhs_ptw, 0.0)))
                          / scale)
    rep_eq = _report("velocity_parseval_identity", eq_ratios, EQ_TOL)
    rep_eq.passed = bool(rep_eq.worst_ratio <= EQ_TOL)
    rep_ptw = _report("velocity_pointwise_identity", ptw_ratios, 1e-12)
    rep_ptw.passed = bool(rep_ptw.worst_ratio <= 1e-12)
    return [rep_eq, rep_ptw]


# --------------------------------------------------------------------------
# anisotropic embeddings
# --------------------------------------------------------------------------

def _mixed_norm(grid, phys, sup_axes, l2_axes):
    """sup over sup_axes of the L2 integral over l2_axes (grid max)."""
    cell = {"x": 2.0 * np.pi / grid.nx,
            "y": 2.0 * np.pi * grid.ly / grid.ny,
            "z": 2.0 * np.pi / grid.nz}
    axmap = {"x": 0, "y": 1, "z": 2}
    sq = phys**2
    meas = 1.0
    for ax in l2_axes:
        meas *= cell[ax]
    l2 = np.sqrt(sq.sum(axis=tuple(axmap[a] for a in l2_axes),
                        keepdims=False) * meas)
    return float(np.max(l2))


def check_aniso_ratios(spec=None, alpha=0.75, cap=RATIO_CAP):
    """Constant-1 mixed-norm embeddings asserted; the constant-C family is
    reported as a worst-ratio table against a cap."""
    spec = spec or EnsembleSpec(field_class="x_mean_free", count=100)
    grid, fields = make_ensemble(spec)
    k1, k2, k3 = grid.k1, grid.k2, grid.k3

    def l2w(coeff, w=None):
        mag = np.abs(coeff) ** 2
        if w is not None:
            mag = mag * np.abs(w) ** 2
        return math.sqrt(grid.volume * np.sum(grid.parseval_w * mag))

    one_yz, one_yxz = [], []
    rep_ratios = {"f0_sup_two_term": [], "g_sup_xz_l2y": [],
                  "g_supx_l2yz": [], "g_supz_l2xy": []}
    rng = np.random.default_rng(spec.seed + 5)
    for g in fields:
        # x-averaged companion field for the zero-mode inequalities
        f0 = random_scalar(grid, rng, spec.decay, window_width=spec.width)
        f0[1:, :, :] = 0.0 * f0[1:, :, :]
        f0_phys = grid.to_physical(f0)
        # |f0|_{Linf_y L2_z} <= |dy f0|^(1/2) |f0|^(1/2)  (3D norms)
        lhs = _mixed_norm(grid, f0_phys[0:1], ("y",), ("z",))
        rhs = math.sqrt(l2w(f0, np.abs(k2)) * l2w(f0))
        one_yz.append(lhs / max(rhs, 1e-300))

        g_phys = grid.to_physical(g)
        # |g|_{Linf_y L2_{x,z}} <= |dy g|^(1/2) |g|^(1/2)
        lhs = _mixed_norm(grid, g_phys, ("y",), ("x", "z"))
        rhs = math.sqrt(l2w(g, np.abs(k2)) * l2w(g))
        one_yxz.append(lhs / max(rhs, 1e-300))

        # reported (unspecified constant) cases, alpha in the stated range
        sup_f0 = np.max(np.abs(f0_phys))
        t1 = math.sqrt(l2w(f0, np.abs(k2)) * l2w(f0))
        t2 = (l2w(f0, np.abs(k2 * k3)) ** 0.5
              * l2w(f0, np.abs(k3)) ** (alpha - 0.5)
              * l2w(f0) ** (1 - alpha))
        rep_ratios["f0_sup_two_term"].append(sup_f0 / max(t1 + t2, 1e-300))

        lhs = _mixed_norm(grid, g_phys, ("x", "z"), ("y",))
        rhs = (l2w(g, np.abs(k1)) ** alpha * l2w(g) ** (1 - alpha)
               + l2w(g, np.abs(k1 * k3)) ** alpha * l2w(g) ** (1 - alpha))
        rep_ratios["g_sup_xz_l2y"].append(lhs / max(rhs, 1e-300))

        lhs = _mixed_norm(grid, g_phys, ("x",), ("y", "z"))
        rhs = l2w(g, np.abs(k1)) ** alpha * l2w(g) ** (1 - alpha)
        rep_ratios["g_supx_l2yz"].append(lhs / max(rhs, 1e-300))

        lhs = _mixed_norm(grid, g_phys, ("z",), ("x", "y"))
        rhs = l2w(g) + l2w(g, np.abs(k3)) ** alpha * l2w(g) ** (1 - alpha)
        rep_ratios["g_supz_l2xy"].append(lhs / max(rhs, 1e-300))

    reports = [
        _report("aniso_f0_supy_l2z", one_yz, INEQ_TOL),
        _report("aniso_g_supy_l2xz", one_yxz, INEQ_TOL),
    ]
    for name, ratios in rep_ratios.items():
        reports.append(_report(f"aniso_reported_{name}", ratios, 0.0,
                               asserted=False, cap=cap,
                               notes={"alpha": alpha, "cap": cap}))
    return reports


# --------------------------------------------------------------------------
# sheared heat kernel
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ModeKernel:
    k1: float
    k2: float
    k3: float
    a_flow: float = 1000.0
    b_weight: float = 1.0

    def r(self, t):
        return (self.k1**2 + (self.k2 - np.asarray(t) * self.k1) ** 2
                + self.k3**2)

    def r1(self, t):
        return kernel_r1((self.k1, self.k2, self.k3), t)

    def decay_constant(self):
        """C with exp(-r1(t)/A) <= exp(C) exp(-(b+1) A^(-1/3) t): the
        stationary-point value of the concave-minus-cubic gap."""
        if self.k1 == 0:
            raise ValueError("decay envelope needs k1 != 0")
        return (4.0 / 3.0) * (self.b_weight + 1.0) ** 1.5 / abs(self.k1)


def kernel_r1(k, t):
    """Closed form of int_0^t k1^2 + (k2 - s k1)^2 + k3^2 ds."""
    k1, k2, k3 = k
    t = np.asarray(t, dtype=float)
    if k1 == 0:
        return (k1**2 + k2**2 + k3**2) * t
    out = (k1**2 + k3**2) * t + (k2**3 - (k2 - t * k1) ** 3) / (3.0 * k1)
    return out if out.ndim else float(out)


def _r1_gap_centered(k1, k2, k3, t2, t1):
    """r1(t1) - r1(t2) in the centered exact form
    (m^2 + k1^2 + k3^2) dt + k1^2 dt^3 / 12 with m = k2 - k1 (t1+t2)/2."""
    dt = t1 - t2
    m = k2 - k1 * 0.5 * (t1 + t2)
    return (m * m + k1 * k1 + k3 * k3) * dt + k1 * k1 * dt**3 / 12.0


def kernel_decay_check(k, a_flow, b_weight, t_grid):
    """Cubic gap bound at every ordered grid pair (zero tolerance), plus
    the affine envelope with the derived constant."""
    k1, k2, k3 = k
    t = np.asarray(t_grid, dtype=float)
    t2, t1 = np.meshgrid(t, t, indexing="ij")
    upper = t1 > t2
    gap = _r1_gap_centered(k1, k2, k3, t2, t1)
    cubic = (t1 - t2) ** 3 * k1**2 / 12.0
    margin = np.where(upper, gap - cubic, 0.0)
    cubic_ok = bool(np.all(margin >= 0.0))

    mk = ModeKernel(k1, k2, k3, a_flow, b_weight)
    c_env = mk.decay_constant()
    # affine bound: gap/A >= (b+1) A^(-1/3) (t1-t2) - C
    affine_lhs = gap / a_flow
    affine_rhs = (b_weight + 1.0) * a_flow ** (-1.0 / 3.0) * (t1 - t2) - c_env
    affine_ok = bool(np.all(np.where(upper, affine_lhs - affine_rhs, 0.0)
                            >= -1e-12))
    # envelope on the exact amplitude
    amp = np.exp(-kernel_r1(k, t) / a_flow)
    env = math.exp(c_env) * np.exp(-(b_weight + 1.0)
                                   * a_flow ** (-1.0 / 3.0) * t)
    env_ok = bool(np.all(amp <= env * (1.0 + 1e-12)))
    worst = float(np.max(amp / env))
    return VerificationReport(
        name="kernel_decay", asserted=True,
        passed=cubic_ok and affine_ok and env_ok,
        worst_ratio=worst, tolerance=0.0, count=t.size,
        notes={"cubic_ok": cubic_ok, "affine_ok": affine_ok,
               "envelope_ok": env_ok, "c_envelope": c_env})


def solve_mode_ode(k, a_flow, t_grid, f1=None, f2=None, f0=1.0):
    """Exact-integrating-factor solution of
    df/dt + (r(t)/A) f = i k1 f1(t) + f2(t) on the grid (trapezoid on the
    forcing)."""
    k1 = k[0]
    t = np.asarray(t_grid, dtype=float)
    f = np.empty(t.size, dtype=complex)
    f[0] = f0
    r1_vals = kernel_r1(k, t)
    for i in range(t.size - 1):
        h = t[i + 1] - t[i]
        fac = math.exp(-(r1_vals[i + 1] - r1_vals[i]) / a_flow)
        g_i = 0.0 if f1 is None and f2 is None else (
            (1j * k1 * f1(t[i]) if f1 is not None else 0.0)
            + (f2(t[i]) if f2 is not None else 0.0))
        g_ip = 0.0 if f1 is None and f2 is None else (
            (1j * k1 * f1(t[i + 1]) if f1 is not None else 0.0)
            + (f2(t[i + 1]) if f2 is not None else 0.0))
        f[i + 1] = fac * f[i] + 0.5 * h * (fac * g_i + g_ip)
    return f


def kernel_decay_suite(n_modes=50, seed=29, b_weight=1.0):
    """kernel_decay_check over random modes and amplitudes, one report."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    all_ok = True
    failing = ""
    for _ in range(n_modes):
        k1 = int(rng.integers(1, 8)) * (1 if rng.random() < 0.5 else -1)
        k = (k1, float(rng.integers(-8, 9)), float(rng.integers(-8, 9)))
        a_flow = float(rng.choice([100.0, 1000.0, 10000.0]))
        rep = kernel_decay_check(k, a_flow, b_weight,
                                 np.linspace(0.0, 50.0, 40))
        worst = max(worst, rep.worst_ratio)
        if not rep.passed:
            all_ok = False
            failing = f"k={k} A={a_flow}"
    return VerificationReport(
        name="kernel_decay_random_modes", asserted=True, passed=all_ok,
        worst_ratio=worst, tolerance=0.0, count=n_modes, worst_case=failing)


def check_spacetime_bound(k, b_weight=1.0, a_values=(1e2, 1e3, 1e4),
                          n_forcings=8, seed=31, cap=RATIO_CAP):
    """Per-mode weighted space-time bound: the empirical ratio of the
    four-component norm against the data norm stays under the cap,
    uniformly over the flow amplitudes."""
    rng = np.random.default_rng(seed)
    k1, k2, k3 = k
    ratios = []
    per_a_max = []
    for a_flow in a_values:
        t_end = 3.0 * a_flow ** (1.0 / 3.0)
        t = np.linspace(0.0, t_end, 2500)
        rate = b_weight * a_flow ** (-1.0 / 3.0)
        for j in range(n_forcings):
            amps = rng.standard_normal(6)
            oms = rng.uniform(0.1, 2.0, 2)

            def f1(s, amps=amps, oms=oms):
                return (amps[0] + 1j * amps[1]) * np.cos(oms[0] * s) \
                    * np.exp(-2.0 * rate * s)

            def f2(s, amps=amps, oms=oms):
                return (amps[2] + 1j * amps[3]) * np.sin(oms[1] * s) \
                    * np.exp(-2.0 * rate * s)

            f0 = amps[4] + 1j * amps[5]
            f = solve_mode_ode(k, a_flow, t, f1, f2, f0)
            w = np.exp(rate * t)
            r_t = k1**2 + (k2 - t * k1) ** 2 + k3**2
            z_sup = np.max(np.abs(w * f)) ** 2
            z_l2 = np.trapezoid(np.abs(w * f) ** 2, t) / a_flow ** (1.0 / 3.0)
            z_gx = np.trapezoid(k1**2 / r_t * np.abs(w * f) ** 2, t)
            z_gr = np.trapezoid(r_t * np.abs(w * f) ** 2, t) / a_flow
            zb = z_sup + z_l2 + z_gx + z_gr
            rhs = (abs(f0) ** 2
                   + abs(k1) / math.sqrt(k1**2 + k3**2)
                   * np.trapezoid(r_t * np.abs(w * f1(t)) ** 2, t)
                   + a_flow * np.trapezoid(np.abs(w * f2(t)) ** 2 / r_t, t))
            ratios.append(zb / max(rhs, 1e-300))
        per_a_max.append(float(np.max(ratios[-n_forcings:])))
    return VerificationReport(
        name="kernel_spacetime_bound", asserted=False,
        passed=bool(max(ratios) <= cap), worst_ratio=float(max(ratios)),
        tolerance=0.0, count=len(ratios),
        notes={"cap": cap, "a_values": list(a_values),
               "per_a_max": per_a_max})


# --------------------------------------------------------------------------
# suite driver
# --------------------------------------------------------------------------

SUITES = ("gn", "nash", "elliptic", "velocity", "aniso", "kernel",
          "spacetime")


def run_suite(names=None, count=100, seed=2024, cap=RATIO_CAP):
    """Run the selected verification suites; returns a list of reports."""
    names = list(names or SUITES)
    reports = []
    for name in names:
        if name == "gn":
            reports.append(check_gn_1d(count=count, seed=seed))
        elif name == "nash":
            reports.append(check_nash_1d(count=count, seed=seed + 1))
            dev = nash_ratio_invariance(seed=seed + 2)
            reports.append(VerificationReport(
                name="nash_ratio_invariance", asserted=True,
                passed=bool(dev <= 1e-10), worst_ratio=float(dev),
                tolerance=1e-10, count=6))
        elif name == "elliptic":
            reports.extend(check_elliptic_identities(
                EnsembleSpec(count=count, seed=seed)))
        elif name == "velocity":
            reports.extend(check_velocity_identities(
                EnsembleSpec(count=count, seed=seed + 3,
                             field_class="divergence_free")))
        elif name == "aniso":
            reports.extend(check_aniso_ratios(
                EnsembleSpec(count=count, seed=seed + 4,
                             field_class="x_mean_free"), cap=cap))
        elif name == "kernel":
            reports.append(kernel_decay_suite(n_modes=50, seed=seed + 5))
        elif name == "spacetime":
            reports.append(check_spacetime_bound((2.0, 1.0, 1.0), cap=cap))
        else:
            raise ValueError(f"unknown suite {name!r}; pick from {SUITES}")
    return reports
