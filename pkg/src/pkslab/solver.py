"""Time integration of the rescaled perturbation system in sheared
coordinates X = x - t*y.

The background transport y*dx becomes exact there (time-dependent
effective wavenumber k2 - t*k1); diffusion is advanced by the exact
per-mode integrating factor; the remaining terms (advection, chemotaxis
flux, lift-up coupling, buoyancy-type forcing, pressure) go through an
explicit three-stage SSP Runge-Kutta with the diffusion factor folded in.
"""

import math
from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft

from . import kernels
from .errors import StepRejected, UnresolvedError
from .spectral import Grid, SpectralScalar, SpectralVector

INIT_KINDS = ("bump", "bump_plus_xmode", "random_bandlimited")
STATUS = ("running", "finished", "blowup", "unresolved")

# largest admissible exponent in the backward half-step diffusion factor;
# beyond this the SSP stage arithmetic amplifies roundoff
_BACKWARD_EXP_CAP = 40.0


@dataclass(frozen=True)
class SimConfig:
    # grid
    nx: int = 48
    ny: int = 96
    nz: int = 48
    ly: float = 4.0
    dealias_fraction: float = 2.0 / 3.0
    # physics
    a_flow: float = 1000.0        # Couette amplitude A (>= 1; inf allowed)
    a_weight: float = 0.1         # exponential weight a in the rate norms
    eps0: float = 0.4             # smallness exponent, must exceed 1/3
    couette: bool = True          # background shear on/off
    nonlinear: bool = True        # quadratic terms on/off
    # numerics
    cfl: float = 0.4
    t_max: float = 1.0
    dt: float = 0.0               # 0 = choose from the CFL bound
    dealias_on: bool = True
    clip_negative: bool = False
    liftup_split: bool = True
    # initial data
    init_kind: str = "bump"
    mass: float = 10.0
    width: float = 1.0
    u_amp: float = 0.0
    xamp: float = 0.5
    zamp: float = 0.0
    init_band: int = 2
    seed: int = 1234
    # diagnostics and detectors
    diag_stride: int = 10
    blowup_factor: float = 50.0
    tail_max: float = 0.1
    band_energy_tol: float = 1e-6
    positivity_tol: float = 1e-6
    threads: int = 1

    def __post_init__(self):
        if not (self.a_flow >= 1.0):
            raise ValueError(f"a_flow must be >= 1, got {self.a_flow}")
        if self.a_weight <= 0:
            raise ValueError("a_weight must be positive")
        if not self.eps0 > 1.0 / 3.0:
            raise ValueError(f"eps0 must exceed 1/3, got {self.eps0}")
        if not 0.0 < self.cfl <= 1.0:
            raise ValueError(f"cfl must lie in (0, 1], got {self.cfl}")
        if self.init_kind not in INIT_KINDS:
            raise ValueError(f"init_kind must be one of {INIT_KINDS}")
        if self.diag_stride < 1:
            raise ValueError("diag_stride must be >= 1")

    @property
    def eps(self):
        """Rate-norm exponent: eps0 capped at 4/9."""
        return min(self.eps0, 4.0 / 9.0)

    @property
    def inv_a(self):
        return 0.0 if math.isinf(self.a_flow) else 1.0 / self.a_flow

    def make_grid(self):
        return Grid(self.nx, self.ny, self.nz, ly=self.ly,
                    dealias_fraction=self.dealias_fraction,
                    workers=self.threads)


@dataclass(frozen=True)
class ShearFrame:
    """The tilted-coordinate frame at time t: effective wavenumbers are
    (k1, k2 - t k1, k3) while the shear is active."""
    t: float
    couette: bool = True

    @property
    def t_shear(self):
        return self.t if self.couette else 0.0

    def k2_eff(self, grid):
        return grid.k2_eff(self.t_shear)

    def ksq_eff(self, grid):
        return grid.ksq_eff(self.t_shear)

    def within_band(self, grid, n, energy_tol=1e-6):
        """False when a mode holding more than energy_tol of the density
        energy has an effective wavenumber beyond the dealias edge."""
        if not self.couette:
            return True
        k2e = np.abs(self.k2_eff(grid))
        e = grid.parseval_w * np.abs(n) ** 2
        total = float(e.sum())
        if total == 0.0:
            return True
        hot = e > energy_tol * total
        return not bool(np.any(hot & (k2e > grid.kmax_dealias[1])))


@dataclass
class LiftUpSplit:
    """2D (y,z) companion fields splitting the streamwise zero mode into a
    lift-up-driven part (starts at zero) and a remainder that is blind to
    the lift-up."""
    uhat: np.ndarray              # lift-up part, 2D coefficients
    util: np.ndarray              # remainder, 2D coefficients
    duhat_dt: np.ndarray          # last tendency of uhat (for diagnostics)


@dataclass
class SimState:
    grid: Grid
    t: float
    n: np.ndarray                 # density coefficients
    u: list                       # three velocity coefficient arrays
    status: str = "running"
    c: np.ndarray = None          # cached chemoattractant coefficients
    pressures: tuple = None       # cached (P1, P2, P3) coefficients
    split: LiftUpSplit = None
    mass0: float = 0.0
    detect0: float = 0.0          # blow-up functional at t = 0
    umax: float = 0.0             # |u|_inf from the latest evaluation
    gcmax: float = 0.0            # |grad c|_inf from the latest evaluation
    clip_events: int = 0
    steps: int = 0

    def t_shear(self, cfg):
        return self.t if cfg.couette else 0.0

    def frame(self, cfg):
        return ShearFrame(self.t, cfg.couette)

    def mass(self):
        return self.grid.integral(self.n)

    def n_scalar(self):
        return SpectralScalar(self.grid, self.n)

    def u_vector(self):
        return SpectralVector(self.grid, self.u)


# --------------------------------------------------------------------------
# initial data
# --------------------------------------------------------------------------

def _bump_profile(grid, width):
    """Gaussian in y, peak 1, broadcast over the box."""
    return np.exp(-grid.y[None, :, None] ** 2 / (2.0 * width**2)) \
        * np.ones((grid.nx, 1, grid.nz))


def _random_trig(grid, rng, band, scale=1.0):
    """Real random band-limited field with |j| <= band per axis."""
    coeff = grid.zero_coeffs()
    j1 = np.fft.fftfreq(grid.nx, 1.0 / grid.nx)
    j2 = np.fft.fftfreq(grid.ny, 1.0 / grid.ny)
    j3 = np.arange(grid.nz // 2 + 1)
    mask = ((np.abs(j1)[:, None, None] <= band)
            & (np.abs(j2)[None, :, None] <= band)
            & (j3[None, None, :] <= band))
    vals = rng.standard_normal(coeff.shape) + 1j * rng.standard_normal(coeff.shape)
    coeff[mask] = vals[mask]
    coeff = grid.hermitianize(coeff)
    phys = grid.to_physical(coeff)
    peak = np.max(np.abs(phys))
    return phys * (scale / peak) if peak > 0 else phys


def _h2_norm(grid, coeffs):
    w = grid.parseval_w * (1.0 + grid.ksq + grid.ksq**2)
    total = sum(np.sum(w * np.abs(a) ** 2) for a in coeffs)
    return float(np.sqrt(grid.volume * total))


def init_state(cfg):
    """Build the initial state: non-negative localized density of the
    requested mass plus a divergence-free velocity of the requested
    H2 amplitude."""
    if cfg.mass <= 0:
        raise ValueError(f"mass must be positive, got {cfg.mass}")
    if 6.0 * cfg.width > math.pi * cfg.ly:
        raise ValueError(
            f"width {cfg.width} puts data within 6 widths of the y seam "
            f"(pi*ly = {math.pi * cfg.ly:.3f}); widen ly or narrow the bump")
    grid = cfg.make_grid()
    rng = np.random.default_rng(cfg.seed)

    bump = _bump_profile(grid, cfg.width)
    if cfg.init_kind == "bump":
        n_phys = bump.copy()
    elif cfg.init_kind == "bump_plus_xmode":
        for name, amp in (("xamp", cfg.xamp), ("zamp", cfg.zamp)):
            if not 0.0 <= amp <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {amp}")
        n_phys = bump * (1.0 + cfg.xamp * np.cos(grid.x)[:, None, None]) \
            * (1.0 + cfg.zamp * np.cos(grid.z)[None, None, :])
    else:  # random_bandlimited
        trig = _random_trig(grid, rng, cfg.init_band, scale=0.9)
        n_phys = bump * (1.0 + trig)
    n_phys *= cfg.mass / (np.sum(n_phys) * grid.cell_volume)

    n = grid.to_spectral(n_phys)
    n[~grid.dealias_mask] = 0.0
    # re-normalize after truncation; the k = 0 coefficient is untouched by
    # the mask so this is only a guard
    n *= cfg.mass / grid.integral(n)
    n_trunc = grid.to_physical(n)
    floor = -cfg.positivity_tol * max(float(np.max(np.abs(n_trunc))), 1.0)
    if float(np.min(n_trunc)) < floor:
        raise ValueError(
            f"initial profile under-resolved: band truncation rings to "
            f"{float(np.min(n_trunc)):.2e}; widen init width or refine ny")

    u = [grid.zero_coeffs() for _ in range(3)]
    if cfg.u_amp > 0.0:
        psi = []
        for _ in range(3):
            p = _random_trig(grid, rng, cfg.init_band) * bump
            psi.append(grid.to_spectral(p))
        ik = (1j * grid.k1, 1j * grid.k2, 1j * grid.k3)
        u[0] = ik[1] * psi[2] - ik[2] * psi[1]
        u[1] = ik[2] * psi[0] - ik[0] * psi[2]
        u[2] = ik[0] * psi[1] - ik[1] * psi[0]
        for a in u:
            a[~grid.dealias_mask] = 0.0
        h2 = _h2_norm(grid, u)
        for a in u:
            a *= cfg.u_amp / h2

    state = SimState(grid=grid, t=0.0, n=n, u=u)
    state.mass0 = state.mass()
    if cfg.liftup_split:
        nzh = grid.nz // 2 + 1
        state.split = LiftUpSplit(
            uhat=np.zeros((grid.ny, nzh), dtype=complex),
            util=u[0][0].copy(),
            duhat_dt=np.zeros((grid.ny, nzh), dtype=complex))
    state.umax = _umax(grid, u)
    c = chemoattractant(grid, n, 0.0)
    state.gcmax = float(np.sqrt(max(
        np.max(grid.to_physical(1j * grid.k1 * c) ** 2
               + grid.to_physical(1j * grid.k2 * c) ** 2
               + grid.to_physical(1j * grid.k3 * c) ** 2), 0.0)))
    state.detect0 = detect_functional(state, cfg)
    return state


def _umax(grid, u):
    vals = [grid.to_physical(a) for a in u]
    return float(np.sqrt(max(np.max(vals[0]**2 + vals[1]**2 + vals[2]**2), 0.0)))


# --------------------------------------------------------------------------
# right-hand side
# --------------------------------------------------------------------------

def _axis_vectors(grid):
    return (np.ascontiguousarray(grid.k1.ravel()),
            np.ascontiguousarray(grid.k2.ravel()),
            np.ascontiguousarray(grid.k3.ravel()))


def chemoattractant(grid, n, t_shear):
    """c = (1 - Lap)^(-1) n with the sheared Laplacian."""
    return n / (1.0 + grid.ksq_eff(t_shear))


def _rhs(grid, cfg, n, u, t, include_drift=True):
    """Tendency of (n, u) at time t, diffusion and exact transport
    excluded.  Returns (dn, du, aux).

    include_drift adds the pressure completion that keeps the sheared
    divergence constraint exact as the frame tilts (the second half of
    the -2A dx u2 pressure); the stepping path always wants it, the
    public tendency is the projected (divergence-free) part alone."""
    tsh = t if cfg.couette else 0.0
    inv_a = cfg.inv_a
    k1 = grid.k1
    k2e = grid.k2_eff(tsh)
    k3 = grid.k3
    dn = np.zeros_like(n)
    du = [np.zeros_like(a) for a in u]
    aux = {}

    if cfg.nonlinear and inv_a > 0.0:
        c = chemoattractant(grid, n, tsh)
        n_p = grid.to_physical(n)
        gcx = grid.to_physical(1j * k1 * c)
        gcy = grid.to_physical(1j * k2e * c)
        gcz = grid.to_physical(1j * k3 * c)
        u_p = [grid.to_physical(a) for a in u]
        aux["umax"] = float(np.sqrt(np.max(
            u_p[0]**2 + u_p[1]**2 + u_p[2]**2)))
        aux["gcmax"] = float(np.sqrt(np.max(gcx**2 + gcy**2 + gcz**2)))
        aux["nmin"] = float(np.min(n_p))
        aux["nmax"] = float(np.max(np.abs(n_p)))

        # density flux: n * (u + grad c); divergence keeps the mean exact
        fx = grid.to_spectral(n_p * (u_p[0] + gcx))
        fy = grid.to_spectral(n_p * (u_p[1] + gcy))
        fz = grid.to_spectral(n_p * (u_p[2] + gcz))
        dn -= inv_a * (1j * k1 * fx + 1j * k2e * fy + 1j * k3 * fz)

        # momentum advection in divergence form: d_j (u_i u_j)
        uu = {}
        for i in range(3):
            for j in range(i, 3):
                uu[(i, j)] = grid.to_spectral(u_p[i] * u_p[j])
        kk = (k1, k2e, k3)
        for i in range(3):
            adv = np.zeros_like(n)
            for j in range(3):
                adv += 1j * kk[j] * uu[(min(i, j), max(i, j))]
            du[i] -= inv_a * adv

        if cfg.liftup_split:
            # x-averaged nonzero-mode feedback (u_neq . grad u1_neq)_0 =
            # (div(u u1))_0 minus the zero-mode self-advection, reusing
            # the full products and 2D transforms of the x averages
            w0 = u_p[0].mean(axis=0)
            p12 = sfft.rfftn(u_p[1].mean(axis=0) * w0, norm="forward",
                             workers=grid.workers)
            p13 = sfft.rfftn(u_p[2].mean(axis=0) * w0, norm="forward",
                             workers=grid.workers)
            aux["force_neq"] = (1j * k2e[0] * (uu[(0, 1)][0] - p12)
                                + 1j * k3[0] * (uu[(0, 2)][0] - p13))
    else:
        aux["umax"] = _umax(grid, u)

    # lift-up coupling and mean-free buoyancy-type forcing
    if cfg.couette:
        du[0] -= u[1]
    forcing = inv_a * n
    forcing = forcing.copy()
    forcing[0, 0, 0] = 0.0
    du[1] += forcing

    # pressure: Leray projection plus the frame-drift correction that
    # keeps the sheared divergence constraint exact in time
    k1x, k2y, k3z = _axis_vectors(grid)
    kernels.leray_project(du[0], du[1], du[2], k1x, k2y, k3z, tsh)
    if cfg.couette and include_drift:
        ksq = grid.ksq_eff(tsh)
        ksq_safe = np.where(ksq == 0.0, 1.0, ksq)
        drift = (k1 * u[1]) / ksq_safe
        du[0] += k1 * drift
        du[1] += k2e * drift
        du[2] += k3 * drift

    if cfg.dealias_on:
        mask = grid.dealias_mask
        dn[~mask] = 0.0
        for a in du:
            a[~mask] = 0.0
    return dn, du, aux


def tendency(state, cfg):
    """Public tendency (density, velocity) at the state's time; the
    velocity part is the sheared-divergence-free projection."""
    dn, du, _ = _rhs(state.grid, cfg, state.n, state.u, state.t,
                     include_drift=False)
    return SpectralScalar(state.grid, dn), SpectralVector(state.grid, du)


def compute_pressures(state, a_flow=None, cfg=None):
    """Diagnostic pressures of the split Poisson problems (all mean-free):
    Lap P1 = -2A dx u2,  Lap P2 = dy n,  Lap P3 = -div(u . grad u)."""
    grid = state.grid
    if cfg is None:
        cfg = SimConfig()
    a = cfg.a_flow if a_flow is None else a_flow
    tsh = state.t_shear(cfg)
    k1, k2e, k3 = grid.k1, grid.k2_eff(tsh), grid.k3
    ksq = k1**2 + k2e**2 + k3**2
    ksq_safe = np.where(ksq == 0.0, 1.0, ksq)

    p1 = 2.0 * a * 1j * k1 * state.u[1] / ksq_safe
    p2 = -(1j * k2e * state.n) / ksq_safe
    u_p = [grid.to_physical(a_) for a_ in state.u]
    kk = (k1, k2e, k3)
    div_adv = np.zeros_like(state.n)
    for i in range(3):
        for j in range(3):
            div_adv += 1j * kk[i] * 1j * kk[j] \
                * grid.to_spectral(u_p[i] * u_p[j])
    p3 = div_adv / ksq_safe
    for p in (p1, p2, p3):
        p[0, 0, 0] = 0.0
    return (SpectralScalar(grid, p1), SpectralScalar(grid, p2),
            SpectralScalar(grid, p3))


# --------------------------------------------------------------------------
# lift-up split dynamics
# --------------------------------------------------------------------------

def _split_grid_ops(grid):
    k2 = grid.k2[0]                      # (ny, 1)
    k3 = grid.k3[0]                      # (1, nzh)
    ksq2d = k2**2 + k3**2
    mask2d = grid.dealias_mask[0]
    return k2, k3, ksq2d, mask2d


def _split_rhs(grid, cfg, w, u20, u30, extra):
    """Tendency of one split component: -(u20 dy + u30 dz) w / A + extra."""
    k2, k3, _, mask2d = _split_grid_ops(grid)
    out = extra.copy() if extra is not None else np.zeros_like(w)
    if cfg.inv_a > 0.0:
        wy = sfft.irfftn(1j * k2 * w, s=(grid.ny, grid.nz), norm="forward")
        wz = sfft.irfftn(1j * k3 * w, s=(grid.ny, grid.nz), norm="forward")
        v2 = sfft.irfftn(u20, s=(grid.ny, grid.nz), norm="forward")
        v3 = sfft.irfftn(u30, s=(grid.ny, grid.nz), norm="forward")
        adv = sfft.rfftn(v2 * wy + v3 * wz, norm="forward")
        out -= cfg.inv_a * adv
    if cfg.dealias_on:
        out[~mask2d] = 0.0
    return out


def evolve_liftup_split(split, u20, u30, force_neq, dt, cfg, grid=None):
    """Advance the split one step with frozen zero-mode inputs (the
    in-simulation path staggers these through the RK stages instead).

    u20, u30: 2D coefficients of the wall-normal/spanwise zero modes;
    force_neq: 2D coefficients of the x-averaged nonzero-mode feedback.
    """
    if grid is None:
        grid = cfg.make_grid()
    return _advance_split(grid, cfg, split, dt, [(u20, u30, force_neq)] * 3)


def _advance_split(grid, cfg, split, dt, stage_inputs):
    """IF-SSP-RK3 update of both split components; stage_inputs holds one
    (u20, u30, force_neq) triple per stage."""
    _, _, ksq2d, _ = _split_grid_ops(grid)
    e_full = np.exp(-ksq2d * dt * cfg.inv_a)
    e_half = np.exp(-ksq2d * 0.5 * dt * cfg.inv_a)

    def rhs(pair, inputs):
        u20, u30, fneq = inputs
        d_hat = _split_rhs(grid, cfg, pair[0], u20, u30, -u20)
        extra_til = None if fneq is None else -cfg.inv_a * fneq
        d_til = _split_rhs(grid, cfg, pair[1], u20, u30, extra_til)
        return d_hat, d_til

    y0 = (split.uhat, split.util)
    k_a = rhs(y0, stage_inputs[0])
    y1 = tuple(e_full * (y + dt * k) for y, k in zip(y0, k_a))
    k_b = rhs(y1, stage_inputs[1])
    y2 = tuple(0.75 * e_half * y + 0.25 * (yy + dt * k) / e_half
               for y, yy, k in zip(y0, y1, k_b))
    k_c = rhs(y2, stage_inputs[2])
    y3 = tuple((1.0 / 3.0) * e_full * y + (2.0 / 3.0) * e_half * (yy + dt * k)
               for y, yy, k in zip(y0, y2, k_c))
    return LiftUpSplit(uhat=y3[0], util=y3[1], duhat_dt=k_a[0].copy())


def split_frame_fields(grid, split, a_flow):
    """kappa = dz(uhat)/ (A + dy(uhat)) and dy(V) = 1 + dy(uhat)/A on the
    (y, z) grid; raises UnresolvedError on frame degeneracy."""
    k2, k3, _, _ = _split_grid_ops(grid)
    inv_a = 0.0 if math.isinf(a_flow) else 1.0 / a_flow
    duy = sfft.irfftn(1j * k2 * split.uhat, s=(grid.ny, grid.nz),
                      norm="forward")
    duz = sfft.irfftn(1j * k3 * split.uhat, s=(grid.ny, grid.nz),
                      norm="forward")
    dyv = 1.0 + inv_a * duy
    if np.min(dyv) < 0.5:
        raise UnresolvedError(
            f"lift-up frame degenerate: min dy(V) = {np.min(dyv):.3f} < 0.5")
    kappa = inv_a * duz / dyv
    return kappa, dyv


# --------------------------------------------------------------------------
# stepping
# --------------------------------------------------------------------------

def _diff_factors(grid, cfg, t0, dt):
    """(full, half, second-half) diffusion factors for one step."""
    k1x, k2y, k3z = _axis_vectors(grid)
    inv_a = cfg.inv_a
    if not cfg.couette:
        # frozen frame: plain heat factors
        static = grid.ksq
        e_full = np.exp(-static * dt * inv_a)
        e_half = np.exp(-static * 0.5 * dt * inv_a)
        return e_full, e_half, e_half
    th, t1 = t0 + 0.5 * dt, t0 + dt
    e_full = kernels.diffusion_factor(k1x, k2y, k3z, t0, t1, inv_a)
    e_half = kernels.diffusion_factor(k1x, k2y, k3z, t0, th, inv_a)
    e_half2 = kernels.diffusion_factor(k1x, k2y, k3z, th, t1, inv_a)
    return e_full, e_half, e_half2


def cfl_dt(state, cfg, k1_active=None, speed=None):
    """CFL bound: cfl * (effective grid spacing) / max(1, |u|inf / A).

    The effective spacing uses the tilted wavenumber band of the modes
    that actually carry energy."""
    grid = state.grid
    j1, j2, j3 = grid.kmax_dealias
    if k1_active is None:
        k1_active = active_k1(grid, state.n, state.u)
    tsh = abs(state.t_shear(cfg))
    k2_eff_max = j2 + tsh * k1_active
    delta = math.pi / max(j1, k2_eff_max, j3, 1.0)
    if speed is None:
        speed = state.umax
    return cfg.cfl * delta / max(1.0, speed * cfg.inv_a)


def auto_dt(state, cfg):
    """Run-loop step choice: stricter than the bare CFL precondition, it
    also counts the chemotactic drift speed."""
    return cfl_dt(state, cfg, speed=state.umax + state.gcmax)


def shear_band_horizon(grid):
    """Time for the most tilted retained mode pair to cross the dealias
    band: (k2 band width) / (k1 band width).  Runs beyond a few of these
    rely on the band monitor to certify that tilted modes have decayed."""
    j1, j2, _ = grid.kmax_dealias
    return j2 / max(j1, 1.0)


def validate_horizon(grid, n, t_max, quantile_tol=1e-6):
    """Up-front check of max |k2 - t_max k1| over the data-occupied modes
    against the dealias band; returns (ok, worst_k2_eff, band_edge)."""
    w = grid.parseval_w * np.abs(n) ** 2
    total = float(w.sum())
    k2_cut = grid.kmax_dealias[1]
    if total == 0.0:
        return True, 0.0, k2_cut
    hot = w > quantile_tol * total
    k2e_end = np.abs(grid.k2 - t_max * grid.k1)
    worst = float(np.max(np.where(hot, k2e_end, 0.0)))
    return worst <= k2_cut, worst, k2_cut


def active_k1(grid, n, u, rel_tol=1e-12):
    """Largest |k1| whose x shell still carries energy (of n or u)."""
    w = grid.parseval_w
    e = w * np.abs(n) ** 2
    for a in u:
        e = e + w * np.abs(a) ** 2
    shell = e.sum(axis=(1, 2))
    total = shell.sum()
    if total == 0.0:
        return 0.0
    j1 = np.abs(np.fft.fftfreq(grid.nx, 1.0 / grid.nx))
    hot = shell > rel_tol * total
    return float(np.max(j1[hot])) if np.any(hot) else 0.0


def step(state, dt, cfg):
    """One SSP-RK3 step with exact per-mode diffusion; mutates and returns
    the state.  Raises StepRejected if dt violates the CFL precondition."""
    if state.status != "running":
        raise UnresolvedError(f"cannot step a state with status {state.status}")
    grid = state.grid
    t0 = state.t
    limit = cfl_dt(state, cfg)
    if dt > limit * (1.0 + 1e-9):
        raise StepRejected(f"dt = {dt:.3e} exceeds the CFL bound {limit:.3e}")

    e_full, e_half, e_half2 = _diff_factors(grid, cfg, t0, dt)
    live = grid.dealias_mask if cfg.dealias_on else \
        np.ones(grid.spectral_shape, dtype=bool)
    if cfg.inv_a > 0.0:
        back = -np.log(np.maximum(e_half2, 1e-300))
        max_back = float(np.max(np.where(live, back, 0.0)))
        if max_back > _BACKWARD_EXP_CAP:
            raise StepRejected(
                f"backward diffusion exponent {max_back:.1f} too large; "
                "reduce dt")

    th, t1 = t0 + 0.5 * dt, t0 + dt
    n0, u0 = state.n, state.u
    dn_a, du_a, aux = _rhs(grid, cfg, n0, u0, t0)
    n1 = e_full * (n0 + dt * dn_a)
    u1 = [e_full * (a + dt * b) for a, b in zip(u0, du_a)]

    dn_b, du_b, aux_b = _rhs(grid, cfg, n1, u1, t1)
    # outside the live band every stage value is exactly zero; suppress
    # the (possibly overflowing) backward factor there
    inv_eh2 = np.where(live, 1.0 / np.maximum(e_half2, 1e-300), 0.0)
    n2 = 0.75 * e_half * n0 + 0.25 * inv_eh2 * (n1 + dt * dn_b)
    u2 = [0.75 * e_half * a + 0.25 * inv_eh2 * (b + dt * c)
          for a, b, c in zip(u0, u1, du_b)]

    dn_c, du_c, aux_c = _rhs(grid, cfg, n2, u2, th)
    state.n = (1.0 / 3.0) * e_full * n0 \
        + (2.0 / 3.0) * e_half2 * (n2 + dt * dn_c)
    state.u = [(1.0 / 3.0) * e_full * a
               + (2.0 / 3.0) * e_half2 * (b + dt * c)
               for a, b, c in zip(u0, u2, du_c)]

    # re-project: removes the O(dt^4) divergence drift of the stages
    k1x, k2y, k3z = _axis_vectors(grid)
    tsh1 = t1 if cfg.couette else 0.0
    kernels.leray_project(state.u[0], state.u[1], state.u[2],
                          k1x, k2y, k3z, tsh1)

    if state.split is not None:
        stage_inputs = []
        for u_stage, stage_aux in ((u0, aux), (u1, aux_b), (u2, aux_c)):
            stage_inputs.append((u_stage[1][0].copy(), u_stage[2][0].copy(),
                                 stage_aux.get("force_neq")))
        state.split = _advance_split(grid, cfg, state.split, dt, stage_inputs)

    if cfg.clip_negative:
        phys = grid.to_physical(state.n)
        neg = phys < 0.0
        if np.any(neg):
            phys[neg] = 0.0
            state.n = grid.to_spectral(phys)
            state.n[~grid.dealias_mask] = 0.0
            state.clip_events += int(np.count_nonzero(neg))

    state.t = t1
    state.steps += 1
    state.umax = aux.get("umax", state.umax)
    state.gcmax = aux.get("gcmax", state.gcmax)
    state.c = None
    state.pressures = None
    return state


# --------------------------------------------------------------------------
# detectors
# --------------------------------------------------------------------------

def detect_functional(state, cfg):
    """A^(-1/12) |grad u|_2 + |dxx n|_2 + |dzz n|_2 + |n|_inf."""
    grid = state.grid
    tsh = state.t_shear(cfg)
    k1, k2e, k3 = grid.k1, grid.k2_eff(tsh), grid.k3
    kabs = np.sqrt(k1**2 + k2e**2 + k3**2)
    grad_u = math.sqrt(sum(grid.l2norm_weighted(a, kabs) ** 2
                           for a in state.u))
    dxx = grid.l2norm_weighted(state.n, k1**2)
    dzz = grid.l2norm_weighted(state.n, k3**2)
    n_inf = grid.linf_norm(grid.to_physical(state.n))
    a_fac = 0.0 if math.isinf(cfg.a_flow) else cfg.a_flow ** (-1.0 / 12.0)
    return a_fac * grad_u + dxx + dzz + n_inf


def tail_fraction(grid, coeff, edge=5.0 / 6.0):
    """Energy fraction in the outer dealias shells (any axis beyond the
    edge fraction of its cut)."""
    j1 = np.abs(np.fft.fftfreq(grid.nx, 1.0 / grid.nx))[:, None, None]
    j2 = np.abs(np.fft.fftfreq(grid.ny, 1.0 / grid.ny))[None, :, None]
    j3 = np.arange(grid.nz // 2 + 1)[None, None, :]
    c1, c2, c3 = (grid.dealias_fraction * n / 2.0
                  for n in (grid.nx, grid.ny, grid.nz))
    outer = ((j1 >= edge * c1) | (j2 >= edge * c2) | (j3 >= edge * c3)) \
        & grid.dealias_mask
    e = grid.parseval_w * np.abs(coeff) ** 2
    total = float(e.sum())
    if total == 0.0:
        return 0.0
    return float(e[outer].sum() / total)


def band_exceeded(state, cfg):
    """True when a mode carrying more than band_energy_tol of the density
    energy has tilted beyond the dealias band edge."""
    return not state.frame(cfg).within_band(state.grid, state.n,
                                            cfg.band_energy_tol)


def detect_blowup(state, cfg):
    """Classify the state: blowup when the criterion functional exceeds
    blowup_factor times its initial value while the growth is resolved;
    unresolved when the spectral tail says otherwise.

    Positivity undershoot is monitored in the diagnostics records but is
    not a status trigger: the trigonometric interpolant of a steep,
    still-resolved peak undershoots well past any tiny tolerance long
    before the representation actually degrades."""
    if not np.isfinite(state.n).all():
        return "unresolved"
    tail = tail_fraction(state.grid, state.n)
    if tail >= cfg.tail_max or band_exceeded(state, cfg):
        return "unresolved"
    value = detect_functional(state, cfg)
    if not math.isfinite(value):
        return "unresolved"
    if value > cfg.blowup_factor * max(state.detect0, 1e-300):
        return "blowup"
    return "running"


# --------------------------------------------------------------------------
# run loop
# --------------------------------------------------------------------------

def run_simulation(cfg, record_hook=None):
    """Run to t_max, blow-up or resolution loss.  Returns (records, state);
    records are diagnostics.NormRecord instances with the energy ledger
    applied (one per diag_stride steps plus the first and last)."""
    from . import diagnostics

    state = init_state(cfg)
    ledger = diagnostics.EnergyLedger(a_flow=cfg.a_flow, a_weight=cfg.a_weight,
                                      eps0=cfg.eps0)
    records = []

    def emit():
        rec = diagnostics.instantaneous_norms(state, cfg)
        diagnostics.update_ledger(ledger, rec, cfg)
        rec.energies = ledger.energy_values(cfg)
        rec.status = state.status
        records.append(rec)
        if record_hook is not None:
            record_hook(rec, state)

    emit()
    if cfg.t_max <= 0.0:
        state.status = "finished"
        records[-1].status = "finished"
        return records, state

    while state.status == "running" and state.t < cfg.t_max - 1e-12:
        dt = cfg.dt if cfg.dt > 0 else auto_dt(state, cfg)
        dt = min(dt, cfl_dt(state, cfg), cfg.t_max - state.t)
        for _ in range(12):
            try:
                step(state, dt, cfg)
                break
            except StepRejected:
                dt *= 0.5
        else:
            state.status = "unresolved"
            break
        if state.steps % cfg.diag_stride == 0:
            verdict = detect_blowup(state, cfg)
            if verdict != "running":
                state.status = verdict
            emit()
            if state.status != "running":
                return records, state

    if state.status == "running":
        state.status = "finished"
    if records and records[-1].t < state.t - 1e-12:
        emit()
    records[-1].status = state.status
    return records, state
