"""Acceptance gate: one test per criterion, each printing a pass/fail
line.  The two experiment-scale criteria (rate scaling, blow-up
contrast) share module-scoped runs; expect ~10 minutes total.

Run with:  pytest tests/test_acceptance.py -v -s
"""

import math

import numpy as np
import pytest
from scipy.integrate import quad

from pkslab import verify
from pkslab.diagnostics import fit_dissipation_rate
from pkslab.odemodel import OdeParams, integrate, perturbed_bound
from pkslab.solver import (SimConfig, SimState, run_simulation,
                           shear_band_horizon, step)
from pkslab.spectral import SpectralScalar, helmholtz_solve, inv_laplacian, \
    laplacian, make_grid
from pkslab.cli import records_to_csv


def report(name, ok, detail=""):
    print(f"\nACCEPT {'pass' if ok else 'FAIL'} - {name}"
          + (f" ({detail})" if detail else ""))
    assert ok, f"{name}: {detail}"


def random_coeffs(g, seed, decay=1.5):
    rng = np.random.default_rng(seed)
    c = (rng.standard_normal(g.spectral_shape)
         + 1j * rng.standard_normal(g.spectral_shape)) \
        * (1.0 + g.ksq) ** (-decay)
    c = g.hermitianize(c)
    c[~g.dealias_mask] = 0.0
    return c


# --------------------------------------------------------------------------
# shared experiment runs
# --------------------------------------------------------------------------

RATE_AS = (125.0, 1000.0, 8000.0)


@pytest.fixture(scope="module")
def rate_runs():
    out = {}
    for a_flow in RATE_AS:
        cfg = SimConfig(nx=48, ny=96, nz=48, ly=1.0, a_flow=a_flow,
                        mass=1.0, width=0.5, init_kind="bump_plus_xmode",
                        xamp=0.5, zamp=0.0, u_amp=0.0,
                        t_max=1.3 * a_flow ** (1.0 / 3.0), diag_stride=4,
                        liftup_split=True, seed=12)
        records, state = run_simulation(cfg)
        out[a_flow] = (cfg, records, state)
    return out


@pytest.fixture(scope="module")
def contrast_runs():
    datum = dict(nx=48, ny=96, nz=48, ly=1.0, mass=300.0, width=0.35,
                 init_kind="bump_plus_xmode", xamp=0.9, zamp=0.9, seed=2)
    blow_cfg = SimConfig(a_flow=1.0, couette=False, liftup_split=False,
                         t_max=1.0, diag_stride=1, **datum)
    blow = run_simulation(blow_cfg)
    horizon = shear_band_horizon(blow[1].grid)
    supp_cfg = SimConfig(a_flow=1e4, couette=True, liftup_split=True,
                         t_max=3.0 * horizon, diag_stride=5, **datum)
    supp = run_simulation(supp_cfg)
    return {"blow": (blow_cfg, *blow), "supp": (supp_cfg, *supp),
            "horizon": horizon}


# --------------------------------------------------------------------------
# criteria
# --------------------------------------------------------------------------

def test_helmholtz_poisson_exactness():
    g = make_grid(16, 16, 16, ly=1.0)
    x = g.x[:, None, None] * np.ones((1, 16, 16))
    z = g.z[None, None, :] * np.ones((16, 16, 1))
    ok = True
    details = []
    # eigenmode relations to 1e-12 relative
    for phys, expect_h, expect_p in (
            (np.cos(x), np.cos(x) / 2.0, -np.cos(x)),
            (np.cos(2 * z), np.cos(2 * z) / 5.0, -np.cos(2 * z) / 4.0)):
        f = SpectralScalar.from_physical(g, phys)
        h_err = np.max(np.abs(helmholtz_solve(f).to_physical() - expect_h))
        p_err = np.max(np.abs(inv_laplacian(f).to_physical() - expect_p))
        ok &= h_err < 1e-12 and p_err < 1e-12
        details.append(f"{h_err:.1e}/{p_err:.1e}")
    # random-field residuals <= 1e-10 relative
    for seed in range(10):
        n = SpectralScalar(g, random_coeffs(g, seed))
        c = helmholtz_solve(n)
        res_h = (laplacian(c) + n - c).l2() / n.l2()
        n.data[0, 0, 0] = 0.0
        sol = inv_laplacian(n)
        res_p = (laplacian(sol) - n).l2() / n.l2()
        ok &= res_h <= 1e-10 and res_p <= 1e-10
    report("helmholtz/poisson exactness", ok, ",".join(details))


def test_elliptic_identity_suite():
    reports = verify.check_elliptic_identities(
        verify.EnsembleSpec(count=100, seed=501))
    ok = all(r.passed for r in reports)
    worst = max(r.worst_ratio for r in reports
                if r.name == "elliptic_energy_identities")
    report("elliptic identity suite", ok, f"worst equality dev {worst:.2e}")


def test_sharp_constant_inequalities():
    gn = verify.check_gn_1d(count=100, seed=601)
    nash = verify.check_nash_1d(count=100, seed=602)
    inv_dev = verify.nash_ratio_invariance(seed=603)
    ok = gn.passed and nash.passed and inv_dev <= 1e-10
    report("sharp-constant inequalities (interpolation + mass-gradient)",
           ok, f"gn {gn.worst_ratio:.4f}, nash {nash.worst_ratio:.4f}, "
           f"invariance dev {inv_dev:.1e}")


def test_velocity_parseval_identity():
    reports = verify.check_velocity_identities(
        verify.EnsembleSpec(count=100, seed=604,
                            field_class="divergence_free"))
    ok = all(r.passed for r in reports)
    report("velocity Parseval identity", ok,
           f"worst dev {max(r.worst_ratio for r in reports):.2e}")


def test_kernel_suite():
    # closed form vs quadrature
    rng = np.random.default_rng(701)
    quad_ok = True
    for _ in range(30):
        k = (float(rng.integers(-6, 7)), float(rng.uniform(-8, 8)),
             float(rng.integers(-6, 7)))
        t = float(rng.uniform(0.1, 40.0))
        ref, _ = quad(lambda s: k[0]**2 + (k[1] - s * k[0])**2 + k[2]**2,
                      0.0, t, limit=200)
        quad_ok &= abs(verify.kernel_r1(k, t) - ref) <= 1e-10 * abs(ref)
    decay = verify.kernel_decay_suite(n_modes=50, seed=702)
    report("sheared heat-kernel suite", quad_ok and decay.passed,
           f"envelope worst {decay.worst_ratio:.3f}")


def test_zero_mode_ode_bounds():
    rng = np.random.default_rng(801)
    ok = True
    worst_excess = 0.0
    for _ in range(200):
        m1 = rng.uniform(0.3, 2.0)
        a = rng.uniform(1.0, 100.0)
        p = OdeParams(a=a, m1=m1)
        cap = 27.0 * m1**4 / (32.0 * np.pi**2)
        h0 = rng.uniform(0.0, 3.0 * cap)
        traj = integrate(h0, p, 30.0 * a, n_samples=200)
        excess = traj.sup_h - max(h0, cap)
        worst_excess = max(worst_excess, excess)
        ok &= excess <= 1e-9
    # forced trajectories against the perturbed closed-form bound
    for trial in range(100):
        m1 = rng.uniform(0.5, 1.5)
        eps1 = rng.uniform(0.02, 0.3)
        ghat = rng.uniform(0.0, eps1)
        p = OdeParams(a=1.0, m1=m1, eps1=eps1, ghat_bound=ghat)
        h0 = rng.uniform(0.0, 2.0 * 27.0 * m1**4 / (32.0 * np.pi**2))
        gamma = rng.uniform(0.05, 2.0)
        t_max = 400.0

        def gdot(t, gamma=gamma, ghat=ghat, t_max=t_max):
            norm = (1.0 - math.exp(-gamma * t_max)) / gamma
            return ghat * math.exp(-gamma * t) / norm

        traj = integrate(h0, p, t_max, forcing=gdot)
        ok &= traj.sup_h <= perturbed_bound(h0, p) + 1e-9
    report("zero-mode ODE sup bounds (200-pt grid + 100 forced)", ok,
           f"worst unforced excess {worst_excess:.2e}")


def test_linear_solver_equivalence():
    cfg = SimConfig(nx=16, ny=32, nz=16, ly=2.0, a_flow=40.0,
                    nonlinear=False, liftup_split=False, mass=1.0,
                    width=0.5)
    grid = cfg.make_grid()
    rng = np.random.default_rng(901)
    worst = 0.0
    for _ in range(20):
        i1 = int(rng.integers(1, 5))
        i2 = int(rng.integers(0, 9))
        i3 = int(rng.integers(0, 5))
        amp = complex(rng.standard_normal(), rng.standard_normal())
        st = SimState(grid=grid, t=0.0, n=grid.zero_coeffs(),
                      u=[grid.zero_coeffs() for _ in range(3)])
        st.detect0, st.umax = 1.0, 0.0
        st.n[i1, i2, i3] = amp
        for _ in range(10):
            step(st, 0.04, cfg)
        k1 = grid.k1[i1, 0, 0]
        k2 = grid.k2[0, i2, 0]
        k3 = grid.k3[0, 0, i3]
        T = st.t
        r1 = (k1**2 + k3**2) * T + (k2**3 - (k2 - T * k1)**3) / (3.0 * k1)
        expected = amp * math.exp(-r1 / cfg.a_flow)
        worst = max(worst, abs(st.n[i1, i2, i3] - expected) / abs(expected))
    report("linear integrating-factor equivalence (20 modes, 10 steps)",
           worst <= 1e-9, f"worst rel err {worst:.2e}")


def test_enhanced_dissipation_scaling(rate_runs):
    lams = []
    ok = True
    details = []
    for a_flow in RATE_AS:
        cfg, records, state = rate_runs[a_flow]
        ok &= state.status == "finished"
        ts = [r.t for r in records]
        vals = [r.nneq_l2 for r in records]
        lam, r2 = fit_dissipation_rate(ts, vals,
                                       t_min=0.5 * a_flow ** (1.0 / 3.0))
        lams.append(lam)
        details.append(f"A={a_flow:.0f}: lam={lam:.4f} r2={r2:.3f}")
    slope = float(np.polyfit(np.log(RATE_AS), np.log(lams), 1)[0])
    ok &= -0.45 <= slope <= -0.20
    # pairwise octave check: lam(8A)/lam(A) near 8^(-1/3) = 0.5
    for lo, hi in zip(lams, lams[1:]):
        ok &= abs(hi / lo - 0.5) <= 0.15
    report("enhanced-dissipation rate scaling", ok,
           f"slope {slope:+.3f}; ratios "
           f"{[round(h / l, 3) for l, h in zip(lams, lams[1:])]}; "
           + "; ".join(details))


def test_suppression_blowup_contrast(contrast_runs):
    bcfg, brecs, bstate = contrast_runs["blow"]
    scfg, srecs, sstate = contrast_runs["supp"]
    ok = bstate.status == "blowup"
    # the detector fired while resolved
    ok &= brecs[-1].tail_frac < bcfg.tail_max
    ok &= sstate.status == "finished"
    ok &= sstate.t >= 3.0 * contrast_runs["horizon"] - 1e-9
    ninf0 = srecs[0].n_linf
    ninf_max = max(r.n_linf for r in srecs)
    ok &= ninf_max <= 2.0 * ninf0
    report("suppression/blow-up contrast", ok,
           f"blowup at t={bstate.t:.3f} tail={brecs[-1].tail_frac:.3f}; "
           f"suppressed ninf ratio {ninf_max / ninf0:.3f} over "
           f"t={sstate.t:.2f}")


def test_conservation_consistency(rate_runs, contrast_runs):
    ok = True
    worst = {"mass": 0.0, "div": 0.0, "pyth": 0.0}
    all_runs = [rate_runs[a] for a in RATE_AS] \
        + [contrast_runs["blow"], contrast_runs["supp"]]
    for cfg, records, state in all_runs:
        mass0 = records[0].mass
        for rec in records:
            worst["mass"] = max(worst["mass"],
                                abs(rec.mass - mass0) / abs(mass0))
            worst["div"] = max(worst["div"], rec.div_res)
            if rec.n_l2 > 0:
                parts = rec.n00_l2**2 + rec.n0neq_l2**2 + rec.nneq_l2**2
                worst["pyth"] = max(worst["pyth"],
                                    abs(parts - rec.n_l2**2) / rec.n_l2**2)
    ok &= worst["mass"] <= 1e-8
    ok &= worst["div"] <= 1e-10
    ok &= worst["pyth"] <= 1e-12
    # determinism: byte-identical CSV under a fixed seed
    cfg = SimConfig(nx=16, ny=48, nz=16, ly=2.0, a_flow=200.0, mass=2.0,
                    width=0.7, init_kind="random_bandlimited", u_amp=0.2,
                    t_max=0.6, diag_stride=2, seed=7)
    csv_a = records_to_csv(run_simulation(cfg)[0])
    csv_b = records_to_csv(run_simulation(cfg)[0])
    ok &= csv_a == csv_b
    report("conservation / consistency / determinism", ok,
           f"mass {worst['mass']:.1e}, div {worst['div']:.1e}, "
           f"pythagoras {worst['pyth']:.1e}, csv match {csv_a == csv_b}")
