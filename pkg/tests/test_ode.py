import math

import numpy as np
import pytest

from pkslab.errors import PkslabError
from pkslab.odemodel import (MASS_THRESHOLD, OdeParams, equilibrium,
                             integrate, mass_threshold_check, ode_rhs,
                             perturbed_bound, phase_portrait_grid)

SQRT2 = math.sqrt(2.0)


class TestRhs:
    def test_zero_at_origin(self):
        assert ode_rhs(0.0, OdeParams()) == 0.0

    def test_zero_at_equilibrium(self):
        p = OdeParams(a=3.0, m1=1.3, c1=1.1)
        h_star, _, _ = equilibrium(p)
        assert abs(ode_rhs(h_star, p)) < 1e-14

    def test_cubic_value_oracle(self):
        # direct polynomial evaluation at h*/2
        p = OdeParams(a=1.0, m1=1.0, c1=SQRT2)
        h_star, _, _ = equilibrium(p)
        h = h_star / 2.0
        alpha = 4.0 * SQRT2 * np.pi**2 * (2.0 * SQRT2 - p.c1) / 27.0
        beta = 1.0 / (2.0 * SQRT2 * p.c1)
        expected = -2.0 * (alpha * h**3 - beta * h**2)
        assert ode_rhs(h, p) == pytest.approx(expected, rel=1e-14)

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            ode_rhs(-0.1, OdeParams())


class TestEquilibrium:
    def test_closed_form_at_sqrt2(self):
        h_star, _, stable = equilibrium(OdeParams(m1=1.0, c1=SQRT2))
        assert h_star == pytest.approx(27.0 / (32.0 * np.pi**2), rel=1e-14)
        assert stable

    def test_m1_zero_degenerate(self):
        h_star, h_stag, stable = equilibrium(OdeParams(m1=0.0))
        assert h_star == 0.0 and not stable

    def test_c1_sweep_minimum_oracle(self):
        # h* is minimized where (2*sqrt(2) - c) c is maximized: c = sqrt(2)
        cs = np.linspace(0.05, 2.0 * SQRT2 - 0.05, 801)
        vals = [equilibrium(OdeParams(m1=1.0, c1=c))[0] for c in cs]
        assert cs[int(np.argmin(vals))] == pytest.approx(SQRT2, abs=0.01)

    def test_quartic_homogeneity(self):
        base = equilibrium(OdeParams(m1=1.0))[0]
        for lam in (0.3, 2.0, 5.0):
            scaled = equilibrium(OdeParams(m1=lam))[0]
            assert scaled == pytest.approx(lam**4 * base, rel=1e-12)

    def test_stability_slope(self):
        # dH/dh < 0 at h* for any m1 > 0
        for m1 in (0.2, 1.0, 3.0):
            p = OdeParams(m1=m1)
            h_star, _, _ = equilibrium(p)
            eps = 1e-7 * h_star
            slope = (ode_rhs(h_star + eps, p) - ode_rhs(h_star - eps, p)) \
                / (2 * eps)
            assert slope < 0


class TestIntegrate:
    def test_constant_at_equilibrium(self):
        p = OdeParams(a=2.0, m1=1.0)
        h_star, _, _ = equilibrium(p)
        traj = integrate(h_star, p, 50.0)
        assert np.max(np.abs(traj.h - h_star)) < 1e-9

    def test_monotone_up_from_below(self):
        p = OdeParams(a=1.0, m1=1.0)
        h_star, _, _ = equilibrium(p)
        traj = integrate(0.3 * h_star, p, 2000.0)
        assert np.all(np.diff(traj.h) >= -1e-9)  # RK45 wiggle near h*
        assert traj.h[-1] == pytest.approx(h_star, abs=1e-6)

    def test_monotone_down_from_above(self):
        p = OdeParams(a=1.0, m1=1.0)
        h_star, _, _ = equilibrium(p)
        traj = integrate(3.0 * h_star, p, 2000.0)
        assert np.all(np.diff(traj.h) <= 1e-9)  # RK45 wiggle near h*
        assert traj.h[-1] == pytest.approx(h_star, abs=1e-6)

    def test_never_crosses_equilibrium(self):
        p = OdeParams(a=1.0, m1=1.0)
        h_star, _, _ = equilibrium(p)
        lo = integrate(0.5 * h_star, p, 3000.0)
        hi = integrate(1.5 * h_star, p, 3000.0)
        assert np.max(lo.h) <= h_star + 1e-9
        assert np.min(hi.h) >= h_star - 1e-9

    def test_negative_h0_rejected(self):
        with pytest.raises(ValueError):
            integrate(-1.0, OdeParams(), 1.0)

    def test_sup_bound_small_grid(self):
        # invariant: sup h <= max(h0, 27 m1^4 / 32 pi^2) + 1e-9 at c1=sqrt2
        rng = np.random.default_rng(12)
        for _ in range(20):
            m1 = rng.uniform(0.3, 2.0)
            a = rng.uniform(1.0, 50.0)
            p = OdeParams(a=a, m1=m1)
            cap = 27.0 * m1**4 / (32.0 * np.pi**2)
            h0 = rng.uniform(0.0, 3.0 * cap)
            traj = integrate(h0, p, 50.0 * a)
            assert traj.sup_h <= max(h0, cap) + 1e-9


class TestPerturbedBound:
    def test_closed_form_bound(self):
        p = OdeParams(m1=1.0, eps1=0.1)
        got = perturbed_bound(0.0, p)
        expect = 27.0 / (32.0 * np.pi**2) * 1.1 + 0.1
        assert got == pytest.approx(expect, rel=1e-14)

    def test_eps1_limit_continuity(self):
        # eps1 -> 0 recovers the unperturbed bound
        h_star = equilibrium(OdeParams(m1=1.0))[0]
        for eps1 in (1e-3, 1e-5, 1e-7):
            p = OdeParams(m1=1.0, eps1=eps1)
            assert perturbed_bound(0.0, p) == pytest.approx(
                h_star, abs=3 * eps1)

    def test_regime_violation_flagged(self):
        p = OdeParams(m1=1.0, eps1=0.05, ghat_bound=0.2)
        with pytest.raises(PkslabError):
            perturbed_bound(0.0, p)

    def test_forced_trajectories_respect_bound(self):
        # forced-ODE oracle: random admissible accumulated forcings
        rng = np.random.default_rng(77)
        for trial in range(100):
            m1 = rng.uniform(0.5, 1.5)
            eps1 = rng.uniform(0.02, 0.3)
            ghat = rng.uniform(0.0, eps1)
            p = OdeParams(a=1.0, m1=m1, eps1=eps1, ghat_bound=ghat)
            cap = 27.0 * m1**4 / (32.0 * np.pi**2)
            h0 = rng.uniform(0.0, 2.0 * cap)
            # forcing rate >= 0 whose integral is exactly ghat
            gamma = rng.uniform(0.05, 2.0)
            t_max = 400.0

            def gdot(t, gamma=gamma, ghat=ghat, t_max=t_max):
                norm = (1.0 - math.exp(-gamma * t_max)) / gamma
                return ghat * math.exp(-gamma * t) / norm

            traj = integrate(h0, p, t_max, forcing=gdot)
            assert traj.sup_h <= perturbed_bound(h0, p) + 1e-9, \
                f"trial {trial}: sup {traj.sup_h} > bound"


class TestPhasePortrait:
    def test_sign_pattern(self):
        p = OdeParams(m1=1.0)
        h_star, _, _ = equilibrium(p)
        data = phase_portrait_grid(p, (0.0, 2.5 * h_star), n_samples=500)
        h = data["h"]
        dh = data["levels"][0.0]
        inner = (h > 1e-6) & (h < h_star * (1 - 1e-6))
        outer = h > h_star * (1 + 1e-6)
        assert np.all(dh[inner] > 0)
        assert np.all(dh[outer] < 0)

    def test_origin_row_zero(self):
        p = OdeParams(m1=1.0)
        data = phase_portrait_grid(p, (0.0, 1.0), n_samples=11)
        assert data["levels"][0.0][0] == 0.0

    def test_equilibrium_marker(self):
        p = OdeParams(m1=0.7)
        data = phase_portrait_grid(p, (0.0, 1.0))
        assert data["h_star"] == pytest.approx(equilibrium(p)[0])

    def test_negative_levels_shift_down(self):
        p = OdeParams(m1=1.0)
        data = phase_portrait_grid(p, (0.0, 0.5), levels=(0.0, -0.01))
        assert np.all(data["levels"][-0.01] < data["levels"][0.0])


class TestMassThreshold:
    def test_value(self):
        assert mass_threshold_check(MASS_THRESHOLD - 0.01) == "below"
        assert mass_threshold_check(MASS_THRESHOLD + 0.01) == "above"

    def test_zero(self):
        assert mass_threshold_check(0.0) == "below"

    def test_l1_equivalence_oracle(self):
        # M < 24 pi^2/5 iff M/(2 pi)^2 < 6/5
        rng = np.random.default_rng(5)
        for mass in rng.uniform(0.0, 100.0, 1000):
            lhs = mass_threshold_check(mass) == "below"
            rhs = mass / (4.0 * np.pi**2) < 6.0 / 5.0
            assert lhs == rhs

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            mass_threshold_check(-1.0)
