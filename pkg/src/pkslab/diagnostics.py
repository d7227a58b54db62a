"""Mode-resolved norms, the weighted space-time energy ledger, and the
dissipation-rate fit.

All L2 norms come from Parseval (with the sheared gradient where a
derivative is physical); |.|_inf is a grid max; time integrals are
trapezoidal on the diagnostics stride.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InsufficientDataError, NonPositiveDataError, PkslabError
from .solver import chemoattractant, split_frame_fields, tail_fraction


@dataclass
class NormRecord:
    t: float = 0.0
    mass: float = 0.0
    n_linf: float = 0.0
    n00_l2: float = 0.0
    n0neq_l2: float = 0.0
    dz_n0neq_l2: float = 0.0
    dzz_n0neq_l2: float = 0.0
    nneq_l2: float = 0.0
    dxx_nneq_l2: float = 0.0
    dzz_nneq_l2: float = 0.0
    dxdz_nneq_l2: float = 0.0
    n_l2: float = 0.0
    u10_h2: float = 0.0
    u20_h2: float = 0.0
    u30_h2: float = 0.0
    w2neq_l2: float = 0.0
    dx_w2neq_l2: float = 0.0
    dy_w2neq_l2: float = 0.0
    dz_w2neq_l2: float = 0.0
    lap_u2neq_l2: float = 0.0
    dxx_u2neq_l2: float = 0.0
    dxx_u3neq_l2: float = 0.0
    div_res: float = 0.0
    tail_frac: float = 0.0
    edge_density: float = 0.0
    n_min: float = 0.0
    status: str = "running"
    energies: dict = field(default_factory=dict)
    ledger_inputs: dict = field(default_factory=dict, repr=False)


def _wl2(grid, coeff, weight, mask=None):
    """L2 norm of the field with coefficients weight * coeff (optionally
    restricted to a mode-class mask)."""
    mag = np.abs(coeff) ** 2
    if weight is not None:
        mag = mag * np.abs(weight) ** 2
    if mask is not None:
        mag = np.where(mask, mag, 0.0)
    return float(np.sqrt(grid.volume * np.sum(grid.parseval_w * mag)))


def _wl2_2d(grid, coeff2d, weight=None):
    mag = np.abs(coeff2d) ** 2
    if weight is not None:
        mag = mag * np.abs(weight) ** 2
    return float(np.sqrt(grid.volume * np.sum(grid.parseval_w[0] * mag)))


def _h_weights_2d(grid, order):
    k2 = grid.k2[0]
    k3 = grid.k3[0]
    ksq = k2**2 + k3**2
    return np.sqrt(sum(ksq**j for j in range(order + 1)))


def instantaneous_norms(state, cfg):
    """All diagnostic norms from one snapshot."""
    grid = state.grid
    tsh = state.t_shear(cfg)
    k1, k2e, k3 = grid.k1, grid.k2_eff(tsh), grid.k3
    ksq_e = k1**2 + k2e**2 + k3**2
    kabs = np.sqrt(ksq_e)

    m_zero = np.broadcast_to(grid.k1 == 0, grid.spectral_shape)
    m_neq = ~m_zero
    m_00 = m_zero & np.broadcast_to(grid.k3 == 0, grid.spectral_shape)
    m_0neq = m_zero & ~np.broadcast_to(grid.k3 == 0, grid.spectral_shape)

    n = state.n
    rec = NormRecord(t=state.t)
    rec.mass = grid.integral(n)
    n_phys = grid.to_physical(n)
    rec.n_linf = float(np.max(np.abs(n_phys)))
    rec.n_min = float(np.min(n_phys))
    rec.edge_density = float(np.max(np.abs(n_phys[:, [0, 1, -2, -1], :])))
    rec.tail_frac = tail_fraction(grid, n)

    rec.n_l2 = _wl2(grid, n, None)
    rec.n00_l2 = _wl2(grid, n, None, m_00)
    rec.n0neq_l2 = _wl2(grid, n, None, m_0neq)
    rec.dz_n0neq_l2 = _wl2(grid, n, k3, m_0neq)
    rec.dzz_n0neq_l2 = _wl2(grid, n, k3**2, m_0neq)
    rec.nneq_l2 = _wl2(grid, n, None, m_neq)
    rec.dxx_nneq_l2 = _wl2(grid, n, k1**2, m_neq)
    rec.dzz_nneq_l2 = _wl2(grid, n, k3**2, m_neq)
    rec.dxdz_nneq_l2 = _wl2(grid, n, np.abs(k1) * k3, m_neq)

    h2w = np.sqrt(1.0 + ksq_e + ksq_e**2)
    u = state.u
    rec.u10_h2 = _wl2(grid, u[0], h2w, m_zero)
    rec.u20_h2 = _wl2(grid, u[1], h2w, m_zero)
    rec.u30_h2 = _wl2(grid, u[2], h2w, m_zero)

    w2 = 1j * k3 * u[0] - 1j * k1 * u[2]
    rec.w2neq_l2 = _wl2(grid, w2, None, m_neq)
    rec.dx_w2neq_l2 = _wl2(grid, w2, k1, m_neq)
    rec.dy_w2neq_l2 = _wl2(grid, w2, k2e, m_neq)
    rec.dz_w2neq_l2 = _wl2(grid, w2, k3, m_neq)
    rec.lap_u2neq_l2 = _wl2(grid, u[1], ksq_e, m_neq)
    rec.dxx_u2neq_l2 = _wl2(grid, u[1], k1**2, m_neq)
    rec.dxx_u3neq_l2 = _wl2(grid, u[2], k1**2, m_neq)

    div = 1j * (k1 * u[0] + k2e * u[1] + k3 * u[2])
    grad = math.sqrt(sum(_wl2(grid, a, kabs) ** 2 for a in u))
    rec.div_res = _wl2(grid, div, None) / max(grad, 1e-300)

    # ---- ledger inputs -------------------------------------------------
    li = {}
    inv_kabs = np.where(kabs == 0.0, 1.0, kabs)
    for name, coeff, wgt in (
            ("dxx_nneq", n, k1**2),
            ("dzz_nneq", n, k3**2),
            ("dxdz_nneq", n, np.abs(k1) * k3),
            ("lap_u2neq", u[1], ksq_e),
            ("dx_w2neq", w2, k1),
            ("dy_w2neq", w2, k2e),
            ("dz_w2neq", w2, k3),
            ("dxx_u2neq", u[1], k1**2),
            ("dxx_u3neq", u[2], k1**2)):
        li[name] = (_wl2(grid, coeff, wgt, m_neq),
                    _wl2(grid, coeff, np.abs(wgt) * kabs, m_neq),
                    _wl2(grid, coeff, np.abs(wgt) * np.abs(k1) / inv_kabs,
                         m_neq))
    for name, coeff, wgt, mask in (
            ("dzz_n0neq", n, k3**2, m_0neq),
            ("u20", u[1], None, m_zero),
            ("u30", u[2], None, m_zero),
            ("grad_u20", u[1], kabs, m_zero),
            ("grad_u30", u[2], kabs, m_zero),
            ("lap_u20", u[1], ksq_e, m_zero),
            ("lap_u30", u[2], ksq_e, m_zero)):
        li[name] = (_wl2(grid, coeff, wgt, mask),
                    _wl2(grid, coeff,
                         kabs if wgt is None else np.abs(wgt) * kabs, mask))
    li["n00"] = rec.n00_l2
    li["dz_n0neq"] = rec.dz_n0neq_l2
    c = chemoattractant(grid, n, tsh)
    li["dzgradc_0neq"] = _wl2(grid, c, k3 * kabs, m_0neq)
    li["n_linf"] = rec.n_linf

    if state.split is not None:
        h4 = _h_weights_2d(grid, 4)
        k2_2d, k3_2d = grid.k2[0], grid.k3[0]
        ksq2d = k2_2d**2 + k3_2d**2
        li["uhat_h4"] = _wl2_2d(grid, state.split.uhat, h4)
        li["grad_uhat_h4"] = _wl2_2d(grid, state.split.uhat,
                                     h4 * np.sqrt(ksq2d))
        li["dt_uhat"] = _wl2_2d(grid, state.split.duhat_dt)
        li["lap_dt_uhat"] = _wl2_2d(grid, state.split.duhat_dt, ksq2d)
        li["util"] = (_wl2_2d(grid, state.split.util),
                      _wl2_2d(grid, state.split.util, np.sqrt(ksq2d)))
        li["lap_util"] = (_wl2_2d(grid, state.split.util, ksq2d),
                          _wl2_2d(grid, state.split.util,
                                  ksq2d * np.sqrt(ksq2d)))
        li["u10_split_l2"] = _wl2_2d(grid, state.split.uhat
                                     + state.split.util)
    rec.ledger_inputs = li
    return rec


def w_field(state, cfg):
    """W = u2_neq + kappa * u3_neq with kappa from the lift-up split."""
    from .spectral import SpectralScalar
    grid = state.grid
    if state.split is None:
        raise PkslabError("W requires the lift-up split (liftup_split on)")
    kappa, _ = split_frame_fields(grid, state.split, cfg.a_flow)
    u2n = state.u[1].copy()
    u2n[0] = 0.0
    u3n = state.u[2].copy()
    u3n[0] = 0.0
    u3n_p = grid.to_physical(u3n)
    w = u2n + grid.to_spectral(kappa[None, :, :] * u3n_p)
    if cfg.dealias_on:
        w[~grid.dealias_mask] = 0.0
    return SpectralScalar(grid, w), kappa


# --------------------------------------------------------------------------
# energy ledger
# --------------------------------------------------------------------------

# fields entering the X_a norms with base weight, and with weight 3a/2
_XA_FIELDS = ("dxx_nneq", "dzz_nneq", "lap_u2neq", "dx_w2neq",
              "dy_w2neq", "dz_w2neq")
_X32_FIELDS = ("dxx_nneq", "dxdz_nneq", "dxx_u2neq", "dxx_u3neq")
_Y0_FIELDS = ("dzz_n0neq", "u20", "u30", "grad_u20", "grad_u30",
              "lap_u20", "lap_u30", "util", "lap_util")


class EnergyLedger:
    """Running suprema and trapezoidal time integrals for the weighted
    space-time norms and the five energy functionals."""

    def __init__(self, a_flow=1000.0, a_weight=0.1, eps0=0.4):
        self.a_flow = a_flow
        self.a_weight = a_weight
        self.eps0 = eps0
        self.rate = 0.0 if math.isinf(a_flow) else \
            a_weight * a_flow ** (-1.0 / 3.0)
        self.t_last = None
        self._prev = {}
        self.sup = {}
        self.integ = {}

    # accumulator helpers ------------------------------------------------

    def _bump_sup(self, key, value):
        if value > self.sup.get(key, 0.0):
            self.sup[key] = value

    def _add_integral(self, key, value_sq):
        if self.t_last is not None and key in self._prev:
            dt = self._t - self.t_last
            self.integ[key] = self.integ.get(key, 0.0) \
                + 0.5 * dt * (self._prev[key] + value_sq)
        self._prev[key] = value_sq

    def update(self, rec, cfg=None):
        """Fold one record into the accumulators (time must not go back)."""
        if self.t_last is not None and rec.t < self.t_last - 1e-14:
            raise PkslabError(
                f"ledger records must be time ordered: {rec.t} < {self.t_last}")
        li = rec.ledger_inputs
        self._t = rec.t
        ew = {b: math.exp(b * self.rate * rec.t) for b in (1.0, 1.5)}

        for name in set(_XA_FIELDS) | set(_X32_FIELDS):
            if name not in li:
                continue
            s, g, p = li[name]
            for b, tag in ((1.0, "a"), (1.5, "a32")):
                if (tag == "a" and name not in _XA_FIELDS) or \
                   (tag == "a32" and name not in _X32_FIELDS):
                    continue
                w = ew[b]
                self._bump_sup(f"X:{tag}:{name}:sup", w * s)
                self._add_integral(f"X:{tag}:{name}:l2", (w * s) ** 2)
                self._add_integral(f"X:{tag}:{name}:grad", (w * g) ** 2)
                self._add_integral(f"X:{tag}:{name}:gdix", (w * p) ** 2)

        a = self.a_flow
        m_u3 = 1.0
        if not math.isinf(a):
            m_u3 = min(math.sqrt(a ** (-2.0 / 3.0) + rec.t / a), 1.0)
        for name in _Y0_FIELDS:
            if name not in li:
                continue
            s, g = li[name]
            if name == "lap_u30":
                s, g = m_u3 * s, m_u3 * g
            self._bump_sup(f"Y:{name}:sup", s)
            self._add_integral(f"Y:{name}:grad", g**2)

        self._bump_sup("sup:n00", li["n00"])
        self._bump_sup("sup:dzgradc_0neq", li["dzgradc_0neq"])
        self._add_integral("int:dz_n0neq", li["dz_n0neq"] ** 2)
        self._bump_sup("sup:n_linf", li["n_linf"])
        for key in ("uhat_h4", "dt_uhat", "lap_dt_uhat"):
            if key in li:
                self._bump_sup(f"sup:{key}", li[key])
        if "grad_uhat_h4" in li:
            self._add_integral("int:grad_uhat_h4", li["grad_uhat_h4"] ** 2)
        self.t_last = rec.t

    # norm assembly --------------------------------------------------------

    def xa_norm(self, name, tag="a"):
        s = self.sup.get(f"X:{tag}:{name}:sup", 0.0)
        l2 = self.integ.get(f"X:{tag}:{name}:l2", 0.0)
        gr = self.integ.get(f"X:{tag}:{name}:grad", 0.0)
        gx = self.integ.get(f"X:{tag}:{name}:gdix", 0.0)
        if math.isinf(self.a_flow):
            return math.sqrt(s**2 + gx)
        return math.sqrt(s**2 + gx + l2 / self.a_flow ** (1.0 / 3.0)
                         + gr / self.a_flow)

    def y0_norm(self, name):
        s = self.sup.get(f"Y:{name}:sup", 0.0)
        gr = self.integ.get(f"Y:{name}:grad", 0.0)
        if math.isinf(self.a_flow):
            return s
        return math.sqrt(s**2 + gr / self.a_flow)

    def energy_values(self, cfg=None):
        """E1..E5 from the current accumulators."""
        a = self.a_flow
        eps = min(self.eps0, 4.0 / 9.0)
        if math.isinf(a):
            ae = a13e = a34e = ahalf = 1.0
            a1 = a32 = 0.0
        else:
            ae = a**eps
            a13e = a ** (eps - 1.0 / 3.0)
            a34e = a ** (0.75 * eps)
            ahalf = a ** (eps - 0.5)
            a1 = 1.0 / a
            a32 = a ** (-1.5)
        e11 = (self.sup.get("sup:n00", 0.0)
               + ae * self.sup.get("sup:dzgradc_0neq", 0.0)
               + ahalf * math.sqrt(self.integ.get("int:dz_n0neq", 0.0))
               + self.y0_norm("dzz_n0neq"))
        e12 = ae * sum(self.y0_norm(k) for k in
                       ("u20", "u30", "grad_u20", "grad_u30",
                        "lap_u20", "lap_u30"))
        e13 = (ae * (a1 * self.sup.get("sup:uhat_h4", 0.0)
                     + a32 * math.sqrt(self.integ.get("int:grad_uhat_h4", 0.0))
                     + self.sup.get("sup:dt_uhat", 0.0)
                     + self.sup.get("sup:lap_dt_uhat", 0.0))
               + a13e * (self.y0_norm("util") + self.y0_norm("lap_util")))
        if math.isinf(a):
            a_m13_34e = 1.0
        else:
            a_m13_34e = a ** (-1.0 / 3.0 + 0.75 * eps)
        e2 = (self.xa_norm("dxx_nneq") + self.xa_norm("dzz_nneq")
              + a34e * (self.xa_norm("lap_u2neq") + self.xa_norm("dx_w2neq"))
              + a_m13_34e * (self.xa_norm("dy_w2neq")
                             + self.xa_norm("dz_w2neq")))
        e3 = self.sup.get("sup:n_linf", 0.0)
        e4 = self.xa_norm("dxx_nneq", "a32") + self.xa_norm("dxdz_nneq", "a32")
        e5 = a34e * (self.xa_norm("dxx_u2neq", "a32")
                     + self.xa_norm("dxx_u3neq", "a32"))
        return {"E1": e11 + e12 + e13, "E1_1": e11, "E1_2": e12, "E1_3": e13,
                "E2": e2, "E3": e3, "E4": e4, "E5": e5}


def update_ledger(ledger, record, cfg=None):
    """Fold a record into the ledger (time-ordered)."""
    ledger.update(record, cfg)
    return ledger


# --------------------------------------------------------------------------
# rate fit
# --------------------------------------------------------------------------

def fit_dissipation_rate(ts, values, t_min=1.0):
    """Least-squares decay rate of log(values) vs t past the transient.

    Returns (rate, r_squared); rate > 0 means decay.
    """
    ts = np.asarray(ts, dtype=float)
    values = np.asarray(values, dtype=float)
    keep = ts >= t_min
    ts, values = ts[keep], values[keep]
    if len(ts) < 10:
        raise InsufficientDataError(
            f"need at least 10 samples past t = {t_min}, have {len(ts)}")
    if np.any(values <= 0.0):
        raise NonPositiveDataError("rate fit needs positive norm values")
    logv = np.log(values)
    coeffs = np.polyfit(ts, logv, 1)
    pred = np.polyval(coeffs, ts)
    ss_res = float(np.sum((logv - pred) ** 2))
    ss_tot = float(np.sum((logv - logv.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return -float(coeffs[0]), r2
