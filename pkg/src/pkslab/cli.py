"""Command-line front door: flat dotted-key configs, the simulate /
sweep / verify / kernel / ode subcommands, CSV and JSON serialization.

Config grammar: one `key = value` pair per line, `#` comments; booleans
are true/false, strings may be double-quoted.  Unknown keys are errors.
"""

import argparse
import concurrent.futures
import datetime
import json
import math
import os
import sys

import numpy as np

from . import __version__, diagnostics, odemodel, solver, verify
from .errors import (ConfigError, InsufficientDataError,
                     NonPositiveDataError, UnknownKeyError)

SQRT2 = math.sqrt(2.0)

# key -> (type, default); bool handled explicitly
CONFIG_SCHEMA = {
    "grid.nx": (int, 48),
    "grid.ny": (int, 96),
    "grid.nz": (int, 48),
    "grid.ly": (float, 4.0),
    "grid.dealias": (float, 2.0 / 3.0),
    "phys.a": (float, 1000.0),
    "phys.a_weight": (float, 0.1),
    "phys.eps0": (float, 0.4),
    "phys.couette": (bool, True),
    "time.cfl": (float, 0.4),
    "time.t_max": (float, 1.0),
    "time.dt": (float, 0.0),
    "init.kind": (str, "bump"),
    "init.mass": (float, 10.0),
    "init.width": (float, 1.0),
    "init.u_amp": (float, 0.0),
    "init.xamp": (float, 0.5),
    "init.zamp": (float, 0.0),
    "init.band": (int, 2),
    "init.seed": (int, 1234),
    "run.nonlinear": (bool, True),
    "run.dealias": (bool, True),
    "run.clip_negative": (bool, False),
    "run.liftup_split": (bool, True),
    "run.threads": (int, 0),
    "diag.stride": (int, 10),
    "fit.t_min": (float, 1.0),
    "detect.blowup_factor": (float, 50.0),
    "detect.tail_max": (float, 0.1),
    "detect.band_energy_tol": (float, 1e-6),
    "detect.positivity_tol": (float, 1e-6),
    "ode.m1": (float, 1.0),
    "ode.c1": (float, SQRT2),
    "ode.eps1": (float, 0.1),
    "ode.ghat": (float, 0.0),
    "ode.h0": (float, 0.0),
    "ode.t_max": (float, 5000.0),
    "ode.samples": (int, 400),
    "verify.count": (int, 100),
    "verify.seed": (int, 2024),
    "verify.cap": (float, 100.0),
}

CSV_COLUMNS = ["t", "mass", "n_linf", "n00_l2", "n0neq_l2", "dz_n0neq_l2",
               "dzz_n0neq_l2", "nneq_l2", "dxx_nneq_l2", "dzz_nneq_l2",
               "dxdz_nneq_l2", "u10_h2", "u20_h2", "u30_h2", "w2neq_l2",
               "lap_u2neq_l2", "dxx_u2neq_l2", "dxx_u3neq_l2", "div_res",
               "tail_frac", "E1", "E2", "E3", "E4", "E5", "status"]


def _coerce(key, raw):
    typ, _ = CONFIG_SCHEMA[key]
    if typ is not str and isinstance(raw, typ) \
            and not (typ is int and isinstance(raw, bool)):
        return raw
    text = str(raw).strip()
    if typ is bool:
        low = text.lower()
        if low in ("true", "1", "yes", "on"):
            return True
        if low in ("false", "0", "no", "off"):
            return False
        raise ConfigError(f"{key}: expected a boolean, got {raw!r}")
    if typ is str:
        if len(text) >= 2 and text[0] == text[-1] == '"':
            text = text[1:-1]
        return text
    try:
        value = typ(text) if typ is not int else int(text, 0)
    except ValueError as exc:
        raise ConfigError(f"{key}: expected {typ.__name__}, got {raw!r}") \
            from exc
    return value


def parse_config(path=None, overrides=()):
    """Resolve a config: file (optional) + repeated key=value overrides
    on top of the documented defaults."""
    cfg = {k: d for k, (_, d) in CONFIG_SCHEMA.items()}
    pairs = []
    if path is not None:
        if not os.path.exists(path):
            raise ConfigError(f"config file not found: {path}")
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                body = line.split("#", 1)[0].strip()
                if not body:
                    continue
                if "=" not in body:
                    raise ConfigError(
                        f"{path}:{lineno}: expected 'key = value'")
                key, val = body.split("=", 1)
                pairs.append((key.strip(), val.strip()))
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"--set needs key=value, got {item!r}")
        key, val = item.split("=", 1)
        pairs.append((key.strip(), val.strip()))
    for key, val in pairs:
        if key not in CONFIG_SCHEMA:
            raise UnknownKeyError(key)
        cfg[key] = _coerce(key, val)
    return cfg


def emit_config(cfg):
    """Config dict back to its text form (round-trips through parse)."""
    lines = []
    for key in CONFIG_SCHEMA:
        val = cfg[key]
        if isinstance(val, bool):
            text = "true" if val else "false"
        elif isinstance(val, str):
            text = f'"{val}"'
        else:
            text = repr(val)
        lines.append(f"{key} = {text}")
    return "\n".join(lines) + "\n"


def to_sim_config(cfg):
    threads = cfg["run.threads"] or int(os.environ.get("PKSLAB_THREADS", 1))
    return solver.SimConfig(
        nx=cfg["grid.nx"], ny=cfg["grid.ny"], nz=cfg["grid.nz"],
        ly=cfg["grid.ly"], dealias_fraction=cfg["grid.dealias"],
        a_flow=cfg["phys.a"], a_weight=cfg["phys.a_weight"],
        eps0=cfg["phys.eps0"], couette=cfg["phys.couette"],
        nonlinear=cfg["run.nonlinear"], cfl=cfg["time.cfl"],
        t_max=cfg["time.t_max"], dt=cfg["time.dt"],
        dealias_on=cfg["run.dealias"],
        clip_negative=cfg["run.clip_negative"],
        liftup_split=cfg["run.liftup_split"], init_kind=cfg["init.kind"],
        mass=cfg["init.mass"], width=cfg["init.width"],
        u_amp=cfg["init.u_amp"], xamp=cfg["init.xamp"],
        zamp=cfg["init.zamp"], init_band=cfg["init.band"],
        seed=cfg["init.seed"], diag_stride=cfg["diag.stride"],
        blowup_factor=cfg["detect.blowup_factor"],
        tail_max=cfg["detect.tail_max"],
        band_energy_tol=cfg["detect.band_energy_tol"],
        positivity_tol=cfg["detect.positivity_tol"], threads=threads)


def to_ode_params(cfg, a_flow=None):
    return odemodel.OdeParams(a=cfg["phys.a"] if a_flow is None else a_flow,
                              m1=cfg["ode.m1"], c1=cfg["ode.c1"],
                              eps1=cfg["ode.eps1"],
                              ghat_bound=cfg["ode.ghat"])


# --------------------------------------------------------------------------
# serialization
# --------------------------------------------------------------------------

def _fmt(x):
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def records_to_csv(records):
    lines = [",".join(CSV_COLUMNS)]
    for rec in records:
        e = rec.energies
        row = [rec.t, rec.mass, rec.n_linf, rec.n00_l2, rec.n0neq_l2,
               rec.dz_n0neq_l2, rec.dzz_n0neq_l2, rec.nneq_l2,
               rec.dxx_nneq_l2, rec.dzz_nneq_l2, rec.dxdz_nneq_l2,
               rec.u10_h2, rec.u20_h2, rec.u30_h2, rec.w2neq_l2,
               rec.lap_u2neq_l2, rec.dxx_u2neq_l2, rec.dxx_u3neq_l2,
               rec.div_res, rec.tail_frac,
               e.get("E1", 0.0), e.get("E2", 0.0), e.get("E3", 0.0),
               e.get("E4", 0.0), e.get("E5", 0.0), rec.status]
        lines.append(",".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def run_summary(cfg, records, state, manifest):
    last = records[-1]
    fit = {"rate": None, "r2": None}
    try:
        ts = [r.t for r in records]
        vals = [r.nneq_l2 for r in records]
        rate, r2 = diagnostics.fit_dissipation_rate(ts, vals,
                                                    t_min=cfg["fit.t_min"])
        fit = {"rate": rate, "r2": r2}
    except (InsufficientDataError, NonPositiveDataError):
        pass
    final = {"t": last.t, "status": state.status, "mass": last.mass,
             "mass_drift": abs(last.mass - state.mass0)
             / max(abs(state.mass0), 1e-300),
             "n_linf": last.n_linf, "nneq_l2": last.nneq_l2,
             "div_res": last.div_res, "tail_frac": last.tail_frac,
             "clip_events": state.clip_events, "steps": state.steps}
    final.update({k: v for k, v in last.energies.items()
                  if not k.startswith("E1_")})
    return {"manifest": manifest, "final": final, "fit": fit, "checks": []}


def make_manifest(cfg, seed, status=None):
    return {"config": dict(sorted(cfg.items())), "version": __version__,
            "seed": seed, "started": None, "ended": None,
            "final_status": status}


def _now():
    return datetime.datetime.now(datetime.timezone.utc).isoformat()


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------

def cmd_simulate(args):
    cfg = parse_config(args.config, args.set or [])
    if args.seed is not None:
        cfg["init.seed"] = args.seed
    if args.threads is not None:
        cfg["run.threads"] = args.threads
    sim_cfg = to_sim_config(cfg)
    manifest = make_manifest(cfg, cfg["init.seed"])
    manifest["started"] = _now()
    records, state = solver.run_simulation(sim_cfg)
    manifest["ended"] = _now()
    manifest["final_status"] = state.status

    os.makedirs(args.out_dir, exist_ok=True)
    csv_path = os.path.join(args.out_dir, "run.csv")
    with open(csv_path, "w", encoding="utf-8") as fh:
        fh.write(records_to_csv(records))
    summary = run_summary(cfg, records, state, manifest)
    with open(os.path.join(args.out_dir, "summary.json"), "w",
              encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, default=float)
        fh.write("\n")
    print(f"status={state.status} t={state.t:.6g} steps={state.steps} "
          f"mass_drift={summary['final']['mass_drift']:.3e} -> {csv_path}")
    return 0 if state.status == args.expect else 1


def _sweep_member(packed):
    cfg, param, value, out_dir = packed
    member = dict(cfg)
    member[param] = _coerce(param, value)
    sim_cfg = to_sim_config(member)
    label = f"{param.replace('.', '_')}_{value}"
    mdir = os.path.join(out_dir, label)
    os.makedirs(mdir, exist_ok=True)
    row = {"param": param, "value": member[param], "status": "error",
           "rate": "", "r2": "", "nneq_last": "", "n_linf_last": "",
           "mass_drift": "", "mass_class": ""}
    try:
        records, state = solver.run_simulation(sim_cfg)
        with open(os.path.join(mdir, "run.csv"), "w", encoding="utf-8") as fh:
            fh.write(records_to_csv(records))
        manifest = make_manifest(member, member["init.seed"], state.status)
        summary = run_summary(member, records, state, manifest)
        with open(os.path.join(mdir, "summary.json"), "w",
                  encoding="utf-8") as fh:
            json.dump(summary, fh, indent=2, default=float)
            fh.write("\n")
        row.update(status=state.status,
                   rate=summary["fit"]["rate"] if summary["fit"]["rate"]
                   is not None else "",
                   r2=summary["fit"]["r2"] if summary["fit"]["r2"]
                   is not None else "",
                   nneq_last=records[-1].nneq_l2,
                   n_linf_last=records[-1].n_linf,
                   mass_drift=summary["final"]["mass_drift"])
    except Exception as exc:  # noqa: BLE001 - sweep must not abort
        row["status"] = f"error:{type(exc).__name__}"
    row["mass_class"] = odemodel.mass_threshold_check(
        member["init.mass"]) if member["init.mass"] >= 0 else ""
    return row


def cmd_sweep(args):
    cfg = parse_config(args.config, args.set or [])
    values = [v for v in args.values.split(",") if v]
    if not values:
        raise ConfigError("sweep needs a non-empty comma-separated --values")
    if args.param not in CONFIG_SCHEMA:
        raise UnknownKeyError(args.param)
    os.makedirs(args.out_dir, exist_ok=True)
    jobs = [(cfg, args.param, v, args.out_dir) for v in values]
    workers = args.threads or int(os.environ.get("PKSLAB_THREADS", 1))
    if workers > 1:
        with concurrent.futures.ProcessPoolExecutor(workers) as pool:
            rows = list(pool.map(_sweep_member, jobs))
    else:
        rows = [_sweep_member(j) for j in jobs]
    cols = ["param", "value", "status", "rate", "r2", "nneq_last",
            "n_linf_last", "mass_drift", "mass_class"]
    path = os.path.join(args.out_dir, "sweep.csv")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(cols) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(row[c]) for c in cols) + "\n")
    bad = [r for r in rows if str(r["status"]).startswith("error")]
    print(f"sweep over {args.param}: {len(rows)} members, "
          f"{len(bad)} errors -> {path}")
    return 0 if not bad else 1


def cmd_verify(args):
    cfg = parse_config(args.config, args.set or [])
    names = args.suite or None
    reports = verify.run_suite(names, count=cfg["verify.count"],
                               seed=cfg["verify.seed"],
                               cap=cfg["verify.cap"])
    os.makedirs(args.out_dir, exist_ok=True)
    payload = {"suites": names or list(verify.SUITES),
               "reports": [r.to_dict() for r in reports]}
    path = os.path.join(args.out_dir, "verify.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
    failed = 0
    for r in reports:
        tag = "assert" if r.asserted else "report"
        mark = "pass" if r.passed else "FAIL"
        print(f"{mark} [{tag}] {r.name}: worst={r.worst_ratio:.6g} "
              f"n={r.count}")
        if r.asserted and not r.passed:
            failed += 1
    print(f"-> {path}")
    return 0 if failed == 0 else 1


def cmd_kernel(args):
    k = (args.k[0], args.k[1], args.k[2])
    t_grid = np.linspace(0.0, args.t_max, args.samples)
    rep = verify.kernel_decay_check(k, args.a, args.b, t_grid)
    os.makedirs(args.out_dir, exist_ok=True)
    path = os.path.join(args.out_dir, "kernel.csv")
    r1 = verify.kernel_r1(k, t_grid)
    c_env = rep.notes["c_envelope"]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("t,r1,amplitude,envelope\n")
        for i, t in enumerate(t_grid):
            amp = math.exp(-r1[i] / args.a)
            env = math.exp(c_env) * math.exp(
                -(args.b + 1.0) * args.a ** (-1.0 / 3.0) * t)
            fh.write(f"{_fmt(t)},{_fmt(r1[i])},{_fmt(amp)},{_fmt(env)}\n")
    with open(os.path.join(args.out_dir, "kernel.json"), "w",
              encoding="utf-8") as fh:
        json.dump(rep.to_dict(), fh, indent=2)
        fh.write("\n")
    print(f"kernel k={k} A={args.a} b={args.b}: "
          f"{'pass' if rep.passed else 'FAIL'} -> {path}")
    return 0 if rep.passed else 1


def cmd_ode(args):
    cfg = parse_config(args.config, args.set or [])
    if args.m1 is not None:
        cfg["ode.m1"] = args.m1
    if args.h0 is not None:
        cfg["ode.h0"] = args.h0
    params = to_ode_params(cfg, a_flow=args.a)
    h_star, h_stag, stable = odemodel.equilibrium(params)
    h0 = cfg["ode.h0"]
    if h0 == 0.0 and params.m1 > 0:
        # the origin is a degenerate rest point of the cubic; ride the
        # orbit from just off it, as positive-mass states must
        h0 = h_star / 100.0
    traj = odemodel.integrate(h0, params, cfg["ode.t_max"],
                              n_samples=cfg["ode.samples"])
    os.makedirs(args.out_dir, exist_ok=True)
    tpath = os.path.join(args.out_dir, "ode_trajectory.csv")
    with open(tpath, "w", encoding="utf-8") as fh:
        fh.write("t,h\n")
        for t, h in zip(traj.t, traj.h):
            fh.write(f"{_fmt(t)},{_fmt(h)}\n")
    hi = max(2.5 * h_star, 1e-6)
    portrait = odemodel.phase_portrait_grid(
        params, (0.0, hi), n_samples=400,
        levels=(0.0, *(-(j) * abs(odemodel.ode_rhs(h_star / 2, params)) / 4.0
                       for j in (1, 2, 3))))
    ppath = os.path.join(args.out_dir, "ode_portrait.csv")
    with open(ppath, "w", encoding="utf-8") as fh:
        fh.write("level,h,dhdt\n")
        for lvl, row in portrait["levels"].items():
            for h, d in zip(portrait["h"], row):
                fh.write(f"{_fmt(lvl)},{_fmt(h)},{_fmt(d)}\n")
    summary = {"h_star": h_star, "h_stagnation": h_stag, "stable": stable,
               "sup_h": traj.sup_h, "h0": h0,
               "m1": params.m1, "c1": params.c1,
               "perturbed_bound": odemodel.perturbed_bound(h0, params),
               "mass_threshold": odemodel.MASS_THRESHOLD}
    with open(os.path.join(args.out_dir, "ode_summary.json"), "w",
              encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")
    print(f"ode m1={params.m1} h0={cfg['ode.h0']}: sup_h={traj.sup_h:.6g} "
          f"h*={h_star:.6g} -> {tpath}")
    return 0


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="pkslab",
        description="pseudo-spectral chemotaxis-in-shear laboratory")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", default=None, help="config file path")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override a config key (repeatable)")
        p.add_argument("--out-dir", default="out")
        p.add_argument("--threads", type=int, default=None)

    p_sim = sub.add_parser("simulate", help="run one simulation")
    common(p_sim)
    p_sim.add_argument("--expect", default="finished",
                       choices=("finished", "blowup", "unresolved"))
    p_sim.add_argument("--seed", type=int, default=None)
    p_sim.set_defaults(func=cmd_simulate)

    p_sweep = sub.add_parser("sweep", help="run a parameter sweep")
    common(p_sweep)
    p_sweep.add_argument("--param", required=True)
    p_sweep.add_argument("--values", required=True,
                         help="comma-separated values")
    p_sweep.set_defaults(func=cmd_sweep)

    p_ver = sub.add_parser("verify", help="run verification suites")
    common(p_ver)
    p_ver.add_argument("--suite", action="append",
                       choices=list(verify.SUITES))
    p_ver.set_defaults(func=cmd_verify)

    p_ker = sub.add_parser("kernel", help="sheared heat-kernel decay table")
    p_ker.add_argument("--k", nargs=3, type=float, required=True,
                       metavar=("K1", "K2", "K3"))
    p_ker.add_argument("--a", "--A", dest="a", type=float, default=1000.0)
    p_ker.add_argument("--b", type=float, default=1.0)
    p_ker.add_argument("--t-max", type=float, default=50.0)
    p_ker.add_argument("--samples", type=int, default=200)
    p_ker.add_argument("--out-dir", default="out")
    p_ker.set_defaults(func=cmd_kernel)

    p_ode = sub.add_parser("ode", help="zero-mode mass ODE tools")
    common(p_ode)
    p_ode.add_argument("--m1", type=float, default=None)
    p_ode.add_argument("--h0", type=float, default=None)
    p_ode.add_argument("--a", "--A", dest="a", type=float, default=1.0,
                       help="ODE time-scale amplitude (default 1)")
    p_ode.set_defaults(func=cmd_ode)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
