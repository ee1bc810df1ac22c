"""Command-line front end.

    giantvortex <command> [options]

Every command reads an optional INI file (--config) with sections [trap] and
[numerics]; command-line flags override file values. JSON outputs echo the
merged configuration. Exit codes: 0 success, 2 invalid input, 3 numerical
failure (diagnostic JSON on stderr). Outputs are written only after the whole
computation has succeeded.
"""
import argparse
import configparser
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import io as gio
from .model import ModelParams, PhysicalParams

COMMANDS = ("solve1d", "beta-opt", "critical-speed", "cost", "ansatz", "gp2d", "rescale", "tf",
            "sweep")
WORKERS_ENV = "GV_WORKERS"


class UsageError(ValueError):
    pass


# ---------------------------------------------------------------- configuration

# key: (section, type, default, help)
OPTIONS = {
    "s": ("trap", float, 4.0, "trap exponent s > 2"),
    "omega0": ("trap", float, 1.0, "speed coefficient, Omega = omega0 / eps^4"),
    "omega0_rel": ("trap", float, None, "set omega0 to this multiple of the critical speed"),
    "epsilon": ("trap", float, 0.1, "small parameter, 0 < eps < 1"),
    "eta0": ("trap", float, 6.0, "annulus half-width constant, > 2"),
    "beta": ("trap", float, None, "phase shift for weighted solves"),
    "k": ("trap", float, 1.0, "physical trap stiffness"),
    "omega_rot": ("trap", float, None, "physical rotation speed"),
    "omega_osc": ("trap", float, None, "physical harmonic trap frequency"),
    "mode": ("numerics", str, "limiting", "limiting or weighted"),
    "harmonic": ("numerics", bool, False, "drop the quartic term"),
    "nodes": ("numerics", int, 32001, "limiting-grid nodes (sets the spacing of weighted grids)"),
    "tol": ("numerics", float, 1e-10, "Euler-Lagrange residual tolerance"),
    "energy_tol": ("numerics", float, 1e-14, "relative energy decrement tolerance"),
    "max_iter": ("numerics", int, 200000, "iteration cap of 1D solves"),
    "window": ("numerics", float, 20.0, "beta scan half-width"),
    "region": ("numerics", str, None, "probe region: A_bulk, A_gt or all"),
    "region_a": ("numerics", float, 1.0, "exponent a of the A_bulk threshold |ln eps|^-a"),
    "nr": ("numerics", int, 257, "2D radial nodes"),
    "ntheta": ("numerics", int, 512, "2D angular nodes"),
    "amplitude": ("numerics", float, 0.1, "2D initial perturbation amplitude"),
    "seed": ("numerics", int, 1, "2D initial perturbation seed"),
    "flow_tol": ("numerics", float, 1e-8, "2D relative residual tolerance"),
    "flow_max_iter": ("numerics", int, 20000, "2D iteration cap"),
    "ansatz_window": ("numerics", int, 3, "winding candidates on each side of Omega + beta*"),
    "samples": ("numerics", int, 401, "TF profile samples"),
    "scan_points": ("numerics", int, 40, "critical-speed scan points"),
}

# keys each command reads; the echoed configuration is restricted to them
USES = {
    "solve1d": ("s", "omega0", "omega0_rel", "epsilon", "eta0", "beta", "mode", "harmonic", "nodes",
                "tol", "energy_tol", "max_iter"),
    "beta-opt": ("s", "omega0", "omega0_rel", "epsilon", "eta0", "nodes", "tol", "energy_tol",
                 "max_iter", "window"),
    "critical-speed": ("s", "nodes", "tol", "energy_tol", "max_iter", "scan_points"),
    "cost": ("s", "omega0", "omega0_rel", "epsilon", "eta0", "mode", "nodes", "tol", "energy_tol",
             "max_iter", "window", "region", "region_a"),
    "ansatz": ("s", "omega0", "omega0_rel", "epsilon", "eta0", "nodes", "tol", "energy_tol",
               "max_iter", "window", "ansatz_window"),
    "gp2d": ("s", "omega0", "omega0_rel", "epsilon", "eta0", "tol", "energy_tol", "max_iter",
             "window", "ansatz_window", "nr", "ntheta", "amplitude", "seed", "flow_tol",
             "flow_max_iter", "region_a"),
    "rescale": ("k", "s", "omega_rot", "omega_osc", "epsilon"),
    "tf": ("s", "omega0", "epsilon", "eta0", "samples"),
}

SWEEP_AXES = ("epsilon", "omega0", "s", "beta")


def _parse_bool(text):
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise UsageError(f"not a boolean: {text!r}")


def _convert(key, value):
    typ = OPTIONS[key][1]
    if value is None:
        return None
    if typ is bool:
        return value if isinstance(value, bool) else _parse_bool(value)
    try:
        out = typ(value)
    except (TypeError, ValueError):
        raise UsageError(f"{key}: cannot read {value!r} as {typ.__name__}") from None
    if typ is float and not math.isfinite(out):
        raise UsageError(f"{key}: value must be finite")
    return out


def read_config_file(path):
    cp = configparser.ConfigParser()
    try:
        with open(path, encoding="utf-8") as fh:
            cp.read_file(fh)
    except OSError as e:
        raise UsageError(f"cannot read config file {path}: {e}") from None
    except configparser.Error as e:
        raise UsageError(f"malformed config file {path}: {e}") from None
    out = {}
    for sec in cp.sections():
        if sec not in ("trap", "numerics"):
            raise UsageError(f"unknown config section [{sec}]")
        for key, val in cp.items(sec):
            key = key.replace("-", "_")
            if key not in OPTIONS or OPTIONS[key][0] != sec:
                raise UsageError(f"unknown key {key!r} in section [{sec}]")
            out[key] = _convert(key, val)
    return out


def merge_config(command, file_values, flag_values):
    """Defaults, then file values, then flags; restricted to the keys the command reads."""
    cfg = {k: OPTIONS[k][2] for k in USES[command]}
    for src in (file_values, flag_values):
        for k, v in src.items():
            if k in cfg and v is not None:
                cfg[k] = _convert(k, v)
    return cfg


# ---------------------------------------------------------------- validation

def _model(cfg, omega0=None):
    return ModelParams(s=cfg["s"], omega0=cfg["omega0"] if omega0 is None else omega0,
                       epsilon=cfg["epsilon"], eta0=cfg["eta0"])


def _check_common(cfg):
    if cfg.get("omega0_rel") is not None and not cfg["omega0_rel"] > 0:
        raise UsageError("omega0_rel must be positive")
    if "s" in cfg and not cfg["s"] > 2:
        raise UsageError(f"exponent s must exceed 2, got {cfg['s']}")
    if "nodes" in cfg and cfg["nodes"] < 3:
        raise UsageError("nodes must be at least 3")
    for key in ("tol", "energy_tol"):
        if key in cfg and not cfg[key] > 0:
            raise UsageError(f"{key} must be positive")
    for key in ("max_iter", "flow_max_iter", "scan_points", "samples"):
        if key in cfg and cfg[key] < 1:
            raise UsageError(f"{key} must be at least 1")
    if "mode" in cfg and cfg["mode"] not in ("limiting", "weighted"):
        raise UsageError(f"mode must be limiting or weighted, got {cfg['mode']!r}")
    if "epsilon" in cfg and "eta0" in cfg:
        _model(cfg, omega0=1.0 if cfg.get("omega0") is None else cfg["omega0"])


def validate(command, cfg):
    """Raise UsageError / ValueError before any computation."""
    _check_common(cfg)
    if command == "solve1d" and cfg["mode"] == "weighted" and cfg["beta"] is None:
        raise UsageError("weighted solve1d needs --beta")
    if command in ("beta-opt", "ansatz", "gp2d") and not cfg["window"] >= 2:
        raise UsageError("window must be at least 2")
    if command == "cost" and cfg["region"] not in (None, "A_bulk", "A_gt", "all"):
        raise UsageError(f"unknown region {cfg['region']!r}")
    if command in ("ansatz", "gp2d") and cfg["ansatz_window"] < 2:
        raise UsageError("ansatz_window must be at least 2")
    if command == "gp2d":
        if cfg["nr"] < 3 or cfg["ntheta"] < 8:
            raise UsageError("need nr >= 3 and ntheta >= 8")
        if not 0 <= cfg["amplitude"] < 1:
            raise UsageError("amplitude must lie in [0, 1)")
        if not cfg["flow_tol"] > 0:
            raise UsageError("flow_tol must be positive")
    if command == "rescale":
        if cfg["omega_rot"] is None or cfg["omega_osc"] is None:
            raise UsageError("rescale needs --omega-rot and --omega-osc")
        PhysicalParams(cfg["k"], cfg["s"], cfg["omega_rot"], cfg["omega_osc"], cfg["epsilon"])
    if command == "tf" and cfg["samples"] < 3:
        raise UsageError("samples must be at least 3")


# ---------------------------------------------------------------- tasks

@dataclass
class Result:
    summary: dict
    table: tuple | None = None            # (header, rows) for CSV-primary commands
    snapshot: tuple | None = None         # (values, meta) field snapshot for gp2d
    figures: list = field(default_factory=list)   # (plot function name, args, kwargs)
    notes: list = field(default_factory=list)     # human-readable check lines (stderr)


def _solver_options(cfg, **kw):
    from .gv_solver import SolverOptions
    return SolverOptions(tol=cfg["tol"], energy_tol=cfg["energy_tol"], max_iter=cfg["max_iter"],
                         **kw)


@lru_cache(maxsize=None)
def _critical(s, nodes, tol, energy_tol, max_iter, npts=40):
    from .critical import solve_critical_speed
    from .gv_solver import SolverOptions
    opts = SolverOptions(tol=tol, energy_tol=energy_tol, max_iter=max_iter)
    return solve_critical_speed(s, opts, npts=npts, n=nodes)


def _resolve_omega0(cfg):
    if cfg.get("omega0_rel") is None:
        return cfg["omega0"], None
    res = _critical(cfg["s"], cfg.get("nodes", 32001), cfg["tol"], cfg["energy_tol"],
                    cfg["max_iter"])
    return cfg["omega0_rel"] * res.omega_c, res.omega_c


def _weighted_grid(m, cfg):
    from .gv_solver import limiting_half_width, weighted_grid
    n = int(cfg["nodes"]) | 1
    return weighted_grid(m, h=2 * limiting_half_width(m.alpha) / (n - 1))


def _limiting(m, cfg, quartic=True):
    from .gv_solver import limiting_grid, minimize_gv
    return minimize_gv(m, limiting_grid(m, cfg["nodes"]), _solver_options(cfg, quartic=quartic))


def task_solve1d(cfg):
    from .gv_solver import minimize_gv_beta, virial_defect
    omega0, omega_c = _resolve_omega0(cfg)
    m = _model(cfg, omega0)
    quartic = not cfg["harmonic"]
    if cfg["mode"] == "limiting":
        sol = _limiting(m, cfg, quartic)
    else:
        sol = minimize_gv_beta(m, cfg["beta"], _weighted_grid(m, cfg),
                               _solver_options(cfg, quartic=quartic))
    b = sol.breakdown
    out = dict(mode=cfg["mode"], omega0=omega0, omega_c=omega_c, alpha=m.alpha, **b.as_dict(),
               residual=sol.residual, iterations=sol.iterations, converged=sol.converged,
               nodes=sol.grid.n, h=sol.grid.h, sup_g2=float(np.max(sol.g) ** 2),
               pi_mu=math.pi * b.mu)
    notes = []
    if cfg["mode"] == "limiting":
        vd = virial_defect(sol)
        out["virial_defect"] = vd
        out["virial_relative"] = abs(vd) / abs(b.e_total)
        notes.append(f"virial |2T - 2V + Q| / E = {out['virial_relative']:.3e} "
                     f"({'ok' if out['virial_relative'] < 1e-6 else 'FAIL'})")
        if not quartic:
            out["e_harmonic"] = m.alpha / 2
            out["e_harmonic_relative_error"] = abs(b.e_total - m.alpha / 2) / (m.alpha / 2)
    else:
        out["beta"] = cfg["beta"]
        out["eta"] = m.eta
    rows = list(zip(sol.y.tolist(), sol.g.tolist()))
    figs = [("plot_profile", (sol.y, sol.g), dict(title=f"{cfg['mode']} profile"))]
    return Result(out, table=(["y", "g"], rows), figures=figs, notes=notes)


def _beta_opt(cfg, m):
    from .phase_opt import optimize_beta
    return optimize_beta(m, _weighted_grid(m, cfg), _solver_options(cfg), window=cfg["window"])


def task_beta_opt(cfg):
    from .cost import potential_function_eps
    omega0, omega_c = _resolve_omega0(cfg)
    m = _model(cfg, omega0)
    op = _beta_opt(cfg, m)
    gv = _limiting(m, cfg)
    e_gv = gv.breakdown.e_total
    out = dict(omega0=omega0, omega_c=omega_c, epsilon=m.epsilon, eta=m.eta, Omega=m.Omega,
               beta_star=op.beta_star, beta_closed_form=op.closed_form,
               beta_difference=op.closed_form - op.beta_star, e_star=op.e_star, e_gv=e_gv,
               e_star_minus_e_gv=op.e_star - e_gv, optimality_residual=op.optimality_residual,
               f_at_eta=potential_function_eps(op, m).boundary_defect,
               de_dbeta=op.derivative, mean_y=op.moments.mean_y,
               moments=op.moments.as_dict(), residual=op.solution.residual,
               scan=op.scan.tolist())
    figs = [("plot_scan", (op.scan[:, 0], op.scan[:, 1], r"$\beta$", r"$E_\beta$"),
             dict(mark=op.beta_star, name="beta_scan.png")),
            ("plot_profile", (op.y, op.g), dict(title=r"$g_\star$", name="g_star.png"))]
    return Result(out, figures=figs)


def task_critical_speed(cfg):
    res = _critical(cfg["s"], cfg["nodes"], cfg["tol"], cfg["energy_tol"], cfg["max_iter"],
                    cfg["scan_points"])
    out = dict(s=res.s, omega_c=res.omega_c, residual=res.residual,
               fixed_points=res.fixed_points, unique=res.unique, scan=res.scan.tolist())
    figs = [("plot_scan", (res.scan[:, 0], res.scan[:, 0] - res.scan[:, 1],
                           r"$\Omega_0$", r"$\Omega_0 - G(\Omega_0)$"),
             dict(mark=res.omega_c, name="critical_scan.png", logx=True))]
    return Result(out, figures=figs)


def task_cost(cfg):
    from .cost import bulk_region, cost_function_eps, cost_function_gv, potential_function_gv_alt
    omega0, omega_c = _resolve_omega0(cfg)
    m = _model(cfg, omega0)
    kind = cfg["region"]
    if cfg["mode"] == "limiting":
        sol = _limiting(m, cfg)
        if kind in (None, "all"):
            region = None
        else:
            r = bulk_region(sol, m, kind, a=cfg["region_a"])
            region = (r.lo, r.hi)
        curve = cost_function_gv(sol, omega0, region)
        alt = potential_function_gv_alt(sol, omega0)
        inner = np.abs(curve.ys) <= 5 / math.sqrt(m.alpha)
        extra = dict(k_at_zero=curve.k_at_zero, k_at_zero_closed=curve.k_at_zero_closed,
                     k_at_zero_difference=curve.k_at_zero - curve.k_at_zero_closed,
                     f_dual_difference=float(np.max(np.abs(curve.f_vals - alt)[inner])))
    else:
        op = _beta_opt(cfg, m)
        sol = op.solution
        if kind == "all":
            region = (sol.y[0], sol.y[-1])
        elif kind is None:
            region = None
        else:
            r = bulk_region(sol, m, kind, a=cfg["region_a"])
            region = (r.lo, r.hi)
        curve = cost_function_eps(op, m, region)
        extra = dict(beta_star=op.beta_star, eta=m.eta)
    out = dict(mode=cfg["mode"], omega_c=omega_c, **curve.report(), **extra,
               positive=bool(curve.min_k >= 0), residual=sol.residual)
    rows = list(zip(curve.ys.tolist(), curve.g.tolist(), curve.f_vals.tolist(),
                    curve.k_vals.tolist()))
    figs = [("plot_cost", (curve.ys, curve.g, curve.f_vals, curve.k_vals),
             dict(region=curve.region))]
    return Result(out, table=(["y", "g", "F", "K"], rows), figures=figs)


def task_ansatz(cfg):
    from .gp2d import optimize_gv_ansatz
    omega0, omega_c = _resolve_omega0(cfg)
    m = _model(cfg, omega0)
    op = _beta_opt(cfg, m)
    ar = optimize_gv_ansatz(m, cfg["ansatz_window"], op=op, grid=op.solution.grid,
                            opts=_solver_options(cfg))
    out = dict(omega0=omega0, omega_c=omega_c, Omega=m.Omega, beta_star=op.beta_star,
               n_continuous=m.Omega + op.beta_star, n_best=ar.n_best, energy_2d=ar.energy,
               e_star_over_eps4=op.e_star / m.epsilon**4,
               energies={str(n): e for n, e in sorted(ar.energies.items())})
    ns = sorted(ar.energies)
    figs = [("plot_scan", (ns, [ar.energies[n] for n in ns], r"$n$", r"$E$"),
             dict(mark=m.Omega + op.beta_star, name="ansatz_energies.png"))]
    return Result(out, figures=figs)


def task_gp2d(cfg):
    from .cost import bulk_region
    from .gp2d import (FlowOptions, PolarGrid2D, ansatz_field, detect_vortices, energy_split_check,
                       gp_energy_2d, gradient_flow_2d, optimize_gv_ansatz, perturb_field)
    from .phase_opt import optimize_beta
    omega0, omega_c = _resolve_omega0(dict(cfg, nodes=32001))
    m = _model(cfg, omega0)
    pg = PolarGrid2D.for_params(m, cfg["nr"], cfg["ntheta"])
    g1 = pg.radial_grid_1d(m)
    opts = _solver_options(cfg)
    op = optimize_beta(m, g1, opts, window=cfg["window"])
    ar = optimize_gv_ansatz(m, cfg["ansatz_window"], op=op, grid=g1, opts=opts)
    init = ansatz_field(pg, ar.solution, ar.n_best, m)
    if cfg["amplitude"] > 0:
        init = perturb_field(init, cfg["amplitude"], seed=cfg["seed"])
    psi = gradient_flow_2d(m, init, FlowOptions(tol=cfg["flow_tol"],
                                                max_iter=cfg["flow_max_iter"]))
    if not psi.info["converged"]:
        raise RuntimeError(f"2D flow did not converge in {psi.info['iterations']} iterations "
                           f"(residual {psi.info['residual']:.3e})")
    e2d = gp_energy_2d(psi, m)
    a_gt = bulk_region(op.solution, m, "A_gt")
    rep = detect_vortices(psi, region=a_gt, m=m)
    try:
        a_bulk = bulk_region(op.solution, m, "A_bulk", a=cfg["region_a"])
        bulk = dict(lo=a_bulk.lo, hi=a_bulk.hi, empty=False,
                    vortex_count=sum(a_bulk.contains(pg.y_of_r(v[0], m)) for v in rep.vortices))
    except ValueError:
        bulk = dict(lo=None, hi=None, empty=True, vortex_count=0)
    split = energy_split_check(psi, op, m)
    N = m.Omega + op.beta_star
    trace = psi.info["energy_trace"]
    out = dict(omega0=omega0, omega_c=omega_c, Omega=m.Omega, eta=m.eta, nr=pg.nr,
               ntheta=pg.ntheta, beta_star=op.beta_star, n_continuous=N, n_best=ar.n_best,
               e_star=op.e_star, e_gp=e2d.e_total, eps4_e_gp=m.epsilon**4 * e2d.e_total,
               energy_relative_error=abs(m.epsilon**4 * e2d.e_total - op.e_star) / op.e_star,
               iterations=psi.info["iterations"], flow_residual=psi.info["residual"],
               energy_monotone=bool(np.all(np.diff(trace) <= 8 * np.finfo(float).eps
                                           * np.abs(trace[1:]))),
               winding=rep.total_degree_on_circle, winding_defect=abs(rep.total_degree_on_circle - N),
               central_charge=rep.central_charge, vortex_count=len(rep.vortices),
               vortices_in_a_gt=rep.bulk_vortex_count, a_gt=dict(lo=a_gt.lo, hi=a_gt.hi),
               a_bulk=bulk, vortices=rep.vortices,
               energy_split={k: v for k, v in split.items()})
    meta = dict(nr=pg.nr, ntheta=pg.ntheta, r_lo=pg.r_lo, r_hi=pg.r_hi, s=m.s, omega0=omega0,
                epsilon=m.epsilon, eta0=m.eta0)
    figs = [("plot_field", (pg.r, pg.theta, psi.values), dict())]
    return Result(out, snapshot=(psi.values, meta), figures=figs)


def task_rescale(cfg):
    from .model import rescale_to_dimensionless, rescale_to_physical
    p = PhysicalParams(cfg["k"], cfg["s"], cfg["omega_rot"], cfg["omega_osc"], cfg["epsilon"])
    m, r_m = rescale_to_dimensionless(p)
    back = rescale_to_physical(m, p.k)
    again, _ = rescale_to_dimensionless(back)
    resid = max(abs(back.omega_rot - p.omega_phys) / p.omega_phys,
                abs(again.omega0 - m.omega0) / m.omega0)
    out = dict(model=dict(s=m.s, omega0=m.omega0, epsilon=m.epsilon, eta0=m.eta0),
               Omega=m.Omega, alpha=m.alpha, eta=m.eta, r_m=r_m, omega_phys=p.omega_phys,
               round_trip_residual=resid)
    return Result(out)


def task_tf(cfg):
    import warnings
    from .model import tf_normalization, tf_profile
    m = _model(cfg)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        tf = tf_profile(m, cfg["samples"])
    out = dict(Omega=m.Omega, eps_Omega=m.epsilon * m.Omega, mu_tf=tf.mu_tf, x_in=tf.x_in,
               x_out=tf.x_out, width=tf.width, mass=tf_normalization(tf, m),
               warnings=[str(w.message) for w in caught])
    rows = [tuple(r) for r in tf.samples.tolist()]
    figs = [("plot_profile", (tf.samples[:, 0], tf.samples[:, 1]),
             dict(title="TF density", name="tf.png"))]
    return Result(out, table=(["x", "rho"], rows), figures=figs)


TASKS = {"solve1d": task_solve1d, "beta-opt": task_beta_opt,
         "critical-speed": task_critical_speed, "cost": task_cost, "ansatz": task_ansatz,
         "gp2d": task_gp2d, "rescale": task_rescale, "tf": task_tf}

# scalar columns reported per sweep point, in order
SWEEP_COLUMNS = {
    "solve1d": ("e_total", "mu", "t_kin", "v_pot", "q_int", "residual", "sup_g2"),
    "beta-opt": ("beta_star", "beta_closed_form", "beta_difference", "e_star", "e_gv",
                 "e_star_minus_e_gv", "mean_y", "optimality_residual", "f_at_eta"),
    "critical-speed": ("omega_c", "residual", "unique"),
    "cost": ("min_k", "argmin", "k_floor_ratio", "boundary_defect", "positive"),
    "ansatz": ("beta_star", "n_continuous", "n_best", "energy_2d"),
    "gp2d": ("winding", "vortex_count", "energy_relative_error", "iterations"),
    "rescale": ("Omega", "alpha", "eta", "r_m", "round_trip_residual"),
    "tf": ("mu_tf", "x_in", "x_out", "width", "eps_Omega"),
}


# ---------------------------------------------------------------- sweep

def sweep_values(values=None, lo=None, hi=None, count=None, spacing="linear"):
    """Explicit list, or count points between lo and hi on a linear or log scale."""
    if values is not None:
        vals = [float(v) for v in values]
    else:
        if count is None or count < 1:
            raise UsageError("sweep range needs a positive count")
        if spacing == "log":
            if not (lo > 0 and hi > 0):
                raise UsageError("log spacing needs positive bounds")
            vals = np.geomspace(lo, hi, count).tolist()
        elif spacing == "linear":
            vals = np.linspace(lo, hi, count).tolist()
        else:
            raise UsageError(f"unknown spacing {spacing!r}")
    if not vals:
        raise UsageError("sweep values are empty")
    if not all(math.isfinite(v) for v in vals):
        raise UsageError("sweep values must be finite")
    return vals


def _sweep_point(args):
    i, task, cfg = args
    try:
        res = TASKS[task](cfg)
    except Exception as e:          # recorded per point, never fatal for the sweep
        return i, f"error:{type(e).__name__}", {}
    return i, "ok", res.summary


def _default_workers():
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        raise UsageError(f"{WORKERS_ENV} must be an integer") from None


def run_sweep(task, axis, values, cfg, workers):
    """Rows (index, axis value, status, columns...) in axis order."""
    points = []
    for i, v in enumerate(values):
        c = dict(cfg)
        c[axis] = v
        if axis == "omega0":
            c["omega0_rel"] = None
        validate(task, c)
        points.append((i, task, c))
    if workers > 1 and len(points) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(points))) as ex:
            results = list(ex.map(_sweep_point, points))
    else:
        results = [_sweep_point(p) for p in points]
    results.sort(key=lambda r: r[0])
    cols = SWEEP_COLUMNS[task]
    header = ["index", axis, "status", *cols]
    rows = [[i, values[i], status, *[summ.get(c) for c in cols]] for i, status, summ in results]
    return header, rows


# ---------------------------------------------------------------- argument parsing

def _add_config_flags(p, keys):
    for key in keys:
        sec, typ, default, help_ = OPTIONS[key]
        flag = "--" + key.replace("_", "-")
        if typ is bool:
            p.add_argument(flag, dest=key, action="store_const", const=True, default=None,
                           help=help_)
        else:
            p.add_argument(flag, dest=key, type=str, default=None,
                           help=f"{help_} (default {default})")


def build_parser():
    parser = argparse.ArgumentParser(prog="giantvortex",
                                     description="Giant-vortex reduced models and checks.")
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True
    helps = {"solve1d": "1D giant-vortex profile (limiting or weighted)",
             "beta-opt": "optimal phase beta* on the truncated annulus",
             "critical-speed": "largest fixed point of omega0 = G(omega0)",
             "cost": "potential and cost functions with their minimum",
             "ansatz": "best integer winding of the giant-vortex ansatz",
             "gp2d": "desk-scale 2D gradient flow and vortex check",
             "rescale": "physical to dimensionless parameters and back",
             "tf": "Thomas-Fermi density profile",
             "sweep": "run a command over a list of parameter values"}
    for name in COMMANDS:
        p = sub.add_parser(name, help=helps[name])
        p.add_argument("--config", help="INI file with [trap] and [numerics] sections")
        p.add_argument("--out", help="primary output file (default: stdout)")
        p.add_argument("--figures", metavar="DIR", help="also render PNG figures into DIR")
        if name == "sweep":
            p.add_argument("--task", required=True, choices=list(TASKS))
            p.add_argument("--axis", required=True, choices=SWEEP_AXES)
            p.add_argument("--values", help="comma-separated values")
            p.add_argument("--range", nargs=3, metavar=("LO", "HI", "COUNT"))
            p.add_argument("--spacing", choices=("linear", "log"), default="linear")
            p.add_argument("--workers", type=int, default=None,
                           help=f"parallel workers (default ${WORKERS_ENV} or 1)")
            keys = sorted(set().union(*USES.values()), key=list(OPTIONS).index)
            _add_config_flags(p, keys)
            continue
        if name in ("solve1d", "cost", "tf"):
            p.add_argument("--summary", help="JSON summary file next to the CSV output")
        if name == "gp2d":
            p.add_argument("--field", metavar="PREFIX",
                           help="write the final field to PREFIX.bin with a PREFIX.json sidecar")
        _add_config_flags(p, USES[name])
    return parser


# ---------------------------------------------------------------- driver

def _config_from_args(command, args):
    file_values = read_config_file(args.config) if args.config else {}
    flags = {k: getattr(args, k) for k in OPTIONS if getattr(args, k, None) is not None}
    return merge_config(command, file_values, flags)


def _document(command, cfg, summary):
    return dict(command=command, config=cfg, result=summary)


def _render_figures(outdir, figures):
    from . import plotting
    for fn, a, kw in figures:
        getattr(plotting, fn)(outdir, *a, **kw)


def _fail(code, command, err, cfg=None):
    diag = dict(command=command, error=type(err).__name__, message=str(err))
    if cfg is not None:
        diag["config"] = cfg
    if code == 2:
        print(f"giantvortex {command}: error: {err}", file=sys.stderr)
    else:
        sys.stderr.write(gio.json_text(diag))
    return code


def _emit(path, text):
    if path:
        gio.write_atomic(path, text)
    else:
        sys.stdout.write(text)


def _run_sweep_command(args):
    task = args.task
    if task == "sweep":
        raise UsageError("cannot sweep a sweep")
    if args.axis == "beta" and task != "solve1d":
        raise UsageError("the beta axis applies to solve1d only")
    file_values = read_config_file(args.config) if args.config else {}
    flags = {k: getattr(args, k) for k in OPTIONS if getattr(args, k, None) is not None}
    cfg = merge_config(task, file_values, flags)
    if args.axis not in cfg:
        raise UsageError(f"{task} does not depend on {args.axis}")
    if args.values is not None:
        values = sweep_values([v for v in args.values.split(",") if v.strip()])
    elif args.range is not None:
        try:
            lo, hi, count = float(args.range[0]), float(args.range[1]), int(args.range[2])
        except ValueError:
            raise UsageError("--range needs LO HI COUNT") from None
        values = sweep_values(lo=lo, hi=hi, count=count, spacing=args.spacing)
    else:
        raise UsageError("sweep needs --values or --range")
    if args.axis == "s" and any(v <= 2 for v in values):
        raise UsageError("s must exceed 2")
    workers = args.workers if args.workers is not None else _default_workers()
    if workers < 1:
        raise UsageError("workers must be at least 1")
    return task, values, cfg, workers


def run(argv=None):
    """Entry point; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if isinstance(e.code, int) else 2
    command = args.command
    cfg = None
    try:
        if command == "sweep":
            task, values, cfg, workers = _run_sweep_command(args)
        else:
            cfg = _config_from_args(command, args)
            validate(command, cfg)
    except ValueError as e:
        return _fail(2, command, e)

    if command == "sweep":
        try:
            header, rows = run_sweep(task, args.axis, values, cfg, workers)
        except ValueError as e:
            return _fail(2, command, e)
        ok = [r for r in rows if r[2] == "ok"]
        _emit(args.out, gio.csv_text(header, rows))
        if args.figures and ok:
            cols = {c: [r[header.index(c)] for r in ok] for c in header[3:]
                    if all(isinstance(r[header.index(c)], float) for r in ok)}
            if cols:
                _render_figures(args.figures, [("plot_sweep", ([r[1] for r in ok], cols, args.axis),
                                                dict())])
        if not ok:
            print(f"giantvortex sweep: all {len(rows)} points failed", file=sys.stderr)
            return 3
        return 0

    try:
        res = TASKS[command](cfg)
    except (ArithmeticError, RuntimeError, ValueError, np.linalg.LinAlgError) as e:
        return _fail(3, command, e, cfg)

    doc = gio.json_text(_document(command, cfg, res.summary))
    if res.table is not None:
        _emit(args.out, gio.csv_text(*res.table))
        if args.summary:
            gio.write_atomic(args.summary, doc)
    else:
        _emit(args.out, doc)
    if res.snapshot is not None and getattr(args, "field", None):
        raw, side = gio.field_snapshot(res.snapshot[0], dict(res.snapshot[1], config=cfg))
        gio.write_atomic(args.field + ".bin", raw)
        gio.write_atomic(args.field + ".json", side)
    for line in res.notes:
        print(line, file=sys.stderr)
    if args.figures:
        _render_figures(args.figures, res.figures)
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
