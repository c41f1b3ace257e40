"""Parameter sweeps, convergence studies and their reports.

Experiment kinds
----------------
``mms``               manufactured-solution convergence on the square
``alpha_to_zero``     friction -> 0 limit against the frictionless solution
``alpha_to_infinity`` friction -> oo limit against the clamped solution
``uniform_bound``     solution size across a friction sweep
``compat_disk``       boundary circulation decay for compatible disk data
``spectra_suite``     Korn and inf-sup constants across levels
``ns_mms``            nonlinear manufactured-solution convergence
``ns_limits``         nonlinear friction sweep with convergence bookkeeping

Reports are deterministic given (config, seed): rows are plain floats
formatted with 17 significant digits, and the CSV writer emits LF line
endings unconditionally.  Rate fits drop pre-asymptotic points by a fixed
stored rule (values above 0.3 times the first value) and always use at
least three points.
"""

import configparser
import csv
import io
import json
import platform
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, asdict

import numpy as np
import scipy

from . import __version__ as _version
from . import fem, forms
from .constraints import apply_plan, build_dirichlet_plan
from .errors import IncompatibleData, InvalidArgument
from .fields import (ProblemData, disk_compatible_forcing, navier_stokes_mms,
                     stokes_mms, sweep_forcing)
from .mesh import make_disk, make_unit_square
from .navierstokes import PicardOptions, solve_navier_stokes
from .saddle import factor_solve
from .spectra import infsup_constant, korn_quotient_min
from .stokes import check_compatibility, solve_stokes
from .fem import pressure_error_l2, velocity_error_h1

KINDS = ("mms", "alpha_to_zero", "alpha_to_infinity", "uniform_bound",
         "compat_disk", "spectra_suite", "ns_mms", "ns_limits")

COMPAT_TOL = 1e-10


@dataclass
class ExperimentConfig:
    """Validated description of one experiment run."""

    kind: str
    domain: str = "square"
    levels: tuple = (8, 16, 32)
    radius: float = 1.0
    alpha: float = 1.0
    alpha_star: float = 0.0
    alpha_schedule: tuple = ()
    data: str = "default"
    seed: int = 0
    threads: int = 1
    amplitude: float | None = None
    picard: PicardOptions = field(default_factory=PicardOptions)

    def validate(self):
        if self.kind not in KINDS:
            raise InvalidArgument(f"unknown experiment kind {self.kind!r}; "
                                  f"choose one of {KINDS}")
        if self.domain not in ("square", "disk"):
            raise InvalidArgument(f"unknown domain {self.domain!r}")
        if not self.levels or any(l < (0 if self.domain == 'disk' else 1)
                                  for l in self.levels):
            raise InvalidArgument(f"bad level list {self.levels!r}")
        if list(self.levels) != sorted(set(self.levels)):
            raise InvalidArgument("levels must be strictly increasing")
        if self.threads < 1:
            raise InvalidArgument("threads must be at least 1")
        if self.alpha < 0 or self.alpha_star < 0:
            raise InvalidArgument("friction values must be nonnegative")
        return self


@dataclass
class RunReport:
    """Rows plus fits plus the configuration echo for one experiment."""

    kind: str
    columns: tuple
    rows: list
    fits: dict
    config_echo: dict
    environment: dict
    wall_times: dict

    def to_csv(self):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([_fmt(v) for v in row])
        return buf.getvalue()

    def to_manifest(self):
        return json.dumps({
            "kind": self.kind,
            "version": _version,
            "config": self.config_echo,
            "environment": self.environment,
            "fits": self.fits,
            "wall_times_s": self.wall_times,
        }, indent=2, sort_keys=True)


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return str(v)


def _environment():
    return {
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "machine": platform.machine(),
    }


def fit_rate(x, y, drop_factor=0.3):
    """Least-squares slope of log(y) against log(x) with the stored drop rule.

    Points with ``y > drop_factor * y[0]`` are excluded as pre-asymptotic;
    if fewer than three points survive, the last three are used.  Returns
    a dict with slope, intercept, rms residual and the used point count.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) < 3:
        raise InvalidArgument("rate fits need at least 3 points")
    if np.any(x <= 0) or np.any(y <= 0):
        raise InvalidArgument("rate fits need positive data")
    keep = y <= drop_factor * y[0]
    if keep.sum() < 3:
        keep = np.zeros(len(x), dtype=bool)
        keep[-3:] = True
    lx, ly = np.log(x[keep]), np.log(y[keep])
    A = np.column_stack([lx, np.ones(lx.size)])
    coef, *_ = np.linalg.lstsq(A, ly, rcond=None)
    resid = ly - A @ coef
    return {"slope": float(coef[0]), "intercept": float(coef[1]),
            "residual_rms": float(np.sqrt(np.mean(resid ** 2))),
            "points_used": int(keep.sum())}


def _make_mesh(cfg, level):
    if cfg.domain == "square":
        return make_unit_square(level)
    return make_disk(level, cfg.radius)


def _map_schedule(cfg, fn, items):
    """Apply fn over schedule items, optionally with a thread pool.

    Results keep schedule order, so reports do not depend on the thread
    count; each item is solved independently and deterministically.
    """
    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


def run_mms(cfg):
    wall = {}
    case = stokes_mms(alpha=cfg.alpha,
                      amplitude=cfg.amplitude if cfg.amplitude else 1.0)
    rows = []
    for level in cfg.levels:
        t0 = time.perf_counter()
        mesh = _make_mesh(cfg, level)
        fe = fem.build_taylor_hood(mesh)
        sol = solve_stokes(mesh, case["data"])
        _, err_h1 = velocity_error_h1(fe, sol.u, case["u"].value, case["u"].grad)
        err_p = pressure_error_l2(fe, sol.p, case["p"])
        wall[f"level_{level}"] = time.perf_counter() - t0
        rows.append((level, mesh.mesh_size(), err_h1, err_p,
                     sol.diagnostics["energy_residual"]))
    h = [r[1] for r in rows]
    fits = {"velocity_h1": fit_rate(h, [r[2] for r in rows]),
            "pressure_l2": fit_rate(h, [r[3] for r in rows])}
    return _report(cfg, ("level", "h", "error_h1", "error_pressure_l2",
                         "energy_residual"), rows, fits, wall)


def _sweep_data(cfg):
    if cfg.data in ("default", "sweep"):
        return sweep_forcing()
    if cfg.data == "mms":
        return stokes_mms(alpha=cfg.alpha)["data"]
    raise InvalidArgument(f"unknown data selector {cfg.data!r}")


def run_alpha_to_zero(cfg):
    """Distance to the frictionless solution along a friction schedule."""
    wall = {}
    level = cfg.levels[-1]
    mesh = _make_mesh(cfg, level)
    fe = fem.build_taylor_hood(mesh)
    H1 = forms.assemble_velocity_h1(fe)
    base = _sweep_data(cfg)
    schedule = cfg.alpha_schedule or tuple(2.0 ** (-k) for k in range(2, 13))

    t0 = time.perf_counter()
    data0 = ProblemData(f=base.f, F=base.F, h=base.h, alpha=0.0,
                        compatibility_mode=True)
    sol0 = solve_stokes(mesh, data0)
    wall["reference"] = time.perf_counter() - t0

    def one(alpha):
        data = ProblemData(f=base.f, F=base.F, h=base.h, alpha=float(alpha))
        sol = solve_stokes(mesh, data)
        diff = sol.u - sol0.u
        err = float(np.sqrt(max(diff @ (H1 @ diff), 0.0)))
        return (float(alpha), err, sol.diagnostics["h1_norm"],
                sol.diagnostics["energy_residual"])

    t0 = time.perf_counter()
    rows = _map_schedule(cfg, one, list(schedule))
    wall["sweep"] = time.perf_counter() - t0
    alphas = [r[0] for r in rows]
    errs = [r[1] for r in rows]
    fits = {"limit_rate": fit_rate(alphas, errs)}
    rows.append((0.0, 0.0, sol0.diagnostics["h1_norm"],
                 sol0.diagnostics["energy_residual"]))
    return _report(cfg, ("alpha", "error_h1_vs_reference", "h1_norm",
                         "energy_residual"), rows, fits, wall)


def run_alpha_to_infinity(cfg):
    """Distance to the clamped solution along a growing friction schedule."""
    wall = {}
    level = cfg.levels[-1]
    mesh = _make_mesh(cfg, level)
    fe = fem.build_taylor_hood(mesh)
    H1 = forms.assemble_velocity_h1(fe)
    base = _sweep_data(cfg)
    schedule = cfg.alpha_schedule or tuple(10.0 ** k for k in range(7))

    t0 = time.perf_counter()
    plan_d = build_dirichlet_plan(fe)
    A = forms.assemble_viscous(fe)
    B = forms.assemble_divergence(fe)
    ell = forms.assemble_load(fe, base)
    system = apply_plan(plan_d, A, B, ell)
    ud, pd, _ = plan_d.reconstruct(factor_solve(system))
    ud_norm = float(np.sqrt(max(ud @ (H1 @ ud), 0.0)))
    wall["dirichlet_reference"] = time.perf_counter() - t0

    def one(alpha):
        data = ProblemData(f=base.f, F=base.F, h=base.h, alpha=float(alpha))
        sol = solve_stokes(mesh, data)
        diff = sol.u - ud
        err = float(np.sqrt(max(diff @ (H1 @ diff), 0.0)))
        return (float(alpha), err, sol.diagnostics["boundary_tangential_l2"],
                sol.diagnostics["energy_residual"])

    t0 = time.perf_counter()
    rows = _map_schedule(cfg, one, list(schedule))
    wall["sweep"] = time.perf_counter() - t0
    alphas = [r[0] for r in rows]
    fits = {
        "tangential_rate": fit_rate(alphas, [r[2] for r in rows]),
        "gap_rate": fit_rate(alphas, [r[1] for r in rows]),
    }
    fits["final_relative_gap"] = {"value": rows[-1][1] / ud_norm,
                                  "reference_h1": ud_norm}
    return _report(cfg, ("alpha", "error_h1_vs_dirichlet",
                         "boundary_tangential_l2", "energy_residual"),
                   rows, fits, wall)


def run_uniform_bound(cfg):
    """Solution size across a friction sweep; the ratio is the headline."""
    wall = {}
    level = cfg.levels[-1]
    mesh = _make_mesh(cfg, level)
    base = _sweep_data(cfg)
    schedule = cfg.alpha_schedule or (0.0, 1e-2, 1.0, 1e2, 1e4, 1e6)

    def one(alpha):
        data = ProblemData(f=base.f, F=base.F, h=base.h, alpha=float(alpha),
                           compatibility_mode=True)
        sol = solve_stokes(mesh, data)
        size = sol.diagnostics["h1_norm"] + sol.diagnostics["pressure_l2"]
        return (float(alpha), size, sol.diagnostics["h1_norm"],
                sol.diagnostics["pressure_l2"],
                sol.diagnostics["energy_residual"])

    t0 = time.perf_counter()
    rows = _map_schedule(cfg, one, list(schedule))
    wall["sweep"] = time.perf_counter() - t0
    sizes = [r[1] for r in rows]
    fits = {"uniformity": {"max_over_min": max(sizes) / min(sizes),
                           "max": max(sizes), "min": min(sizes)}}
    return _report(cfg, ("alpha", "solution_size", "h1_norm", "pressure_l2",
                         "energy_residual"), rows, fits, wall)


def run_compat_disk(cfg):
    """Boundary circulation decay for compatible data on the disk."""
    if cfg.domain != "disk":
        raise InvalidArgument("the compatibility study runs on the disk")
    wall = {}
    data = disk_compatible_forcing(alpha=cfg.alpha if cfg.alpha > 0 else 1.0)
    rows = []
    for level in cfg.levels:
        t0 = time.perf_counter()
        mesh = _make_mesh(cfg, level)
        defect = check_compatibility(mesh, data)
        if abs(defect) > COMPAT_TOL:
            raise IncompatibleData(
                f"compatibility defect {defect:.3e} exceeds {COMPAT_TOL:.1e}")
        fe = fem.build_taylor_hood(mesh)
        sol = solve_stokes(mesh, data)
        circulation = abs(float(forms.boundary_rotation_functional(fe) @ sol.u))
        wall[f"level_{level}"] = time.perf_counter() - t0
        rows.append((level, mesh.mesh_size(), defect, circulation,
                     sol.diagnostics["h1_norm"]))
    h = [r[1] for r in rows]
    circ = [r[3] for r in rows]
    # With discretely compatible data the circulation is zero to rounding
    # at every level; the rate fit only means something above that floor.
    fits = {"circulation_rate": fit_rate(h, [max(c, 1e-300) for c in circ]),
            "machine_zero": bool(max(circ) <= 1e-13)}
    return _report(cfg, ("level", "h", "compatibility_defect",
                         "boundary_circulation", "h1_norm"), rows, fits, wall)


def run_spectra_suite(cfg):
    wall = {}
    rows = []
    for level in cfg.levels:
        t0 = time.perf_counter()
        mesh = _make_mesh(cfg, level)
        korn0 = korn_quotient_min(mesh, alpha=0.0)
        korn1 = korn_quotient_min(mesh, alpha=cfg.alpha if cfg.alpha > 0 else 1.0,
                                  include_boundary_term=True)
        gamma = infsup_constant(mesh)
        wall[f"level_{level}"] = time.perf_counter() - t0
        rows.append((level, mesh.mesh_size(), korn0.constant, korn1.constant,
                     gamma.constant, korn0.n_dofs))
    fits = {}
    return _report(cfg, ("level", "h", "korn_no_friction", "korn_with_friction",
                         "infsup", "n_dofs"), rows, fits, wall)


def run_ns_mms(cfg):
    wall = {}
    case = navier_stokes_mms(alpha=cfg.alpha,
                             amplitude=cfg.amplitude if cfg.amplitude else 0.15)
    rows = []
    for level in cfg.levels:
        t0 = time.perf_counter()
        mesh = _make_mesh(cfg, level)
        fe = fem.build_taylor_hood(mesh)
        sol, log = solve_navier_stokes(mesh, case["data"], options=cfg.picard)
        _, err_h1 = velocity_error_h1(fe, sol.u, case["u"].value, case["u"].grad)
        err_p = pressure_error_l2(fe, sol.p, case["p"])
        wall[f"level_{level}"] = time.perf_counter() - t0
        rows.append((level, mesh.mesh_size(), err_h1, err_p,
                     len(log.rows), sol.diagnostics["energy_residual"]))
    h = [r[1] for r in rows]
    fits = {"velocity_h1": fit_rate(h, [r[2] for r in rows]),
            "pressure_l2": fit_rate(h, [r[3] for r in rows])}
    return _report(cfg, ("level", "h", "error_h1", "error_pressure_l2",
                         "iterations", "energy_residual"), rows, fits, wall)


def run_ns_limits(cfg):
    """Nonlinear friction sweep; records the friction range that converged."""
    wall = {}
    level = cfg.levels[-1]
    mesh = _make_mesh(cfg, level)
    fe = fem.build_taylor_hood(mesh)
    H1 = forms.assemble_velocity_h1(fe)
    case = navier_stokes_mms(alpha=1.0,
                             amplitude=cfg.amplitude if cfg.amplitude else 0.15)
    base = case["data"]
    schedule = cfg.alpha_schedule or tuple(10.0 ** k for k in range(7))

    t0 = time.perf_counter()
    plan_d = build_dirichlet_plan(fe)
    A = forms.assemble_viscous(fe)
    B = forms.assemble_divergence(fe)
    ell = forms.assemble_load(fe, base)
    # Clamped nonlinear reference via the same Picard loop on the clamped plan.
    u_d = _picard_on_plan(fe, mesh, base, plan_d, cfg.picard, A, B, ell)
    ud_norm = float(np.sqrt(max(u_d @ (H1 @ u_d), 0.0)))
    wall["dirichlet_reference"] = time.perf_counter() - t0

    rows = []
    achieved = []
    t0 = time.perf_counter()
    for alpha in schedule:
        data = ProblemData(f=base.f, F=base.F, h=base.h, alpha=float(alpha))
        try:
            sol, log = solve_navier_stokes(mesh, data, options=cfg.picard)
        except Exception:
            rows.append((float(alpha), np.nan, np.nan, 0, False))
            continue
        diff = sol.u - u_d
        err = float(np.sqrt(max(diff @ (H1 @ diff), 0.0)))
        rows.append((float(alpha), err,
                     sol.diagnostics["boundary_tangential_l2"],
                     len(log.rows), True))
        achieved.append(float(alpha))
    wall["sweep"] = time.perf_counter() - t0
    fits = {"achieved_range": {"min": min(achieved) if achieved else np.nan,
                               "max": max(achieved) if achieved else np.nan,
                               "reference_h1": ud_norm,
                               "final_relative_gap":
                                   rows[-1][1] / ud_norm if achieved else np.nan}}
    return _report(cfg, ("alpha", "error_h1_vs_dirichlet",
                         "boundary_tangential_l2", "iterations", "converged"),
                   rows, fits, wall)


def _picard_on_plan(fe, mesh, data, plan, opts, A, B, ell):
    """Minimal Picard loop on an externally supplied constraint plan."""
    H1 = forms.assemble_velocity_h1(fe)
    u = np.zeros(fe.num_velocity_dofs)
    for _ in range(opts.max_iterations):
        C = forms.assemble_convection_skew(fe, u)
        system = apply_plan(plan, A + C, B, ell, symmetric=False)
        u_new, _, _ = plan.reconstruct(factor_solve(system))
        inc = u_new - u
        inc_norm = float(np.sqrt(max(inc @ (H1 @ inc), 0.0)))
        u = u_new
        un = float(np.sqrt(max(u @ (H1 @ u), 0.0)))
        if inc_norm <= opts.tol * max(un, 1.0):
            return u
    from .errors import MaxIterations
    raise MaxIterations("clamped nonlinear reference did not converge")


_RUNNERS = {
    "mms": run_mms,
    "alpha_to_zero": run_alpha_to_zero,
    "alpha_to_infinity": run_alpha_to_infinity,
    "uniform_bound": run_uniform_bound,
    "compat_disk": run_compat_disk,
    "spectra_suite": run_spectra_suite,
    "ns_mms": run_ns_mms,
    "ns_limits": run_ns_limits,
}


def run_experiment(cfg):
    """Dispatch one validated config to its runner."""
    cfg.validate()
    return _RUNNERS[cfg.kind](cfg)


def _config_echo(cfg):
    echo = asdict(cfg)
    echo["picard"] = asdict(cfg.picard)
    echo["levels"] = list(cfg.levels)
    echo["alpha_schedule"] = list(cfg.alpha_schedule)
    return echo


def _report(cfg, columns, rows, fits, wall):
    return RunReport(kind=cfg.kind, columns=columns, rows=rows, fits=fits,
                     config_echo=_config_echo(cfg), environment=_environment(),
                     wall_times=wall)


def write_report(report, outdir):
    """Write report.csv (deterministic bytes) and report.json next to it."""
    import os
    os.makedirs(outdir, exist_ok=True)
    csv_path = os.path.join(outdir, "report.csv")
    with open(csv_path, "w", encoding="ascii", newline="") as fh:
        fh.write(report.to_csv())
    json_path = os.path.join(outdir, "report.json")
    with open(json_path, "w", encoding="ascii", newline="") as fh:
        fh.write(report.to_manifest() + "\n")
    return csv_path, json_path


def parse_config(path, kind=None):
    """Read a flat ``key = value`` config with the standard sections.

    Sections: [domain], [data], [alpha], [solver], [output].  Unknown keys
    raise ``InvalidArgument`` so typos surface as config errors.
    """
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise InvalidArgument(f"config file {path!r} not found")

    cfg = ExperimentConfig(kind=kind or "mms")
    known = {
        ("domain", "kind"): lambda v: setattr(cfg, "domain", v),
        ("domain", "levels"): lambda v: setattr(
            cfg, "levels", tuple(int(s) for s in v.split(","))),
        ("domain", "radius"): lambda v: setattr(cfg, "radius", float(v)),
        ("data", "selector"): lambda v: setattr(cfg, "data", v),
        ("data", "amplitude"): lambda v: setattr(cfg, "amplitude", float(v)),
        ("alpha", "value"): lambda v: setattr(cfg, "alpha", float(v)),
        ("alpha", "star"): lambda v: setattr(cfg, "alpha_star", float(v)),
        ("alpha", "schedule"): lambda v: setattr(
            cfg, "alpha_schedule", tuple(float(s) for s in v.split(","))),
        ("solver", "seed"): lambda v: setattr(cfg, "seed", int(v)),
        ("solver", "threads"): lambda v: setattr(cfg, "threads", int(v)),
        ("solver", "max_iterations"): lambda v: setattr(
            cfg.picard, "max_iterations", int(v)),
        ("solver", "tol"): lambda v: setattr(cfg.picard, "tol", float(v)),
        ("solver", "damping"): lambda v: setattr(cfg.picard, "damping", float(v)),
        ("solver", "initial_guess"): lambda v: setattr(
            cfg.picard, "initial_guess", v),
        ("output", "dir"): lambda v: None,   # consumed by the CLI
    }
    for section in parser.sections():
        if section not in ("domain", "data", "alpha", "solver", "output"):
            raise InvalidArgument(f"unknown config section [{section}]")
        for key, value in parser.items(section):
            handler = known.get((section, key))
            if handler is None:
                raise InvalidArgument(f"unknown config key {key!r} in [{section}]")
            try:
                handler(value)
            except ValueError as exc:
                raise InvalidArgument(
                    f"bad value {value!r} for {key!r}: {exc}") from exc
    outdir = parser.get("output", "dir", fallback=None)
    return cfg, outdir
