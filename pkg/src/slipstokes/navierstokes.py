"""Stationary Navier-Stokes via damped Picard iteration.

Each sweep freezes the transport field at the previous iterate and solves
the resulting Stokes-plus-skew-convection system.  Because the convection
matrix is exactly antisymmetric, the converged iterate satisfies the same
energy identity as the linear problem, and the iteration contracts whenever
the data is small in the sense of the computed smallness indicator.
"""

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from . import fem, forms
from .constraints import apply_plan, build_constraint_plan
from .errors import InvalidArgument, MaxIterations, NumericalError
from .fields import rigid_rotation
from .mesh import boundary_frames
from .saddle import factor_solve
from .spectra import korn_quotient_min
from .stokes import Solution, _diagnostics, solve_stokes

DIVERGENCE_FACTOR = 1e6


@dataclass
class PicardOptions:
    """Iteration controls for the nonlinear solve."""

    max_iterations: int = 50
    tol: float = 1e-10
    damping: float = 1.0
    initial_guess: object = "stokes"   # "zero", "stokes", or a coefficient array

    def validate(self):
        if self.max_iterations < 1:
            raise InvalidArgument("max_iterations must be at least 1")
        if not (0.0 < self.damping <= 1.0):
            raise InvalidArgument(f"damping must lie in (0, 1], got {self.damping}")
        if not isinstance(self.initial_guess, np.ndarray) \
                and self.initial_guess not in ("zero", "stokes"):
            raise InvalidArgument(f"unknown initial guess {self.initial_guess!r}")
        if not (self.tol > 0.0):
            raise InvalidArgument("tolerance must be positive")


@dataclass
class IterationLog:
    """Per-sweep convergence history.

    ``rows`` hold (iteration, increment, energy_residual) where the
    increment is the H1 norm of the velocity update.
    """

    rows: list = field(default_factory=list)
    converged: bool = False

    def add(self, iteration, increment, energy_residual):
        self.rows.append((int(iteration), float(increment), float(energy_residual)))

    def to_csv(self):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["iteration", "increment", "energy_residual"])
        for it, inc, er in self.rows:
            writer.writerow([it, f"{inc:.17g}", f"{er:.17g}"])
        return buf.getvalue()


def solve_navier_stokes(mesh, data, options=None, quad_order=6):
    """Damped Picard iteration for the stationary Navier-Stokes system.

    Returns ``(Solution, IterationLog)``.  Raises ``MaxIterations`` when the
    increment fails to meet tolerance within the budget or grows by the
    divergence factor, which is the signature of data outside the
    contraction regime.
    """
    opts = options or PicardOptions()
    opts.validate()
    fe = fem.build_taylor_hood(mesh)
    frames = boundary_frames(mesh)
    plan = build_constraint_plan(fe, frames, data)
    if plan.guard is not None:
        raise InvalidArgument(
            "nonlinear solves require friction somewhere on the boundary "
            "or a non-axisymmetric domain")

    A = forms.assemble_viscous(fe) + forms.assemble_friction(fe, data.alpha)
    B = forms.assemble_divergence(fe)
    ell = forms.assemble_load(fe, data, quad_order=quad_order)
    H1 = forms.assemble_velocity_h1(fe)

    def h1_norm(v):
        return float(np.sqrt(max(v @ (H1 @ v), 0.0)))

    if isinstance(opts.initial_guess, np.ndarray):
        u = np.asarray(opts.initial_guess, dtype=float)
        if u.shape != (fe.num_velocity_dofs,):
            raise InvalidArgument(
                f"initial guess has shape {u.shape}, expected "
                f"({fe.num_velocity_dofs},)")
    elif opts.initial_guess == "stokes":
        u = solve_stokes(mesh, data, plan=plan, quad_order=quad_order).u
    else:
        u = np.zeros(fe.num_velocity_dofs)

    log = IterationLog()
    first_increment = None
    x = None
    system = None
    p = np.zeros(fe.num_pressure_dofs)
    for it in range(1, opts.max_iterations + 1):
        C = forms.assemble_convection_skew(fe, u, quad_order=quad_order)
        system = apply_plan(plan, A + C, B, ell, symmetric=False)
        x = factor_solve(system)
        u_new, p, _ = plan.reconstruct(x)
        if opts.damping != 1.0:
            u_new = opts.damping * u_new + (1.0 - opts.damping) * u
        increment = h1_norm(u_new - u)
        energy_lhs = float(u_new @ (A @ u_new))
        energy_rhs = float(ell @ u_new)
        energy_residual = abs(energy_lhs - energy_rhs) / max(abs(energy_lhs), 1.0)
        log.add(it, increment, energy_residual)
        if not np.isfinite(increment):
            raise MaxIterations("iteration produced non-finite increment; "
                                "data outside the contraction regime")
        if first_increment is None:
            first_increment = increment
        elif increment > DIVERGENCE_FACTOR * max(first_increment, 1.0):
            raise MaxIterations(
                f"increment grew to {increment:.3e}; data outside the "
                "contraction regime")
        u = u_new
        if increment <= opts.tol * max(h1_norm(u), 1.0):
            log.converged = True
            break
    if not log.converged:
        raise MaxIterations(
            f"no convergence in {opts.max_iterations} iterations "
            f"(last increment {log.rows[-1][1]:.3e})")

    if opts.damping != 1.0:
        # One undamped polish so the returned pair solves its own
        # linearization exactly; the increment is already below tolerance.
        C = forms.assemble_convection_skew(fe, u, quad_order=quad_order)
        system = apply_plan(plan, A + C, B, ell, symmetric=False)
        x = factor_solve(system)
        u, p, _ = plan.reconstruct(x)

    diag = _diagnostics(fe, plan, system, x, u, p, A, ell)
    C = forms.assemble_convection_skew(fe, u, quad_order=quad_order)
    final = apply_plan(plan, A + C, B, ell, symmetric=False)
    bnorm = np.linalg.norm(final.rhs)
    diag["nonlinear_residual"] = float(
        np.linalg.norm(final.matrix @ x - final.rhs) / (bnorm if bnorm > 0 else 1.0))
    diag["picard_iterations"] = len(log.rows)
    return Solution(u=u, p=p, diagnostics=diag, fe=fe, plan=plan), log


def trilinear_defects(mesh, w, u, v, quad_order=6):
    """Structural defects of the skew trilinear form for given coefficients.

    Returns a dict with

    * ``skew_diagonal``: |v^T C(w) v| relative to the evaluation scale
      (zero up to rounding by construction),
    * ``antisymmetry``: max-norm of C + C^T relative to C (exactly zero),
    * ``beta_defect``: |u^T C(beta) beta| with beta the interpolated rigid
      rotation; a geometric residue that vanishes under refinement for
      fields tangent to the circle.
    """
    fe = fem.build_taylor_hood(mesh)
    C = forms.assemble_convection_skew(fe, w, quad_order=quad_order)
    cv = C @ v
    scale = np.linalg.norm(cv) * np.linalg.norm(v)
    skew_diag = abs(float(v @ cv)) / max(scale, np.finfo(float).tiny)
    sym = C + C.T
    cmax = np.abs(C.data).max() if C.nnz else 1.0
    antisym = (np.abs(sym.data).max() / cmax) if sym.nnz else 0.0

    beta = fem.interpolate(fe, rigid_rotation().value)
    C_beta = forms.assemble_convection_skew(fe, beta, quad_order=quad_order)
    beta_defect = abs(float(u @ (C_beta @ beta)))
    return {"skew_diagonal": skew_diag, "antisymmetry": antisym,
            "beta_defect": beta_defect}


def smallness_indicator(mesh, data, n_triples=200, seed=0, quad_order=6):
    """Computable uniqueness indicator for the nonlinear problem.

    S = C_b / C_coer^2 * ( ||f||_{L^{6/5}} + ||F||_{L2} + ||h||_{L2(Gamma)} )

    where ``C_b`` is the largest sampled ratio |c(w; u, v)| / (|w| |u| |v|)
    in H1 over a seeded pseudo-random family of constrained triples, and
    ``C_coer`` is the coercivity constant of the bilinear form over the
    constrained space.  S < 1 certifies a contraction; the tests use the
    stronger S < 0.5.  Linear in the data: doubling all data doubles S.
    """
    fe = fem.build_taylor_hood(mesh)
    frames = boundary_frames(mesh)
    plan = build_constraint_plan(fe, frames, data)
    H1 = forms.assemble_velocity_h1(fe)

    def h1_norm(vec):
        return float(np.sqrt(max(vec @ (H1 @ vec), 0.0)))

    rng = np.random.default_rng(seed)
    nf = len(plan.free)

    def random_noise():
        z = np.zeros(plan.n_velocity)
        z[plan.free] = rng.standard_normal(nf)
        return plan.rotation @ z

    def random_smooth():
        # The trilinear supremum is approached by smooth fields, so raw
        # coefficient noise alone underestimates it badly.  Interpolate a
        # random low-order field, then project into the constrained space
        # (the frame rotation is orthogonal blockwise).
        c = rng.standard_normal((2, 6))

        def field(p):
            x, y = p[:, 0], p[:, 1]
            basis = np.stack([np.ones_like(x), x, y, x * y,
                              np.sin(np.pi * x) * np.sin(np.pi * y),
                              np.cos(np.pi * x) * np.cos(np.pi * y)], axis=1)
            return np.stack([basis @ c[0], basis @ c[1]], axis=1)

        coeffs = fem.interpolate(fe, field, "velocity")
        hat = plan.rotation.T @ coeffs
        z = np.zeros(plan.n_velocity)
        z[plan.free] = hat[plan.free]
        return plan.rotation @ z

    pairs_per_w = 10
    n_w = max(1, n_triples // pairs_per_w)
    c_b = 0.0
    for k in range(n_w):
        sample = random_smooth if k % 2 == 0 else random_noise
        w = sample()
        C = forms.assemble_convection_skew(fe, w, quad_order=quad_order)
        nw = h1_norm(w)
        for j in range(pairs_per_w):
            uu = sample()
            vv = sample()
            val = abs(float(vv @ (C @ uu)))
            c_b = max(c_b, val / (nw * h1_norm(uu) * h1_norm(vv)))

    alpha_for_coer = data.alpha
    c_coer = korn_quotient_min(mesh, alpha=alpha_for_coer,
                               include_boundary_term=True).constant
    if c_coer <= 0.0:
        raise InvalidArgument("coercivity constant vanishes; indicator undefined")

    rule = fem.quadrature(quad_order)
    w = rule.tri_weights[:, None] * fe.det[None, :]
    pts = fe.quad_coords(rule)
    flat = pts.reshape(-1, 2)
    data_norm = 0.0
    if data.f is not None:
        fv = fem._eval_vector(data.f, flat).reshape(pts.shape)
        mag = np.sqrt(fv[..., 0] ** 2 + fv[..., 1] ** 2)
        data_norm += float(np.sum(w * mag ** 1.2) ** (1.0 / 1.2))
    if data.F is not None:
        if callable(data.F):
            Fv = np.asarray(data.F(flat), dtype=float).reshape(*pts.shape[:2], 2, 2)
        else:
            Fv = np.broadcast_to(np.asarray(data.F, dtype=float),
                                 (*pts.shape[:2], 2, 2))
        data_norm += float(np.sqrt(np.sum(w[..., None, None] * Fv ** 2)))
    if data.h is not None:
        from .fields import eval_boundary_field
        bpts = fe.boundary_quad_coords(rule)
        ht = eval_boundary_field(data.h, bpts, mesh.boundary_normals,
                                 mesh.boundary_tangents)
        ww = mesh.boundary_lengths()[:, None] * rule.seg_weights[None, :]
        data_norm += float(np.sqrt(np.sum(ww * ht ** 2)))

    return c_b / c_coer ** 2 * data_norm
