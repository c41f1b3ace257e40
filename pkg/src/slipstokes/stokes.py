"""Stationary Stokes solves with slip-with-friction boundary conditions.

``solve_stokes`` assembles the viscous and friction forms, applies the
impermeability constraints with the pressure gauge (and, on the disk with
vanishing friction, the rotation guard), factorizes and returns a
:class:`Solution` whose diagnostics certify the discrete energy identity

    2 ||D(u)||^2 + int_Gamma alpha |u.t|^2  =  l(u)

to solver precision on every successful solve.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from . import fem, forms
from .constraints import apply_plan, build_constraint_plan
from .errors import (IncompatibleData, InvalidArgument, NumericalError,
                     SingularSystem)
from .fem import interpolate
from .fields import rigid_rotation
from .mesh import boundary_frames
from .saddle import factor_solve

ENERGY_RTOL = 1e-8
COMPAT_RTOL = 1e-10


@dataclass
class Solution:
    """Velocity/pressure coefficients with solve diagnostics.

    ``diagnostics`` always contains: energy_lhs, energy_rhs, energy_residual,
    h1_norm, pressure_l2, boundary_tangential_l2, divergence_l2,
    linear_residual, pressure_mean, and the multiplier values.
    """

    u: np.ndarray
    p: np.ndarray
    diagnostics: dict
    fe: object = None
    plan: object = None

    def diagnostics_json(self):
        return json.dumps(self.diagnostics, indent=2, sort_keys=True)


def _diagnostics(fe, plan, system, x, u, p, A_total, ell):
    energy_lhs = float(u @ (A_total @ u))
    energy_rhs = float(ell @ u)
    energy_residual = abs(energy_lhs - energy_rhs)
    if energy_residual > ENERGY_RTOL * max(abs(energy_lhs), 1.0):
        raise NumericalError(
            f"energy identity violated: |{energy_lhs:.6e} - {energy_rhs:.6e}|")
    rep = fem.norms(fe, u)
    bnorm = np.linalg.norm(system.rhs)
    linear_residual = float(np.linalg.norm(system.matrix @ x - system.rhs)
                            / (bnorm if bnorm > 0 else 1.0))
    _, _, mult = plan.reconstruct(x)
    diag = {
        "energy_lhs": energy_lhs,
        "energy_rhs": energy_rhs,
        "energy_residual": energy_residual,
        "h1_norm": rep.h1,
        "h1_seminorm": rep.h1_semi,
        "l2_norm": rep.l2,
        "boundary_tangential_l2": rep.boundary_l2_tangential,
        "divergence_l2": rep.divergence_l2,
        "pressure_l2": fem.norms(fe, p).l2,
        "pressure_mean": fem.pressure_mean(fe, p),
        "linear_residual": linear_residual,
    }
    for name, value in mult.items():
        diag[name] = float(value)
    return diag


def solve_stokes(mesh, data, plan=None, quad_order=6):
    """Solve the Stokes system; returns a :class:`Solution`.

    On the disk with vanishing friction the operator has the rigid rotation
    in its kernel; such problems are only accepted with
    ``data.compatibility_mode`` set, which activates the guard multiplier.
    """
    fe = fem.build_taylor_hood(mesh)
    if plan is None:
        frames = boundary_frames(mesh)
        plan = build_constraint_plan(fe, frames, data)
    if plan.guard is not None and not data.compatibility_mode:
        raise SingularSystem(
            "disk with vanishing friction: the rigid rotation spans the kernel; "
            "set compatibility_mode to solve with the rotation guard")

    A = forms.assemble_viscous(fe) + forms.assemble_friction(fe, data.alpha)
    B = forms.assemble_divergence(fe)
    ell = forms.assemble_load(fe, data, quad_order=quad_order)
    if plan.guard is not None:
        # The guard multiplier would silently absorb an incompatible load,
        # so reject data whose rotation pairing is not zero.
        beta = interpolate(fe, rigid_rotation().value, "velocity")
        defect = float(ell @ beta)
        scale = float(np.linalg.norm(ell) * np.linalg.norm(beta)) or 1.0
        if abs(defect) > COMPAT_RTOL * scale:
            raise IncompatibleData(
                f"rotation pairing of the data is {defect:.3e} "
                f"(relative {abs(defect) / scale:.3e}); the frictionless "
                "disk problem needs data orthogonal to the rigid rotation")
    system = apply_plan(plan, A, B, ell, symmetric=True)
    x = factor_solve(system)
    u, p, _ = plan.reconstruct(x)
    diag = _diagnostics(fe, plan, system, x, u, p, A, ell)
    return Solution(u=u, p=p, diagnostics=diag, fe=fe, plan=plan)


def energy_report(solution):
    """(lhs, rhs, residual) of the discrete energy identity."""
    d = solution.diagnostics
    return d["energy_lhs"], d["energy_rhs"], d["energy_residual"]


def exponent_t(p, eps=1e-3):
    """Integrability exponent required of the friction coefficient.

    Piecewise in the Lebesgue exponent ``p`` of the data: exactly 2 at
    ``p = 2``; any value above 2 for ``3/2 <= p <= 3``; any value above
    ``(2/3) max(p, p')`` otherwise.  Strict branches return the bound plus
    ``eps``.  Symmetric under conjugation: ``t(p) == t(p')``.
    """
    p = float(p)
    if not np.isfinite(p) or p <= 1.0:
        raise InvalidArgument(f"exponent p must lie in (1, inf), got {p!r}")
    if p == 2.0:
        return 2.0
    if 1.5 <= p <= 3.0:
        return 2.0 + eps
    q = p / (p - 1.0)
    return (2.0 / 3.0) * max(p, q) + eps


def exponent_r(p, eps=1e-3):
    """Integrability exponent required of the volume force.

    ``max(1, 3p/(p+3))`` except at the critical ``p = 3/2`` where the
    inequality is strict and ``1 + eps`` is returned.  ``r(2) = 6/5``.
    """
    p = float(p)
    if not np.isfinite(p) or p <= 1.0:
        raise InvalidArgument(f"exponent p must lie in (1, inf), got {p!r}")
    if p == 1.5:
        return 1.0 + eps
    return max(1.0, 3.0 * p / (p + 3.0))


def boundary_identity_defect(u_field, mesh, quad_order=4):
    """Max defect of the tangential strain identity on the exact circle.

    For fields tangent to the circle, ``2 n^T D(u) t = curl(u) - 2 kappa (u.t)``
    pointwise.  Evaluation happens at the boundary quadrature points projected
    radially onto the circle, with the exact frame ``n = x/|x|``.  Fields with
    ``|u.n| > 1e-10`` anywhere on the circle are rejected.
    """
    if mesh.domain_tag != "disk":
        raise InvalidArgument("the strain identity check requires a disk mesh")
    radius = float(mesh.metadata.get("radius", 1.0))
    kappa = 1.0 / radius
    rule = fem.quadrature(quad_order)
    fe = fem.build_taylor_hood(mesh)
    pts = fe.boundary_quad_coords(rule).reshape(-1, 2)
    r = np.hypot(pts[:, 0], pts[:, 1])
    circle = pts * (radius / r)[:, None]
    n = circle / radius
    t = np.column_stack([-n[:, 1], n[:, 0]])

    vals = np.asarray(u_field.value(circle), dtype=float)
    normal_part = np.abs(np.einsum("ka,ka->k", vals, n)).max()
    if normal_part > 1e-10:
        raise InvalidArgument(
            f"field is not tangent to the circle: max |u.n| = {normal_part:.3e}")

    g = np.asarray(u_field.grad(circle), dtype=float)
    d = 0.5 * (g + np.swapaxes(g, 1, 2))
    tdn = np.einsum("ka,kab,kb->k", n, d, t)
    curl = g[:, 1, 0] - g[:, 0, 1]
    ut = np.einsum("ka,ka->k", vals, t)
    defect = np.abs(2.0 * tdn - curl + 2.0 * kappa * ut)
    return float(defect.max())


def check_compatibility(mesh, data, quad_order=6):
    """Moment of the data against the rigid rotation.

    Returns ``int f.beta - int F:grad(beta) + int_Gamma h.beta`` computed with
    the same quadrature as the load assembly; solvability with vanishing
    friction on the disk requires this to vanish.
    """
    fe = fem.build_taylor_hood(mesh)
    beta = fem.interpolate(fe, rigid_rotation().value)
    ell = forms.assemble_load(fe, data, quad_order=quad_order)
    return float(ell @ beta)
