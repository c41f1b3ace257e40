"""Discrete spectral constants: Korn quotients, inf-sup, rotation inequalities.

All eigenproblems are posed on the impermeability-constrained spaces.
Dense symmetric solvers handle problems up to ``DENSE_LIMIT`` unknowns;
larger ones use shift-inverted Lanczos with a deterministic start vector.
Eigenvalues below a rank-style floor (machine epsilon times problem size)
are reported as exactly zero, which is how the disk kernel shows up: the
interpolated rigid rotation satisfies every nodal constraint exactly, so
the constrained strain form is singular to machine precision, not merely
small.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sparse
import scipy.sparse.linalg as spla

from . import fem, forms
from .constraints import build_constraint_plan
from .errors import InvalidArgument, SingularSystem
from .fields import ProblemData, rigid_rotation
from .mesh import boundary_frames

DENSE_LIMIT = 2000
FLOOR_FACTOR = 100.0


@dataclass
class SpectralReport:
    """One spectral constant with the context needed to compare runs."""

    constant: float
    mesh_size: float
    n_dofs: int
    method: str
    alpha_descriptor: str = ""
    floor: float = 0.0
    detail: dict | None = None


def _alpha_descriptor(alpha):
    if callable(alpha):
        return "callable"
    if isinstance(alpha, dict):
        return "per-marker"
    return f"{float(alpha):.6g}"


def _zero_floor(n):
    return FLOOR_FACTOR * n * np.finfo(float).eps


def _reduced(matrix, plan):
    T = plan.rotation
    f = plan.free
    return (T.T @ matrix @ T).tocsr()[f][:, f]


def _smallest_eig(A, M, n):
    """Smallest eigenvalue of the symmetric pencil (A, M), M positive definite."""
    if n <= DENSE_LIMIT:
        vals = scipy.linalg.eigh(A.toarray(), M.toarray(),
                                 eigvals_only=True, subset_by_index=[0, 0])
        return float(vals[0]), "dense"
    rng = np.random.default_rng(0)
    v0 = rng.standard_normal(n)
    # Negative shift keeps the shifted operator definite even when A itself
    # is singular (the kernel case).
    vals = spla.eigsh(A.tocsc(), k=1, M=M.tocsc(), sigma=-0.1,
                      which="LM", v0=v0, return_eigenvectors=False)
    return float(vals[0]), "shift-invert"


def korn_quotient_min(mesh, alpha=0.0, include_boundary_term=False):
    """Minimum of the coercivity quotient over the constrained space.

    quotient(u) = (2 ||D(u)||^2 [+ int_Gamma alpha |u.t|^2]) / ||u||_{H1}^2

    Positive uniformly on the square; collapses to zero on the disk without
    friction, where the rigid rotation is an exact discrete kernel vector.
    Values below the rank floor are reported as exactly 0.
    """
    fe = fem.build_taylor_hood(mesh)
    frames = boundary_frames(mesh)
    data = ProblemData(alpha=alpha)
    plan = build_constraint_plan(fe, frames, data)
    A = forms.assemble_viscous(fe)
    if include_boundary_term:
        A = A + forms.assemble_friction(fe, alpha)
    A_red = _reduced(A, plan)
    M_red = _reduced(forms.assemble_velocity_h1(fe), plan)
    n = A_red.shape[0]
    lam, method = _smallest_eig(A_red, M_red, n)
    floor = _zero_floor(n)
    constant = 0.0 if lam < floor else float(lam)
    return SpectralReport(constant=constant, mesh_size=mesh.mesh_size(),
                          n_dofs=n, method=method,
                          alpha_descriptor=_alpha_descriptor(alpha),
                          floor=floor,
                          detail={"raw_eigenvalue": float(lam),
                                  "boundary_term": include_boundary_term})


def _divergence_schur(mesh, dense):
    """Schur complement S = B K^{-1} B^T with K the constrained H1 Gram."""
    fe = fem.build_taylor_hood(mesh)
    frames = boundary_frames(mesh)
    plan = build_constraint_plan(fe, frames, ProblemData(alpha=1.0))
    K = _reduced(forms.assemble_velocity_h1(fe), plan)
    T = plan.rotation
    B = (forms.assemble_divergence(fe) @ T).tocsr()[:, plan.free]
    Mp = forms.assemble_pressure_mass(fe)
    Bt = B.T.toarray()
    if dense:
        X = scipy.linalg.solve(K.toarray(), Bt, assume_a="pos")
    else:
        lu = spla.splu(K.tocsc())
        X = lu.solve(Bt)
    S = B @ X
    return np.asarray(S), Mp.toarray(), K.shape[0], fe


def infsup_constant(mesh, alpha=0.0, cross_check=False):
    """Discrete inf-sup constant of the divergence/velocity-H1 pairing.

    gamma = min over mean-free pressures of
            sqrt( q^T B K^{-1} B^T q / q^T M_p q )

    Neither the pairing nor the constrained space depends on the friction
    coefficient, so the report is bitwise identical across any alpha sweep;
    alpha only labels the report.
    """
    S, Mp, n_vel, fe = _divergence_schur(mesh, dense=False)
    vals = scipy.linalg.eigh(S, Mp, eigvals_only=True)
    floor = _zero_floor(len(vals)) * max(vals.max(), 1.0)
    positive = vals[vals > floor]
    if positive.size == 0:
        raise SingularSystem("divergence coupling has no positive spectrum")
    gamma = float(np.sqrt(positive[0]))
    detail = {"zero_modes": int(len(vals) - len(positive))}
    if cross_check:
        S2, Mp2, _, _ = _divergence_schur(mesh, dense=True)
        vals2 = scipy.linalg.eigh(S2, Mp2, eigvals_only=True)
        pos2 = vals2[vals2 > floor]
        detail["dense_oracle"] = float(np.sqrt(pos2[0]))
    return SpectralReport(constant=gamma, mesh_size=mesh.mesh_size(),
                          n_dofs=n_vel, method="schur",
                          alpha_descriptor=_alpha_descriptor(alpha),
                          floor=floor, detail=detail)


def _rank_one_smallest(A, g, M, n):
    """Smallest eigenvalue of (A + g g^T, M) without densifying the rank-1 term."""
    if n <= DENSE_LIMIT:
        dense = A.toarray() + np.outer(g, g)
        vals = scipy.linalg.eigh(dense, M.toarray(), eigvals_only=True,
                                 subset_by_index=[0, 0])
        return float(vals[0]), "dense"
    sigma = -0.1
    base = (A - sigma * M).tocsc()
    lu = spla.splu(base)
    # Sherman-Morrison inverse of (base + g g^T)
    w = lu.solve(g)
    denom = 1.0 + g @ w

    def op(x):
        y = lu.solve(x)
        return y - w * (g @ y) / denom

    inv = spla.LinearOperator((n, n), matvec=op)
    rng = np.random.default_rng(0)
    v0 = rng.standard_normal(n)
    vals = spla.eigsh(A.tocsc(), k=1, M=M.tocsc(), sigma=sigma, which="LM",
                      v0=v0, OPinv=inv, return_eigenvectors=False)
    return float(vals[0]), "shift-invert"


def beta_inequality_checks(mesh):
    """Discrete constants of the two rotation-moment inequalities on the disk.

    For constrained fields u on the disk,

        ||u||_{L2}^2 <= C_vol  [ ||D(u)||^2 + ( int_Omega u.beta )^2 ]
        ||u||_{L2}^2 <= C_bnd  [ ||D(u)||^2 + ( int_Gamma u.beta )^2 ]

    The reports carry the minimum eigenvalue of each right-hand quadratic
    form against the L2 mass (the reciprocal of the optimal constant),
    which must stay bounded away from zero under refinement.
    """
    if mesh.domain_tag != "disk":
        raise InvalidArgument("rotation-moment inequalities are disk statements")
    fe = fem.build_taylor_hood(mesh)
    frames = boundary_frames(mesh)
    plan = build_constraint_plan(fe, frames, ProblemData(alpha=0.0))
    T = plan.rotation
    f = plan.free
    A_half = 0.5 * _reduced(forms.assemble_viscous(fe), plan)
    M_l2 = _reduced(forms.assemble_velocity_mass(fe), plan)
    n = A_half.shape[0]

    beta = rigid_rotation()
    mass = forms.assemble_velocity_mass(fe, quad_order=6)
    beta_coeffs = fem.interpolate(fe, beta.value)
    g_vol = (T.T @ (mass @ beta_coeffs))[f]
    g_bnd = (T.T @ forms.boundary_rotation_functional(fe))[f]

    reports = {}
    for name, g in (("volume", g_vol), ("boundary", g_bnd)):
        lam, method = _rank_one_smallest(A_half, g, M_l2, n)
        floor = _zero_floor(n)
        constant = 0.0 if lam < floor else float(lam)
        reports[name] = SpectralReport(
            constant=constant, mesh_size=mesh.mesh_size(), n_dofs=n,
            method=method, alpha_descriptor="0", floor=floor,
            detail={"optimal_inequality_constant":
                    float(1.0 / lam) if lam > floor else np.inf})
    return reports
