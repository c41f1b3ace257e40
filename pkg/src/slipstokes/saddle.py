"""Direct factorization of the bordered saddle-point systems.

A single sparse LU factorization (SuperLU via scipy) handles both the
symmetric Stokes systems and the convection-augmented unsymmetric ones.
Singularity is detected twice: scipy reports exactly singular pivots, and
a post-factorization scan flags any U pivot below ``1e-13`` times the
matrix scale, which is how the unguarded disk kernel announces itself.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sparse
import scipy.sparse.linalg as spla

from .errors import NumericalError, SingularSystem

PIVOT_RTOL = 1e-13
RESIDUAL_RTOL = 1e-10


@dataclass
class SaddleSystem:
    """A reduced linear system plus bookkeeping for its block structure."""

    matrix: sparse.csr_matrix
    rhs: np.ndarray
    n_velocity: int
    n_pressure: int
    multipliers: tuple = ()
    symmetric: bool = True
    plan: object = None


def factor_solve(system, pivot_rtol=PIVOT_RTOL):
    """Solve a saddle system by sparse LU; deterministic for fixed input.

    Raises
    ------
    SingularSystem
        On an exactly singular factorization or a pivot below
        ``pivot_rtol`` times the largest matrix entry.
    NumericalError
        On non-finite input or an unacceptable final residual.
    """
    mat = system.matrix.tocsc()
    b = np.asarray(system.rhs, dtype=float)
    if mat.nnz and not np.isfinite(mat.data).all():
        raise NumericalError("non-finite entries in system matrix")
    if not np.isfinite(b).all():
        raise NumericalError("non-finite entries in right-hand side")
    if mat.shape[0] != mat.shape[1] or mat.shape[0] != b.shape[0]:
        raise NumericalError(f"shape mismatch: matrix {mat.shape}, rhs {b.shape}")

    scale = np.abs(mat.data).max() if mat.nnz else 0.0
    if scale == 0.0:
        raise SingularSystem("zero matrix")
    try:
        lu = spla.splu(mat)
    except RuntimeError as exc:
        raise SingularSystem(f"sparse factorization failed: {exc}") from exc
    pivots = np.abs(lu.U.diagonal())
    if pivots.size and pivots.min() < pivot_rtol * scale:
        raise SingularSystem(
            f"pivot {pivots.min():.3e} below {pivot_rtol:.1e} x scale {scale:.3e}; "
            "the operator has a kernel to working precision")

    x = lu.solve(b)
    if not np.isfinite(x).all():
        raise NumericalError("non-finite entries in solution")
    bnorm = np.linalg.norm(b)
    if bnorm > 0.0:
        residual = np.linalg.norm(mat @ x - b) / bnorm
        if residual > RESIDUAL_RTOL:
            raise NumericalError(
                f"solve residual {residual:.3e} exceeds {RESIDUAL_RTOL:.1e}")
    return x
