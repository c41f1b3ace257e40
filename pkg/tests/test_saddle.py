import numpy as np
import pytest
import scipy.sparse as sparse

from slipstokes.errors import NumericalError, SingularSystem
from slipstokes.saddle import SaddleSystem, factor_solve


def random_spd_saddle(n=40, m=12, seed=0):
    rng = np.random.default_rng(seed)
    R = rng.standard_normal((n, n))
    A = R @ R.T + n * np.eye(n)
    B = rng.standard_normal((m, n))
    K = np.block([[A, B.T], [B, np.zeros((m, m))]])
    b = rng.standard_normal(n + m)
    return SaddleSystem(matrix=sparse.csr_matrix(K), rhs=b,
                        n_velocity=n, n_pressure=m)


class TestFactorSolve:
    def test_matches_dense_solve(self):
        sys = random_spd_saddle()
        x = factor_solve(sys)
        ref = np.linalg.solve(sys.matrix.toarray(), sys.rhs)
        assert np.abs(x - ref).max() < 1e-9 * max(1.0, np.abs(ref).max())

    def test_residual_small(self):
        sys = random_spd_saddle(seed=4)
        x = factor_solve(sys)
        r = sys.matrix @ x - sys.rhs
        assert np.linalg.norm(r) < 1e-10 * np.linalg.norm(sys.rhs)

    def test_deterministic(self):
        a = factor_solve(random_spd_saddle(seed=2))
        b = factor_solve(random_spd_saddle(seed=2))
        assert np.array_equal(a, b)


class TestFailureModes:
    def test_zero_matrix(self):
        sys = SaddleSystem(matrix=sparse.csr_matrix((3, 3)),
                           rhs=np.ones(3), n_velocity=3, n_pressure=0)
        with pytest.raises(SingularSystem):
            factor_solve(sys)

    def test_duplicated_row_is_singular(self):
        K = np.array([[2.0, 1.0, 0.0],
                      [1.0, 3.0, 1.0],
                      [1.0, 3.0, 1.0]])
        sys = SaddleSystem(matrix=sparse.csr_matrix(K), rhs=np.ones(3),
                           n_velocity=3, n_pressure=0)
        with pytest.raises(SingularSystem):
            factor_solve(sys)

    def test_nan_matrix(self):
        K = np.eye(3)
        K[1, 1] = np.nan
        sys = SaddleSystem(matrix=sparse.csr_matrix(K), rhs=np.ones(3),
                           n_velocity=3, n_pressure=0)
        with pytest.raises(NumericalError):
            factor_solve(sys)

    def test_nan_rhs(self):
        sys = SaddleSystem(matrix=sparse.csr_matrix(np.eye(3)),
                           rhs=np.array([1.0, np.nan, 0.0]),
                           n_velocity=3, n_pressure=0)
        with pytest.raises(NumericalError):
            factor_solve(sys)

    def test_shape_mismatch(self):
        sys = SaddleSystem(matrix=sparse.csr_matrix(np.eye(3)),
                           rhs=np.ones(4), n_velocity=3, n_pressure=0)
        with pytest.raises(NumericalError):
            factor_solve(sys)

    def test_pivot_tolerance_is_adjustable(self):
        # Nearly singular but resolvable when the pivot gate is loosened.
        K = np.diag([1.0, 1.0, 1e-14])
        sys = SaddleSystem(matrix=sparse.csr_matrix(K), rhs=np.ones(3),
                           n_velocity=3, n_pressure=0)
        with pytest.raises(SingularSystem):
            factor_solve(sys)
        x = factor_solve(sys, pivot_rtol=1e-16)
        assert x[2] == pytest.approx(1e14, rel=1e-12)
