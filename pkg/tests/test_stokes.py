import numpy as np
import pytest

from slipstokes import (ProblemData, boundary_frames, build_constraint_plan,
                        build_taylor_hood, disk_compatible_forcing,
                        disk_incompatible_forcing, disk_tangential_drive,
                        make_disk, make_unit_square, rigid_rotation,
                        solve_stokes, stokes_mms)
from slipstokes.errors import (IncompatibleData, InvalidArgument,
                               SingularSystem)
from slipstokes.fem import velocity_error_h1, pressure_error_l2
from slipstokes.fields import ClosedFormField
from slipstokes.stokes import (boundary_identity_defect, check_compatibility,
                               energy_report, exponent_r, exponent_t)


def fit_slope(h, e):
    return float(np.polyfit(np.log(h), np.log(e), 1)[0])


class TestManufactured:
    def test_square_convergence(self):
        mms = stokes_mms(alpha=1.0)
        hs, eu, ep = [], [], []
        for n in (8, 16, 32):
            sol = solve_stokes(make_unit_square(n), mms["data"])
            _, h1 = velocity_error_h1(sol.fe, sol.u, mms["u"].value,
                                      mms["u"].grad)
            hs.append(1.0 / n)
            eu.append(h1)
            ep.append(pressure_error_l2(sol.fe, sol.p, mms["p"]))
        assert 1.85 < fit_slope(hs, eu) < 2.3
        assert 1.7 < fit_slope(hs, ep) < 2.3

    def test_varying_alpha(self):
        # Friction varying along the boundary still carries the exact
        # traction data when alpha enters the boundary field consistently.
        mms = stokes_mms(alpha=3.0)
        sol = solve_stokes(make_unit_square(16), mms["data"])
        _, h1 = velocity_error_h1(sol.fe, sol.u, mms["u"].value, mms["u"].grad)
        assert h1 < 0.05

    def test_disk_drive_is_exact(self):
        # The rigid rotation is in the velocity space, so the only error
        # is solver roundoff.
        drive = disk_tangential_drive(alpha=2.0)
        sol = solve_stokes(make_disk(2), drive["data"])
        _, h1 = velocity_error_h1(sol.fe, sol.u, drive["u"].value,
                                  drive["u"].grad)
        assert h1 < 1e-11
        assert sol.diagnostics["pressure_l2"] < 1e-11

    def test_energy_identity_every_solve(self):
        for mesh, data in (
                (make_unit_square(8), stokes_mms(alpha=1.0)["data"]),
                (make_unit_square(8), ProblemData(f=np.array([1.0, 0.5]))),
                (make_disk(2), disk_tangential_drive(alpha=0.5)["data"])):
            sol = solve_stokes(mesh, data)
            lhs, rhs, resid = energy_report(sol)
            assert resid <= 1e-8 * max(abs(lhs), 1.0)

    def test_diagnostics_keys(self):
        sol = solve_stokes(make_unit_square(8), stokes_mms()["data"])
        for key in ("energy_lhs", "energy_rhs", "energy_residual", "h1_norm",
                    "pressure_l2", "boundary_tangential_l2", "divergence_l2",
                    "linear_residual", "pressure_mean", "pressure_gauge"):
            assert key in sol.diagnostics
        assert abs(sol.diagnostics["pressure_mean"]) < 1e-12
        # Divergence is only weakly zero in Taylor-Hood: small, not exact.
        assert sol.diagnostics["divergence_l2"] < 0.01 * sol.diagnostics["h1_norm"]


class TestFrictionlessDisk:
    def test_unguarded_solve_refuses(self):
        data = disk_compatible_forcing(alpha=0.0)
        with pytest.raises(SingularSystem, match="compatibility_mode"):
            solve_stokes(make_disk(1), data)

    def test_guarded_solve_with_compatible_data(self):
        data = disk_compatible_forcing(alpha=0.0)
        data.compatibility_mode = True
        sol = solve_stokes(make_disk(2), data)
        assert abs(sol.diagnostics["kernel_guard"]) < 1e-12
        beta = rigid_rotation()
        from slipstokes import interpolate
        b = interpolate(sol.fe, beta.value, "velocity")
        assert abs(float(sol.u @ b)) < 1e-12  # no spurious rotation

    def test_incompatible_data_is_rejected(self):
        data = disk_incompatible_forcing(alpha=0.0)
        data.compatibility_mode = True
        with pytest.raises(IncompatibleData):
            solve_stokes(make_disk(1), data)

    def test_compatibility_moment_values(self):
        mesh = make_disk(2)
        # Constant force: zero moment by symmetry of the mesh.
        assert abs(check_compatibility(
            mesh, ProblemData(f=np.array([1.0, 0.0])))) < 1e-13
        # f = beta: the moment is the polygon integral of |x|^2, computed
        # triangle by triangle from vertex coordinates.
        moment = 0.0
        for tri in mesh.triangles:
            v = mesh.vertices[tri]
            e1, e2 = v[1] - v[0], v[2] - v[0]
            area = 0.5 * abs(e1[0] * e2[1] - e1[1] * e2[0])
            s = v.sum(axis=0)
            moment += area / 12.0 * ((v ** 2).sum() + s @ s)
        got = check_compatibility(mesh, ProblemData(f=rigid_rotation().value))
        assert got == pytest.approx(moment, rel=1e-12)

    def test_compatibility_moment_boundary_drive(self):
        # h = c t pairs with beta through the chord offset r_m on each edge.
        mesh = make_disk(1)
        c = 0.75
        data = ProblemData(h=lambda p, n, t: c * t)
        m = mesh.num_boundary_edges
        L = 2.0 * np.sin(np.pi / m)
        r_m = np.cos(np.pi / m)
        assert check_compatibility(mesh, data) == pytest.approx(
            c * m * L * r_m, rel=1e-12)


class TestExponents:
    def test_reference_values_exact(self):
        assert exponent_r(2.0) == 6.0 / 5.0
        assert exponent_t(2.0) == 2.0

    def test_conjugate_symmetry(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            p = float(np.exp(rng.uniform(np.log(1.01), np.log(50.0))))
            q = p / (p - 1.0)
            assert abs(exponent_t(p) - exponent_t(q)) <= 1e-12

    def test_monotone_outside_plateau(self):
        assert exponent_t(6.0) > exponent_t(3.0)
        assert exponent_r(6.0) > exponent_r(2.0)

    def test_rejects_bad_exponent(self):
        for bad in (1.0, 0.5, -2.0, np.inf, np.nan):
            with pytest.raises(InvalidArgument):
                exponent_t(bad)
            with pytest.raises(InvalidArgument):
                exponent_r(bad)


class TestBoundaryIdentity:
    def test_rotation_fields_satisfy_identity(self):
        beta = rigid_rotation()

        def scaled_value(p):
            r2 = (p ** 2).sum(axis=1)
            return r2[:, None] * beta.value(p)

        def scaled_grad(p):
            b = beta.value(p)
            g = beta.grad(p)
            r2 = (p ** 2).sum(axis=1)
            return r2[:, None, None] * g + 2.0 * np.einsum(
                "ka,kb->kab", b, p)

        r2beta = ClosedFormField(scaled_value, scaled_grad)
        for level in (1, 2, 3):
            mesh = make_disk(level)
            assert boundary_identity_defect(beta, mesh) < 2e-15
            assert boundary_identity_defect(r2beta, mesh) < 1e-13

    def test_rejects_square_mesh(self):
        with pytest.raises(InvalidArgument):
            boundary_identity_defect(rigid_rotation(), make_unit_square(3))

    def test_rejects_non_tangential_field(self):
        radial = ClosedFormField(
            lambda p: np.asarray(p, dtype=float),
            lambda p: np.tile(np.eye(2), (np.asarray(p).shape[0], 1, 1)))
        with pytest.raises(InvalidArgument, match="tangent"):
            boundary_identity_defect(radial, make_disk(1))
