"""The frictionless disk: an exact kernel, a guard row, a compatibility gate.

On a rotationally symmetric domain with zero friction the rigid rotation
beta(x) = (-x2, x1) costs no energy and satisfies every constraint, so
the Stokes operator is singular.  The solver refuses such problems unless
compatibility mode is requested, in which case a rotation-moment
multiplier row restores unique solvability, and the data must pair to
zero with beta or the problem has no solution at all.
"""

import numpy as np

from slipstokes import (ProblemData, disk_compatible_forcing,
                        disk_incompatible_forcing, disk_tangential_drive,
                        interpolate, make_disk, rigid_rotation, solve_stokes)
from slipstokes.errors import IncompatibleData, SingularSystem
from slipstokes.stokes import check_compatibility

mesh = make_disk(2)

print("== 1. the unguarded solve refuses ==")
try:
    solve_stokes(mesh, disk_compatible_forcing(alpha=0.0))
except SingularSystem as exc:
    print(f"SingularSystem: {exc}")

print()
print("== 2. compatibility mode + compatible data ==")
data = disk_compatible_forcing(alpha=0.0)
data.compatibility_mode = True
defect = check_compatibility(mesh, data)
sol = solve_stokes(mesh, data)
fe = sol.fe
beta = interpolate(fe, rigid_rotation().value, "velocity")
print(f"compatibility moment of the data: {defect:.2e}")
print(f"guard multiplier: {sol.diagnostics['kernel_guard']:.2e}")
print(f"rotation content of the solution u.beta: {float(sol.u @ beta):.2e}")
print(f"solution H1 norm: {sol.diagnostics['h1_norm']:.4f}")

print()
print("== 3. compatibility mode + incompatible data ==")
bad = disk_incompatible_forcing(alpha=0.0)
bad.compatibility_mode = True
print(f"compatibility moment: {check_compatibility(mesh, bad):.4f} (nonzero)")
try:
    solve_stokes(mesh, bad)
except IncompatibleData as exc:
    print(f"IncompatibleData: {exc}")

print()
print("== 4. any friction at all removes the kernel ==")
drive = disk_tangential_drive(alpha=2.0)
sol = solve_stokes(mesh, drive["data"])
diff = sol.u - interpolate(sol.fe, drive["u"].value, "velocity")
print(f"tangential drive with alpha = 2: the exact solution is the rigid")
print(f"rotation itself, recovered to {np.abs(diff).max():.2e} "
      "(it lies in the velocity space)")
