"""Friction sweeps: slip at alpha -> 0, no-slip at alpha -> infinity.

Three studies on the square with fixed smooth forcing:

* the solution size stays uniformly bounded across ten orders of
  magnitude of friction,
* the distance to the frictionless solution decays linearly in alpha,
* the tangential boundary trace decays like 1/alpha and the solution
  approaches the clamped (Dirichlet) reference.
"""

from slipstokes.experiments import ExperimentConfig, run_experiment

print("== uniform bound across the sweep (level 16) ==")
report = run_experiment(ExperimentConfig(kind="uniform_bound", levels=(16,)))
print(f"{'alpha':>10} {'|u|_H1 + |p|_L2':>16}")
for row in report.rows:
    print(f"{row[0]:>10.0e} {row[1]:>16.6f}")
u = report.fits["uniformity"]
print(f"max/min = {u['max_over_min']:.4f} (bounded, nowhere near blowup)")

print()
print("== alpha -> 0 (level 16, alpha = 2^-k) ==")
report = run_experiment(ExperimentConfig(kind="alpha_to_zero", levels=(16,)))
for row in report.rows[:4] + report.rows[-3:]:
    print(f"alpha = {row[0]:>10.3e}   |u_a - u_0|_H1 = {row[1]:.6e}")
fit = report.fits["limit_rate"]
print(f"fitted decay order {fit['slope']:.3f} "
      f"(residual {fit['residual_rms']:.4f}); the limit is attained at "
      "first order in alpha")

print()
print("== alpha -> infinity (level 16, alpha = 10^k) ==")
report = run_experiment(
    ExperimentConfig(kind="alpha_to_infinity", levels=(16,)))
print(f"{'alpha':>10} {'|u - u_D|_H1':>14} {'|u_tan|_L2(bnd)':>16}")
for row in report.rows:
    print(f"{row[0]:>10.0e} {row[1]:>14.6e} {row[2]:>16.6e}")
print(f"tangential trace decay order "
      f"{report.fits['tangential_rate']['slope']:.3f}")
gap = report.fits["final_relative_gap"]
print(f"relative H1 gap to the Dirichlet solution at alpha = 1e6: "
      f"{gap['value']:.2e}")
