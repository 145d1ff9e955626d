"""Check the sufficient conditions for candidate values on a grid.

At the optimal threshold every check holds. Moving the threshold keeps the
value continuous (by construction of the threshold-rule value) but breaks
the C1 fit with the payoff and, usually, domination of the payoff.

Run:  python3 demos/02_verify_candidates.py
"""

import numpy as np

from optstop import build_example, check_conditions, solve_threshold

alpha = 0.5
grids = {"running": np.linspace(-5, 5, 1001), "stopped": np.linspace(-5, 5, 1001),
         "reflected": np.linspace(0, 5, 1001), "absorbed": np.linspace(0, 5, 1001)}

for example, grid in grids.items():
    x_opt = solve_threshold(example, alpha).x0
    factors = (1.0,) if x_opt == 0 else (1.0, 0.95, 1.05)
    for factor in factors:
        x0 = x_opt * factor
        report = check_conditions(build_example(example, alpha, x0).candidate, grid)
        status = "ok" if report.passed else "FAILS " + ",".join(report.failures())
        print(f"{example:<10} x0 = {x0:+.5f}  "
              f"min(V-g) = {report.cond_i.margin:+.2e}  "
              f"|psi-f| on D = {report.cond_iv.margin:.1e}  "
              f"jump = {report.continuity.margin:.1e}  "
              f"slope gap = {report.smooth_pasting.margin:.2e}  -> {status}")

# the pasting gap of the stopped-payoff problem is known in closed form
x0 = 2.0
gap = check_conditions(build_example("stopped", alpha, x0).candidate, grids["stopped"]).smooth_pasting.margin
print(f"\nstopped problem at x0 = {x0}: slope gap {gap:.6f}, analytic sqrt(2 alpha) x0 - 1 = {np.sqrt(2 * alpha) * x0 - 1:.6f}")
