"""Brute-force check of the optimal rules by simulation.

Each threshold rule is simulated on the same paths (common random numbers),
so differences between neighbouring thresholds are estimated much more
precisely than the values themselves.

Run:  python3 demos/03_monte_carlo_oracle.py
"""

import numpy as np

from optstop import McConfig, build_example, estimate_value, threshold_rule, threshold_sweep
from optstop.catalog import problem_for
from optstop.mc import parse_thresholds

alpha = 0.5
cfg = McConfig(paths=50_000, dt=1e-3, horizon=40.0, seed=1)

print("optimal rules against their closed-form values")
for example, x in (("running", 0.0), ("stopped", 0.0), ("reflected", 0.5)):
    b = build_example(example, alpha)
    rule = threshold_rule(b.problem.kind, b.x0, continue_above=example == "running")
    est = estimate_value(b.problem, rule, x, cfg)
    exact = float(b.value(x))
    print(f"  {example:<10} x={x:+.1f}: MC {est.mean:.5f} +- {est.stderr:.5f}   exact {exact:.5f}   "
          f"z = {(est.mean - exact) / est.stderr:+.2f}")

print("\nthreshold sweeps")
for example, span, x in (("stopped", "0.2:2.0:19", 0.0), ("reflected", "0.6:2.0:15", 0.5)):
    res = threshold_sweep(problem_for(example, alpha), parse_thresholds(span), x, cfg)
    print(f"  {example}: argmax {res.best_threshold:.3f}, statistically tied: {np.round(res.indistinguishable, 3)}")
    for (x0, est), d in zip(res.rows(), res.diff_stderr):
        bar = "#" * int(60 * est.mean / res.means.max())
        print(f"    x0={x0:5.2f}  {est.mean:.4f} (paired se {d:.4f})  {bar}")
