"""Optimal thresholds and value functions of the four worked problems.

Every threshold depends on the discount rate only through u = sqrt(2 alpha) x,
so the whole table is one number per problem scaled by 1/sqrt(2 alpha).

Run:  python3 demos/01_thresholds_and_values.py
"""

import numpy as np

from optstop import ExampleId, build_example, solve_threshold, threshold_ordering

alpha = 0.5
print(f"thresholds at alpha = {alpha}")
for eid in ExampleId:
    sol = solve_threshold(eid, alpha)
    print(f"  {eid.value:<10} x0 = {sol.x0:+.12f}   u = {sol.u:+.12f}   [{sol.status.value}]")

print("\nvalue functions on a few states")
for eid in ExampleId:
    b = build_example(eid, alpha)
    xs = np.array([-2.0, -1.0, 0.0, 1.0, 2.0]) if eid.kind.lower < 0 else np.array([0.0, 0.5, 1.0, 1.5, 2.0])
    vals = "  ".join(f"V({x:+.1f})={v:.6f}" for x, v in zip(xs, b.value(xs)))
    print(f"  {eid.value:<10} {vals}")

print("\nthe three stopped-payoff problems across discount rates")
print("  alpha   absorbed   standard   reflected   reflected/standard")
for a in (0.1, 0.25, 0.5, 1.0, 2.0, 4.0):
    o = threshold_ordering(a)
    print(f"  {a:5.2f}   {o.absorbed:8.5f}   {o.standard:8.5f}   {o.reflected:9.5f}   {o.reflected / o.standard:.10f}")
print("\nreflection lets the process bounce back from 0, which makes waiting more valuable")
print("and pushes the threshold up by the constant factor u* = 1.19968...")
