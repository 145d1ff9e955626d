import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from optstop.catalog import build_example, problem_for
from optstop.free_boundary import solve_threshold
from optstop.piecewise import PiecewiseFunction
from optstop.verification import (
    ContinuationRegion,
    StoppingRule,
    build_candidate,
    check_conditions,
    stopping_rule,
    threshold_region,
)

STD_GRID = np.linspace(-5, 5, 1001)
POS_GRID = np.linspace(0, 5, 1001)


def _grid(example):
    return POS_GRID if example in ("reflected", "absorbed") else STD_GRID


@pytest.mark.parametrize("example", ["running", "stopped", "reflected", "absorbed"])
@pytest.mark.parametrize("alpha", [0.25, 0.5, 1.0, 2.0])
def test_solved_thresholds_pass(example, alpha):
    bundle = build_example(example, alpha)
    report = check_conditions(bundle.candidate, _grid(example))
    assert report.passed, report.failures()


def test_region_recovered_from_value():
    bundle = build_example("reflected", 0.5)
    report = check_conditions(bundle.candidate, POS_GRID)
    ((lo, hi, lc, hc),) = report.region.intervals
    assert lo == 0.0 and lc and not hc
    assert hi == pytest.approx(solve_threshold("reflected", 0.5).x0, abs=1e-12)


def test_absorbed_region_is_empty():
    report = check_conditions(build_example("absorbed", 1.0).candidate, POS_GRID)
    assert report.region.is_empty


@pytest.mark.parametrize("x0", [1.5, 2.0, 3.0])
def test_wrong_threshold_pasting_gap_is_analytic(x0):
    # one-sided slopes at x0: k x0 (continuation) and 1 (payoff)
    alpha = 0.5
    report = check_conditions(build_example("stopped", alpha, x0).candidate, STD_GRID)
    assert not report.smooth_pasting.passed
    assert report.smooth_pasting.margin == pytest.approx(np.sqrt(2 * alpha) * x0 - 1, abs=1e-4)


@pytest.mark.parametrize("example", ["running", "stopped", "reflected"])
@pytest.mark.parametrize("factor", [0.95, 1.05])
def test_perturbed_threshold_fails(example, factor):
    x0 = solve_threshold(example, 0.5).x0 * factor
    report = check_conditions(build_example(example, 0.5, x0).candidate, _grid(example))
    assert not report.passed
    assert "smooth_pasting" in report.failures()


@settings(max_examples=25, deadline=None)
@given(alpha=st.floats(0.05, 5.0), example=st.sampled_from(["running", "stopped", "reflected"]))
def test_value_dominates_payoff_with_equality_on_stopping_set(alpha, example):
    bundle = build_example(example, alpha)
    grid = _grid(example)
    v, g = bundle.value(grid), bundle.problem.g(grid)
    assert np.all(v >= g - 1e-12)
    stop = ~bundle.region.contains(grid)
    np.testing.assert_allclose(v[stop], g[stop], atol=1e-12)
    assert np.all(v[~stop] > g[~stop])


def test_numeric_candidate_passes():
    bundle = build_example("stopped", 0.5)
    cand = build_candidate(bundle.problem, bundle.psi)
    report = check_conditions(cand, np.linspace(-3, 3, 61))
    assert report.passed, report.to_dict()


def test_condition_ii_violation_detected():
    problem = problem_for("running", 0.5)
    bundle = build_example("running", 0.5)
    bad_psi = PiecewiseFunction.constant(0.0)
    report = check_conditions(build_candidate(problem, bad_psi, bundle.value), STD_GRID)
    assert not report.cond_ii.passed or not report.cond_iv.passed


def test_report_round_trips_to_plain_types():
    import json
    report = check_conditions(build_example("running", 0.5).candidate, STD_GRID)
    d = report.to_dict()
    assert json.loads(json.dumps(d)) == d


def test_stopping_rule_examples():
    x0r = solve_threshold("reflected", 0.5).x0
    rule = stopping_rule(threshold_region("reflected", x0r, continue_above=False))
    assert rule(x0r)
    assert not rule(0.0)
    assert not rule(x0r - 1e-9)
    assert StoppingRule.stop_always("absorbed")(1.0)
    absorbed = threshold_region("absorbed", 2.0, continue_above=False)
    assert not absorbed.contains(0.0) and absorbed.contains(1.0)


def test_region_boundaries_exclude_state_space_ends():
    r = ContinuationRegion(((0.0, 1.5, True, False),), (0.0, np.inf))
    assert r.boundaries == (1.5,)
    assert r.to_dict()["state_space"] == [0.0, "inf"]


def test_grid_validation():
    with pytest.raises(ValueError):
        check_conditions(build_example("stopped", 0.5).candidate, [0.0, 1.0])
    with pytest.raises(ValueError):
        check_conditions(build_example("reflected", 0.5).candidate, np.linspace(-1, 1, 11))


def test_rule_reference_cases():
    above = ContinuationRegion(((-1.0, np.inf, False, False),))
    assert stopping_rule(above)(-2.0)
    unit = ContinuationRegion(((0.0, 1.0, True, False),), (0.0, np.inf))
    assert not stopping_rule(unit)(0.5)
    assert stopping_rule(unit)(1.0)


def test_zero_candidate_is_zero():
    zero = PiecewiseFunction.constant(0.0)
    from optstop.verification import StoppingProblem
    problem = StoppingProblem("standard", zero, zero, 0.5)
    cand = build_candidate(problem, zero)
    np.testing.assert_array_equal(cand.value(np.array([-1.0, 0.0, 2.0])), 0.0)


def test_stopped_candidate_psi_and_region_on_short_grid():
    bundle = build_example("stopped", 0.5)
    np.testing.assert_allclose(bundle.psi([0.5, 1.0, 2.0]), [0.0, 0.5, 1.0])
    report = check_conditions(bundle.candidate, np.linspace(0, 3, 301))
    assert report.passed
    ((lo, hi, _, hc),) = report.region.intervals
    assert hi == 1.0 and not hc
    running = build_example("running", 0.5)
    xs = np.linspace(-0.9, 3, 50)
    np.testing.assert_allclose(running.psi(xs), xs)
