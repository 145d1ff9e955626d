import numpy as np
import pytest

from optstop.quadrature import QuadratureError, integrate


def test_polynomial_exact():
    res = integrate(lambda x: 3 * x**2, 0.0, 2.0)
    assert res.value == pytest.approx(8.0, rel=1e-15)


def test_kink_handled_by_points():
    res = integrate(np.abs, -1.0, 2.0, points=[0.0], rtol=1e-13)
    assert res.value == pytest.approx(2.5, rel=1e-13)
    assert res.evaluations <= 100


def test_sharp_peak_adapts():
    f = lambda x: 1e-3 / (x**2 + 1e-6)  # noqa: E731
    res = integrate(f, -1.0, 1.0, rtol=1e-10)
    assert res.value == pytest.approx(2 * np.arctan(1e3), rel=1e-9)


def test_reversed_limits_and_empty():
    assert integrate(np.exp, 1.0, 0.0).value == pytest.approx(-(np.e - 1), rel=1e-14)
    assert integrate(np.exp, 1.0, 1.0).value == 0.0


def test_budget_exhaustion_reports_state():
    with pytest.raises(QuadratureError) as info:
        integrate(lambda x: np.sin(1 / np.maximum(x, 1e-300)), 0.0, 1.0, rtol=1e-14, max_evals=2000)
    err = info.value
    assert err.evaluations >= 2000 and np.isfinite(err.value) and err.error > 0


def test_infinite_limits_rejected():
    with pytest.raises(ValueError):
        integrate(np.exp, 0.0, np.inf)
