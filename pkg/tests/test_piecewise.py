import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from optstop.piecewise import PiecewiseFunction

finite = st.floats(-10, 10, allow_nan=False)


def test_indicator_closure_conventions():
    closed = PiecewiseFunction.linear_above(1.0, 0.5)
    opened = PiecewiseFunction.linear_above(1.0, 0.5, include_x0=False)
    assert closed(1.0) == 0.5 and opened(1.0) == 0.0
    np.testing.assert_allclose(closed([0.0, 2.0]), [0.0, 1.0])


def test_validation():
    with pytest.raises(ValueError):
        PiecewiseFunction((1.0,), ((0.0,),))
    with pytest.raises(ValueError):
        PiecewiseFunction((2.0, 1.0), ((0.0,),) * 3)


def test_envelope_and_degree():
    f = PiecewiseFunction((0.0,), ((1.0, -2.0), (3.0, 0.5)))
    assert f.degree == 1
    assert f.linear_envelope() == (3.0, 2.0)
    with pytest.raises(ValueError):
        PiecewiseFunction.constant(0.0).__class__((), ((0.0, 0.0, 1.0),)).linear_envelope()


@given(a=finite, b=finite, x0=finite, c=finite, x=finite)
def test_arithmetic_is_pointwise(a, b, x0, c, x):
    f = PiecewiseFunction.linear(a, b)
    g = PiecewiseFunction.linear_above(x0, c)
    assert (f + g)(x) == pytest.approx(f(x) + g(x), abs=1e-9)
    assert (f - g)(x) == pytest.approx(f(x) - g(x), abs=1e-9)
    assert (2.5 * g)(x) == pytest.approx(2.5 * g(x), abs=1e-9)


def test_zero_detection():
    assert PiecewiseFunction.constant(0.0).is_zero()
    assert not PiecewiseFunction.linear(1.0).is_zero()
