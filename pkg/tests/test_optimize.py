import math

import pytest
from hypothesis import given, settings, strategies as st

from infoenv.optimize import golden_section, optimize_scalar, theta_bounds


def test_quadratic_minimum():
    res = optimize_scalar(lambda x: (x - 1.0) ** 2 + 5.0, 1e-6, 10.0)
    assert res.success
    assert res.x == pytest.approx(1.0, rel=1e-3)
    assert res.fun == pytest.approx(5.0, rel=1e-9)


def test_linear_grid_variant():
    res = optimize_scalar(lambda x: (x - 3.3) ** 2, 0.0, 10.0, log=False)
    assert res.x == pytest.approx(3.3, abs=1e-4)


def test_all_infinite_reports_failure():
    res = optimize_scalar(lambda x: math.inf, 1e-3, 1.0)
    assert not res.success
    assert math.isinf(res.fun)


def test_exceptions_and_nan_are_infeasible():
    def f(x):
        if x < 0.5:
            raise OverflowError
        return math.nan if x > 2 else (x - 1) ** 2

    res = optimize_scalar(f, 1e-3, 10.0)
    assert res.success and res.x == pytest.approx(1.0, rel=1e-3)


def test_boundary_limit_value():
    # monotone decreasing: the infimum is only reached as x grows without bound
    res = optimize_scalar(lambda x: 1.0 / x, 1e-4, 1e3, probe_upper=True)
    assert res.fun < 1e-8


def test_probe_respects_probe_max():
    res = optimize_scalar(lambda x: 1.0 / x, 1e-4, 1e3, probe_upper=True, probe_max=5e4)
    assert res.x < 5e4


def test_deterministic():
    f = lambda x: abs(math.log(x) - 0.3) + 0.01 * math.sin(40 * x)
    assert optimize_scalar(f, 1e-3, 1e2) == optimize_scalar(f, 1e-3, 1e2)


def test_theta_bounds():
    assert theta_bounds() == (1e-4, 1e3)
    lo, hi = theta_bounds(math.log(2))
    assert hi < math.log(2) and hi == pytest.approx(math.log(2), rel=1e-8)
    with pytest.raises(ValueError):
        theta_bounds(0.0)


def test_empty_interval():
    with pytest.raises(ValueError):
        optimize_scalar(lambda x: x, 2.0, 1.0)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.01, 50.0), st.floats(-5.0, 5.0))
def test_golden_section_unimodal(x0, y0):
    x, fx, _ = golden_section(lambda x: (math.log(x) - math.log(x0)) ** 2 + y0, 1e-3, 1e3)
    assert x == pytest.approx(x0, rel=1e-3)
    assert fx == pytest.approx(y0, abs=1e-9)
