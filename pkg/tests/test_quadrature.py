import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nanbu.quadrature import adaptive_simpson, integrate_with_tail


def test_exact_on_cubics():
    assert adaptive_simpson(lambda x: x**3 - 2 * x + 1, 0.0, 2.0) == pytest.approx(
        4.0 - 4.0 + 2.0, abs=1e-12
    )


def test_sine_integral():
    assert adaptive_simpson(math.sin, 0.0, math.pi) == pytest.approx(2.0, rel=1e-9)


def test_orientation_and_degenerate_interval():
    assert adaptive_simpson(math.exp, 1.0, 1.0) == 0.0
    forward = adaptive_simpson(math.exp, 0.0, 1.0)
    assert adaptive_simpson(math.exp, 1.0, 0.0) == pytest.approx(-forward, rel=1e-12)


def test_mild_singularity():
    value = adaptive_simpson(lambda x: 1.0 / math.sqrt(x + 1e-6), 0.0, 1.0)
    exact = 2.0 * (math.sqrt(1.0 + 1e-6) - math.sqrt(1e-6))
    assert value == pytest.approx(exact, rel=1e-8)


def test_infinite_bound_rejected():
    with pytest.raises(ValueError):
        adaptive_simpson(math.sin, 0.0, math.inf)


def test_tail_integral_power_law():
    # integral over [0, inf) of (1+x)^(-3) dx = 1/2; tail bound (1+t)^(-2)/2
    value = integrate_with_tail(
        lambda x: (1.0 + x) ** -3, 0.0, lambda t: 0.5 * (1.0 + t) ** -2
    )
    assert value == pytest.approx(0.5, rel=1e-9)


def test_tail_integral_shifted_start():
    value = integrate_with_tail(
        lambda x: math.exp(-x), 2.0, lambda t: math.exp(-t)
    )
    assert value == pytest.approx(math.exp(-2.0), rel=1e-9)


@settings(max_examples=60, deadline=None)
@given(
    a=st.floats(-5, 5, allow_nan=False),
    width=st.floats(0.1, 10, allow_nan=False),
    c2=st.floats(-3, 3),
    c1=st.floats(-3, 3),
    c0=st.floats(-3, 3),
)
def test_quadratics_are_exact(a, width, c2, c1, c0):
    b = a + width

    def f(x):
        return c2 * x * x + c1 * x + c0

    exact = c2 * (b**3 - a**3) / 3 + c1 * (b**2 - a**2) / 2 + c0 * (b - a)
    assert adaptive_simpson(f, a, b) == pytest.approx(exact, rel=1e-12, abs=1e-10)
