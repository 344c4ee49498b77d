import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from tiebreaker.quadrature import adaptive_simpson


def test_polynomials_up_to_cubic_are_exact():
    assert adaptive_simpson(lambda x: 4 * x**3 - x + 2, -1.0, 2.0) == pytest.approx(19.5, abs=1e-13)


def test_smooth_integrands():
    assert adaptive_simpson(math.sin, 0.0, math.pi) == pytest.approx(2.0, abs=1e-10)
    assert adaptive_simpson(math.exp, 0.0, 1.0) == pytest.approx(math.e - 1, abs=1e-10)


def test_kink_and_reversed_limits():
    f = lambda x: abs(x - 0.3)
    exact = (0.3**2 + 0.7**2) / 2
    assert adaptive_simpson(f, 0.0, 1.0) == pytest.approx(exact, abs=1e-10)
    assert adaptive_simpson(f, 1.0, 0.0) == pytest.approx(-exact, abs=1e-10)
    assert adaptive_simpson(f, 0.5, 0.5) == 0.0


def test_deep_refinement_does_not_recurse():
    # sqrt has an unbounded derivative at 0; needs many halvings
    assert adaptive_simpson(math.sqrt, 0.0, 1.0, tol=1e-12, max_depth=60) == pytest.approx(2 / 3, abs=1e-9)


@given(st.floats(-5, 5), st.floats(-5, 5), st.floats(-3, 3), st.floats(-3, 3))
def test_quadratic_exact(a, b, c0, c2):
    f = lambda x: c0 + c2 * x * x
    exact = c0 * (b - a) + c2 * (b**3 - a**3) / 3
    assert adaptive_simpson(f, a, b) == pytest.approx(exact, abs=1e-9)
