from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kramers_reset.potential import (
    InvalidSpecError,
    PotentialSpec,
    evaluate,
    gradient,
    landmarks,
    left_position_at_energy,
    total_energy,
)

PAPER = PotentialSpec(6.0, 1.0)


def exact_v(a, b, x):
    x = Fraction(x)
    return Fraction(a) * x * x / 2 - Fraction(b) * x**3 / 3


@pytest.mark.parametrize(
    "x, expected",
    [(0.0, 0.0), (6.0, 36.0), (-3.0, 36.0), (5.0, float(exact_v(6, 1, 5)))],
)
def test_evaluate(x, expected):
    assert evaluate(PAPER, x) == pytest.approx(expected, rel=1e-14, abs=1e-14)


def test_evaluate_at_five_is_a_hundred_thirds():
    assert evaluate(PAPER, 5.0) == pytest.approx(100 / 3, rel=1e-15)


@pytest.mark.parametrize("x, expected", [(0.0, 0.0), (6.0, 0.0), (3.0, 9.0)])
def test_gradient(x, expected):
    assert gradient(PAPER, x) == expected


def test_landmarks_paper():
    assert tuple(landmarks(PAPER)) == (-3.0, 6.0, 36.0)


def test_landmarks_derived():
    lm = landmarks(PotentialSpec(2.0, 1.0))
    assert lm.x_minus == -1.0
    assert lm.x_plus == 2.0
    assert lm.barrier_height == pytest.approx(4 / 3, rel=1e-15)


@pytest.mark.parametrize("a, b", [(6.0, 0.0), (0.0, 1.0), (-1.0, 1.0)])
def test_landmarks_invalid(a, b):
    with pytest.raises(InvalidSpecError):
        landmarks(PotentialSpec(a, b))


def test_total_energy():
    assert total_energy(PAPER, 0.0, 0.0) == 0.0
    assert total_energy(PAPER, 0.0, 2.0) == 2.0
    x0 = -2.899
    assert total_energy(PAPER, x0, 0.0) == pytest.approx(float(exact_v(6, 1, x0)), rel=1e-14)
    assert total_energy(PAPER, x0, 0.0) == pytest.approx(33.33, abs=0.01)


specs = st.builds(
    PotentialSpec,
    alpha=st.floats(0.1, 20.0),
    beta=st.floats(0.1, 5.0),
)


@given(specs, st.floats(-10.0, 10.0))
def test_gradient_is_derivative(spec, x):
    h = 1e-6
    fd = (evaluate(spec, x + h) - evaluate(spec, x - h)) / (2 * h)
    # round-off of the difference quotient grows with |V| ~ beta |x|^3
    assert abs(fd - gradient(spec, x)) <= 1e-6 * max(1.0, abs(evaluate(spec, x)))


@given(specs)
def test_turning_points_at_barrier_energy(spec):
    lm = landmarks(spec)
    assert evaluate(spec, lm.x_plus) == pytest.approx(lm.barrier_height, rel=1e-12)
    assert evaluate(spec, lm.x_minus) == pytest.approx(lm.barrier_height, rel=1e-12)
    assert abs(gradient(spec, lm.x_plus)) <= 1e-12 * max(1.0, spec.alpha * lm.x_plus)
    assert gradient(spec, 0.0) == 0.0


def test_gradient_fd_grid_paper():
    x = np.linspace(-10, 10, 2001)
    h = 1e-6
    fd = (evaluate(PAPER, x + h) - evaluate(PAPER, x - h)) / (2 * h)
    assert np.max(np.abs(fd - gradient(PAPER, x))) < 1e-6


@given(st.floats(0.0, 36.0))
def test_left_position_at_energy_roundtrip(e):
    x = left_position_at_energy(PAPER, e)
    assert -3.0 <= x <= 0.0
    assert evaluate(PAPER, x) == pytest.approx(e, abs=1e-9)
