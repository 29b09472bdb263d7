import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from oracles import fd_grad_hess
from siklos import jets
from siklos.errors import DivisionByZero, DomainError
from siklos.jets import Jet2, constant, seed


def test_square_of_seed():
    (x,) = seed([3.0])
    y = x * x
    assert y.value == 9.0
    assert_allclose(y.grad, [6.0])
    assert_allclose(y.hess, [[2.0]])


def test_fourth_power_derivatives():
    x2, x3, x4 = seed([0.0, 1.0, 0.0])
    H = x3**4
    assert H.value == 1.0
    assert H.grad[1] == 4.0
    assert H.hess[1, 1] == 12.0


def test_constant_over_itself():
    c = constant(5.0, 3)
    q = c / c
    assert q.value == 1.0
    assert not q.grad.any()
    assert not q.hess.any()


def test_seed_and_constant_invariants():
    xs = seed([1.0, 2.0, 3.0])
    for i, x in enumerate(xs):
        assert_allclose(x.grad, np.eye(3)[i])
        assert not x.hess.any()
    c = constant(2.5, 3)
    assert not c.grad.any() and not c.hess.any()


@pytest.mark.parametrize(
    "f, x0, value, d1, d2",
    [
        (jets.exp, 0.0, 1.0, 1.0, 1.0),
        (jets.sin, 0.0, 0.0, 1.0, 0.0),
        (jets.ln, 2.0, math.log(2.0), 0.5, -0.25),
        (jets.cos, 0.0, 1.0, 0.0, -1.0),
        (jets.sqrt, 4.0, 2.0, 0.25, -1.0 / 32.0),
        (jets.sinh, 0.0, 0.0, 1.0, 0.0),
        (jets.cosh, 0.0, 1.0, 0.0, 1.0),
    ],
)
def test_elementary_functions(f, x0, value, d1, d2):
    (x,) = seed([x0])
    y = f(x)
    assert y.value == pytest.approx(value)
    assert y.grad[0] == pytest.approx(d1)
    assert y.hess[0, 0] == pytest.approx(d2)


def test_domain_errors():
    (x,) = seed([-1.0])
    with pytest.raises(DomainError):
        jets.ln(x)
    with pytest.raises(DomainError):
        jets.sqrt(x)
    with pytest.raises(DomainError):
        x**0.5
    with pytest.raises(DivisionByZero):
        constant(1.0, 1) / constant(0.0, 1)


def test_integer_power_of_negative_base_is_exact():
    (x,) = seed([-2.0])
    y = x**3
    assert y.value == -8.0
    assert y.grad[0] == 12.0
    assert y.hess[0, 0] == -12.0
    z = x ** (-2)
    assert z.value == pytest.approx(0.25)
    assert z.grad[0] == pytest.approx(0.25)  # -2 x^-3 at -2


def test_fractional_power_kaigorodov_exponent():
    (x,) = seed([1.7])
    y = x**3.0
    w = x**1.5
    assert_allclose([y.value, y.grad[0], y.hess[0, 0]], [1.7**3, 3 * 1.7**2, 6 * 1.7])
    assert_allclose([w.value, w.grad[0], w.hess[0, 0]], [1.7**1.5, 1.5 * 1.7**0.5, 0.75 * 1.7**-0.5])


# composite maps over three variables, exercised with all ops and functions
COMPOSITES = [
    lambda a, b, c: a * b + c,
    lambda a, b, c: a / (b * b + 1.0) - c,
    lambda a, b, c: jets.exp(a * c) * jets.sin(b),
    lambda a, b, c: jets.ln(a * a + b * b + 1.0) * jets.cos(c),
    lambda a, b, c: jets.sqrt(c * c + 2.0) ** 3 - jets.sinh(a) * jets.cosh(b),
    lambda a, b, c: (a * a + 1.0) ** 1.5 / (c * c + 0.5),
    lambda a, b, c: (b * b + 0.3) ** (a * 0.5) + 2.0 - a,
]


def _value_map(f):
    return lambda v: float(np.asarray(f(*v)))


@settings(max_examples=200, deadline=None)
@given(
    st.sampled_from(range(len(COMPOSITES))),
    st.lists(st.floats(-1.5, 1.5), min_size=3, max_size=3),
)
def test_jets_match_finite_differences(idx, point):
    f = COMPOSITES[idx]
    y = f(*seed(point))
    grad, hess = fd_grad_hess(_value_map(f), point, h=1e-4)
    scale = max(1.0, abs(y.value))
    assert_allclose(y.grad, grad, rtol=1e-6, atol=1e-6 * scale)
    assert_allclose(y.hess, hess, rtol=1e-5, atol=1e-5 * scale)
    assert_allclose(y.hess, y.hess.T, atol=1e-12 * scale)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-3, 3).filter(lambda v: abs(v) > 1e-3), min_size=3, max_size=3))
def test_product_associativity(vals):
    a, b, c = seed(vals)
    left = (a * b) * c
    right = a * (b * c)
    assert left.value == pytest.approx(right.value, rel=1e-12)
