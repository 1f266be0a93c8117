"""多项式运算，sympy 作为结式与判别式的参照"""

from fractions import Fraction

import pytest
import sympy

from src.core.errors import PolynomialError
from src.core.poly import (
    arith, evaluate_partial,
    VarOrder, compose, derivative, discriminant, evaluate, principal_subresultants,
    reorder, resultant,
)


def to_sympy(p):
    expr = sympy.Integer(0)
    for mono, c in p.terms().items():
        term = sympy.Integer(c)
        for name, e in mono:
            term *= sympy.Symbol(name) ** e
        expr += term
    return sympy.expand(expr)


def same_up_to_constant(a, b):
    if a == 0 or b == 0:
        return a == b
    return sympy.cancel(a / b).is_number


def test_arithmetic_normal_form(xy):
    order, x, y = xy
    p = (x + y) * (x - y)
    assert p == x * x - y * y
    assert (p - p).is_zero
    assert (x ** 0) == order.constant(1)
    assert p.degree("y") == 2
    assert p.var == "y"


def test_constant_rejects_fractions():
    order = VarOrder(["x"])
    with pytest.raises(PolynomialError):
        order.constant(Fraction(1, 2))


def test_unknown_variable():
    with pytest.raises(PolynomialError):
        VarOrder(["x"]).var("z")


def test_evaluate_rational_point(xy):
    _, x, y = xy
    p = x * x + y * y - 2
    assert evaluate(p, {"x": Fraction(1, 2), "y": 1}) == Fraction(-3, 4)
    with pytest.raises(PolynomialError):
        evaluate(p, {"x": 1})


def test_derivative(xy):
    _, x, y = xy
    p = x * x * y + 3 * y * y
    assert derivative(p, "y") == x * x + 6 * y
    assert derivative(p, "x") == 2 * x * y


def test_compose_renames_into_another_order(xy):
    order, x, y = xy
    other = VarOrder(["a", "x", "y"])
    q = compose(x * y + 1, {"x": other.var("a") + 1}, other)
    assert q == (other.var("a") + 1) * other.var("y") + 1
    assert reorder(x * y, other) == other.var("x") * other.var("y")


@pytest.mark.parametrize("make", [
    lambda x, y: (x ** 2 + y ** 2 - 2, y - x),
    lambda x, y: (x * y ** 2 - 3, y ** 3 + x * y + 1),
    lambda x, y: (y ** 2 - x, 2 * y + x ** 2),
])
def test_resultant_matches_sympy(xy, make):
    _, x, y = xy
    f, g = make(x, y)
    ours = to_sympy(resultant(f, g, "y"))
    theirs = sympy.resultant(to_sympy(f), to_sympy(g), sympy.Symbol("y"))
    assert sympy.expand(ours - theirs) == 0 or sympy.expand(ours + theirs) == 0


def test_discriminant_of_circle(xy):
    _, x, y = xy
    d = discriminant(x * x + y * y - 2, "y")
    assert same_up_to_constant(to_sympy(d), sympy.Symbol("x") ** 2 - 2)


def test_principal_subresultants_first_is_resultant(xy):
    _, x, y = xy
    f, g = y * y - x, y - 1
    psc = principal_subresultants(f, g, "y")
    assert psc
    assert same_up_to_constant(to_sympy(psc[0]), to_sympy(resultant(f, g, "y")))


def test_evaluate_partial(xy):
    order, x, y = xy
    f = x * x + y * y - 2
    assert evaluate_partial(f, {"x": 1}) == y * y - 1
    assert evaluate_partial(f, {"x": 1, "y": 2}) == order.constant(3)
    assert evaluate_partial(f, {}) == f
    # x = 1/2 时整体乘以 4
    assert evaluate_partial(f, {"x": Fraction(1, 2)}) == 4 * y * y - 7
    with pytest.raises(PolynomialError):
        evaluate_partial(f, {"x": True})


def test_arith_ring_operations(xy):
    _, x, y = xy
    f, g = x * y + 1, y - x
    assert arith(f, g, "add") == x * y + y - x + 1
    assert arith(f, g, "sub") == x * y - y + x + 1
    assert arith(f, g, "mul") == x * y * y - x * x * y + y - x


def test_arith_unknown_operation(xy):
    _, x, y = xy
    with pytest.raises(PolynomialError):
        arith(x, y, "div")


def test_principal_subresultants_of_equal_degrees(xy):
    order, x, y = xy
    psc = principal_subresultants(y * y - x, y * y + y, "y")
    assert len(psc) == 2
    assert same_up_to_constant(to_sympy(psc[0]), sympy.Symbol("x") ** 2 - sympy.Symbol("x"))
    assert psc[1] == order.constant(1)


def test_resultant_without_other_variables():
    order = VarOrder(["t"])
    t = order.var("t")
    r = resultant(t * t - 2, t - 1, "t")
    assert r.is_constant
    assert abs(r.const) == 1
