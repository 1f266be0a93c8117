"""实代数数：隔离、比较、代数点处求值"""

from fractions import Fraction

import pytest
import sympy

from src.core.errors import AlgebraicError
from src.core.poly import VarOrder
from src.core.realalg import (
    AlgebraicNumber, compare, defining_index, isolate_roots, make_value, refine, roots_at, sign_at,
    sign_univariate, sturm_count, to_decimal, value_polynomial,
)


def sqrt2() -> AlgebraicNumber:
    return isolate_roots([-2, 0, 1])[1]


def test_isolate_sqrt2():
    lo, hi = isolate_roots([-2, 0, 1])
    assert compare(lo, hi) < 0
    assert float(hi) == pytest.approx(2 ** 0.5)
    assert float(lo) == pytest.approx(-(2 ** 0.5))


def test_rational_roots_are_fractions():
    roots = isolate_roots([-6, 1, 1])          # (x + 3)(x - 2)
    assert roots == [Fraction(-3), Fraction(2)]
    assert all(isinstance(r, Fraction) for r in roots)


def test_repeated_roots_are_reported_once():
    assert isolate_roots([1, -2, 1]) == [Fraction(1)]


def test_no_real_roots():
    assert isolate_roots([1, 0, 1]) == []


def test_zero_polynomial_is_an_error():
    with pytest.raises(AlgebraicError):
        isolate_roots([0, 0])


def test_compare_algebraic_and_rational():
    r = sqrt2()
    assert compare(r, Fraction(7, 5)) > 0
    assert compare(r, Fraction(3, 2)) < 0
    assert compare(r, r) == 0
    assert r == isolate_roots([-4, 0, 2])[1]
    assert make_value(Fraction(3)) == 3


def test_defining_index_and_decimal():
    r = sqrt2()
    assert defining_index(r) == 2
    assert to_decimal(r, 6) == "1.414214"
    assert to_decimal(Fraction(-1, 2)) == "-0.5"


def test_sign_and_value_at_algebraic_point():
    order = VarOrder(["x", "y"])
    x, y = order.var("x"), order.var("y")
    r = sqrt2()
    assert sign_at(x * x - 2, {"x": r}) == 0
    assert sign_at(x - 1, {"x": r}) > 0
    assert value_polynomial(x * y, {"x": r, "y": r}) == 2
    assert compare(value_polynomial(x + 1, {"x": r}), Fraction(12, 5)) > 0


def test_roots_at_substitutes_lower_values():
    order = VarOrder(["x", "y"])
    x, y = order.var("x"), order.var("y")
    roots = roots_at(x * x + y * y - 2, "y", {"x": Fraction(1)})
    assert roots == [Fraction(-1), Fraction(1)]
    assert roots_at(x * y, "y", {"x": Fraction(0)}) is None


@pytest.mark.parametrize("coeffs", [
    [-2, 0, 1],
    [1, -3, 0, 1],
    [0, 1, 0, -5, 0, 4],
    [-1, 0, 0, 0, 0, 0, 3],
])
def test_root_count_matches_sympy(coeffs):
    t = sympy.Symbol("t")
    expr = sum(c * t ** i for i, c in enumerate(coeffs))
    assert len(isolate_roots(coeffs)) == len(set(sympy.real_roots(sympy.Poly(expr, t))))


def _cauchy_bound(coeffs):
    lead = abs(coeffs[-1])
    return 1 + Fraction(max(abs(c) for c in coeffs[:-1]), lead)


@pytest.mark.slow
def test_isolation_agrees_with_sturm(rng):
    for _ in range(1000):
        degree = rng.randint(1, 6)
        coeffs = [rng.randint(-6, 6) for _ in range(degree)] + [rng.choice([-3, -2, -1, 1, 2, 3])]
        bound = _cauchy_bound(coeffs)
        roots = isolate_roots(coeffs)
        assert len(roots) == sturm_count(coeffs, -bound, bound), coeffs
        for a, b in zip(roots, roots[1:]):
            assert compare(a, b) < 0


def test_refine_narrows_without_changing_value():
    a = sqrt2()
    b = refine(a, Fraction(1, 1000))
    assert b.hi - b.lo <= Fraction(1, 1000)
    assert compare(a, b) == 0
    assert b.lo * b.lo < 2 < b.hi * b.hi


def test_refine_rejects_nonpositive_width():
    with pytest.raises(AlgebraicError):
        refine(sqrt2(), Fraction(0))


@pytest.mark.parametrize("coeffs", [
    [0, -2, 0, 1],                 # t^3 - 2t
    [0, 2, -3, 1],                 # t(t - 1)(t - 2)
    [2, -1, -2, 1],                # (t - 1)(t + 1)(t - 2)
    [-2, 0, 1, 0, -1, 0, 1],
])
def test_isolating_intervals_hold_one_root(coeffs):
    for r in isolate_roots(coeffs):
        if isinstance(r, AlgebraicNumber):
            assert r.lo < r.hi
            assert sturm_count(r.poly, r.lo, r.hi) == 1
            assert sign_univariate(r.poly, r.lo) * sign_univariate(r.poly, r.hi) < 0
