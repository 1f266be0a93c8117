"""MCSAT 求解器与模型插值"""

from fractions import Fraction

import pytest

from src.core.errors import SolverError, SortError
from src.core.itp import eliminate_extended
from src.core.mcsat import Kind, Solver, SolverConfig, Status
from src.core.model import (
    Assignment, BoolVar, Clause, ExtendedConstraint, Literal, PolyConstraint, Relation,
    conj, disj, evaluate, neg,
)
from src.core.realalg import compare, isolate_roots
from src.utils.constants import Explain, FRESH_PREFIX


def solver_for(order, formulas, sorts=None, config=None):
    s = Solver(order, sorts, config)
    for f in formulas:
        s.assert_formula(f)
    return s


def test_guarded_disk_model_interpolant(guarded_disk):
    order, sorts, formulas = guarded_disk
    s = solver_for(order, formulas, sorts)
    m0 = Assignment({"x": 2})
    result = s.check_modulo(m0)
    assert result.status is Status.UNSAT
    x = order.var("x")
    (lit,) = result.interpolant.literals
    assert isinstance(lit.atom, ExtendedConstraint) and lit.atom.var == "x"
    for value, expected in ((2, False), (Fraction(3, 2), False), (1, True), (-2, True)):
        assert evaluate(result.interpolant, Assignment({"x": value})) is expected
    simplified = eliminate_extended(result.interpolant, m0)
    assert set(simplified) == {
        Literal(PolyConstraint.make(x * x - 2, Relation.GT), False),
        Literal(PolyConstraint.make(x, Relation.GT), False),
    }


def test_guarded_disk_is_sat_inside(guarded_disk):
    order, sorts, formulas = guarded_disk
    s = solver_for(order, formulas, sorts)
    result = s.check_modulo(Assignment({"x": 1}))
    assert result.is_sat
    assert result.model["b"] is True
    assert result.model["x"] == 1
    assert all(evaluate(f, result.model) for f in formulas)
    assert not any(n.startswith(FRESH_PREFIX) for n in result.model)


@pytest.mark.parametrize("explain", [Explain.EXTENDED, Explain.BASIC])
def test_algebraic_model(xy, explain):
    order, x, _ = xy
    s = solver_for(order, [PolyConstraint.make(x * x - 2, Relation.EQ),
                           PolyConstraint.make(x, Relation.GT)],
                   config=SolverConfig(explain=explain))
    result = s.check()
    assert result.is_sat
    assert compare(result.model["x"], isolate_roots([-2, 0, 1])[1]) == 0


def test_unsat_without_model(xy):
    order, x, y = xy
    s = solver_for(order, [PolyConstraint.make(x * x + y * y + 1, Relation.LT)])
    result = s.check()
    assert result.is_unsat
    assert result.interpolant.is_empty


def test_nonlinear_unsat_needs_learning(xy):
    order, x, y = xy
    formulas = [
        PolyConstraint.make(x * y - 1, Relation.GT),
        PolyConstraint.make(x, Relation.LT),
        PolyConstraint.make(y, Relation.GT),
    ]
    s = solver_for(order, formulas)
    assert s.check().is_unsat
    assert s.stats.conflicts >= 1


def test_boolean_structure(xy):
    order, x, _ = xy
    a, b = BoolVar("a"), BoolVar("b")
    formulas = [disj(a, b), neg(a), disj(neg(b), PolyConstraint.make(x - 3, Relation.GT))]
    s = solver_for(order, formulas)
    result = s.check()
    assert result.is_sat
    assert result.model["b"] is True
    assert compare(result.model["x"], 3) > 0


def test_boolean_model_variables(xy):
    order, x, _ = xy
    b = BoolVar("b")
    s = solver_for(order, [disj(neg(b), PolyConstraint.make(x, Relation.GT)),
                           PolyConstraint.make(x, Relation.LT)])
    result = s.check_modulo(Assignment({"b": True}))
    assert result.is_unsat
    assert evaluate(result.interpolant, Assignment({"b": True})) is False
    assert s.check_modulo(Assignment({"b": False})).is_sat


def test_check_can_be_repeated(guarded_disk):
    order, sorts, formulas = guarded_disk
    s = solver_for(order, formulas, sorts)
    assert s.check_modulo(Assignment({"x": 2})).is_unsat
    assert s.check_modulo(Assignment({"x": 0})).is_sat
    assert s.check().is_sat
    assert s.stats.checks == 3


def test_model_variables_must_be_lowest(guarded_disk):
    order, sorts, formulas = guarded_disk
    s = solver_for(order, formulas, sorts)
    with pytest.raises(SolverError):
        s.check_modulo(Assignment({"y": 0}))


def test_sort_mismatch(xy):
    order, x, _ = xy
    s = solver_for(order, [PolyConstraint.make(x, Relation.GT)])
    with pytest.raises(SortError):
        s.assert_formula(BoolVar("x"))


def test_conflict_limit_gives_unknown(xy):
    order, x, y = xy
    formulas = [
        PolyConstraint.make(x * y - 1, Relation.GT),
        PolyConstraint.make(x, Relation.LT),
        PolyConstraint.make(y, Relation.GT),
    ]
    s = solver_for(order, formulas, config=SolverConfig(conflict_limit=1))
    assert s.check().status in (Status.UNKNOWN, Status.UNSAT)


@pytest.mark.parametrize("value, expected", [
    (Fraction(0), Status.SAT),
    (Fraction(3, 2), Status.UNSAT),
    (Fraction(-3, 2), Status.UNSAT),
])
def test_check_modulo_on_the_line(xy, value, expected):
    order, x, y = xy
    s = solver_for(order, [PolyConstraint.make(x * x + y * y - 2, Relation.LE)])
    result = s.check_modulo(Assignment({"x": value}))
    assert result.status is expected
    if result.is_unsat:
        assert evaluate(result.interpolant, Assignment({"x": value})) is False
        assert evaluate(result.interpolant, Assignment({"x": 0})) is True


def test_interpolant_is_implied(guarded_disk):
    order, sorts, formulas = guarded_disk
    s = solver_for(order, formulas, sorts)
    result = s.check_modulo(Assignment({"x": 2}))
    check = solver_for(order, [conj(*formulas), neg(result.interpolant.formula())], sorts)
    assert check.check().is_unsat


class TestTrailOperations:
    """直接驱动 propagate / decide / 冲突分析"""

    def test_propagate_then_plugin_decision(self, xy):
        order, x, _ = xy
        s = solver_for(order, [PolyConstraint.make(x - 1, Relation.GT)])
        assert s.propagate() is None
        assert s.trail.top().kind is Kind.PROPAGATION
        assert s.decide("x") is None
        top = s.trail.top()
        assert top.kind is Kind.DECISION
        assert compare(s.trail.assignment["x"], Fraction(1)) > 0
        assert s.trail.decision_level == 1

    def test_model_decision_conflict_is_final(self, xy):
        order, x, y = xy
        disk = PolyConstraint.make(x * x + y * y - 1, Relation.LT)
        s = solver_for(order, [disk])
        assert s.propagate() is None
        assert s.decide("x", Fraction(2)) is None
        assert s.trail.top().kind is Kind.MODEL_DECISION
        conflict = s.propagate()
        assert conflict is not None
        assert Literal(disk, False) in conflict.literals
        clause, final = s.analyze_conflict(conflict)
        assert final
        reduced = s.analyze_final(clause)
        assert all(lit.atom != disk for lit in reduced)
        m = Assignment({"x": 2})
        assert all(evaluate(lit.formula(), m) is False for lit in reduced)

    def test_unit_conflict_resolves_to_empty_clause(self, xy):
        order, x, _ = xy
        above, below = PolyConstraint.make(x - 1, Relation.GT), PolyConstraint.make(x, Relation.LT)
        s = solver_for(order, [above, below])
        conflict = s.propagate()
        assert conflict == s.explain_unit_conflict("x")
        assert {Literal(above, False), Literal(below, False)} <= set(conflict.literals)
        clause, final = s.analyze_conflict(conflict)
        assert final
        assert clause.is_empty
        assert len(s.trail) == 0

    def test_analysis_rejects_a_clause_that_is_not_false(self, xy):
        order, x, _ = xy
        above = PolyConstraint.make(x - 1, Relation.GT)
        s = solver_for(order, [above])
        assert s.propagate() is None
        with pytest.raises(SolverError):
            s.analyze_conflict(Clause.of([Literal(above, True)]))

    def test_model_value_must_match_sort(self, guarded_disk):
        order, sorts, formulas = guarded_disk
        s = solver_for(order, formulas, sorts)
        with pytest.raises(SortError):
            s.decide("b", Fraction(1))
