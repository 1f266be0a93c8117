"""蕴含项与模型泛化"""

from fractions import Fraction

import pytest

from src.core.cad import CellDescription, sample_cell
from src.core.errors import EvaluationError, SolverError
from src.core.gen import generalize, implicant
from src.core.mcsat import Solver
from src.core.model import (
    TRUE, And, Assignment, BoolVar, Literal, PolyConstraint, Relation, Sort, conj, disj, evaluate,
)


def extends(f, order, sorts, point) -> bool:
    s = Solver(order, sorts)
    s.assert_formula(f)
    return s.check_modulo(point).is_sat


def samples_of(g, order, rng, count=100):
    """在泛化结果（只含 x）内随机取点"""
    atoms = () if g == TRUE else g.args if isinstance(g, And) else (g,)
    cell = CellDescription(order, {"x": tuple(atoms)})
    return [sample_cell(cell, rng) for _ in range(count)]


def test_implicant_of_disjunction():
    a, b = BoolVar("a"), BoolVar("b")
    assert implicant(disj(a, b), {"a": True, "b": False}) == [Literal(a)]


def test_implicant_picks_first_true_child(xy):
    _, x, y = xy
    f = conj(PolyConstraint.make(x, Relation.GT),
             disj(PolyConstraint.make(y, Relation.GT), PolyConstraint.make(y - 1, Relation.LT)))
    lits = implicant(f, {"x": 1, "y": 0})
    assert lits == [Literal(PolyConstraint.make(x, Relation.GT)),
                    Literal(PolyConstraint.make(y - 1, Relation.LT))]


def test_implicant_implies_formula(xy, rng):
    _, x, y = xy
    f = disj(conj(PolyConstraint.make(x, Relation.GT), PolyConstraint.make(y, Relation.LT)),
             PolyConstraint.make(x * y - 1, Relation.GT))
    lits = implicant(f, {"x": 1, "y": -1})
    for _ in range(200):
        m = {"x": Fraction(rng.randint(-20, 20), 4), "y": Fraction(rng.randint(-20, 20), 4)}
        if all(evaluate(lit, m) for lit in lits):
            assert evaluate(f, m) is True


def test_implicant_requires_a_model(xy):
    _, x, _ = xy
    with pytest.raises(EvaluationError):
        implicant(PolyConstraint.make(x, Relation.GT), {"x": -1})


def test_generalize_outside_the_disk(xy, rng):
    order, x, y = xy
    f = PolyConstraint.make(x * x + y * y - 2, Relation.GT)
    g = generalize(f, Assignment({"x": 1, "y": 2}), {"x"})
    assert isinstance(g, And)
    assert set(g.args) == {
        PolyConstraint.make(x * x - 2, Relation.LT),
        PolyConstraint.make(x, Relation.GT),
    }
    sorts = {"x": Sort.REAL, "y": Sort.REAL}
    for point in samples_of(g, order, rng):
        assert evaluate(g, point) is True
        assert extends(f, order, sorts, point)


def test_generalize_keeping_everything(xy):
    _, x, y = xy
    f = PolyConstraint.make(x * x + y * y - 2, Relation.GT)
    m = Assignment({"x": 1, "y": 2})
    g = generalize(f, m, {"x", "y"})
    assert evaluate(g, m) is True
    assert PolyConstraint.make(x * x + y * y - 2, Relation.GT) in g.args


def test_generalize_half_plane(xy, rng):
    order, x, y = xy
    f = PolyConstraint.make(y - x, Relation.GT)
    g = generalize(f, Assignment({"x": 0, "y": 1}), {"x"})
    assert evaluate(g, Assignment({"x": 0})) is True
    sorts = {"x": Sort.REAL, "y": Sort.REAL}
    for point in samples_of(g, order, rng):
        assert extends(f, order, sorts, point)


def test_generalize_keeps_boolean_literals(xy):
    _, x, _ = xy
    b = BoolVar("b")
    f = conj(b, PolyConstraint.make(x, Relation.GT))
    assert generalize(f, Assignment({"b": True, "x": 1}), {"b"}) == b
    assert generalize(f, Assignment({"b": True, "x": 1}), set()) == TRUE


def test_kept_variables_must_be_lowest(xy):
    _, x, y = xy
    f = PolyConstraint.make(x + y, Relation.GT)
    with pytest.raises(SolverError):
        generalize(f, Assignment({"x": 1, "y": 1}), {"y"})
