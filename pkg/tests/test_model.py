"""公式、文字、子句与三值求值"""

from fractions import Fraction

from src.core.model import (
    FALSE, TRUE, And, Assignment, BoolVar, Clause, ExtendedConstraint, Literal, Not, Or,
    PolyConstraint, Relation, can_evaluate, conj, disj, evaluate, formula_vars, neg, nnf,
)
from src.core.realalg import isolate_roots


def test_constraint_normal_form(xy):
    _, x, _ = xy
    c = PolyConstraint.make(-2 * x + 4, Relation.GT)
    assert c == PolyConstraint(x - 2, Relation.LT)
    assert PolyConstraint.make(x - x + 3, Relation.GT) is TRUE
    assert PolyConstraint.make(x - x, Relation.LT) is FALSE


def test_three_valued_evaluation(xy):
    _, x, y = xy
    c = PolyConstraint.make(x * x + y * y - 2, Relation.LT)
    assert evaluate(c, {"x": 0, "y": 1}) is True
    assert evaluate(c, {"x": 2}) is None
    assert evaluate(disj(c, BoolVar("b")), {"b": True}) is True
    assert evaluate(conj(c, BoolVar("b")), {"b": False}) is False
    assert evaluate(neg(c), {"x": 2, "y": 0}) is True


def test_evaluation_at_algebraic_values(xy):
    _, x, y = xy
    r = isolate_roots([-2, 0, 1])[1]
    assert evaluate(PolyConstraint.make(x * x - 2, Relation.EQ), {"x": r}) is True
    assert evaluate(PolyConstraint.make(x * y - 2, Relation.EQ), {"x": r, "y": r}) is True


def test_root_constraint_semantics(xy):
    _, x, y = xy
    atom = ExtendedConstraint("x", Relation.GT, x * x - 2, 2)
    assert evaluate(atom, {"x": 2}) is True
    assert evaluate(atom, {"x": 1}) is False
    assert evaluate(atom, {}) is None
    # 根的个数随低层变量变化
    par = ExtendedConstraint("y", Relation.LT, x * x + y * y - 2, 2)
    assert evaluate(par, {"x": 0, "y": 0}) is True
    assert evaluate(par, {"x": 2, "y": 0}) is False


def test_clause_deduplicates_literals():
    b = Literal(BoolVar("b"))
    c = Clause.of([b, b, ~b])
    assert len(c) == 2
    assert c.is_tautology
    assert Clause.of([]).is_empty
    assert evaluate(Clause.of([]), {}) is False


def test_nnf_pushes_negation(xy):
    _, x, _ = xy
    a = PolyConstraint.make(x, Relation.GT)
    b = BoolVar("b")
    f = nnf(Not(And((a, Or((b, Not(a)))))))
    assert isinstance(f, Or)
    assert all(isinstance(g, (Not, And, Or)) or g is b for g in f.args)
    for m in ({"x": 1, "b": True}, {"x": -1, "b": False}, {"x": 1, "b": False}):
        assert evaluate(f, m) == (not evaluate(And((a, Or((b, Not(a))))), m))


def test_assignment_union_and_restrict():
    m = Assignment({"x": 1, "b": True})
    assert m.restrict(["x"]) == Assignment({"x": 1})
    assert m.union({"y": Fraction(1, 2)})["y"] == Fraction(1, 2)
    assert formula_vars(conj(BoolVar("b"), BoolVar("c"))) == {"b", "c"}


class _Trail:
    """只带 value_of 与 assignment 的最小 trail"""

    def __init__(self, values, assignment):
        self.values = values
        self.assignment = Assignment(assignment)

    def value_of(self, term):
        return self.values.get(term)


def test_can_evaluate_both_ways(xy):
    _, x, y = xy
    disk = PolyConstraint.make(x * x + y * y - 1, Relation.LT)
    trail = _Trail({disk: True}, {"x": 1, "y": 0})
    assert can_evaluate(trail, disk, True)
    assert can_evaluate(trail, disk, False)


def test_can_evaluate_boolean_and_undetermined(xy):
    _, x, _ = xy
    b = BoolVar("b")
    trail = _Trail({b: True}, {})
    assert can_evaluate(trail, b, True)
    assert not can_evaluate(trail, b, False)
    c = PolyConstraint.make(x, Relation.GT)
    assert not can_evaluate(trail, c, True)
    assert not can_evaluate(trail, c, False)
    assert can_evaluate(trail, disj(b, c), True)
