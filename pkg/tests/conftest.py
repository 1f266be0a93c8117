"""共享夹具"""

import os
import random
import sys

import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from src.core.model import Relation, Sort, conj, disj, neg
from src.core.model import PolyConstraint, BoolVar
from src.core.parser import parse_script
from src.core.poly import VarOrder

SAMPLES = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "samples")


def sample_path(name: str) -> str:
    return os.path.join(SAMPLES, name)


def script_formula(body: str, decls: str = "(declare-const x Real)(declare-const y Real)"):
    """解析断言，返回 (order, 合取公式)"""
    script = parse_script(decls + body)
    return script.order, conj(script.formula, script.a_formula, script.b_formula)


@pytest.fixture
def xy():
    """x < y 顺序下的变量"""
    order = VarOrder(["x", "y"])
    return order, order.var("x"), order.var("y")


@pytest.fixture
def guarded_disk(xy):
    """b 与 (¬b ∨ x^2 + y^2 < 2)"""
    order, x, y = xy
    b = BoolVar("b")
    circle = PolyConstraint.make(x * x + y * y - 2, Relation.LT)
    sorts = {"x": Sort.REAL, "y": Sort.REAL, "b": Sort.BOOL}
    return order, sorts, [b, disj(neg(b), circle)]


@pytest.fixture
def rng():
    return random.Random(20240521)
