"""转移系统的模型检查"""

import os
from fractions import Fraction

import pytest

from src.core.errors import SolverError
from src.core.mc import (
    Trace, Unrolling, Verdict, bmc, check, itp_reach, kinduction, replay, verify_invariant,
)
from src.core.model import Assignment, PolyConstraint, Relation
from src.core.parser import parse_system
from src.utils.constants import Engine
from .conftest import SAMPLES, sample_path


def load(name: str):
    with open(sample_path(name), encoding="utf-8") as f:
        return parse_system(f.read(), name)


def test_counter_bmc_trace():
    system = load("counter.nlts")
    assert bmc(system, 1) is None
    trace = bmc(system, 3)
    assert len(trace) == 3
    assert [s["x"] for s in trace.states] == [0, 1, 2]
    assert replay(system, trace)


@pytest.mark.parametrize("engine", Engine.ALL)
def test_counter_is_invalid_for_every_engine(engine):
    system = load("counter.nlts")
    result = check(system, engine, max_k=4)
    assert result.verdict is Verdict.INVALID
    assert result.trace.final["x"] == 2
    assert replay(system, result.trace)


def test_doubling_needs_four_steps():
    system = load("doubling.nlts")
    assert bmc(system, 3) is None
    trace = bmc(system, 4)
    assert [s["x"] for s in trace.states] == [1, 2, 4, 8, 16]


def test_free_input_breaks_the_property():
    system = load("unsafe_input.nlts")
    trace = bmc(system, 2)
    assert len(trace) == 2
    assert len(trace.inputs) == 1
    assert replay(system, trace)


@pytest.mark.parametrize("name", [
    "square_growth.nlts", "halving.nlts", "rotation.nlts", "parabola.nlts",
    "toggle.nlts", "sum_squares.nlts", "logistic.nlts",
])
def test_inductive_properties(name):
    system = load(name)
    result = kinduction(system, 1)
    assert result.verdict is Verdict.VALID
    assert result.invariant == system.prop
    assert verify_invariant(system, result.invariant)


def test_kinduction_reports_the_depth_of_its_invariant():
    system = load("swap.nlts")
    assert kinduction(system, 1).verdict is Verdict.UNKNOWN
    result = kinduction(system, 2)
    assert result.verdict is Verdict.VALID
    assert result.invariant == system.prop
    assert result.depth == 2
    assert verify_invariant(system, result.invariant, depth=2)
    assert not verify_invariant(system, result.invariant)


def test_kinduction_needs_positive_k():
    with pytest.raises(SolverError):
        kinduction(load("counter.nlts"), 0)


def test_unknown_engine():
    with pytest.raises(SolverError):
        check(load("counter.nlts"), "pdr")


def test_replay_rejects_a_wrong_trace():
    system = load("counter.nlts")
    assert not replay(system, Trace([Assignment({"x": 0}), Assignment({"x": 2})]))
    assert not replay(system, Trace([Assignment({"x": 1})]))
    assert not replay(system, Trace([Assignment({"x": 0}), Assignment({"x": 1})]))


def test_verify_invariant_rejects_a_weak_invariant():
    system = load("counter.nlts")
    x = system.order.var("x")
    assert not verify_invariant(system, PolyConstraint.make(x, Relation.GE))


def test_functional_updates_are_inlined():
    system = load("cauchy.nlts")
    updates, rest = system.updates()
    assert set(updates) == {"S1", "S2", "S3"}
    unroll = Unrolling(system)
    unroll.trans(0)
    assert "S1@1" not in unroll.order
    assert "x@0" in unroll.order
    assert unroll.names_at(1) == ["S1@1", "S2@1", "S3@1"]


def test_constraint_transitions_get_fresh_copies():
    system = load("halving.nlts")
    updates, _ = system.updates()
    assert updates == {}
    unroll = Unrolling(system)
    unroll.trans(0)
    assert "x@1" in unroll.order


def test_trace_reads_inlined_values():
    system = load("doubling.nlts")
    unroll = Unrolling(system)
    unroll.trans(0)
    trace = unroll.trace(Assignment({"x@0": Fraction(3)}), 2)
    assert [s["x"] for s in trace.states] == [3, 6]


@pytest.mark.slow
def test_itp_proves_square_growth():
    result = check(load("square_growth.nlts"), Engine.ITP, max_k=3)
    assert result.verdict is Verdict.VALID
    assert result.invariant is not None


@pytest.mark.slow
def test_cauchy_schwarz_strengthened_is_inductive():
    system = load("cauchy_strong.nlts")
    result = check(system, Engine.KIND, max_k=2)
    assert result.verdict is Verdict.VALID
    assert result.bound == 1


@pytest.mark.slow
def test_cauchy_schwarz_by_reachability():
    result = itp_reach(load("cauchy.nlts"), 3)
    assert result.verdict is Verdict.VALID


@pytest.mark.slow
@pytest.mark.parametrize("name", sorted(
    n for n in os.listdir(SAMPLES) if n.endswith(".nlts") and not n.startswith("cauchy")
))
def test_bundled_counterexamples_replay(name):
    system = load(name)
    trace = bmc(system, 4)
    if trace is not None:
        assert replay(system, trace)
        assert name in ("counter.nlts", "doubling.nlts", "unsafe_input.nlts")
