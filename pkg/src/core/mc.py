"""
转移系统的模型检查
BMC、k 归纳，以及基于插值的可达集过近似（IMC 风格，带坏状态立方缓存）
"""

import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Dict, List, Optional, Tuple

from .errors import EvaluationError, SolverError
from .gen import generalize
from .itp import interpolate, is_unsat
from .mcsat import Solver, SolverConfig, Status
from .model import (
    And, Assignment, Formula, PolyConstraint, Relation, Sort, Var, conj, disj, evaluate,
    neg, rename_formula,
)
from .poly import Polynomial, VarOrder, compose
from .realalg import value_polynomial
from ..utils.constants import (
    DEFAULT_MAX_K, MAX_REACH_ROUNDS, PRIME_SUFFIX, STEP_SEPARATOR, Engine,
)

logger = logging.getLogger(__name__)


class Verdict(Enum):
    """模型检查结论"""
    VALID = "valid"        # 性质成立，附带归纳不变式
    INVALID = "invalid"    # 找到反例路径
    UNKNOWN = "unknown"    # 达到界仍无结论


def primed(name: str) -> str:
    return name + PRIME_SUFFIX


def step_name(name: str, step: int) -> str:
    return f"{name}{STEP_SEPARATOR}{step}"


@dataclass
class TransitionSystem:
    """
    转移系统

    init / prop 只含状态变量；trans 含状态变量、带撇的后继变量和输入变量。
    所有多项式共用 order
    """
    order: VarOrder
    state: List[Var]
    inputs: List[Var]
    init: Formula
    trans: Formula
    prop: Formula
    name: str = ""

    @property
    def state_names(self) -> List[str]:
        return [v.name for v in self.state]

    @property
    def input_names(self) -> List[str]:
        return [v.name for v in self.inputs]

    def sort_of(self, name: str) -> Sort:
        for v in self.state + self.inputs:
            if v.name == name:
                return v.sort
        raise EvaluationError(f"{name} is not a variable of the system")

    def with_property(self, prop: Formula) -> "TransitionSystem":
        return replace(self, prop=prop)

    def updates(self) -> Tuple[Dict[str, Polynomial], Formula]:
        """
        拆出函数式更新 s' = e（e 不含后继变量），其余合取项原样保留

        Returns:
            (状态变量到更新表达式的映射, 剩余的转移约束)
        """
        parts = self.trans.args if isinstance(self.trans, And) else (self.trans,)
        nexts = {primed(v.name): v.name for v in self.state if v.sort is Sort.REAL}
        found: Dict[str, Polynomial] = {}
        rest: List[Formula] = []
        for part in parts:
            update = self._as_update(part, nexts, found)
            if update is None:
                rest.append(part)
            else:
                found[update[0]] = update[1]
        return found, conj(*rest)

    @staticmethod
    def _as_update(part: Formula, nexts: Dict[str, str],
                   found: Dict[str, Polynomial]) -> Optional[Tuple[str, Polynomial]]:
        if not isinstance(part, PolyConstraint) or part.rel is not Relation.EQ:
            return None
        targets = [n for n in part.poly.vars() if n in nexts]
        if len(targets) != 1 or nexts[targets[0]] in found:
            return None
        coeffs = part.poly.coefficients(targets[0])
        lead = coeffs.get(1)
        if max(coeffs) != 1 or not lead.is_constant or abs(lead.const) != 1:
            return None
        rest = coeffs.get(0, part.poly.order.constant(0))
        return nexts[targets[0]], rest.scale(-lead.const)


@dataclass
class Trace:
    """
    反例路径

    states[j] 是第 j 步的状态，inputs[j] 是第 j 步转移使用的输入
    """
    states: List[Assignment]
    inputs: List[Assignment] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.states)

    @property
    def final(self) -> Assignment:
        return self.states[-1]


@dataclass
class EngineStats:
    queries: int = 0
    conflicts: int = 0
    decisions: int = 0
    interpolant_clauses: int = 0
    rounds: int = 0

    def absorb(self, counters: Dict[str, int]) -> None:
        self.conflicts += counters.get("conflicts", 0)
        self.decisions += counters.get("decisions", 0)
        self.interpolant_clauses += counters.get("interpolant_clauses", 0)

    def as_dict(self) -> Dict[str, int]:
        return dict(self.__dict__)


@dataclass
class MCResult:
    """模型检查结果；invariant 是 depth 步归纳的（k 归纳给出 P 与 k，其余引擎 depth 为 1）"""
    verdict: Verdict
    invariant: Optional[Formula] = None
    depth: int = 1
    trace: Optional[Trace] = None
    bound: int = 0
    engine: str = ""
    stats: EngineStats = field(default_factory=EngineStats)

    @property
    def is_valid(self) -> bool:
        return self.verdict is Verdict.VALID

    @property
    def is_invalid(self) -> bool:
        return self.verdict is Verdict.INVALID


# ----------------------------------------------------------------------
# 展开
# ----------------------------------------------------------------------

class Unrolling:
    """
    带步号的变量副本 s@j

    inline 为真时函数式更新直接代入，后继状态不引入新变量；
    start 为第一帧的步号（插值查询中 B 从第 1 步开始）
    """

    def __init__(self, system: TransitionSystem, inline: bool = True, start: int = 0):
        self.system = system
        self.start = start
        self.order = VarOrder()
        if inline:
            self._updates, self._rest = system.updates()
        else:
            self._updates, self._rest = {}, system.trans
        self._frames: List[Dict[str, Polynomial]] = []
        self._inputs: List[Dict[str, Polynomial]] = []

    def _fresh(self, name: str) -> Polynomial:
        self.order.add(name)
        return self.order.var(name)

    def _bool_name(self, name: str, j: int) -> str:
        return step_name(name, self.start + j)

    def frame(self, j: int) -> Dict[str, Polynomial]:
        """第 j 帧实状态变量的像"""
        while len(self._frames) <= j:
            k = len(self._frames)
            images: Dict[str, Polynomial] = {}
            for v in self.system.state:
                if v.sort is not Sort.REAL:
                    continue
                if k > 0 and v.name in self._updates:
                    images[v.name] = self._substitute(self._updates[v.name], k - 1)
                else:
                    images[v.name] = self._fresh(step_name(v.name, self.start + k))
            self._frames.append(images)
        return self._frames[j]

    def inputs(self, j: int) -> Dict[str, Polynomial]:
        while len(self._inputs) <= j:
            k = len(self._inputs)
            self._inputs.append({v.name: self._fresh(step_name(v.name, self.start + k))
                                 for v in self.system.inputs if v.sort is Sort.REAL})
        return self._inputs[j]

    def _substitute(self, p: Polynomial, j: int) -> Polynomial:
        return compose(p, self._images(j), self.order)

    def _images(self, j: int) -> Dict[str, Polynomial]:
        images = dict(self.frame(j))
        images.update(self.inputs(j))
        if len(self._frames) > j + 1:
            images.update({primed(n): p for n, p in self._frames[j + 1].items()})
        return images

    def _bool_names(self, j: int) -> Dict[str, str]:
        names = {}
        for v in self.system.state:
            if v.sort is Sort.BOOL:
                names[v.name] = self._bool_name(v.name, j)
                names[primed(v.name)] = self._bool_name(v.name, j + 1)
        for v in self.system.inputs:
            if v.sort is Sort.BOOL:
                names[v.name] = self._bool_name(v.name, j)
        return names

    def at(self, f: Formula, j: int) -> Formula:
        """只含状态变量的公式放到第 j 帧"""
        return rename_formula(f, self._images(j), self.order, self._bool_names(j))

    def init(self) -> Formula:
        return self.at(self.system.init, 0)

    def prop(self, j: int) -> Formula:
        return self.at(self.system.prop, j)

    def trans(self, j: int) -> Formula:
        """第 j 步到第 j+1 步的转移（已代入的更新不再出现）"""
        self.frame(j + 1)
        return rename_formula(self._rest, self._images(j), self.order, self._bool_names(j))

    def names_at(self, j: int) -> List[str]:
        """第 j 帧状态副本的变量名"""
        return [step_name(v.name, self.start + j) for v in self.system.state]

    def to_base(self, f: Formula, j: int, base: VarOrder) -> Formula:
        """第 j 帧的公式改回原状态变量名"""
        images = {}
        names = {}
        for v in self.system.state:
            copy = step_name(v.name, self.start + j)
            if v.sort is Sort.REAL:
                images[copy] = base.var(v.name)
            else:
                names[copy] = v.name
        return rename_formula(f, images, base, names)

    def trace(self, model: Assignment, length: int) -> Trace:
        """从展开公式的模型读出路径；模型中缺失的变量（无约束）取 0 / false"""
        full = model.copy()
        for name in self.order.names:
            if name not in full:
                full[name] = 0
        states: List[Assignment] = []
        inputs: List[Assignment] = []
        for j in range(length):
            state = Assignment()
            for v in self.system.state:
                if v.sort is Sort.REAL:
                    state[v.name] = value_polynomial(self.frame(j)[v.name], full)
                else:
                    state[v.name] = full.get(self._bool_name(v.name, j), False)
            states.append(state)
            if j + 1 < length:
                step = Assignment()
                for v in self.system.inputs:
                    if v.sort is Sort.REAL:
                        step[v.name] = value_polynomial(self.inputs(j)[v.name], full)
                    else:
                        step[v.name] = full.get(self._bool_name(v.name, j), False)
                inputs.append(step)
        return Trace(states, inputs)


def _solve(formulas: List[Formula], order: VarOrder, stats: EngineStats,
           config: Optional[SolverConfig]):
    solver = Solver(order, config=config)
    for f in formulas:
        solver.assert_formula(f)
    result = solver.check()
    stats.queries += 1
    stats.absorb(solver.stats.as_dict())
    return result


# ----------------------------------------------------------------------
# 校验
# ----------------------------------------------------------------------

def replay(system: TransitionSystem, trace: Trace) -> bool:
    """只用求值重放路径：初始状态、每步转移、最后一步违反性质"""
    if not trace.states or evaluate(system.init, trace.states[0]) is not True:
        return False
    for j in range(len(trace) - 1):
        m = trace.states[j].copy()
        for name, v in trace.states[j + 1].items():
            m[primed(name)] = v
        if j < len(trace.inputs):
            m = m.union(trace.inputs[j])
        if evaluate(system.trans, m) is not True:
            return False
    return evaluate(system.prop, trace.final) is False


def verify_invariant(system: TransitionSystem, invariant: Formula,
                     config: Optional[SolverConfig] = None, depth: int = 1) -> bool:
    """
    Init ∧ T^j ⇒ R(x_j)（j < depth）、R(x_0..x_{depth-1}) ∧ T^depth ⇒ R(x_depth)、R ⇒ P 都成立

    depth 为 1 时即普通的归纳不变式
    """
    if depth < 1:
        raise SolverError("invariant depth must be >= 1")
    unroll = Unrolling(system, inline=False)
    checks = []
    for j in range(depth):
        checks.append(conj(unroll.init(), *[unroll.trans(i) for i in range(j)],
                           neg(unroll.at(invariant, j))))
    window = [unroll.at(invariant, i) for i in range(depth)]
    steps = [unroll.trans(i) for i in range(depth)]
    checks.append(conj(*window, *steps, neg(unroll.at(invariant, depth))))
    checks.append(conj(unroll.at(invariant, 0), neg(unroll.prop(0))))
    return all(is_unsat(f, config) for f in checks)


# ----------------------------------------------------------------------
# 引擎
# ----------------------------------------------------------------------

def bmc(system: TransitionSystem, k: int, config: Optional[SolverConfig] = None,
        stats: Optional[EngineStats] = None) -> Optional[Trace]:
    """
    有界模型检查

    依次检查 Init ∧ T^j ∧ ¬P(x_j)，j = 0..k，返回找到的最短反例
    """
    stats = stats if stats is not None else EngineStats()
    unroll = Unrolling(system)
    for j in range(k + 1):
        formulas = [unroll.init()] + [unroll.trans(i) for i in range(j)] + [neg(unroll.prop(j))]
        result = _solve(formulas, unroll.order, stats, config)
        logger.info("bmc depth %d: %s", j, result.status.value)
        if result.is_sat:
            return unroll.trace(result.model, j + 1)
    return None


def kinduction(system: TransitionSystem, k: int, config: Optional[SolverConfig] = None,
               stats: Optional[EngineStats] = None) -> MCResult:
    """
    k 归纳

    基础：k 步内没有反例；归纳步：连续 k 个状态满足 P 且相连时，下一个状态也满足 P
    """
    if k < 1:
        raise SolverError("k-induction needs k >= 1")
    stats = stats if stats is not None else EngineStats()
    trace = bmc(system, k, config, stats)
    if trace is not None:
        return MCResult(Verdict.INVALID, trace=trace, bound=k, engine=Engine.KIND, stats=stats)
    unroll = Unrolling(system)
    formulas = []
    for i in range(k):
        formulas.append(unroll.prop(i))
        formulas.append(unroll.trans(i))
    formulas.append(neg(unroll.prop(k)))
    result = _solve(formulas, unroll.order, stats, config)
    logger.info("induction step at k=%d: %s", k, result.status.value)
    if result.is_unsat:
        return MCResult(Verdict.VALID, invariant=system.prop, depth=k, bound=k,
                        engine=Engine.KIND, stats=stats)
    return MCResult(Verdict.UNKNOWN, bound=k, engine=Engine.KIND, stats=stats)


def itp_reach(system: TransitionSystem, max_k: int, config: Optional[SolverConfig] = None,
              stats: Optional[EngineStats] = None) -> MCResult:
    """
    基于插值的可达集过近似

    对每个界 k：R 从 Init 开始，A = R(x0) ∧ T(x0, x1)，B = 从 x1 出发 k-1 步内
    到达 ¬P 或到达已知坏状态立方。UNSAT 时用插值（改回状态变量名）扩张 R，
    插值被 R 蕴含即得到不动点；SAT 时若 R 仍是 Init 则用 BMC 找真实反例，
    否则把 x1 处的坏状态泛化成立方加入缓存并增大 k
    """
    stats = stats if stats is not None else EngineStats()
    trace = bmc(system, 0, config, stats)
    if trace is not None:
        return MCResult(Verdict.INVALID, trace=trace, bound=0, engine=Engine.ITP, stats=stats)
    cubes: List[Tuple[Formula, int]] = []
    for k in range(1, max_k + 1):
        reach = system.init
        fresh = True
        for _ in range(MAX_REACH_ROUNDS):
            stats.rounds += 1
            front = Unrolling(system, inline=False)
            a = conj(front.at(reach, 0), front.trans(0))
            suffix = Unrolling(system, start=1)
            bad = [neg(suffix.prop(j)) for j in range(k)]
            bad += [suffix.at(cube, 0) for cube, _ in cubes]
            b = conj(*[suffix.trans(j) for j in range(k - 1)], disj(*bad))
            res = interpolate(a, b, config)
            stats.queries += 1
            stats.absorb(res.stats)
            if res.status is Status.UNKNOWN:
                return MCResult(Verdict.UNKNOWN, bound=k, engine=Engine.ITP, stats=stats)
            if res.is_sat:
                depth = max([k - 1] + [d for _, d in cubes])
                if fresh:
                    trace = bmc(system, depth + 1, config, stats)
                    if trace is not None:
                        return MCResult(Verdict.INVALID, trace=trace, bound=k,
                                        engine=Engine.ITP, stats=stats)
                cube = generalize(b, res.model, suffix.names_at(0), (config or SolverConfig()).projection)
                cubes.append((suffix.to_base(cube, 0, system.order), depth))
                logger.info("bound %d: spurious counterexample, blocking %s", k, cubes[-1][0])
                break
            step = front.to_base(res.interpolant, 1, system.order)
            if is_unsat(conj(step, neg(reach)), config):
                logger.info("fixpoint at bound %d after %d rounds", k, stats.rounds)
                return MCResult(Verdict.VALID, invariant=reach, bound=k,
                                engine=Engine.ITP, stats=stats)
            reach = disj(reach, step)
            fresh = False
    return MCResult(Verdict.UNKNOWN, bound=max_k, engine=Engine.ITP, stats=stats)


def check(system: TransitionSystem, engine: str = Engine.ITP, max_k: int = DEFAULT_MAX_K,
          config: Optional[SolverConfig] = None) -> MCResult:
    """
    按引擎分派；INVALID 的路径用求值重放，VALID 的不变式用三个蕴含检查复核
    """
    stats = EngineStats()
    if engine == Engine.BMC:
        trace = bmc(system, max_k, config, stats)
        result = MCResult(Verdict.INVALID if trace else Verdict.UNKNOWN, trace=trace,
                          bound=max_k, engine=engine, stats=stats)
    elif engine == Engine.KIND:
        result = MCResult(Verdict.UNKNOWN, bound=max_k, engine=engine, stats=stats)
        for k in range(1, max_k + 1):
            result = kinduction(system, k, config, stats)
            if result.verdict is not Verdict.UNKNOWN:
                break
    elif engine == Engine.ITP:
        result = itp_reach(system, max_k, config, stats)
    else:
        raise SolverError(f"unknown engine {engine!r}")
    if result.is_invalid and not replay(system, result.trace):
        raise SolverError("counterexample does not replay")
    if (result.is_valid and result.invariant is not None
            and not verify_invariant(system, result.invariant, config, result.depth)):
        raise SolverError("invariant is not inductive")
    logger.info("%s: %s at bound %d", engine, result.verdict.value, result.bound)
    return result
