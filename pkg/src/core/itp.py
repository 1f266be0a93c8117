"""
基于模型插值的 Craig 插值
两个求解器交替：B 的模型限制到共享变量后交给 A 做 check_modulo，
A 给出的模型插值（消去扩展约束后）既并入插值也断言回 B
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

from .cad import cell_basic, closure_with_derivatives
from .errors import InterpolationError
from .mcsat import SolverConfig, Solver, Status
from .model import (
    TRUE, Assignment, BoolVar, Clause, ExtendedConstraint, Formula, Literal, PolyConstraint,
    Sort, atoms_of, clauses_formula, conj, evaluate, formula_vars, neg, polys_of, reorder_formula,
)
from .poly import Polynomial, VarOrder
from ..utils.constants import MAX_INTERPOLATION_ROUNDS, Projection

logger = logging.getLogger(__name__)


@dataclass
class InterpolantLog:
    """
    模型插值序列：每轮被反驳的 B 模型（限制到共享变量）及对应子句
    """
    entries: List[Tuple[Assignment, Clause]] = field(default_factory=list)

    def record(self, m: Assignment, clause: Clause) -> None:
        self.entries.append((m, clause))

    def __len__(self) -> int:
        return len(self.entries)

    def check_sequence(self, a: Formula, config: Optional[SolverConfig] = None) -> bool:
        """
        逐项检查模型插值序列的三个条件

        1. M_k 满足之前的全部子句
        2. M_k 与 A 不一致（新求解器上 check_modulo 为 UNSAT）
        3. I_k 在 M_k 下为假
        """
        for k, (m, clause) in enumerate(self.entries):
            for i, (_, earlier) in enumerate(self.entries[:k]):
                if evaluate(earlier, m) is not True:
                    logger.warning("model %d violates earlier clause %d", k, i)
                    return False
            if evaluate(clause, m) is not False:
                logger.warning("clause %d does not refute its model", k)
                return False
            order, sorts = query_order([a], set(m.keys()))
            solver = Solver(order, sorts, config)
            solver.assert_formula(reorder_formula(a, order))
            if not solver.check_modulo(m).is_unsat:
                logger.warning("model %d is consistent with A", k)
                return False
        return True


@dataclass
class InterpolationResult:
    """
    插值结果

    UNSAT 时 clauses 是插值的 CNF（空表即 TRUE），SAT 时 model 满足 A 与 B
    """
    status: Status
    clauses: List[Clause] = field(default_factory=list)
    model: Optional[Assignment] = None
    log: InterpolantLog = field(default_factory=InterpolantLog)
    shared: Tuple[str, ...] = ()
    order: Optional[VarOrder] = None
    stats: Dict[str, int] = field(default_factory=dict)

    @property
    def is_unsat(self) -> bool:
        return self.status is Status.UNSAT

    @property
    def is_sat(self) -> bool:
        return self.status is Status.SAT

    @property
    def interpolant(self) -> Formula:
        return clauses_formula(self.clauses)

    @property
    def rounds(self) -> int:
        return len(self.log)


# ----------------------------------------------------------------------
# 变量顺序
# ----------------------------------------------------------------------

def _sorts_of(formulas: Iterable[Formula]) -> Dict[str, Sort]:
    sorts: Dict[str, Sort] = {}
    for f in formulas:
        for atom in atoms_of(f):
            if isinstance(atom, BoolVar):
                sorts[atom.name] = Sort.BOOL
            else:
                for name in atom.poly.vars():
                    sorts[name] = Sort.REAL
                if isinstance(atom, ExtendedConstraint):
                    sorts[atom.var] = Sort.REAL
    return sorts


def _source_rank(formulas: Iterable[Formula]) -> Dict[str, int]:
    """变量在输入多项式所用顺序中的位置，用来在各组内保持原有次序"""
    rank: Dict[str, int] = {}
    for f in formulas:
        for p in polys_of(f):
            for i, name in enumerate(p.order.names):
                rank.setdefault(name, i)
    return rank


def query_order(groups: Sequence[Formula], low: Set[str],
                *rest: Set[str]) -> Tuple[VarOrder, Dict[str, Sort]]:
    """
    固定一次查询的变量顺序：low 中的实变量最低，其后依次是 rest 各组，
    剩余变量最后；组内按原顺序
    """
    sorts = _sorts_of(groups)
    rank = _source_rank(groups)
    reals = [n for n, s in sorts.items() if s is Sort.REAL]
    key = lambda n: (rank.get(n, len(rank)), n)
    names: List[str] = []
    for group in (low,) + rest:
        names.extend(sorted((n for n in reals if n in group and n not in names), key=key))
    names.extend(sorted((n for n in reals if n not in names), key=key))
    return VarOrder(names), sorts


def shared_vars(a: Formula, b: Formula) -> Set[str]:
    return formula_vars(a) & formula_vars(b)


# ----------------------------------------------------------------------
# 扩展约束消去
# ----------------------------------------------------------------------

def eliminate_extended(clause: Clause, m: Assignment,
                       operator: str = Projection.MCCALLUM) -> Clause:
    """
    把子句中的扩展约束文字换成基本约束

    每个扩展文字 L 换成 cell_basic({f}, m) 全部原子的否定；该胞腔蕴含 L 的否定，
    所以替换后的析取被 L 逐点蕴含

    Raises:
        InterpolationError: 子句中有文字在 m 下不为假
    """
    out: List[Literal] = []
    for lit in clause:
        if evaluate(lit, m) is not False:
            raise InterpolationError(f"literal {lit} is not false in the model")
        if not isinstance(lit.atom, ExtendedConstraint):
            out.append(lit)
            continue
        cell = cell_basic([lit.atom.poly], m, operator=operator)
        replacement = [Literal(atom, False) for atom in cell.atoms()]
        logger.debug("replace %s by %s", lit, " | ".join(str(r) for r in replacement))
        out.extend(replacement)
    result = Clause.of(out)
    if evaluate(result, m) is not False:
        raise InterpolationError("replacement is not false in the model")
    return result


def dedupe(clauses: Iterable[Clause]) -> List[Clause]:
    """去掉文字集合相同的重复子句"""
    out: List[Clause] = []
    seen: Set[frozenset] = set()
    for c in clauses:
        key = frozenset(c.literals)
        if key not in seen:
            seen.add(key)
            out.append(c)
    return out


# ----------------------------------------------------------------------
# 插值
# ----------------------------------------------------------------------

def interpolate(a: Formula, b: Formula, config: Optional[SolverConfig] = None,
                max_rounds: int = MAX_INTERPOLATION_ROUNDS) -> InterpolationResult:
    """
    计算 A 与 B 的插值

    循环：B 求解，模型限制到共享变量 y；A 在该模型下求解。A 不可满足时
    其模型插值 I_A（只含 y）并入 I 并断言进 B；A 可满足时合并两边模型返回 SAT；
    B 不可满足时返回当前的 I

    Args:
        a, b: 公式
        config: 两个求解器共用的选项
        max_rounds: 迭代上限

    Raises:
        InterpolationError: 超过迭代上限
    """
    config = config or SolverConfig()
    vars_a, vars_b = formula_vars(a), formula_vars(b)
    shared = vars_a & vars_b
    order, sorts = query_order([a, b], shared, vars_a - shared, vars_b - shared)
    s_a = Solver(order, sorts, config)
    s_a.assert_formula(reorder_formula(a, order))
    s_b = Solver(order, sorts, config)
    s_b.assert_formula(reorder_formula(b, order))
    shared_names = tuple(n for n in order.names if n in shared) + \
        tuple(sorted(n for n in shared if sorts.get(n) is Sort.BOOL))
    log = InterpolantLog()
    clauses: List[Clause] = []
    logger.info("interpolation over shared %s", ", ".join(shared_names) or "(none)")

    def finish(status: Status, model: Optional[Assignment] = None) -> InterpolationResult:
        stats = {k: v + s_b.stats.as_dict()[k] for k, v in s_a.stats.as_dict().items()}
        stats["interpolant_clauses"] = len(clauses)
        return InterpolationResult(status, dedupe(clauses) if status is Status.UNSAT else [],
                                   model, log, shared_names, order, stats)

    for rounds in range(max_rounds):
        rb = s_b.check()
        if rb.is_unsat:
            logger.info("interpolant found after %d rounds, %d clauses", rounds, len(clauses))
            return finish(Status.UNSAT)
        if not rb.is_sat:
            return finish(Status.UNKNOWN)
        mb = rb.model.restrict(shared)
        ra = s_a.check_modulo(mb)
        if ra.is_sat:
            return finish(Status.SAT, ra.model.union(rb.model))
        if not ra.is_unsat:
            return finish(Status.UNKNOWN)
        ia = eliminate_extended(ra.interpolant, mb, config.projection)
        log.record(mb, ia)
        clauses.append(ia)
        s_b.assert_formula(ia.formula())
        logger.debug("round %d: refuted %s with %s", rounds, mb, ia)
    raise InterpolationError(f"no interpolant after {max_rounds} rounds")


# ----------------------------------------------------------------------
# 校验
# ----------------------------------------------------------------------

def verify_interpolant(a: Formula, b: Formula, interpolant: Formula,
                       config: Optional[SolverConfig] = None) -> bool:
    """A ∧ ¬I 与 I ∧ B 都不可满足，且 I 只含共享变量"""
    if not formula_vars(interpolant) <= shared_vars(a, b):
        return False
    for f in (conj(a, neg(interpolant)), conj(interpolant, b)):
        if not is_unsat(f, config):
            return False
    return True


def is_unsat(f: Formula, config: Optional[SolverConfig] = None) -> bool:
    """在新求解器上检查公式不可满足"""
    if f == TRUE:
        return False
    order, sorts = query_order([f], set())
    solver = Solver(order, sorts, config)
    solver.assert_formula(reorder_formula(f, order))
    return solver.check().is_unsat


def atoms_within_closure(clauses: Iterable[Clause], a: Formula,
                         operator: str = Projection.MCCALLUM) -> bool:
    """插值中的多项式都属于 A 的多项式在求导下封闭的投影闭包"""
    polys = polys_of(a)
    if not polys:
        return all(not isinstance(lit.atom, PolyConstraint) for c in clauses for lit in c)
    order = polys[0].order
    closure = closure_with_derivatives(polys, operator)
    for c in clauses:
        for lit in c:
            if isinstance(lit.atom, BoolVar):
                continue
            p: Polynomial = lit.atom.poly
            if p.order is not order:
                p = reorder_formula(lit.atom, order).poly
            if p not in closure:
                logger.warning("%s is outside the projection closure", p)
                return False
    return True
