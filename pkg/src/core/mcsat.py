"""
MCSAT 求解器
trail、布尔与算术插件、冲突分析，以及部分模型下的求解与模型插值
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterable, List, Mapping, Optional, Set, Tuple, Union

from .cad import cell_basic, cell_extended
from .errors import SolverError, SortError
from .intervals import IntervalSet, feasible_set, pick_value
from .model import (
    And, Assignment, Atom, BoolVar, Clause, ExtendedConstraint, Formula, Literal, Or,
    PolyConstraint, Sort, atom_vars, atoms_of, can_evaluate, evaluate, evaluate_atom, literal_of, nnf,
    reorder_formula,
)
from .poly import VarOrder
from ..utils.constants import (
    DEFAULT_CONFLICT_LIMIT, FRESH_PREFIX, Explain, Projection,
)

logger = logging.getLogger(__name__)


class Kind(Enum):
    """trail 元素类型"""
    DECISION = "decision"            # 插件的决策
    PROPAGATION = "propagation"      # 带理由子句的传播
    MODEL_DECISION = "model"         # 输入模型给出的赋值


class Status(Enum):
    SAT = "sat"
    UNSAT = "unsat"
    UNKNOWN = "unknown"


@dataclass
class SolverConfig:
    """求解器选项"""
    explain: str = Explain.EXTENDED
    projection: str = Projection.MCCALLUM
    conflict_limit: int = DEFAULT_CONFLICT_LIMIT


@dataclass
class SolverStats:
    checks: int = 0
    conflicts: int = 0
    decisions: int = 0
    propagations: int = 0
    learned: int = 0

    def as_dict(self) -> Dict[str, int]:
        return dict(self.__dict__)


@dataclass
class CheckResult:
    """
    check 结果

    SAT 时 model 为扩展输入模型的全赋值；UNSAT 时 interpolant 在输入模型下为假
    """
    status: Status
    model: Optional[Assignment] = None
    interpolant: Optional[Clause] = None

    @property
    def is_sat(self) -> bool:
        return self.status is Status.SAT

    @property
    def is_unsat(self) -> bool:
        return self.status is Status.UNSAT


Term = Union[Atom, str]


@dataclass
class TrailElement:
    term: Term
    value: object
    kind: Kind
    reason: Optional[Clause] = None


class Trail:
    """
    按时间顺序记录的赋值

    布尔项（原子）以原子为键，实变量以变量名为键；assignment 同步维护
    实变量与布尔变量名的取值，供求值使用
    """

    def __init__(self):
        self.elements: List[TrailElement] = []
        self._index: Dict[Term, int] = {}
        self.assignment = Assignment()

    def push(self, element: TrailElement) -> int:
        if element.term in self._index:
            raise SolverError(f"{element.term} is already assigned")
        self._index[element.term] = len(self.elements)
        self.elements.append(element)
        if isinstance(element.term, str):
            self.assignment[element.term] = element.value
        elif isinstance(element.term, BoolVar):
            self.assignment[element.term.name] = element.value
        return len(self.elements) - 1

    def pop(self) -> TrailElement:
        element = self.elements.pop()
        del self._index[element.term]
        if isinstance(element.term, str):
            del self.assignment[element.term]
        elif isinstance(element.term, BoolVar):
            del self.assignment[element.term.name]
        return element

    def top(self) -> Optional[TrailElement]:
        return self.elements[-1] if self.elements else None

    def index_of(self, term: Term) -> Optional[int]:
        return self._index.get(term)

    def value_of(self, term: Term) -> Optional[object]:
        idx = self._index.get(term)
        return None if idx is None else self.elements[idx].value

    @property
    def decision_level(self) -> int:
        return sum(1 for e in self.elements if e.kind is not Kind.PROPAGATION)

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __str__(self) -> str:
        parts = []
        for e in self.elements:
            mark = {"decision": "?", "propagation": "", "model": "!"}[e.kind.value]
            parts.append(f"{mark}{e.term}={e.value}")
        return "[" + ", ".join(parts) + "]"


class Solver:
    """
    非线性实数算术的 MCSAT 求解器

    公式经 Tseitin 变换成子句交给布尔插件；算术插件按变量顺序逐个给实变量赋值，
    可行集为空时用单胞腔解释冲突。check_modulo 先把输入模型的变量作为模型决策，
    冲突分析遇到模型变量即停止，再把传播全部消解，得到模型插值
    """

    def __init__(self, order: VarOrder, sorts: Optional[Mapping[str, Sort]] = None,
                 config: Optional[SolverConfig] = None):
        self.order = order
        self.config = config or SolverConfig()
        self.sorts: Dict[str, Sort] = dict(sorts or {})
        self.stats = SolverStats()
        self.assertions: List[Formula] = []
        self._clauses: List[Clause] = []
        self._learned: List[Clause] = []
        self._real_vars: List[str] = []
        self._bool_vars: List[str] = []
        self._fresh = 0
        self._names: Dict[Formula, Literal] = {}
        self._in_check = False
        self.trail = Trail()
        self._model_terms: Set[Term] = set()
        self._eval_cache: Dict[Atom, bool] = {}
        self._feasible_cache: Dict[Tuple[Atom, bool], IntervalSet] = {}
        self._stage_cache: Dict[Atom, int] = {}

    # ------------------------------------------------------------------
    # 断言
    # ------------------------------------------------------------------

    def declare(self, name: str, sort: Sort) -> None:
        if self.sorts.get(name, sort) is not sort:
            raise SortError(f"{name} is already declared as {self.sorts[name].value}")
        self.sorts[name] = sort
        if sort is Sort.REAL:
            self.order.add(name)

    def assert_formula(self, f: Formula) -> None:
        """
        断言公式

        Raises:
            SolverError: check 进行中
            SortError: 变量类型不一致
        """
        if self._in_check:
            raise SolverError("cannot assert during check")
        foreign = [atom.poly for atom in atoms_of(f)
                   if not isinstance(atom, BoolVar) and atom.poly.order is not self.order]
        if foreign:
            for p in foreign:
                for name in p.vars():
                    self.order.add(name)
            f = reorder_formula(f, self.order)
        for atom in atoms_of(f):
            self._register(atom)
        self.assertions.append(f)
        for clause in self._clausify(nnf(f)):
            self._clauses.append(clause)

    def _register(self, atom: Atom) -> None:
        if isinstance(atom, BoolVar):
            self._check_sort(atom.name, Sort.BOOL)
            if atom.name not in self._bool_vars:
                self._bool_vars.append(atom.name)
            return
        for name in atom_vars(atom):
            self._check_sort(name, Sort.REAL)
            if name not in self._real_vars:
                self._real_vars.append(name)
        self._real_vars.sort(key=self.order.level)

    def _check_sort(self, name: str, sort: Sort) -> None:
        declared = self.sorts.setdefault(name, sort)
        if declared is not sort:
            raise SortError(f"{name} is used as {sort.value} but declared {declared.value}")

    def _fresh_literal(self) -> Literal:
        name = f"{FRESH_PREFIX}{self._fresh}"
        self._fresh += 1
        self._bool_vars.append(name)
        self.sorts[name] = Sort.BOOL
        return Literal(BoolVar(name), True)

    def _name(self, f: Formula, out: List[Clause]) -> Literal:
        """NNF 公式对应的文字；复合公式引入新变量 n 并加入 n -> f"""
        lit = literal_of(f)
        if lit is not None:
            return lit
        if f in self._names:
            return self._names[f]
        n = self._fresh_literal()
        self._names[f] = n
        if isinstance(f, Or):
            out.append(Clause.of([~n] + [self._name(a, out) for a in f.args]))
        else:
            for a in f.args:
                out.append(Clause.of([~n, self._name(a, out)]))
        return n

    def _clausify(self, f: Formula) -> List[Clause]:
        out: List[Clause] = []
        if isinstance(f, And):
            for a in f.args:
                out.extend(self._clausify(a))
        elif isinstance(f, Or):
            out.append(Clause.of(self._name(a, out) for a in f.args))
        else:
            out.append(Clause.of([self._name(f, out)]))
        return out

    # ------------------------------------------------------------------
    # check
    # ------------------------------------------------------------------

    def check(self) -> CheckResult:
        return self.check_modulo({})

    def check_modulo(self, m0: Mapping[str, object]) -> CheckResult:
        """
        在输入部分模型 m0 下检查可满足性

        Returns:
            SAT: model 扩展 m0 并满足全部断言
            UNSAT: interpolant 被断言蕴含，且在 m0 下为假
            UNKNOWN: 达到冲突上限
        """
        if self._in_check:
            raise SolverError("check is not re-entrant")
        m0 = m0 if isinstance(m0, Assignment) else Assignment(m0)
        pending = self._model_items(m0)
        self._in_check = True
        self.stats.checks += 1
        self._reset()
        try:
            result = self._search(pending, m0)
        finally:
            self._in_check = False
        logger.debug("check result %s, stats %s", result.status.value, self.stats.as_dict())
        return result

    def _model_items(self, m0: Assignment) -> List[Tuple[Term, object]]:
        items: List[Tuple[Term, object]] = []
        model_levels = []
        for name, value in m0.items():
            if isinstance(value, bool):
                self._check_sort(name, Sort.BOOL)
                items.append((BoolVar(name), value))
                continue
            self._check_sort(name, Sort.REAL)
            if name in self._real_vars:
                model_levels.append(self.order.level(name))
                items.append((name, value))
        free = [self.order.level(v) for v in self._real_vars if v not in m0]
        if model_levels and free and max(model_levels) > min(free):
            raise SolverError("model variables must come first in the variable order")
        self._model_terms = {t for t, _ in items}
        return items

    def _reset(self) -> None:
        while self.trail.elements:
            self.trail.pop()
        self._eval_cache.clear()
        self._feasible_cache.clear()

    def _search(self, pending: List[Tuple[Term, object]], m0: Assignment) -> CheckResult:
        start_conflicts = self.stats.conflicts
        while True:
            conflict = self.propagate()
            if conflict is None:
                step = self._decide_model(pending)
                if isinstance(step, Clause):
                    return self._unsat(self.analyze_final(step), m0)
                if step:
                    continue
                if not self._decide():
                    return self._sat(m0)
                continue
            self.stats.conflicts += 1
            limit = self.config.conflict_limit
            if limit and self.stats.conflicts - start_conflicts > limit:
                logger.info("conflict limit %d reached", limit)
                return CheckResult(Status.UNKNOWN)
            clause, final = self.analyze_conflict(conflict)
            if final:
                return self._unsat(self.analyze_final(clause), m0)
            self._learn(clause)

    def _sat(self, m0: Assignment) -> CheckResult:
        model = Assignment()
        for name in self._real_vars + self._bool_vars:
            if name.startswith(FRESH_PREFIX):
                continue
            if name in self.trail.assignment:
                model[name] = self.trail.assignment[name]
        model = model.union(m0)
        for f in self.assertions:
            if evaluate(f, model) is not True:
                raise SolverError(f"model violates assertion {f}")
        return CheckResult(Status.SAT, model=model)

    def _unsat(self, interpolant: Clause, m0: Assignment) -> CheckResult:
        if evaluate(interpolant, m0) is not False:
            raise SolverError("interpolant does not refute the model")
        logger.debug("model interpolant: %s", interpolant)
        return CheckResult(Status.UNSAT, interpolant=interpolant)

    # ------------------------------------------------------------------
    # 取值与求值
    # ------------------------------------------------------------------

    def _push(self, term: Term, value: object, kind: Kind, reason: Optional[Clause] = None) -> None:
        self.trail.push(TrailElement(term, value, kind, reason))
        if isinstance(term, str):
            self._feasible_cache.clear()

    def _pop(self) -> TrailElement:
        element = self.trail.pop()
        if isinstance(element.term, str):
            self._eval_cache.clear()
            self._feasible_cache.clear()
        return element

    def _eval(self, atom: Atom) -> Optional[bool]:
        """由实变量计算原子的值（布尔变量原子没有计算途径）"""
        if isinstance(atom, BoolVar):
            return None
        if atom in self._eval_cache:
            return self._eval_cache[atom]
        v = evaluate_atom(atom, self.trail.assignment)
        if v is not None:
            self._eval_cache[atom] = v
        return v

    def _atom_value(self, atom: Atom) -> Optional[bool]:
        v = self.trail.value_of(atom)
        if v is not None:
            return v
        return self._eval(atom)

    def _lit_value(self, lit: Literal) -> Optional[bool]:
        v = self._atom_value(lit.atom)
        return None if v is None else v == lit.positive

    def _false_since(self, lit: Literal) -> Optional[int]:
        """文字最早在 trail 的哪个位置变为假（两条途径取较早者）"""
        best = None
        idx = self.trail.index_of(lit.atom)
        if idx is not None and self.trail.elements[idx].value != lit.positive:
            best = idx
        v = self._eval(lit.atom)
        if v is not None and v != lit.positive:
            at = max(self.trail.index_of(n) for n in atom_vars(lit.atom))
            best = at if best is None else min(best, at)
        return best

    def _stage(self, atom: Atom) -> int:
        if atom not in self._stage_cache:
            if isinstance(atom, BoolVar):
                self._stage_cache[atom] = -1
            else:
                self._stage_cache[atom] = max(self.order.level(n) for n in atom_vars(atom))
        return self._stage_cache[atom]

    def _next_var(self) -> Optional[str]:
        for x in self._real_vars:
            if x not in self.trail.assignment:
                return x
        return None

    def _feasible_of(self, lit: Literal, x: str) -> IntervalSet:
        key = (lit.atom, lit.positive)
        if key not in self._feasible_cache:
            self._feasible_cache[key] = feasible_set(lit, x, self.trail.assignment)
        return self._feasible_cache[key]

    def _unit_literals(self, x: str) -> List[Literal]:
        """trail 上已赋值、只差 x 即可求值的算术原子"""
        level = self.order.level(x)
        return [Literal(e.term, e.value) for e in self.trail
                if isinstance(e.term, (PolyConstraint, ExtendedConstraint)) and self._stage(e.term) == level]

    def _feasible(self, x: str, literals: Optional[Iterable[Literal]] = None) -> IntervalSet:
        s = IntervalSet.reals()
        for lit in (self._unit_literals(x) if literals is None else literals):
            s = s.intersect(self._feasible_of(lit, x))
            if s.is_empty():
                break
        return s

    # ------------------------------------------------------------------
    # 传播
    # ------------------------------------------------------------------

    def _all_clauses(self) -> List[Clause]:
        return self._clauses + self._learned

    def _evaluation_conflict(self) -> Optional[Clause]:
        for e in self.trail:
            if isinstance(e.term, (PolyConstraint, ExtendedConstraint)):
                v = self._eval(e.term)
                if v is not None and v != e.value:
                    lit = Literal(e.term, e.value)
                    logger.debug("evaluation conflict on %s", e.term)
                    return Clause.of([~lit, lit])
        return None

    def propagate(self) -> Optional[Clause]:
        """
        传播到不动点

        Returns:
            冲突子句（全部文字为假），无冲突时返回 None
        """
        while True:
            conflict = self._evaluation_conflict()
            if conflict is not None:
                return conflict
            changed = False
            for clause in self._all_clauses():
                undetermined = []
                satisfied = False
                for lit in clause:
                    v = self._lit_value(lit)
                    if v is True:
                        satisfied = True
                        break
                    if v is None:
                        undetermined.append(lit)
                if satisfied:
                    continue
                if not undetermined:
                    logger.debug("clause conflict: %s", clause)
                    return clause
                if len(undetermined) == 1:
                    lit = undetermined[0]
                    if any(self._lit_value(other) is not False for other in clause if other != lit):
                        raise SolverError(f"clause {clause} is not unit")
                    self._push(lit.atom, lit.positive, Kind.PROPAGATION, clause)
                    self.stats.propagations += 1
                    changed = True
            if changed:
                continue
            x = self._next_var()
            if x is not None and self._feasible(x).is_empty():
                return self.explain_unit_conflict(x)
            return None

    # ------------------------------------------------------------------
    # 决策
    # ------------------------------------------------------------------

    def decide(self, x: str, value: Optional[object] = None) -> Optional[Clause]:
        """
        给变量赋值

        给定 value 时作为模型决策；否则由算术插件从可行集中取值
        返回赋值后出现的求值冲突
        """
        if value is None:
            value = pick_value(self._feasible(x))
            kind = Kind.DECISION
        else:
            kind = Kind.MODEL_DECISION
            expected = Sort.BOOL if isinstance(value, bool) else Sort.REAL
            if self.sorts.get(x, expected) is not expected:
                raise SortError(f"value {value} does not match the sort of {x}")
        term: Term = BoolVar(x) if isinstance(value, bool) else x
        self._push(term, value, kind)
        self.stats.decisions += 1
        logger.debug("decide %s = %s (%s)", x, value, kind.value)
        return self._evaluation_conflict()

    def _decide_model(self, pending: List[Tuple[Term, object]]) -> Union[bool, Clause]:
        while pending:
            term, value = pending[0]
            current = self.trail.value_of(term)
            if current is None:
                pending.pop(0)
                name = term.name if isinstance(term, BoolVar) else term
                self.decide(name, value)
                return True
            pending.pop(0)
            if current != value:
                idx = self.trail.index_of(term)
                return self.trail.elements[idx].reason
        return False

    def _decide(self) -> bool:
        x = self._next_var()
        x_stage = self.order.level(x) if x is not None else float("inf")
        for clause in self._all_clauses():
            undetermined = []
            satisfied = False
            for lit in clause:
                v = self._lit_value(lit)
                if v is True:
                    satisfied = True
                    break
                if v is None:
                    undetermined.append(lit)
            if satisfied or not undetermined:
                continue
            if max(self._stage(lit.atom) for lit in undetermined) > x_stage:
                continue
            lit = self._choose_literal(undetermined, x)
            self._push(lit.atom, lit.positive, Kind.DECISION)
            self.stats.decisions += 1
            logger.debug("decide literal %s", lit)
            return True
        if x is not None:
            self.decide(x)
            return True
        for name in self._bool_vars:
            atom = BoolVar(name)
            if self.trail.value_of(atom) is None:
                self._push(atom, False, Kind.DECISION)
                self.stats.decisions += 1
                return True
        return False

    def _choose_literal(self, undetermined: List[Literal], x: Optional[str]) -> Literal:
        if x is None:
            return undetermined[0]
        level = self.order.level(x)
        base = self._feasible(x)
        for lit in undetermined:
            if self._stage(lit.atom) != level:
                return lit
            if not base.intersect(self._feasible_of(lit, x)).is_empty():
                return lit
        return undetermined[0]

    # ------------------------------------------------------------------
    # 冲突
    # ------------------------------------------------------------------

    def explain_unit_conflict(self, x: str) -> Clause:
        """
        x 的可行集为空时的解释子句

        先取使可行集为空的删除极小子集，再加上更低变量上包含当前点的胞腔
        （扩展或基本描述）的否定
        """
        units = self._unit_literals(x)
        core = list(units)
        for lit in list(core):
            trial = [other for other in core if other != lit]
            if trial and self._feasible(x, trial).is_empty():
                core = trial
        polys = [lit.atom.poly for lit in core]
        build = cell_basic if self.config.explain == Explain.BASIC else cell_extended
        cell = build(polys, self.trail.assignment, top=x, operator=self.config.projection)
        literals = [~lit for lit in core] + [Literal(a, False) for a in cell.atoms()]
        clause = Clause.of(literals)
        if any(self._lit_value(lit) is not False for lit in clause):
            raise SolverError("explanation is not a conflict")
        logger.debug("explain %s: %s", x, clause)
        return clause

    def analyze_conflict(self, clause: Clause) -> Tuple[Clause, bool]:
        """
        回溯并消解传播，直到遇到决策

        Returns:
            (子句, final)：遇到模型决策或 trail 为空时 final 为 True
        """
        lits = list(clause)
        if not all(can_evaluate(self.trail, lit.atom, not lit.positive) for lit in lits):
            raise SolverError("not a conflict clause")
        while self.trail.elements:
            top_idx = len(self.trail) - 1
            top = self.trail.top()
            involved = [lit for lit in lits if self._false_since(lit) == top_idx]
            if not involved:
                self._pop()
                continue
            if top.kind is Kind.MODEL_DECISION:
                return Clause.of(lits), True
            if top.kind is Kind.DECISION:
                return Clause.of(lits), False
            resolved = Literal(top.term, not top.value)
            if resolved in involved:
                lits = [lit for lit in lits if lit != resolved]
                lits += [lit for lit in top.reason if lit != ~resolved and lit not in lits]
            self._pop()
        return Clause.of(lits), True

    def _learn(self, clause: Clause) -> None:
        top = self._pop()
        self._learned.append(clause)
        self.stats.learned += 1
        logger.debug("backtrack over %s, learned %s", top.term, clause)

    def analyze_final(self, clause: Clause) -> Clause:
        """
        消解子句中由传播赋值、且不因求值为假的文字

        模型变量上的文字保留；结果中的文字只因输入模型而为假
        """
        lits = list(clause)
        while True:
            best: Optional[Literal] = None
            best_idx = -1
            for lit in lits:
                if lit.atom in self._model_terms:
                    continue
                idx = self.trail.index_of(lit.atom)
                if idx is None:
                    continue
                element = self.trail.elements[idx]
                if element.kind is not Kind.PROPAGATION or element.value == lit.positive:
                    continue
                if self._eval(lit.atom) == (not lit.positive):
                    continue
                if idx > best_idx:
                    best, best_idx = lit, idx
            if best is None:
                return Clause.of(lits)
            reason = self.trail.elements[best_idx].reason
            lits = [lit for lit in lits if lit != best]
            lits += [lit for lit in reason if lit != ~best and lit not in lits]

    @property
    def clauses(self) -> List[Clause]:
        return list(self._clauses)

    @property
    def learned(self) -> List[Clause]:
        return list(self._learned)
