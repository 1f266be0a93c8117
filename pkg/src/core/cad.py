"""
柱形代数分解（单胞腔）
投影闭包、围绕样本点的扩展胞腔描述，以及用导数符号条件化为基本约束
"""

import logging
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Tuple

from .errors import EvaluationError
from .intervals import IntervalSet, feasible_set, value_between
from .model import (
    TRUE, Assignment, ExtendedConstraint, Formula, Literal, PolyConstraint,
    Relation, conj, evaluate_atom,
)
from .poly import Polynomial, VarOrder, derivative, discriminant, principal_subresultants, resultant
from .realalg import Value, compare, roots_at, sign_at
from ..utils.constants import SAMPLE_ATTEMPTS, Projection

logger = logging.getLogger(__name__)


# ----------------------------------------------------------------------
# 投影
# ----------------------------------------------------------------------

def _normal(p: Polynomial) -> Optional[Polynomial]:
    """规范化，常数返回 None"""
    if p.is_constant:
        return None
    return p.normalized()[0]


def _first_nonzero_psc(f: Polynomial, g: Polynomial, x: str) -> Optional[Polynomial]:
    for psc in principal_subresultants(f, g, x)[1:]:
        if not psc.is_zero:
            return psc
    return None


def _mccallum(polys: List[Polynomial], x: str) -> List[Polynomial]:
    out: List[Polynomial] = []
    for p in polys:
        coeffs = p.coefficients(x)
        for k in sorted(coeffs, reverse=True):
            if k == 0:
                break
            c = coeffs[k]
            out.append(c)
            if c.is_constant:
                break
        if p.degree(x) >= 2:
            d = discriminant(p, x)
            if d.is_zero:
                d = _first_nonzero_psc(p, derivative(p, x), x) or d
            out.append(d)
    for i, p in enumerate(polys):
        for q in polys[i + 1:]:
            r = resultant(p, q, x)
            if r.is_zero:
                r = _first_nonzero_psc(p, q, x) or r
            out.append(r)
    return out


def _reducta(p: Polynomial, x: str) -> List[Polynomial]:
    out = []
    coeffs = p.coefficients(x)
    while coeffs and max(coeffs) >= 1:
        r = Polynomial.constant(p.order, 0)
        for k, c in coeffs.items():
            r = r + c * p.order.var(x) ** k
        out.append(r)
        del coeffs[max(coeffs)]
    return out


def _collins(polys: List[Polynomial], x: str) -> List[Polynomial]:
    out: List[Polynomial] = []
    reducta = {p: _reducta(p, x) for p in polys}
    for p in polys:
        out.extend(p.coefficients(x).values())
        for r in reducta[p]:
            if r.degree(x) >= 2:
                out.extend(principal_subresultants(r, derivative(r, x), x))
    for i, p in enumerate(polys):
        for q in polys[i + 1:]:
            for r in reducta[p]:
                for s in reducta[q]:
                    out.extend(principal_subresultants(r, s, x))
    return out


def project(polys: Iterable[Polynomial], operator: str = Projection.MCCALLUM) -> List[Polynomial]:
    """
    投影闭包

    从顶层变量开始逐层向下投影，直到最低层；结果按 (层级, 文本) 排序，
    多项式均为本原且最高数值系数为正，常数被丢弃

    Args:
        polys: 输入多项式（同一变量顺序）
        operator: Projection.MCCALLUM 或 Projection.COLLINS
    """
    step = _collins if operator == Projection.COLLINS else _mccallum
    closure: List[Polynomial] = []
    by_level: Dict[int, List[Polynomial]] = {}

    def add(p: Polynomial) -> None:
        q = _normal(p)
        if q is not None and q not in closure:
            closure.append(q)
            by_level.setdefault(q.level, []).append(q)

    polys = list(polys)
    for p in polys:
        add(p)
    if not closure:
        return []
    order = closure[0].order
    for level in range(max(by_level), 0, -1):
        members = by_level.get(level, [])
        if not members:
            continue
        x = order.names[level]
        for q in step(list(members), x):
            add(q)
    closure.sort(key=lambda p: (p.level, repr(p)))
    logger.debug("projection of %d polynomials: closure of %d", len(polys), len(closure))
    return closure


def closure_with_derivatives(polys: Iterable[Polynomial],
                             operator: str = Projection.MCCALLUM) -> List[Polynomial]:
    """投影闭包再对顶层变量求导，反复直到不动点（有限集 P'）"""
    current = project(polys, operator)
    while True:
        extra = []
        for p in current:
            d = _normal(derivative(p, p.var))
            if d is not None and d not in current and d not in extra:
                extra.append(d)
        if not extra:
            return current
        current = project(current + extra, operator)


# ----------------------------------------------------------------------
# 胞腔描述
# ----------------------------------------------------------------------

@dataclass
class CellDescription:
    """
    胞腔描述：每个变量一层，该层的原子只含该变量及更低变量

    levels 按变量顺序从低到高排列；空层表示该层无约束
    """
    order: VarOrder
    levels: Dict[str, Tuple[Formula, ...]] = field(default_factory=dict)

    def atoms(self) -> List[Formula]:
        out = []
        for atoms in self.levels.values():
            out.extend(atoms)
        return out

    def level(self, x: str) -> Tuple[Formula, ...]:
        return self.levels.get(x, ())

    def formula(self) -> Formula:
        return conj(*self.atoms())

    def literals(self) -> List[Literal]:
        return [Literal(a, True) for a in self.atoms()]

    def holds_at(self, m: Mapping[str, object]) -> bool:
        return all(evaluate_atom(a, m) for a in self.atoms())

    def __str__(self) -> str:
        lines = []
        for x, atoms in self.levels.items():
            body = " & ".join(str(a) for a in atoms) if atoms else "true"
            lines.append(f"{x}: {body}")
        return "\n".join(lines)


@dataclass
class _Level:
    var: str
    atoms: List[Formula]
    bounds: List[Polynomial]
    nullified: List[Polynomial]


def sign_condition(f: Polynomial, m: Mapping[str, object]) -> Formula:
    """与 f 在 m 处符号一致的约束 f < 0 / f = 0 / f > 0"""
    s = sign_at(f, m)
    rel = Relation.LT if s < 0 else Relation.GT if s > 0 else Relation.EQ
    return PolyConstraint.make(f, rel)


def _levels(closure: List[Polynomial], m: Mapping[str, object],
            top: Optional[str]) -> Tuple[VarOrder, List[_Level]]:
    if not closure:
        return None, []
    order = closure[0].order
    limit = order.level(top) if top is not None else len(order)
    levels: List[_Level] = []
    for x in order.names[:limit]:
        members = [p for p in closure if p.var == x]
        if not members:
            continue
        if x not in m:
            raise EvaluationError(f"cell construction needs a value for {x}")
        levels.append(_build_level(x, members, m))
    return order, levels


def _build_level(x: str, members: List[Polynomial], m: Mapping[str, object]) -> _Level:
    v = m[x]
    below = {n: val for n, val in m.items() if n != x}
    lower: Optional[Tuple[Value, Polynomial, int]] = None
    upper: Optional[Tuple[Value, Polynomial, int]] = None
    equal: Optional[Tuple[Polynomial, int]] = None
    nullified: List[Polynomial] = []
    for p in members:
        roots = roots_at(p, x, below)
        if roots is None:
            nullified.append(p)
            continue
        for k, r in enumerate(roots, 1):
            c = compare(r, v)
            if c == 0:
                if equal is None:
                    equal = (p, k)
            elif c < 0:
                if lower is None or compare(r, lower[0]) > 0:
                    lower = (r, p, k)
            elif upper is None or compare(r, upper[0]) < 0:
                upper = (r, p, k)
    if equal is not None:
        p, k = equal
        return _Level(x, [ExtendedConstraint(x, Relation.EQ, p, k)], [p], nullified)
    atoms: List[Formula] = []
    bounds: List[Polynomial] = []
    if lower is not None:
        atoms.append(ExtendedConstraint(x, Relation.GT, lower[1], lower[2]))
        bounds.append(lower[1])
    if upper is not None:
        atoms.append(ExtendedConstraint(x, Relation.LT, upper[1], upper[2]))
        if upper[1] not in bounds:
            bounds.append(upper[1])
    return _Level(x, atoms, bounds, nullified)


def cell_extended(polys: Iterable[Polynomial], m: Mapping[str, object],
                  top: Optional[str] = None,
                  operator: str = Projection.MCCALLUM) -> CellDescription:
    """
    包含 m 的 CAD 胞腔的扩展描述

    逐层：代入更低变量的值，隔离该层全部闭包多项式的根，取包含 m[x] 的
    区间或点，输出一个或两个根界（或一个等式）

    Args:
        polys: 多项式集合
        m: 赋值，需覆盖闭包中的变量
        top: 只构造严格低于 top 的层（冲突解释时 top 为当前变量）
        operator: 投影算子
    """
    order, levels = _levels(project(polys, operator), m, top)
    cell = CellDescription(order)
    for lv in levels:
        cell.levels[lv.var] = tuple(lv.atoms)
    if not cell.holds_at(m):
        raise EvaluationError("cell does not contain its sample point")
    return cell


def cell_basic(polys: Iterable[Polynomial], m: Mapping[str, object],
               top: Optional[str] = None,
               operator: str = Projection.MCCALLUM) -> CellDescription:
    """
    只含基本多项式约束的子胞腔

    各层取自导数闭包 P' 的胞腔，使更低层上导数也保持可描绘；
    每个根界多项式 p 换成 p 及其关于层变量的各阶导数（到 deg-1 阶）的符号条件；
    在该点退化为零的多项式记为 p = 0
    """
    order, levels = _levels(closure_with_derivatives(polys, operator), m, top)
    cell = CellDescription(order)
    for lv in levels:
        atoms: List[Formula] = []
        for p in lv.bounds:
            q = p
            for _ in range(p.degree(lv.var)):
                cond = sign_condition(q, m)
                if cond != TRUE and cond not in atoms:
                    atoms.append(cond)
                q = derivative(q, lv.var)
        for p in lv.nullified:
            cond = sign_condition(p, m)
            if cond != TRUE and cond not in atoms:
                atoms.append(cond)
        cell.levels[lv.var] = tuple(atoms)
    if not cell.holds_at(m):
        raise EvaluationError("basic cell does not contain its sample point")
    return cell


# ----------------------------------------------------------------------
# 采样
# ----------------------------------------------------------------------

def _random_in(s: IntervalSet, rng: random.Random) -> Value:
    iv = rng.choice(s.intervals)
    if iv.is_point:
        return iv.lo
    t = Fraction(rng.randint(1, 63), 64)
    if iv.lo is None and iv.hi is None:
        return Fraction(rng.randint(-5, 5)) + t
    if iv.lo is None:
        return value_between(None, iv.hi) - rng.randint(0, 4) - t
    if iv.hi is None:
        return value_between(iv.lo, None) + rng.randint(0, 4) + t
    mid = value_between(iv.lo, iv.hi)
    a = value_between(iv.lo, mid)
    b = value_between(mid, iv.hi)
    return a + (b - a) * t


def _sample_once(cell: CellDescription, rng: random.Random,
                 fixed: Mapping[str, object]) -> Optional[Assignment]:
    point = Assignment(fixed)
    for x, atoms in cell.levels.items():
        if x in point:
            continue
        s = IntervalSet.reals()
        for atom in atoms:
            s = s.intersect(feasible_set(Literal(atom, True), x, point))
        if s.is_empty():
            logger.debug("cell level %s empty under %s, resampling", x, point)
            return None
        point[x] = _random_in(s, rng)
    return point


def sample_cell(cell: CellDescription, rng: random.Random,
                fixed: Optional[Mapping[str, object]] = None,
                attempts: int = SAMPLE_ATTEMPTS) -> Assignment:
    """
    在胞腔内逐层随机取样

    某层在已取的低层值下为空时，丢弃本次取样从 fixed 重新开始

    Args:
        cell: 胞腔描述
        rng: 随机数发生器
        fixed: 已固定的变量值（如更低层的模型变量）
        attempts: 重采次数上限

    Returns:
        满足胞腔全部原子的赋值

    Raises:
        EvaluationError: 重采次数用尽
    """
    for _ in range(attempts):
        point = _sample_once(cell, rng, fixed or {})
        if point is not None:
            return point
    raise EvaluationError(f"no sample found in cell after {attempts} attempts")
