"""
实代数数
定义多项式 + 隔离区间的精确表示，以及代数点处的符号判定与求根

一元部分（无平方部分、实根隔离、区间细化、Sturm 序列）用 sympy 的稠密多项式例程
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd
from typing import Callable, List, Mapping, Optional, Sequence, Tuple, Union

from sympy.polys.densebasic import dup_convert, dup_degree, dup_strip
from sympy.polys.densetools import dup_eval, dup_sign_variations
from sympy.polys.domains import QQ, ZZ
from sympy.polys.euclidtools import dup_gcd
from sympy.polys.polyerrors import RefinementFailed
from sympy.polys.rootisolation import dup_isolate_real_roots_sqf, dup_refine_real_root, dup_sturm
from sympy.polys.sqfreetools import dup_sqf_part

from .errors import AlgebraicError, EvaluationError
from .poly import (
    Polynomial, VarOrder, evaluate_interval, reorder, resultant, substitute_rationals,
)
from ..utils.constants import INTERVAL_REFINE_ROUNDS

logger = logging.getLogger(__name__)

# 符号判定时引入的辅助变量
_AUX_VAR = "__aux_t"

Coeffs = Tuple[int, ...]


# ----------------------------------------------------------------------
# 与 sympy 稠密表示的转换（sympy 高次在前，这里的系数元组低次在前）
# ----------------------------------------------------------------------

def _dup(coeffs: Sequence[int]) -> list:
    return dup_strip([ZZ(int(c)) for c in reversed(coeffs)])


def _coeffs(f: list) -> Coeffs:
    return tuple(int(c) for c in reversed(f))


@lru_cache(maxsize=4096)
def _dup_qq(coeffs: Coeffs) -> list:
    return dup_convert(_dup(coeffs), ZZ, QQ)


def _qq(v: Fraction):
    return QQ(v.numerator, v.denominator)


def _fraction(q) -> Fraction:
    return Fraction(int(QQ.numer(q)), int(QQ.denom(q)))


def _sign(v) -> int:
    return (v > 0) - (v < 0)


def _sign_rational(coeffs: Coeffs, x: Fraction) -> int:
    return _sign(dup_eval(_dup_qq(coeffs), _qq(x), QQ))


def poly_gcd(a: Sequence[int], b: Sequence[int]) -> Coeffs:
    return _coeffs(dup_gcd(_dup(a), _dup(b), ZZ))


# ----------------------------------------------------------------------
# 代数数
# ----------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class AlgebraicNumber:
    """
    实代数数

    poly 为无平方、本原、首项为正的定义多项式，在开区间 (lo, hi) 内恰有一个根，
    且 poly(lo), poly(hi) 均非零；lo == hi 时为有理值。不可变，细化返回新实例
    """
    poly: Coeffs
    lo: Fraction
    hi: Fraction

    def bisect(self) -> "AlgebraicNumber":
        """二分一次"""
        if self.lo == self.hi:
            return self
        m = (self.lo + self.hi) / 2
        sm = _sign_rational(self.poly, m)
        if sm == 0:
            return AlgebraicNumber(self.poly, m, m)
        if sm == _sign_rational(self.poly, self.lo):
            return AlgebraicNumber(self.poly, m, self.hi)
        return AlgebraicNumber(self.poly, self.lo, m)

    @property
    def is_rational(self) -> bool:
        return self.lo == self.hi

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (AlgebraicNumber, Fraction, int)) and not isinstance(other, bool):
            return compare(self, other) == 0
        return NotImplemented

    __hash__ = None

    def __float__(self) -> float:
        a = refine(self, Fraction(1, 2 ** 60))
        return float((a.lo + a.hi) / 2)

    def __repr__(self) -> str:
        return f"AlgebraicNumber({list(self.poly)}, ~{float(self):.6g})"


def _isolated(poly: Coeffs, lo: Fraction, hi: Fraction) -> Union[Fraction, AlgebraicNumber]:
    """
    由隔离区间构造代数数

    sympy 给出的区间端点可能是相邻的有理根，这里收缩区间使两端不是根
    """
    if lo == hi:
        return lo
    while _sign_rational(poly, lo) == 0 or _sign_rational(poly, hi) == 0:
        m = (lo + hi) / 2
        if _sign_rational(poly, m) == 0:
            return m
        if sturm_count(poly, lo, m) >= 1:
            hi = m
        else:
            lo = m
    return AlgebraicNumber(poly, lo, hi)


def refine(a: AlgebraicNumber, width: Fraction) -> AlgebraicNumber:
    """
    细化直到区间宽度不超过 width

    区间跨过 0 时先二分；其后交给 sympy 的连分数细化，失败时退回二分
    """
    if width <= 0:
        raise AlgebraicError("refinement width must be positive")
    while a.lo < 0 < a.hi and a.hi - a.lo > width:
        a = a.bisect()
    if a.hi - a.lo <= width:
        return a
    try:
        s, t = dup_refine_real_root(_dup(a.poly), _qq(a.lo), _qq(a.hi), ZZ, eps=_qq(width))
    except RefinementFailed:
        while a.hi - a.lo > width:
            a = a.bisect()
        return a
    lo, hi = sorted((_fraction(s), _fraction(t)))
    refined = _isolated(a.poly, lo, hi)
    if isinstance(refined, Fraction):
        return AlgebraicNumber(a.poly, refined, refined)
    return refined


Value = Union[Fraction, AlgebraicNumber]


def make_value(v: Union[int, Fraction, AlgebraicNumber]) -> Value:
    """规范化：有理的代数数转为 Fraction"""
    if isinstance(v, AlgebraicNumber):
        if v.is_rational:
            return v.lo
        return v
    if isinstance(v, bool):
        raise AlgebraicError("Boolean is not a real value")
    return Fraction(v)


def _box(v: Value) -> Tuple[Fraction, Fraction]:
    if isinstance(v, AlgebraicNumber):
        return v.lo, v.hi
    return v, v


# ----------------------------------------------------------------------
# 实根隔离
# ----------------------------------------------------------------------

def isolate_roots(coeffs: Sequence[int]) -> List[Value]:
    """
    一元整系数多项式的全部实根，按升序返回

    Args:
        coeffs: 系数，低次在前

    Returns:
        Fraction（有理根）或 AlgebraicNumber

    Raises:
        AlgebraicError: 零多项式
    """
    f = _dup(coeffs)
    if not f:
        raise AlgebraicError("zero polynomial has no isolated roots")
    sqf = dup_sqf_part(f, ZZ)
    if dup_degree(sqf) <= 0:
        return []
    poly = _coeffs(sqf)
    return [_isolated(poly, _fraction(s), _fraction(t)) for s, t in dup_isolate_real_roots_sqf(sqf, ZZ)]


# ----------------------------------------------------------------------
# Sturm 序列（用作校验与根计数）
# ----------------------------------------------------------------------

def _sturm_changes(coeffs: Sequence[int]) -> Callable[[Fraction], int]:
    """返回 x -> Sturm 序列在 x 处的变号数"""
    seq = dup_sturm(_dup_qq(tuple(int(c) for c in coeffs)), QQ)

    def changes(x: Fraction) -> int:
        return dup_sign_variations([dup_eval(s, _qq(x), QQ) for s in seq], QQ)

    return changes


def sturm_count(p: Sequence[int], a: Fraction, b: Fraction) -> int:
    """(a, b] 内不同实根的个数"""
    changes = _sturm_changes(p)
    return changes(a) - changes(b)


# ----------------------------------------------------------------------
# 比较
# ----------------------------------------------------------------------

def compare(a: Union[Value, int], b: Union[Value, int]) -> int:
    """返回 -1 / 0 / 1"""
    a, b = make_value(a), make_value(b)
    if not isinstance(a, AlgebraicNumber) and not isinstance(b, AlgebraicNumber):
        return _sign(a - b)
    if not isinstance(a, AlgebraicNumber):
        return -compare(b, a)
    if not isinstance(b, AlgebraicNumber):
        if b <= a.lo:
            return 1
        if b >= a.hi:
            return -1
        sb = _sign_rational(a.poly, b)
        if sb == 0:
            return 0
        return 1 if sb == _sign_rational(a.poly, a.lo) else -1
    g = poly_gcd(a.poly, b.poly)
    shared = len(g) > 1 and _changes_sign(g, a) and _changes_sign(g, b)
    while True:
        if a.hi <= b.lo:
            return -1
        if b.hi <= a.lo:
            return 1
        if shared:
            lo, hi = min(a.lo, b.lo), max(a.hi, b.hi)
            if sturm_count(g, lo, hi) == 1:
                return 0
        a = a.bisect()
        b = b.bisect()
        if a.is_rational or b.is_rational:
            return compare(make_value(a), make_value(b))


def _changes_sign(g: Coeffs, a: AlgebraicNumber) -> bool:
    return _sign_rational(g, a.lo) * _sign_rational(g, a.hi) < 0


def sign_univariate(p: Sequence[int], v: Value) -> int:
    """
    一元多项式在实代数数处的符号

    v 不是 p 的根时，细化 v 直到 p 在其闭区间内没有根，再取端点处的符号
    """
    v = make_value(v)
    poly = _coeffs(_dup(p))
    if not poly:
        return 0
    if not isinstance(v, AlgebraicNumber):
        return _sign_rational(poly, v)
    g = poly_gcd(poly, v.poly)
    if len(g) > 1 and _changes_sign(g, v):
        return 0
    changes = _sturm_changes(poly)
    while _sign_rational(poly, v.lo) == 0 or changes(v.lo) != changes(v.hi):
        v = v.bisect()
        if v.is_rational:
            break
    return _sign_rational(poly, v.lo)


# ----------------------------------------------------------------------
# 多元多项式在代数点处的符号
# ----------------------------------------------------------------------

def _split(f: Polynomial, values: Mapping[str, object]) -> Tuple[Polynomial, int, dict]:
    """代入有理值，返回 (剩余多项式, 缩放因子, 剩余的代数数赋值)"""
    rational = {}
    algebraic = {}
    for name in f.vars():
        if name not in values:
            raise EvaluationError(f"variable {name!r} is unassigned")
        v = values[name]
        if isinstance(v, bool):
            raise EvaluationError(f"variable {name!r} has a Boolean value")
        v = make_value(v)
        if isinstance(v, AlgebraicNumber):
            algebraic[name] = v
        else:
            rational[name] = v
    g, scale = substitute_rationals(f, rational)
    return g, scale, {n: v for n, v in algebraic.items() if n in g.vars()}


def _refine_all(values: Mapping[str, AlgebraicNumber]) -> dict:
    return {n: v.bisect() for n, v in values.items()}


def _eval_box(g: Polynomial, values: Mapping[str, Value]) -> Tuple[Fraction, Fraction]:
    return evaluate_interval(g, {n: _box(v) for n, v in values.items()})


def _defining_polynomial(g: Polynomial, scale: int, algebraic: Mapping[str, AlgebraicNumber]) -> List[int]:
    """
    以 g(M) / scale 为根的非零一元多项式 R(t)

    对 scale*t - g 依次与各代数变量的定义多项式取结式消元
    """
    names = g.order.sort_names(algebraic)
    tmp = VarOrder([_AUX_VAR] + names)
    t = tmp.var(_AUX_VAR)
    h = t * scale - reorder(g, tmp)
    for name in reversed(names):
        if h.degree(name) <= 0:
            continue
        p = Polynomial.from_univariate(list(algebraic[name].poly), name, tmp)
        h = resultant(h, p, name)
    coeffs = h.univariate_coeffs() if h.var in (None, _AUX_VAR) else None
    if coeffs is None or not any(coeffs):
        raise AlgebraicError(f"elimination failed for {g}")
    return coeffs


def sign_at(f: Polynomial, values: Mapping[str, object]) -> int:
    """
    f 在赋值点处的精确符号

    先代入有理值；只剩一个代数变量时直接做一元判定；否则先用区间算术尝试，
    失败后用消元得到值的定义多项式 R(t)，由 R 的根分隔距离决定是否为零

    Raises:
        EvaluationError: f 中有变量未赋值
    """
    g, scale, algebraic = _split(f, values)
    if g.is_constant:
        return _sign(g.const)
    if len(algebraic) == 1:
        (name, v), = algebraic.items()
        return sign_univariate(g.univariate_coeffs(), v)

    for _ in range(INTERVAL_REFINE_ROUNDS):
        lo, hi = _eval_box(g, algebraic)
        if lo > 0:
            return 1
        if hi < 0:
            return -1
        algebraic = _refine_all(algebraic)

    r = _defining_polynomial(g, 1, algebraic)
    if r[0] != 0:
        eps = Fraction(0)
    else:
        eps = _zero_separation(r)
    while True:
        lo, hi = _eval_box(g, algebraic)
        if lo > 0:
            return 1
        if hi < 0:
            return -1
        if eps and -eps < lo and hi < eps:
            return 0
        algebraic = _refine_all(algebraic)


def _zero_separation(r: Sequence[int]) -> Fraction:
    """R(0) = 0 时，0 到 R 其他实根的距离下界（无其他根时为 1）"""
    eps = Fraction(1)
    for root in isolate_roots(r):
        if not isinstance(root, AlgebraicNumber):
            if root != 0:
                eps = min(eps, abs(root))
            continue
        while root.lo < 0 < root.hi or root.lo == 0 or root.hi == 0:
            root = root.bisect()
            if root.is_rational:
                break
        lo, hi = _box(make_value(root))
        if lo == hi == 0:
            continue
        eps = min(eps, min(abs(lo), abs(hi)))
    return eps


def value_polynomial(f: Polynomial, values: Mapping[str, object]) -> Value:
    """f 在赋值点处的精确值（实代数数）"""
    g, scale, algebraic = _split(f, values)
    if g.is_constant:
        return Fraction(g.const, scale)
    r = _defining_polynomial(g, scale, algebraic)
    roots = isolate_roots(r)
    while True:
        lo, hi = _eval_box(g, algebraic)
        lo, hi = lo / scale, hi / scale
        hits = [x for x in roots if _meets(x, lo, hi)]
        if len(hits) == 1:
            return make_value(hits[0])
        if not hits:
            raise AlgebraicError(f"value of {f} lost during refinement")
        roots = [x.bisect() if isinstance(x, AlgebraicNumber) and _meets(x, lo, hi) else x
                 for x in roots]
        algebraic = _refine_all(algebraic)


def _meets(x: Value, lo: Fraction, hi: Fraction) -> bool:
    if isinstance(x, AlgebraicNumber) and not x.is_rational:
        return x.lo < hi and x.hi > lo
    x = make_value(x)
    return lo <= x <= hi


# ----------------------------------------------------------------------
# 代数点上的截面求根
# ----------------------------------------------------------------------

def roots_at(g: Polynomial, x: str, values: Mapping[str, object]) -> Optional[List[Value]]:
    """
    g 在 x 以下变量取 values 后关于 x 的全部实根（升序）

    Returns:
        根列表；g 在该点退化为零多项式（nullified）时返回 None

    Raises:
        EvaluationError: g 含有 x 之外的未赋值变量
    """
    others = {n: v for n, v in values.items() if n != x}
    rational = {n: make_value(v) for n, v in others.items()
                if not isinstance(v, bool) and not isinstance(make_value(v), AlgebraicNumber)}
    h, _ = substitute_rationals(g, rational)
    for name in h.vars():
        if name != x and name not in others:
            raise EvaluationError(f"variable {name!r} is unassigned")

    coeffs = h.coefficients(x)
    top = None
    for k in sorted(coeffs, reverse=True):
        if sign_at(coeffs[k], others) != 0:
            top = k
            break
    if top is None:
        return None
    if top == 0:
        return []
    reduced = Polynomial.constant(h.order, 0)
    for k, c in coeffs.items():
        if k <= top:
            reduced = reduced + c * h.order.var(x) ** k
    return _roots_of_reduced(reduced, x, others)


def _roots_of_reduced(h: Polynomial, x: str, values: Mapping[str, object]) -> List[Value]:
    """h 的首项系数在该点非零"""
    algebraic = [n for n in h.vars() if n != x]
    if not algebraic:
        return isolate_roots(h.univariate_coeffs())
    e = h
    for name in reversed(algebraic):
        if e.degree(name) <= 0:
            continue
        p = Polynomial.from_univariate(list(make_value(values[name]).poly), name, h.order)
        e = resultant(e, p, name)
    if e.is_zero:
        return _roots_flat(h, x, values)
    if e.is_constant:
        return []
    candidates = isolate_roots(e.univariate_coeffs())
    out = []
    for beta in candidates:
        point = dict(values)
        point[x] = beta
        if sign_at(h, point) == 0:
            out.append(beta)
    logger.debug("roots of %s in %s: %d of %d candidates", h, x, len(out), len(candidates))
    return out


def _roots_flat(h: Polynomial, x: str, values: Mapping[str, object]) -> List[Value]:
    """
    结式消元恒为零时的退路

    把每个系数的值单独看作代数数 t_k（非零值的定义多项式去掉因子 t），
    再对 sum t_k x^k 求根
    """
    coeffs = h.coefficients(x)
    evaluated = {k: value_polynomial(c, values) for k, c in coeffs.items()}
    lcm = 1
    for v in evaluated.values():
        if not isinstance(v, AlgebraicNumber):
            lcm = lcm * v.denominator // gcd(lcm, v.denominator)

    names = {k: f"{_AUX_VAR}{k}" for k, v in evaluated.items() if isinstance(v, AlgebraicNumber)}
    tmp = VarOrder([names[k] for k in sorted(names)] + [x])
    xv = tmp.var(x)
    point: dict = {}
    body = Polynomial.constant(tmp, 0)
    for k, v in evaluated.items():
        if isinstance(v, AlgebraicNumber):
            poly = list(v.poly)
            if poly[0] == 0:
                poly = poly[1:]
            point[names[k]] = AlgebraicNumber(tuple(poly), v.lo, v.hi)
            body = body + tmp.var(names[k]) * lcm * xv ** k
        elif v:
            body = body + int(v * lcm) * xv ** k
    return _roots_of_reduced(body, x, point)


def defining_index(v: AlgebraicNumber) -> int:
    """v 在其定义多项式全部实根中的序号（从 1 开始）"""
    for i, r in enumerate(isolate_roots(v.poly), 1):
        if compare(r, v) == 0:
            return i
    raise AlgebraicError(f"{v!r} is not a root of its defining polynomial")


def to_decimal(v: Union[Value, int], digits: int = 6) -> str:
    """十进制近似（不经过浮点）"""
    v = make_value(v)
    if isinstance(v, AlgebraicNumber):
        v = refine(v, Fraction(1, 10 ** (digits + 1)))
        v = (v.lo + v.hi) / 2
    scaled = round(v * 10 ** digits)
    sign = "-" if scaled < 0 else ""
    whole, frac = divmod(abs(scaled), 10 ** digits)
    if digits == 0:
        return f"{sign}{whole}"
    text = f"{sign}{whole}.{frac:0{digits}d}".rstrip("0")
    return text[:-1] if text.endswith(".") else text
