"""
实数区间集合
算术插件的可行集与取值、胞腔采样都基于这里
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, List, Mapping, Optional, Sequence, Tuple

from .model import ExtendedConstraint, Literal, PolyConstraint, kth_root
from .realalg import AlgebraicNumber, Value, compare, make_value, roots_at, sign_at


@dataclass(frozen=True)
class Interval:
    """
    区间，lo / hi 为 None 表示 -inf / +inf（此时对应端点必为开）
    """
    lo: Optional[Value]
    lo_open: bool
    hi: Optional[Value]
    hi_open: bool

    @staticmethod
    def point(v: Value) -> "Interval":
        return Interval(v, False, v, False)

    @property
    def is_point(self) -> bool:
        return self.lo is not None and self.hi is not None and not self.lo_open \
            and not self.hi_open and compare(self.lo, self.hi) == 0

    def contains(self, v: Value) -> bool:
        if self.lo is not None:
            c = compare(v, self.lo)
            if c < 0 or (c == 0 and self.lo_open):
                return False
        if self.hi is not None:
            c = compare(v, self.hi)
            if c > 0 or (c == 0 and self.hi_open):
                return False
        return True

    def is_empty(self) -> bool:
        if self.lo is None or self.hi is None:
            return False
        c = compare(self.lo, self.hi)
        return c > 0 or (c == 0 and (self.lo_open or self.hi_open))

    def intersect(self, other: "Interval") -> "Interval":
        lo, lo_open = _max_lower(self.lo, self.lo_open, other.lo, other.lo_open)
        hi, hi_open = _min_upper(self.hi, self.hi_open, other.hi, other.hi_open)
        return Interval(lo, lo_open, hi, hi_open)

    def __str__(self) -> str:
        lo = "-inf" if self.lo is None else str(_show(self.lo))
        hi = "+inf" if self.hi is None else str(_show(self.hi))
        return f"{'(' if self.lo_open else '['}{lo}, {hi}{')' if self.hi_open else ']'}"


def _show(v: Value) -> object:
    return float(v) if isinstance(v, AlgebraicNumber) else v


def _max_lower(a, a_open, b, b_open):
    if a is None:
        return b, b_open
    if b is None:
        return a, a_open
    c = compare(a, b)
    if c > 0:
        return a, a_open
    if c < 0:
        return b, b_open
    return a, a_open or b_open


def _min_upper(a, a_open, b, b_open):
    if a is None:
        return b, b_open
    if b is None:
        return a, a_open
    c = compare(a, b)
    if c < 0:
        return a, a_open
    if c > 0:
        return b, b_open
    return a, a_open or b_open


REALS = Interval(None, True, None, True)


class IntervalSet:
    """不相交、按升序排列的区间并"""

    def __init__(self, intervals: Iterable[Interval] = ()):
        self.intervals: Tuple[Interval, ...] = tuple(i for i in intervals if not i.is_empty())

    @staticmethod
    def reals() -> "IntervalSet":
        return IntervalSet([REALS])

    @staticmethod
    def empty() -> "IntervalSet":
        return IntervalSet()

    def is_empty(self) -> bool:
        return not self.intervals

    def contains(self, v: Value) -> bool:
        return any(i.contains(v) for i in self.intervals)

    def intersect(self, other: "IntervalSet") -> "IntervalSet":
        out = []
        for a in self.intervals:
            for b in other.intervals:
                c = a.intersect(b)
                if not c.is_empty():
                    out.append(c)
        return IntervalSet(out)

    def __str__(self) -> str:
        if not self.intervals:
            return "{}"
        return " u ".join(str(i) for i in self.intervals)

    def __repr__(self) -> str:
        return f"IntervalSet({self})"


# ----------------------------------------------------------------------
# 可行集
# ----------------------------------------------------------------------

def _regions(roots: Sequence[Value]) -> List[Tuple[Interval, Optional[Value]]]:
    """
    根把实轴分成的区域（开区间与根点交替），附带一个区域内的有理样本点
    """
    out: List[Tuple[Interval, Optional[Value]]] = []
    prev: Optional[Value] = None
    for r in roots:
        sample = value_between(prev, r)
        out.append((Interval(prev, True, r, True), sample))
        out.append((Interval.point(r), r))
        prev = r
    out.append((Interval(prev, True, None, True), value_between(prev, None)))
    return out


def _merge(pieces: Sequence[Tuple[Interval, bool]]) -> IntervalSet:
    """合并相邻且都满足的区域"""
    out: List[Interval] = []
    current: Optional[Interval] = None
    for interval, keep in pieces:
        if not keep:
            if current is not None:
                out.append(current)
                current = None
            continue
        if current is None:
            current = interval
        else:
            current = Interval(current.lo, current.lo_open, interval.hi, interval.hi_open)
    if current is not None:
        out.append(current)
    return IntervalSet(out)


def feasible_poly(poly, signs, x: str, m: Mapping[str, object]) -> IntervalSet:
    """
    使 sign(poly(m, x)) 属于 signs 的 x 取值集合

    poly 在 m 下退化为零多项式时，可行集为全体或空集
    """
    below = {n: v for n, v in m.items() if n != x}
    roots = roots_at(poly, x, below)
    if roots is None:
        return IntervalSet.reals() if 0 in signs else IntervalSet.empty()
    pieces = []
    for interval, sample in _regions(roots):
        if interval.is_point:
            keep = 0 in signs
        else:
            point = dict(below)
            point[x] = sample
            keep = sign_at(poly, point) in signs
        pieces.append((interval, keep))
    return _merge(pieces)


def feasible_root(atom: ExtendedConstraint, positive: bool, m: Mapping[str, object]) -> IntervalSet:
    """扩展约束文字的可行集；根不存在时正文字为空集，负文字为全体"""
    root = kth_root(atom, m)
    if root is None:
        return IntervalSet.empty() if positive else IntervalSet.reals()
    signs = atom.rel.signs if positive else frozenset({-1, 0, 1}) - atom.rel.signs
    pieces = [
        (Interval(None, True, root, True), -1 in signs),
        (Interval.point(root), 0 in signs),
        (Interval(root, True, None, True), 1 in signs),
    ]
    return _merge(pieces)


def feasible_set(lit: Literal, x: str, m: Mapping[str, object]) -> IntervalSet:
    """
    文字关于变量 x 的可行集（x 以下的变量均已在 m 中赋值）
    """
    atom = lit.atom
    if isinstance(atom, PolyConstraint):
        signs = atom.rel.signs if lit.positive else frozenset({-1, 0, 1}) - atom.rel.signs
        return feasible_poly(atom.poly, signs, x, m)
    if isinstance(atom, ExtendedConstraint):
        return feasible_root(atom, lit.positive, m)
    raise TypeError(f"no feasible set for Boolean atom {atom}")


# ----------------------------------------------------------------------
# 取值
# ----------------------------------------------------------------------

def floor_value(v: Value) -> int:
    v = make_value(v)
    if not isinstance(v, AlgebraicNumber):
        return math.floor(v)
    while True:
        lo, hi = math.floor(v.lo), math.floor(v.hi)
        if lo == hi or (hi == v.hi and lo == hi - 1):
            return lo
        v = v.bisect()
        if v.is_rational:
            return math.floor(v.lo)


def _lowest_integer(iv: Interval) -> Optional[int]:
    if iv.lo is None:
        return None
    n = floor_value(iv.lo)
    if compare(n, iv.lo) < 0 or (iv.lo_open and compare(n, iv.lo) == 0):
        n += 1
    return n


def _highest_integer(iv: Interval) -> Optional[int]:
    if iv.hi is None:
        return None
    n = floor_value(iv.hi)
    if iv.hi_open and compare(n, iv.hi) == 0:
        n -= 1
    return n


def value_between(a: Optional[Value], b: Optional[Value]) -> Fraction:
    """严格位于 a 与 b 之间的有理数（None 表示无穷）；优先整数，其次二进中点"""
    if a is None and b is None:
        return Fraction(0)
    if a is None:
        return Fraction(floor_value(b) - 1)
    if b is None:
        return Fraction(floor_value(a) + 1)
    n = floor_value(a) + 1
    if compare(n, b) < 0:
        if compare(0, a) > 0 and compare(0, b) < 0:
            return Fraction(0)
        return Fraction(n) if n > 0 else Fraction(_highest_below(b))
    a_hi = a.hi if isinstance(a, AlgebraicNumber) else a
    b_lo = b.lo if isinstance(b, AlgebraicNumber) else b
    while True:
        mid = (a_hi + b_lo) / 2
        if compare(a, mid) < 0 and compare(mid, b) < 0:
            return mid
        if isinstance(a, AlgebraicNumber):
            a = a.bisect()
            a_hi = a.hi
        if isinstance(b, AlgebraicNumber):
            b = b.bisect()
            b_lo = b.lo


def _highest_below(b: Value) -> int:
    n = floor_value(b)
    return n - 1 if compare(n, b) == 0 else n


def pick_value(s: IntervalSet) -> Value:
    """
    从非空可行集取值: 优先 0，其次绝对值最小的整数，再次二进中点，
    最后是单点区间上的代数数
    """
    if s.is_empty():
        raise ValueError("cannot pick a value from an empty set")
    if s.contains(Fraction(0)):
        return Fraction(0)
    best: Optional[int] = None
    for iv in s.intervals:
        lo, hi = _lowest_integer(iv), _highest_integer(iv)
        if lo is not None and hi is not None and lo > hi:
            continue
        if lo is not None and lo > 0:
            cand = lo
        elif hi is not None and hi < 0:
            cand = hi
        else:
            cand = 0
        if best is None or abs(cand) < abs(best):
            best = cand
    if best is not None:
        return Fraction(best)
    for iv in s.intervals:
        if not iv.is_point:
            return value_between(iv.lo, iv.hi)
    return s.intervals[0].lo
