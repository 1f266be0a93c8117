"""
整系数多元多项式
按固定变量顺序递归表示：顶层变量的系数是只含更低变量的多项式；
结式、判别式与主子结式系数交给 sympy
"""

from fractions import Fraction
from math import gcd
from typing import Callable, Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

import sympy
from sympy.polys.domains import ZZ
from sympy.polys.subresultants_qq_zz import sylvester

from .errors import PolynomialError

Rational = Union[int, Fraction]
Monomial = Tuple[Tuple[str, int], ...]
Box = Tuple[Fraction, Fraction]


class VarOrder:
    """
    实变量顺序

    只允许在顶端追加新变量，已有变量的相对顺序在实例生命周期内不变
    """

    def __init__(self, names: Iterable[str] = ()):
        self._names: List[str] = []
        self._level: Dict[str, int] = {}
        for name in names:
            self.add(name)

    def add(self, name: str) -> int:
        """追加变量（已存在则直接返回其层级）"""
        if name not in self._level:
            self._level[name] = len(self._names)
            self._names.append(name)
        return self._level[name]

    def level(self, name: str) -> int:
        try:
            return self._level[name]
        except KeyError:
            raise PolynomialError(f"variable {name!r} is not in the order") from None

    def var(self, name: str) -> "Polynomial":
        """变量 name 对应的一次多项式"""
        self.level(name)
        return Polynomial(self, name, ((1, Polynomial.constant(self, 1)),))

    def constant(self, value: int) -> "Polynomial":
        return Polynomial.constant(self, value)

    def sort_names(self, names: Iterable[str]) -> List[str]:
        """按本顺序排列变量名"""
        return sorted(names, key=self.level)

    @property
    def names(self) -> List[str]:
        return list(self._names)

    def __contains__(self, name: object) -> bool:
        return name in self._level

    def __iter__(self) -> Iterator[str]:
        return iter(list(self._names))

    def __len__(self) -> int:
        return len(self._names)

    def __repr__(self) -> str:
        return "VarOrder(" + " < ".join(self._names) + ")"


class Polynomial:
    """
    不可变多项式

    常数多项式: var 为 None，值存于 const
    非常数多项式: coeffs 为 (次数, 系数多项式) 序列，次数严格递增，
    系数非零且只含低于 var 的变量，最高次数 >= 1
    """

    __slots__ = ("order", "var", "coeffs", "const", "_level", "_hash")

    def __init__(self, order: VarOrder, var: Optional[str] = None,
                 coeffs: Tuple[Tuple[int, "Polynomial"], ...] = (), const: int = 0):
        self.order = order
        self.var = var
        self.coeffs = coeffs
        self.const = const
        self._level = -1 if var is None else order.level(var)
        self._hash: Optional[int] = None

    # ------------------------------------------------------------------
    # 构造
    # ------------------------------------------------------------------

    @staticmethod
    def constant(order: VarOrder, value: int) -> "Polynomial":
        if isinstance(value, Fraction):
            if value.denominator != 1:
                raise PolynomialError(f"non-integer coefficient {value}")
            value = value.numerator
        return Polynomial(order, None, (), int(value))

    @staticmethod
    def _make(order: VarOrder, var: str, items: Mapping[int, "Polynomial"]) -> "Polynomial":
        """规范化构造：去掉零系数，只剩常数项时退化为系数本身"""
        kept = tuple(sorted((p, c) for p, c in items.items() if not c.is_zero))
        if not kept:
            return Polynomial.constant(order, 0)
        if len(kept) == 1 and kept[0][0] == 0:
            return kept[0][1]
        return Polynomial(order, var, kept)

    @staticmethod
    def monomial(coeff: "Polynomial", var: str, power: int) -> "Polynomial":
        if power == 0:
            return coeff
        return Polynomial._make(coeff.order, var, {power: coeff})

    @staticmethod
    def from_terms(terms: Mapping[Monomial, int], order: VarOrder) -> "Polynomial":
        """由稀疏单项式字典构造"""
        result = order.constant(0)
        for mono, c in terms.items():
            t = order.constant(c)
            for name, e in mono:
                t = t * order.var(name) ** e
            result = result + t
        return result

    # ------------------------------------------------------------------
    # 基本属性
    # ------------------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return self.var is None and self.const == 0

    @property
    def is_constant(self) -> bool:
        return self.var is None

    @property
    def level(self) -> int:
        """顶层变量的层级，常数为 -1"""
        return self._level

    def degree(self, x: Optional[str] = None) -> int:
        """关于变量 x 的次数（缺省为顶层变量），零多项式返回 -1"""
        if self.is_zero:
            return -1
        if self.var is None:
            return 0
        if x is None or x == self.var:
            return self.coeffs[-1][0]
        if self.order.level(x) > self._level:
            return 0
        return max(c.degree(x) for _, c in self.coeffs)

    def lc(self) -> "Polynomial":
        """顶层变量的首项系数"""
        if self.var is None:
            return self
        return self.coeffs[-1][1]

    def leading_number(self) -> int:
        """逐层取首项系数直到整数"""
        f = self
        while f.var is not None:
            f = f.coeffs[-1][1]
        return f.const

    def coefficients(self, x: str) -> Dict[int, "Polynomial"]:
        """把多项式看作 x 的一元多项式，返回 {次数: 系数}"""
        if self.is_zero:
            return {}
        if self.var is None or self.order.level(x) > self._level:
            return {0: self}
        if x == self.var:
            return dict(self.coeffs)
        out: Dict[int, Polynomial] = {}
        for p, c in self.coeffs:
            lift = Polynomial.monomial(self.order.constant(1), self.var, p)
            for k, ck in c.coefficients(x).items():
                term = ck * lift
                out[k] = out[k] + term if k in out else term
        return {k: v for k, v in out.items() if not v.is_zero}

    def vars(self) -> List[str]:
        """出现的变量，按顺序从低到高"""
        found = set()
        self._collect_vars(found)
        return self.order.sort_names(found)

    def _collect_vars(self, found: set) -> None:
        if self.var is None:
            return
        found.add(self.var)
        for _, c in self.coeffs:
            c._collect_vars(found)

    def univariate_coeffs(self) -> List[int]:
        """一元（或常数）多项式的稠密整数系数，低次在前"""
        if self.var is None:
            return [self.const]
        out = [0] * (self.degree() + 1)
        for p, c in self.coeffs:
            if c.var is not None:
                raise PolynomialError(f"{self} is not univariate")
            out[p] = c.const
        return out

    @staticmethod
    def from_univariate(coeffs: List[int], var: str, order: VarOrder) -> "Polynomial":
        return Polynomial._make(order, var, {i: order.constant(c) for i, c in enumerate(coeffs)})

    def terms(self) -> Dict[Monomial, int]:
        """展开为稀疏单项式字典"""
        if self.var is None:
            return {(): self.const} if self.const else {}
        out: Dict[Monomial, int] = {}
        for p, c in self.coeffs:
            for mono, v in c.terms().items():
                out[mono + ((self.var, p),) if p else mono] = v
        return out

    # ------------------------------------------------------------------
    # 环运算
    # ------------------------------------------------------------------

    def _lift(self, other: Union["Polynomial", int]) -> "Polynomial":
        if isinstance(other, Polynomial):
            return other
        return Polynomial.constant(self.order, other)

    def __add__(self, other: Union["Polynomial", int]) -> "Polynomial":
        return _add(self, self._lift(other))

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return self.scale(-1)

    def __sub__(self, other: Union["Polynomial", int]) -> "Polynomial":
        return _add(self, -self._lift(other))

    def __rsub__(self, other: int) -> "Polynomial":
        return _add(self._lift(other), -self)

    def __mul__(self, other: Union["Polynomial", int]) -> "Polynomial":
        if not isinstance(other, Polynomial):
            return self.scale(other)
        return _mul(self, other)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "Polynomial":
        if n < 0:
            raise PolynomialError("negative power")
        result = self.order.constant(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def scale(self, n: int) -> "Polynomial":
        """乘以整数"""
        if n == 0:
            return self.order.constant(0)
        if self.var is None:
            return Polynomial.constant(self.order, self.const * n)
        return Polynomial(self.order, self.var, tuple((p, c.scale(n)) for p, c in self.coeffs))

    def map_ints(self, fn: Callable[[int], int]) -> "Polynomial":
        if self.var is None:
            return Polynomial.constant(self.order, fn(self.const))
        return Polynomial._make(self.order, self.var, {p: c.map_ints(fn) for p, c in self.coeffs})

    # ------------------------------------------------------------------
    # 规范化
    # ------------------------------------------------------------------

    def content(self) -> int:
        """整数系数的最大公约数（非负）"""
        if self.var is None:
            return abs(self.const)
        g = 0
        for _, c in self.coeffs:
            g = gcd(g, c.content())
            if g == 1:
                break
        return g

    def primitive(self) -> "Polynomial":
        g = self.content()
        if g in (0, 1):
            return self
        return self.map_ints(lambda c: c // g)

    def normalized(self) -> Tuple["Polynomial", int]:
        """
        本原化并使最高数值系数为正

        Returns:
            (规范多项式, 符号)，原多项式 = 正数 * 符号 * 规范多项式
        """
        p = self.primitive()
        if p.leading_number() < 0:
            return -p, -1
        return p, 1

    # ------------------------------------------------------------------
    # 比较与显示
    # ------------------------------------------------------------------

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Polynomial):
            return NotImplemented
        if self is other:
            return True
        if self.var != other.var:
            return False
        if self.var is None:
            return self.const == other.const
        return self.coeffs == other.coeffs

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.var, self.const, self.coeffs))
        return self._hash

    def __repr__(self) -> str:
        return format_infix(self)


def _add(f: Polynomial, g: Polynomial) -> Polynomial:
    if f.var is None and g.var is None:
        return Polynomial.constant(f.order, f.const + g.const)
    if g.is_zero:
        return f
    if f.is_zero:
        return g
    if f._level < g._level:
        f, g = g, f
    items = dict(f.coeffs)
    if f._level > g._level:
        items[0] = _add(items[0], g) if 0 in items else g
    else:
        for p, c in g.coeffs:
            items[p] = _add(items[p], c) if p in items else c
    return Polynomial._make(f.order, f.var, items)


def _mul(f: Polynomial, g: Polynomial) -> Polynomial:
    if f.is_zero or g.is_zero:
        return Polynomial.constant(f.order, 0)
    if f.var is None and g.var is None:
        return Polynomial.constant(f.order, f.const * g.const)
    if f._level < g._level:
        f, g = g, f
    if f._level > g._level:
        return Polynomial._make(f.order, f.var, {p: _mul(c, g) for p, c in f.coeffs})
    items: Dict[int, Polynomial] = {}
    for p, c in f.coeffs:
        for q, d in g.coeffs:
            t = _mul(c, d)
            items[p + q] = _add(items[p + q], t) if p + q in items else t
    return Polynomial._make(f.order, f.var, items)


# ----------------------------------------------------------------------
# 公开操作
# ----------------------------------------------------------------------

def arith(f: Polynomial, g: Polynomial, op: str) -> Polynomial:
    """环运算，op 为 "add" / "sub" / "mul" """
    if op == "add":
        return f + g
    if op == "sub":
        return f - g
    if op == "mul":
        return f * g
    raise PolynomialError(f"unknown operation {op!r}")


def derivative(f: Polynomial, x: str) -> Polynomial:
    """关于 x 的形式偏导"""
    if f.var is None or f.order.level(x) > f.level:
        return f.order.constant(0)
    if x == f.var:
        return Polynomial._make(f.order, f.var, {p - 1: c.scale(p) for p, c in f.coeffs if p > 0})
    return Polynomial._make(f.order, f.var, {p: derivative(c, x) for p, c in f.coeffs})


def compose(f: Polynomial, images: Mapping[str, Polynomial], order: VarOrder) -> Polynomial:
    """
    代入: 把变量 v 替换成 images[v]，其余变量按名字映射到 order 中

    既用于改名、重排变量顺序，也用于内联转移关系中的函数式更新
    """
    cache: Dict[str, Polynomial] = {}

    def image(name: str) -> Polynomial:
        if name not in cache:
            cache[name] = images[name] if name in images else order.var(name)
        return cache[name]

    def walk(g: Polynomial) -> Polynomial:
        if g.var is None:
            return Polynomial.constant(order, g.const)
        base = image(g.var)
        result = order.constant(0)
        prev = 0
        power = order.constant(1)
        for p, c in g.coeffs:
            power = power * base ** (p - prev)
            prev = p
            result = result + walk(c) * power
        return result

    return walk(f)


def reorder(f: Polynomial, order: VarOrder) -> Polynomial:
    """在另一变量顺序下重建同一多项式"""
    if f.order is order:
        return f
    return compose(f, {}, order)


def evaluate(f: Polynomial, values: Mapping[str, Rational]) -> Fraction:
    """有理点处精确求值，所有变量必须赋值"""
    if f.var is None:
        return Fraction(f.const)
    try:
        v = values[f.var]
    except KeyError:
        raise PolynomialError(f"variable {f.var!r} is unassigned") from None
    if isinstance(v, bool):
        raise PolynomialError(f"Boolean value for real variable {f.var!r}")
    total = Fraction(0)
    for p, c in reversed(f.coeffs):
        total += evaluate(c, values) * Fraction(v) ** p
    return total


def evaluate_partial(f: Polynomial, values: Mapping[str, object]) -> Polynomial:
    """
    代入有理值，保留其余变量

    结果与精确值相差一个正因子（整系数表示），符号与零点不变；
    代数值不在这里代入，由 realalg.sign_at 处理

    Raises:
        PolynomialError: 给实变量赋了布尔值
    """
    return substitute_rationals(f, values)[0]


def substitute_rationals(f: Polynomial, values: Mapping[str, object]) -> Tuple[Polynomial, int]:
    """
    同 evaluate_partial

    代入 x = p/q 后乘以 q^deg_x(f) 以保持整系数

    Returns:
        (剩余变量上的整系数多项式, 正缩放因子 s)，精确结果 = 多项式 / s
    """
    result = f
    scale = 1
    for name in reversed(f.vars()):
        if name not in values:
            continue
        v = values[name]
        if isinstance(v, bool):
            raise PolynomialError(f"Boolean value for real variable {name!r}")
        if not isinstance(v, (int, Fraction)):
            continue
        v = Fraction(v)
        coeffs = result.coefficients(name)
        if not coeffs:
            continue
        d = max(coeffs)
        acc = f.order.constant(0)
        for k, c in coeffs.items():
            acc = acc + c * (v.numerator ** k * v.denominator ** (d - k))
        result = acc
        scale *= v.denominator ** d
    return result, scale


def evaluate_interval(f: Polynomial, boxes: Mapping[str, Box]) -> Box:
    """区间算术求值，boxes 给出每个变量的闭区间"""
    if f.var is None:
        c = Fraction(f.const)
        return c, c
    box = boxes[f.var]
    total: Box = (Fraction(0), Fraction(0))
    for p, c in f.coeffs:
        total = _iadd(total, _imul(evaluate_interval(c, boxes), _ipow(box, p)))
    return total


def _iadd(a: Box, b: Box) -> Box:
    return a[0] + b[0], a[1] + b[1]


def _imul(a: Box, b: Box) -> Box:
    ps = (a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1])
    return min(ps), max(ps)


def _ipow(a: Box, n: int) -> Box:
    if n == 0:
        return Fraction(1), Fraction(1)
    lo, hi = a[0] ** n, a[1] ** n
    if n % 2 == 0:
        if a[0] <= 0 <= a[1]:
            return Fraction(0), max(lo, hi)
        return min(lo, hi), max(lo, hi)
    return lo, hi


# ----------------------------------------------------------------------
# 消元（sympy）
# ----------------------------------------------------------------------

def _gens(x: str, *polys: Polynomial) -> List[str]:
    """消元用的生成元：x 在最前，其余按变量顺序"""
    names = set()
    for p in polys:
        names.update(p.vars())
    names.discard(x)
    return [x] + polys[0].order.sort_names(names)


def as_sympy(f: Polynomial, gens: Sequence[str]) -> sympy.Poly:
    """按给定生成元转为整系数 sympy.Poly"""
    index = {name: i for i, name in enumerate(gens)}
    rep = {}
    for mono, c in f.terms().items():
        exps = [0] * len(gens)
        for name, e in mono:
            exps[index[name]] = e
        rep[tuple(exps)] = c
    return sympy.Poly.from_dict(rep, *[sympy.Symbol(n) for n in gens], domain=ZZ)


def from_sympy(p: Union[sympy.Poly, sympy.Expr], order: VarOrder) -> Polynomial:
    """
    sympy 结果转回 order 下的多项式

    消去全部生成元后 sympy 返回整数而不是 Poly
    """
    if not isinstance(p, sympy.Poly):
        return order.constant(int(p))
    names = [str(g) for g in p.gens]
    terms: Dict[Monomial, int] = {}
    for exps, c in p.terms():
        if c:
            terms[tuple((n, e) for n, e in zip(names, exps) if e)] = int(c)
    return Polynomial.from_terms(terms, order)


def resultant(f: Polynomial, g: Polynomial, x: str) -> Polynomial:
    """
    res_x(f, g)，由 sympy 的子结式 PRS 计算

    Raises:
        PolynomialError: f 或 g 关于 x 的次数为 0
    """
    if f.degree(x) < 1 or g.degree(x) < 1:
        raise PolynomialError(f"resultant needs positive degree in {x}")
    gens = _gens(x, f, g)
    return from_sympy(as_sympy(f, gens).resultant(as_sympy(g, gens)), f.order)


def discriminant(f: Polynomial, x: str) -> Polynomial:
    """
    disc_x(f) = (-1)^(d(d-1)/2) * res_x(f, f') / lc_x(f)

    Raises:
        PolynomialError: deg_x(f) < 2
    """
    if f.degree(x) < 2:
        raise PolynomialError(f"discriminant needs degree >= 2 in {x}")
    return from_sympy(as_sympy(f, _gens(x, f)).discriminant(), f.order)


def principal_subresultants(f: Polynomial, g: Polynomial, x: str) -> List[Polynomial]:
    """
    主子结式系数 psc_0 .. psc_{min(m,n)-1}，psc_0 为结式

    psc_j 是 Sylvester 矩阵去掉 f、g 各自最后 j 行后、前 m+n-2j 列的行列式。
    结式或判别式恒为零时投影改用第一个非零的 psc_j
    """
    m, n = f.degree(x), g.degree(x)
    if m < 1 or n < 1:
        raise PolynomialError(f"subresultants need positive degree in {x}")
    gens = _gens(x, f, g)
    symbols = [sympy.Symbol(name) for name in gens]
    matrix = sylvester(as_sympy(f, gens).as_expr(), as_sympy(g, gens).as_expr(), symbols[0], 1)
    out = []
    for j in range(min(m, n)):
        sub = matrix.copy()
        # 前 n 行是 f 的移位，后 m 行是 g 的移位
        for _ in range(j):
            sub.row_del(m + n - j)
        for _ in range(j):
            sub.row_del(n - j)
        size = m + n - 2 * j
        det = sympy.expand(sub[:, :size].det(method="berkowitz"))
        out.append(from_sympy(sympy.Poly(det, *symbols, domain=ZZ), f.order))
    return out


# ----------------------------------------------------------------------
# 显示
# ----------------------------------------------------------------------

def format_infix(f: Polynomial) -> str:
    """可读的中缀形式，用于日志"""
    terms = sorted(f.terms().items(), key=lambda t: (-sum(e for _, e in t[0]), t[0]))
    if not terms:
        return "0"
    parts = []
    for mono, c in terms:
        body = "*".join(n if e == 1 else f"{n}^{e}" for n, e in mono)
        if not body:
            text = str(abs(c))
        elif abs(c) == 1:
            text = body
        else:
            text = f"{abs(c)}*{body}"
        parts.append(("-" if c < 0 else "+", text))
    first_sign, first = parts[0]
    out = ("-" if first_sign == "-" else "") + first
    for sign, text in parts[1:]:
        out += f" {sign} {text}"
    return out
