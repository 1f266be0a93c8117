"""
公式与赋值模型
原子、文字、子句、公式，以及部分赋值下的三值求值语义
"""

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Callable, Dict, FrozenSet, Iterable, Iterator, List, Mapping, Optional, Set, Tuple, Union

from .errors import EvaluationError
from .poly import Polynomial, VarOrder, compose
from .realalg import AlgebraicNumber, Value, compare, make_value, roots_at, sign_at


class Relation(Enum):
    """比较关系"""
    LT = "<"
    LE = "<="
    EQ = "="
    GE = ">="
    GT = ">"

    @property
    def signs(self) -> FrozenSet[int]:
        """满足关系的符号集合（与 0 或与根比较的结果）"""
        return _SIGNS[self]

    def holds(self, sign: int) -> bool:
        return sign in _SIGNS[self]

    def mirrored(self) -> "Relation":
        """两边同乘 -1 后的关系"""
        return _MIRROR[self]


_SIGNS = {
    Relation.LT: frozenset({-1}),
    Relation.LE: frozenset({-1, 0}),
    Relation.EQ: frozenset({0}),
    Relation.GE: frozenset({0, 1}),
    Relation.GT: frozenset({1}),
}

_MIRROR = {
    Relation.LT: Relation.GT,
    Relation.LE: Relation.GE,
    Relation.EQ: Relation.EQ,
    Relation.GE: Relation.LE,
    Relation.GT: Relation.LT,
}


class Sort(Enum):
    """变量类型"""
    REAL = "Real"
    BOOL = "Bool"


@dataclass(frozen=True)
class Var:
    """声明的变量"""
    name: str
    sort: Sort


# ----------------------------------------------------------------------
# 原子
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class BoolVar:
    """布尔变量原子"""
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class PolyConstraint:
    """
    多项式约束 f rel 0

    用 make 构造：f 本原化且最高数值系数为正，必要时镜像关系
    """
    poly: Polynomial
    rel: Relation

    @staticmethod
    def make(poly: Polynomial, rel: Relation) -> "Formula":
        """常数多项式直接化为 TRUE / FALSE"""
        if poly.is_constant:
            return TRUE if rel.holds((poly.const > 0) - (poly.const < 0)) else FALSE
        norm, sign = poly.normalized()
        return PolyConstraint(norm, rel if sign > 0 else rel.mirrored())

    def __str__(self) -> str:
        return f"({self.poly} {self.rel.value} 0)"


@dataclass(frozen=True)
class ExtendedConstraint:
    """
    扩展根约束 x rel root(f, k, x)

    x 是 f 的顶层变量，k 从 1 开始；f 的实根少于 k 个时约束为假
    """
    var: str
    rel: Relation
    poly: Polynomial
    k: int

    def __post_init__(self):
        if self.k < 1:
            raise EvaluationError(f"root index must be positive, got {self.k}")
        if self.poly.var != self.var:
            raise EvaluationError(f"{self.var} is not the top variable of {self.poly}")

    def __str__(self) -> str:
        return f"({self.var} {self.rel.value}_r root({self.poly}, {self.k}))"


Atom = Union[BoolVar, PolyConstraint, ExtendedConstraint]
ATOM_TYPES = (BoolVar, PolyConstraint, ExtendedConstraint)


# ----------------------------------------------------------------------
# 公式
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class Not:
    arg: "Formula"


@dataclass(frozen=True)
class And:
    args: Tuple["Formula", ...]


@dataclass(frozen=True)
class Or:
    args: Tuple["Formula", ...]


Formula = Union[Atom, Not, And, Or]

TRUE = And(())
FALSE = Or(())


def neg(f: Formula) -> Formula:
    if isinstance(f, Not):
        return f.arg
    if f == TRUE:
        return FALSE
    if f == FALSE:
        return TRUE
    return Not(f)


def conj(*fs: Formula) -> Formula:
    """合取（展平、去掉 TRUE、遇 FALSE 短路）"""
    args: List[Formula] = []
    for f in fs:
        parts = f.args if isinstance(f, And) else (f,)
        for p in parts:
            if p == FALSE:
                return FALSE
            if p not in args:
                args.append(p)
    return args[0] if len(args) == 1 else And(tuple(args))


def disj(*fs: Formula) -> Formula:
    """析取（展平、去掉 FALSE、遇 TRUE 短路）"""
    args: List[Formula] = []
    for f in fs:
        parts = f.args if isinstance(f, Or) else (f,)
        for p in parts:
            if p == TRUE:
                return TRUE
            if p not in args:
                args.append(p)
    return args[0] if len(args) == 1 else Or(tuple(args))


def implies(a: Formula, b: Formula) -> Formula:
    return disj(neg(a), b)


@dataclass(frozen=True)
class Literal:
    """带极性的原子"""
    atom: Atom
    positive: bool = True

    def __invert__(self) -> "Literal":
        return Literal(self.atom, not self.positive)

    def formula(self) -> Formula:
        return self.atom if self.positive else Not(self.atom)

    def __str__(self) -> str:
        return str(self.atom) if self.positive else f"!{self.atom}"


@dataclass(frozen=True)
class Clause:
    """文字的析取，无重复；空子句即 FALSE"""
    literals: Tuple[Literal, ...]

    @staticmethod
    def of(literals: Iterable[Literal]) -> "Clause":
        seen: List[Literal] = []
        for lit in literals:
            if lit not in seen:
                seen.append(lit)
        return Clause(tuple(seen))

    def __iter__(self) -> Iterator[Literal]:
        return iter(self.literals)

    def __len__(self) -> int:
        return len(self.literals)

    @property
    def is_empty(self) -> bool:
        return not self.literals

    @property
    def is_tautology(self) -> bool:
        return any(~lit in self.literals for lit in self.literals)

    def formula(self) -> Formula:
        return disj(*(lit.formula() for lit in self.literals))

    def __str__(self) -> str:
        if not self.literals:
            return "false"
        return " | ".join(str(lit) for lit in self.literals)


def literal_of(f: Formula) -> Optional[Literal]:
    """原子或原子的否定转为文字，其余返回 None"""
    if isinstance(f, ATOM_TYPES):
        return Literal(f, True)
    if isinstance(f, Not) and isinstance(f.arg, ATOM_TYPES):
        return Literal(f.arg, False)
    return None


def clauses_formula(clauses: Iterable[Clause]) -> Formula:
    return conj(*(c.formula() for c in clauses))


# ----------------------------------------------------------------------
# 遍历
# ----------------------------------------------------------------------

def atoms_of(f: Formula) -> List[Atom]:
    """出现的原子（按首次出现顺序）"""
    out: List[Atom] = []
    seen: Set[Atom] = set()

    def walk(g: Formula) -> None:
        if isinstance(g, ATOM_TYPES):
            if g not in seen:
                seen.add(g)
                out.append(g)
        elif isinstance(g, Not):
            walk(g.arg)
        else:
            for a in g.args:
                walk(a)

    walk(f)
    return out


def polys_of(f: Formula) -> List[Polynomial]:
    """约束中出现的多项式"""
    out: List[Polynomial] = []
    for atom in atoms_of(f):
        if isinstance(atom, (PolyConstraint, ExtendedConstraint)) and atom.poly not in out:
            out.append(atom.poly)
    return out


def atom_vars(atom: Atom) -> Set[str]:
    if isinstance(atom, BoolVar):
        return {atom.name}
    names = set(atom.poly.vars())
    if isinstance(atom, ExtendedConstraint):
        names.add(atom.var)
    return names


def formula_vars(f: Formula) -> Set[str]:
    """出现的全部变量名（实变量与布尔变量）"""
    out: Set[str] = set()
    for atom in atoms_of(f):
        out |= atom_vars(atom)
    return out


def map_atoms(f: Formula, fn: Callable[[Atom], Formula]) -> Formula:
    """逐原子替换，保持布尔结构"""
    if isinstance(f, ATOM_TYPES):
        return fn(f)
    if isinstance(f, Not):
        return neg(map_atoms(f.arg, fn))
    if isinstance(f, And):
        return conj(*(map_atoms(a, fn) for a in f.args))
    return disj(*(map_atoms(a, fn) for a in f.args))


def rename_formula(f: Formula, images: Mapping[str, Polynomial], order: VarOrder,
                   bool_names: Optional[Mapping[str, str]] = None) -> Formula:
    """
    代入 / 改名

    实变量按 images 代入（缺省按名字搬到 order），布尔变量按 bool_names 改名
    """
    bool_names = bool_names or {}

    def fn(atom: Atom) -> Formula:
        if isinstance(atom, BoolVar):
            return BoolVar(bool_names.get(atom.name, atom.name))
        p = compose(atom.poly, images, order)
        if isinstance(atom, PolyConstraint):
            return PolyConstraint.make(p, atom.rel)
        image = images.get(atom.var)
        if image is not None and (image.var is None or image != order.var(image.var)):
            raise EvaluationError(f"cannot substitute a term for root variable {atom.var}")
        new_var = image.var if image is not None else atom.var
        return ExtendedConstraint(new_var, atom.rel, p, atom.k)

    return map_atoms(f, fn)


def reorder_formula(f: Formula, order: VarOrder) -> Formula:
    """把公式中的多项式搬到另一变量顺序"""
    return rename_formula(f, {}, order)


def nnf(f: Formula, positive: bool = True) -> Formula:
    """否定范式：Not 只出现在原子上"""
    if isinstance(f, ATOM_TYPES):
        return f if positive else Not(f)
    if isinstance(f, Not):
        return nnf(f.arg, not positive)
    parts = [nnf(a, positive) for a in f.args]
    if isinstance(f, And) == positive:
        return conj(*parts)
    return disj(*parts)


# ----------------------------------------------------------------------
# 赋值
# ----------------------------------------------------------------------

AnyValue = Union[bool, Fraction, AlgebraicNumber]


def values_equal(a: AnyValue, b: AnyValue) -> bool:
    if isinstance(a, bool) or isinstance(b, bool):
        return isinstance(a, bool) and isinstance(b, bool) and a == b
    return compare(a, b) == 0


class Assignment:
    """
    部分赋值：变量名到布尔值或实代数数

    实数值统一规范化为 Fraction 或 AlgebraicNumber
    """

    def __init__(self, values: Optional[Mapping[str, object]] = None):
        self._values: Dict[str, AnyValue] = {}
        for name, v in (values or {}).items():
            self[name] = v

    def __setitem__(self, name: str, v: object) -> None:
        self._values[name] = v if isinstance(v, bool) else make_value(v)

    def __getitem__(self, name: str) -> AnyValue:
        return self._values[name]

    def __delitem__(self, name: str) -> None:
        del self._values[name]

    def __contains__(self, name: object) -> bool:
        return name in self._values

    def __iter__(self) -> Iterator[str]:
        return iter(self._values)

    def __len__(self) -> int:
        return len(self._values)

    def get(self, name: str, default: Optional[AnyValue] = None) -> Optional[AnyValue]:
        return self._values.get(name, default)

    def items(self):
        return self._values.items()

    def keys(self):
        return self._values.keys()

    def copy(self) -> "Assignment":
        return Assignment(self._values)

    def restrict(self, names: Iterable[str]) -> "Assignment":
        keep = set(names)
        return Assignment({n: v for n, v in self._values.items() if n in keep})

    def union(self, other: Mapping[str, object]) -> "Assignment":
        """
        合并两个一致的赋值

        Raises:
            EvaluationError: 同一变量取值不同
        """
        out = self.copy()
        for name, v in other.items():
            if name in out and not values_equal(out[name], v if isinstance(v, bool) else make_value(v)):
                raise EvaluationError(f"assignments disagree on {name}")
            out[name] = v
        return out

    def agrees_with(self, other: "Assignment") -> bool:
        return all(values_equal(v, other[n]) for n, v in self._values.items() if n in other)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Assignment):
            return NotImplemented
        return self.keys() == other.keys() and self.agrees_with(other)

    def __repr__(self) -> str:
        body = ", ".join(f"{n}={v}" for n, v in self._values.items())
        return f"Assignment({body})"


# ----------------------------------------------------------------------
# 求值
# ----------------------------------------------------------------------

def _assigned(names: Iterable[str], m: Mapping[str, object]) -> bool:
    return all(n in m for n in names)


def evaluate_atom(atom: Atom, m: Mapping[str, object]) -> Optional[bool]:
    """原子的三值求值，None 表示未定"""
    if isinstance(atom, BoolVar):
        v = m.get(atom.name)
        if v is None:
            return None
        if not isinstance(v, bool):
            raise EvaluationError(f"{atom.name} is Boolean but has a real value")
        return v
    if isinstance(atom, PolyConstraint):
        if not _assigned(atom.poly.vars(), m):
            return None
        return atom.rel.holds(sign_at(atom.poly, m))
    if atom.var not in m or not _assigned(atom.poly.vars(), m):
        return None
    root = kth_root(atom, m)
    if root is None:
        return False
    return atom.rel.holds(compare(m[atom.var], root))


def kth_root(atom: ExtendedConstraint, m: Mapping[str, object]) -> Optional[Value]:
    """扩展约束在 m 下界定的第 k 个根；不存在时返回 None"""
    below = {n: v for n, v in m.items() if n != atom.var}
    roots = roots_at(atom.poly, atom.var, below)
    if roots is None or len(roots) < atom.k:
        return None
    return roots[atom.k - 1]


def evaluate(f: Union[Formula, Literal, Clause], m: Mapping[str, object],
             atom_value: Optional[Callable[[Atom], Optional[bool]]] = None) -> Optional[bool]:
    """
    部分赋值下的三值求值（Kleene 语义）

    Args:
        f: 公式、文字或子句
        m: 赋值
        atom_value: 可选，优先使用的原子取值（如 trail 上的布尔赋值）

    Returns:
        True / False，需要的变量未赋值时返回 None
    """
    if isinstance(f, Literal):
        v = evaluate(f.atom, m, atom_value)
        return v if v is None or f.positive else not v
    if isinstance(f, Clause):
        return evaluate(f.formula(), m, atom_value)
    if isinstance(f, ATOM_TYPES):
        if atom_value is not None:
            v = atom_value(f)
            if v is not None:
                return v
        return evaluate_atom(f, m)
    if isinstance(f, Not):
        v = evaluate(f.arg, m, atom_value)
        return None if v is None else not v
    results = [evaluate(a, m, atom_value) for a in f.args]
    if isinstance(f, And):
        if False in results:
            return False
        return None if None in results else True
    if True in results:
        return True
    return None if None in results else False


def can_evaluate(trail, term: Union[Atom, Formula], value: bool) -> bool:
    """
    trail 中 term 能否取值 value

    两条途径都检查：term 在 trail 上被赋值为 value，或由最近的相关子项
    （实变量、已赋值的原子）计算得到 value。同一项可能两者都成立（求值冲突）

    trail 需提供 value_of(term) 与 assignment
    """
    if trail.value_of(term) == value:
        return True
    if isinstance(term, BoolVar):
        return False
    if isinstance(term, ATOM_TYPES):
        return evaluate_atom(term, trail.assignment) == value
    return evaluate(term, trail.assignment, trail.value_of) == value
