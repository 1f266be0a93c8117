"""
问题脚本解析与打印
SMT-LIB 风格的输入语言：声明、断言（普通 / A / B）与命令；
项的打印与解析互逆
"""

import logging
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Tuple, Union

from .sexpr import SExpr, SList, Symbol, error_at, read_all
from ..errors import ParseError, SortError
from ..model import (
    FALSE, TRUE, And, Assignment, BoolVar, Clause, ExtendedConstraint, Formula, Literal, Not, Or,
    PolyConstraint, Relation, Sort, conj, disj, implies, neg,
)
from ..poly import Polynomial, VarOrder
from ..realalg import AlgebraicNumber, Value, defining_index, isolate_roots, make_value, to_decimal
from ...utils.constants import APPROX_DIGITS

logger = logging.getLogger(__name__)

_NUMERAL = re.compile(r"^[0-9]+(\.[0-9]+)?$")

_RELATIONS = {r.value: r for r in Relation}

_SORTS = {s.value: s for s in Sort}

# root-of 值中定义多项式使用的变量名
ROOT_VAR = "x"


# ----------------------------------------------------------------------
# 脚本结构
# ----------------------------------------------------------------------

@dataclass
class Command:
    """脚本命令"""
    name: str                                  # check-sat / check-sat-assuming-model / ...
    model: Optional[Assignment] = None         # check-sat-assuming-model 的输入模型
    line: int = 0


@dataclass
class ProblemScript:
    """解析后的脚本"""
    order: VarOrder
    sorts: Dict[str, Sort] = field(default_factory=dict)
    assertions: List[Formula] = field(default_factory=list)
    a_part: List[Formula] = field(default_factory=list)
    b_part: List[Formula] = field(default_factory=list)
    commands: List[Command] = field(default_factory=list)

    @property
    def formula(self) -> Formula:
        """普通断言的合取"""
        return conj(*self.assertions)

    @property
    def a_formula(self) -> Formula:
        return conj(*self.a_part)

    @property
    def b_formula(self) -> Formula:
        return conj(*self.b_part)

    def has(self, name: str) -> bool:
        return any(c.name == name for c in self.commands)


# ----------------------------------------------------------------------
# 项
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class Arith:
    """算术项 poly / den（den > 0）"""
    poly: Polynomial
    den: int = 1

    @property
    def is_constant(self) -> bool:
        return self.poly.is_constant

    def value(self) -> Fraction:
        return Fraction(self.poly.const, self.den)


def _reduce(poly: Polynomial, den: int) -> Arith:
    g = math.gcd(poly.content(), den)
    if g > 1:
        poly = poly.map_ints(lambda c: c // g)
        den //= g
    return Arith(poly, den)


def _add(a: Arith, b: Arith) -> Arith:
    return _reduce(a.poly * b.den + b.poly * a.den, a.den * b.den)


def _negate(a: Arith) -> Arith:
    return Arith(-a.poly, a.den)


def _mul(a: Arith, b: Arith) -> Arith:
    return _reduce(a.poly * b.poly, a.den * b.den)


def _constant(order: VarOrder, v: Fraction) -> Arith:
    return Arith(order.constant(v.numerator), v.denominator)


Term = Union[Arith, Formula]


class TermParser:
    """
    项解析器

    Args:
        order: 实变量顺序
        sorts: 已声明变量的类型
        implicit: 为真时未声明的符号自动声明为实变量（多项式文件使用）
    """

    def __init__(self, order: VarOrder, sorts: Dict[str, Sort], implicit: bool = False):
        self.order = order
        self.sorts = sorts
        self.implicit = implicit
        self._env: List[Dict[str, Term]] = []

    def declare(self, sym: Symbol, sort: Sort) -> None:
        declared = self.sorts.get(sym.text)
        if declared is not None and declared is not sort:
            raise SortError(f"{sym.text} is already declared as {declared.value}", sym.line, sym.column)
        self.sorts[sym.text] = sort
        if sort is Sort.REAL:
            self.order.add(sym.text)

    # ------------------------------------------------------------------

    def formula(self, node: SExpr) -> Formula:
        t = self.term(node)
        if isinstance(t, Arith):
            raise SortError("expected a Bool term, got a Real term", node.line, node.column)
        return t

    def arith(self, node: SExpr) -> Arith:
        t = self.term(node)
        if not isinstance(t, Arith):
            raise SortError("expected a Real term, got a Bool term", node.line, node.column)
        return t

    def polynomial(self, node: SExpr) -> Polynomial:
        """算术项去分母后的整系数多项式"""
        return self.arith(node).poly

    def term(self, node: SExpr) -> Term:
        if isinstance(node, Symbol):
            return self._symbol(node)
        if not node.items:
            raise error_at(node, "empty term")
        head = node.head
        args = node.items[1:]
        if not head:
            raise error_at(node, "operator expected")
        if head == "let":
            return self._let(node)
        if head in ("+", "-", "*", "/"):
            return self._arith_op(node, head, args)
        if head in _RELATIONS:
            return self._relation(node, head, args)
        if head in ("and", "or", "not", "=>", "xor"):
            return self._bool_op(node, head, args)
        raise error_at(node, f"unknown operator '{head}'")

    def _symbol(self, sym: Symbol) -> Term:
        text = sym.text
        if _NUMERAL.match(text):
            return _constant(self.order, Fraction(text))
        if text == "true":
            return TRUE
        if text == "false":
            return FALSE
        for frame in reversed(self._env):
            if text in frame:
                return frame[text]
        sort = self.sorts.get(text)
        if sort is None:
            if not self.implicit:
                raise ParseError(f"undeclared symbol '{text}'", sym.line, sym.column)
            self.declare(sym, Sort.REAL)
            sort = Sort.REAL
        if sort is Sort.BOOL:
            return BoolVar(text)
        return Arith(self.order.var(text))

    def _let(self, node: SList) -> Term:
        if len(node) != 3 or not isinstance(node[1], SList):
            raise error_at(node, "let expects bindings and a body")
        frame: Dict[str, Term] = {}
        for binding in node[1].items:
            if not isinstance(binding, SList) or len(binding) != 2 or not isinstance(binding[0], Symbol):
                raise error_at(binding, "malformed let binding")
            frame[binding[0].text] = self.term(binding[1])
        self._env.append(frame)
        try:
            return self.term(node[2])
        finally:
            self._env.pop()

    def _arith_op(self, node: SList, head: str, args: List[SExpr]) -> Arith:
        if not args:
            raise error_at(node, f"'{head}' needs arguments")
        values = [self.arith(a) for a in args]
        if head == "+":
            out = values[0]
            for v in values[1:]:
                out = _add(out, v)
            return out
        if head == "-":
            if len(values) == 1:
                return _negate(values[0])
            out = values[0]
            for v in values[1:]:
                out = _add(out, _negate(v))
            return out
        if head == "*":
            out = values[0]
            for v in values[1:]:
                out = _mul(out, v)
            return out
        out = values[0]
        for arg, v in zip(args[1:], values[1:]):
            if not v.is_constant:
                raise error_at(arg, "division by a non-constant term")
            c = v.value()
            if c == 0:
                raise error_at(arg, "division by zero")
            out = _mul(out, _constant(self.order, 1 / c))
        return out

    def _relation(self, node: SList, head: str, args: List[SExpr]) -> Formula:
        if len(args) < 2:
            raise error_at(node, f"'{head}' needs at least two arguments")
        terms = [self.term(a) for a in args]
        if head == "=" and all(not isinstance(t, Arith) for t in terms):
            parts = [conj(implies(a, b), implies(b, a)) for a, b in zip(terms, terms[1:])]
            return conj(*parts)
        for arg, t in zip(args, terms):
            if not isinstance(t, Arith):
                raise SortError(f"'{head}' expects Real arguments", arg.line, arg.column)
        rel = _RELATIONS[head]
        parts = []
        for a, b in zip(terms, terms[1:]):
            diff = _add(a, _negate(b))
            parts.append(PolyConstraint.make(diff.poly, rel))
        return conj(*parts)

    def _bool_op(self, node: SList, head: str, args: List[SExpr]) -> Formula:
        parts = [self.formula(a) for a in args]
        if head == "not":
            if len(parts) != 1:
                raise error_at(node, "'not' takes one argument")
            return neg(parts[0])
        if head == "and":
            return conj(*parts)
        if head == "or":
            return disj(*parts)
        if len(parts) < 2:
            raise error_at(node, f"'{head}' needs at least two arguments")
        if head == "=>":
            out = parts[-1]
            for p in reversed(parts[:-1]):
                out = implies(p, out)
            return out
        out = parts[0]
        for p in parts[1:]:
            out = disj(conj(out, neg(p)), conj(neg(out), p))
        return out

    # ------------------------------------------------------------------

    def value(self, node: SExpr) -> Union[bool, Value]:
        """模型中的值：布尔常量、有理常量或 (root-of <多项式> k)"""
        if isinstance(node, Symbol) and node.text in ("true", "false"):
            return node.text == "true"
        if isinstance(node, SList) and node.head == "root-of":
            return _root_of(node)
        t = TermParser(VarOrder(), {}).term(node)
        if not isinstance(t, Arith) or not t.is_constant:
            raise error_at(node, "model values must be constants")
        return t.value()


def _root_of(node: SList) -> Value:
    if len(node) != 3 or not isinstance(node[2], Symbol) or not node[2].text.isdigit():
        raise error_at(node, "root-of expects a polynomial and a root index")
    order = VarOrder()
    p = TermParser(order, {}, implicit=True).polynomial(node[1])
    if len(order) != 1 or p.is_constant:
        raise error_at(node[1], "root-of needs a univariate polynomial")
    k = int(node[2].text)
    roots = isolate_roots(p.univariate_coeffs())
    if not 1 <= k <= len(roots):
        raise error_at(node[2], f"polynomial has {len(roots)} real roots, index {k} is out of range")
    return roots[k - 1]


# ----------------------------------------------------------------------
# 脚本
# ----------------------------------------------------------------------

class ScriptParser:
    """脚本解析器"""

    IGNORED = ("set-logic", "set-info", "set-option", "exit")

    def __init__(self, text: str):
        self.nodes = read_all(text)
        self.script = ProblemScript(VarOrder())
        self.terms = TermParser(self.script.order, self.script.sorts)

    def parse(self) -> ProblemScript:
        for node in self.nodes:
            if not isinstance(node, SList) or not node.head:
                raise error_at(node, "command expected")
            self._command(node)
        logger.debug("parsed script: %d assertions, %d commands",
                     len(self.script.assertions) + len(self.script.a_part) + len(self.script.b_part),
                     len(self.script.commands))
        return self.script

    def _command(self, node: SList) -> None:
        head = node.head
        args = node.items[1:]
        if head in self.IGNORED:
            return
        if head == "declare-const":
            if len(args) != 2:
                raise error_at(node, "declare-const takes a symbol and a sort")
            self._declare(node, args[0], args[1])
        elif head == "declare-fun":
            if len(args) != 3 or not isinstance(args[1], SList) or args[1].items:
                raise error_at(node, "only nullary declare-fun is supported")
            self._declare(node, args[0], args[2])
        elif head in ("assert", "assert-A", "assert-B"):
            if len(args) != 1:
                raise error_at(node, f"{head} takes one term")
            f = self.terms.formula(args[0])
            target = {"assert": self.script.assertions, "assert-A": self.script.a_part,
                      "assert-B": self.script.b_part}[head]
            target.append(f)
        elif head in ("check-sat", "get-model"):
            self.script.commands.append(Command(head, line=node.line))
        elif head == "compute-interpolant":
            if self.script.has(head):
                raise error_at(node, "at most one compute-interpolant per script")
            self.script.commands.append(Command(head, line=node.line))
        elif head == "check-sat-assuming-model":
            self.script.commands.append(Command(head, self._model(args), node.line))
        else:
            raise error_at(node, f"unknown command '{head}'")

    def _declare(self, node: SList, name: SExpr, sort: SExpr) -> None:
        if not isinstance(name, Symbol) or not isinstance(sort, Symbol):
            raise error_at(node, "malformed declaration")
        if sort.text not in _SORTS:
            raise SortError(f"unsupported sort '{sort.text}'", sort.line, sort.column)
        self.terms.declare(name, _SORTS[sort.text])

    def _model(self, pairs: List[SExpr]) -> Assignment:
        m = Assignment()
        for pair in pairs:
            if not isinstance(pair, SList) or len(pair) != 2 or not isinstance(pair[0], Symbol):
                raise error_at(pair, "expected (<symbol> <value>)")
            name = pair[0].text
            sort = self.script.sorts.get(name)
            if sort is None:
                raise ParseError(f"undeclared symbol '{name}'", pair.line, pair.column)
            v = self.terms.value(pair[1])
            if isinstance(v, bool) != (sort is Sort.BOOL):
                raise SortError(f"value for {name} does not match its sort", pair.line, pair.column)
            m[name] = v
        return m


def parse_script(text: str) -> ProblemScript:
    """
    解析问题脚本

    Raises:
        ParseError: 语法错误（带行列）
        SortError: 类型错误
    """
    return ScriptParser(text).parse()


def parse_polys(text: str) -> Tuple[VarOrder, List[Polynomial]]:
    """
    多项式文件：可选的实变量声明，其余每个顶层项是一个多项式；
    未声明的符号按首次出现顺序自动声明
    """
    order = VarOrder()
    terms = TermParser(order, {}, implicit=True)
    polys: List[Polynomial] = []
    for node in read_all(text):
        if isinstance(node, SList) and node.head == "declare-const":
            if len(node) != 3 or not isinstance(node[1], Symbol):
                raise error_at(node, "malformed declaration")
            if not isinstance(node[2], Symbol) or node[2].text != Sort.REAL.value:
                raise SortError("polynomial files only declare Real variables", node.line, node.column)
            terms.declare(node[1], Sort.REAL)
            continue
        polys.append(terms.polynomial(node))
    return order, polys


def parse_model(text: str, sorts: Optional[Mapping[str, Sort]] = None) -> Assignment:
    """
    解析命令行上的赋值：'x=1,y=-1/2,b=true' 或 '(x 1) (y (/ 1 2))'

    给出 sorts 时检查变量名与类型
    """
    pairs: List[Tuple[str, Union[bool, Value], int, int]] = []
    parser = TermParser(VarOrder(), {})
    if text.strip().startswith("("):
        for node in read_all(text):
            if not isinstance(node, SList) or len(node) != 2 or not isinstance(node[0], Symbol):
                raise error_at(node, "expected (<symbol> <value>)")
            pairs.append((node[0].text, parser.value(node[1]), node.line, node.column))
    else:
        for item in filter(None, (s.strip() for s in re.split(r"[,\s]+", text))):
            name, sep, raw = item.partition("=")
            if not sep or not name:
                raise ParseError(f"expected name=value, got '{item}'")
            pairs.append((name, _plain_value(raw), 0, 0))
    m = Assignment()
    for name, v, line, col in pairs:
        if sorts is not None:
            sort = sorts.get(name)
            if sort is None:
                raise ParseError(f"undeclared symbol '{name}'", line or None, col or None)
            if isinstance(v, bool) != (sort is Sort.BOOL):
                raise SortError(f"value for {name} does not match its sort", line or None, col or None)
        m[name] = v
    return m


def _plain_value(raw: str) -> Union[bool, Fraction]:
    if raw in ("true", "false"):
        return raw == "true"
    try:
        return Fraction(raw)
    except ValueError:
        raise ParseError(f"bad value '{raw}'") from None


# ----------------------------------------------------------------------
# 打印
# ----------------------------------------------------------------------

def _monomial_text(mono, c: int) -> str:
    factors = [name for name, e in mono for _ in range(e)]
    if not factors:
        return str(c)
    if c == 1 and len(factors) == 1:
        return factors[0]
    if c != 1:
        factors.insert(0, str(c))
    return "(* " + " ".join(factors) + ")"


def _sum_text(parts: List[str]) -> str:
    return parts[0] if len(parts) == 1 else "(+ " + " ".join(parts) + ")"


def print_poly(p: Polynomial) -> str:
    """多项式：正项在前，负项用 (- P n1 n2 ...) 表示"""
    terms = sorted(p.terms().items(), key=lambda t: (-sum(e for _, e in t[0]), t[0]))
    if not terms:
        return "0"
    pos = [_monomial_text(m, c) for m, c in terms if c > 0]
    negs = [_monomial_text(m, -c) for m, c in terms if c < 0]
    if not negs:
        return _sum_text(pos)
    if not pos:
        return f"(- {_sum_text(negs)})"
    return "(- " + " ".join([_sum_text(pos)] + negs) + ")"


def print_value(v: Union[bool, int, Fraction, AlgebraicNumber]) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    v = make_value(v)
    if isinstance(v, AlgebraicNumber):
        order = VarOrder([ROOT_VAR])
        p = Polynomial.from_univariate(list(v.poly), ROOT_VAR, order)
        return f"(root-of {print_poly(p)} {defining_index(v)})"
    body = str(abs(v.numerator)) if v.denominator == 1 else f"(/ {abs(v.numerator)} {v.denominator})"
    return f"(- {body})" if v < 0 else body


def _print_constraint(atom: PolyConstraint) -> str:
    const = atom.poly.terms().get((), 0)
    lhs = atom.poly - const
    return f"({atom.rel.value} {print_poly(lhs)} {print_value(Fraction(-const))})"


def print_term(t) -> str:
    """
    任意项的文本：多项式、值、原子、文字、子句、公式或赋值
    """
    if isinstance(t, Polynomial):
        return print_poly(t)
    if isinstance(t, (bool, int, Fraction, AlgebraicNumber)):
        return print_value(t)
    if isinstance(t, Assignment):
        return print_model(t)
    if isinstance(t, BoolVar):
        return t.name
    if isinstance(t, PolyConstraint):
        return _print_constraint(t)
    if isinstance(t, ExtendedConstraint):
        return f"({t.rel.value} {t.var} (root-of {print_poly(t.poly)} {t.k}))"
    if isinstance(t, Literal):
        return print_term(t.atom) if t.positive else f"(not {print_term(t.atom)})"
    if isinstance(t, Clause):
        return print_term(t.formula())
    if isinstance(t, Not):
        return f"(not {print_term(t.arg)})"
    if isinstance(t, And):
        if not t.args:
            return "true"
        return "(and " + " ".join(print_term(a) for a in t.args) + ")"
    if isinstance(t, Or):
        if not t.args:
            return "false"
        return "(or " + " ".join(print_term(a) for a in t.args) + ")"
    raise TypeError(f"cannot print {type(t).__name__}")


def print_model(m: Assignment, digits: int = APPROX_DIGITS) -> str:
    """SMT-LIB 风格的模型；代数数附带十进制近似注释"""
    lines = ["(model"]
    for name, v in m.items():
        sort = Sort.BOOL if isinstance(v, bool) else Sort.REAL
        line = f"  (define-fun {name} () {sort.value} {print_value(v)})"
        if isinstance(v, AlgebraicNumber):
            line += f" ; ~{to_decimal(v, digits)}"
        lines.append(line)
    lines.append(")")
    return "\n".join(lines)
