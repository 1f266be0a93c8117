"""
转移系统格式解析
(define-system :state ((s Real) ...) [:input ((x Real) ...)] :init t :trans t :prop t)
"""

import logging
from typing import Dict, List

from .sexpr import SExpr, SList, Symbol, error_at, read_all
from .script import TermParser
from ..errors import ParseError, SortError
from ..mc import TransitionSystem, primed
from ..model import Sort, Var, formula_vars
from ..poly import VarOrder
from ...utils.constants import PRIME_SUFFIX

logger = logging.getLogger(__name__)

_KEYWORDS = (":state", ":input", ":init", ":trans", ":prop")


def _var_list(node: SExpr) -> List[Var]:
    if not isinstance(node, SList):
        raise error_at(node, "expected a list of (<symbol> <sort>) pairs")
    out: List[Var] = []
    for pair in node.items:
        if not isinstance(pair, SList) or len(pair) != 2 or \
                not isinstance(pair[0], Symbol) or not isinstance(pair[1], Symbol):
            raise error_at(pair, "expected (<symbol> <sort>)")
        name, sort = pair[0], pair[1]
        if name.text.endswith(PRIME_SUFFIX):
            raise error_at(name, f"variable names cannot end with {PRIME_SUFFIX!r}")
        if sort.text not in (s.value for s in Sort):
            raise SortError(f"unsupported sort '{sort.text}'", sort.line, sort.column)
        if any(v.name == name.text for v in out):
            raise error_at(name, f"duplicate variable '{name.text}'")
        out.append(Var(name.text, Sort(sort.text)))
    return out


def _sections(node: SList) -> Dict[str, SExpr]:
    sections: Dict[str, SExpr] = {}
    items = node.items[1:]
    if len(items) % 2:
        raise error_at(node, "define-system expects keyword/value pairs")
    for key, value in zip(items[::2], items[1::2]):
        if not isinstance(key, Symbol) or key.text not in _KEYWORDS:
            raise error_at(key, f"unknown section '{key}'")
        if key.text in sections:
            raise error_at(key, f"duplicate section '{key.text}'")
        sections[key.text] = value
    for required in (":state", ":init", ":trans", ":prop"):
        if required not in sections:
            raise error_at(node, f"missing section '{required}'")
    return sections


def _check_unprimed(node: SExpr, what: str) -> None:
    """init / prop 中只能出现状态变量"""
    if isinstance(node, Symbol):
        if node.text.endswith(PRIME_SUFFIX):
            raise error_at(node, f"primed variable '{node.text}' in {what}")
        return
    for item in node.items:
        _check_unprimed(item, what)


def _check_primes(node: SExpr, state: Dict[str, Sort]) -> None:
    """trans 中带撇的符号必须对应状态变量"""
    if isinstance(node, Symbol):
        text = node.text
        if text.endswith(PRIME_SUFFIX) and text[:-len(PRIME_SUFFIX)] not in state:
            raise error_at(node, f"'{text}' does not prime a state variable")
        return
    for item in node.items:
        _check_primes(item, state)


def parse_system(text: str, name: str = "") -> TransitionSystem:
    """
    解析转移系统

    变量顺序为状态变量、后继变量、输入变量

    Raises:
        ParseError: 语法错误、带撇符号不对应状态变量、init / prop 中出现后继或输入变量
    """
    nodes = read_all(text)
    systems = [n for n in nodes if isinstance(n, SList) and n.head == "define-system"]
    if len(nodes) != 1 or len(systems) != 1:
        where = nodes[0] if nodes else None
        raise ParseError("expected exactly one define-system form",
                         where.line if where else None, where.column if where else None)
    node = systems[0]
    sections = _sections(node)
    state = _var_list(sections[":state"])
    inputs = _var_list(sections[":input"]) if ":input" in sections else []
    clash = {v.name for v in state} & {v.name for v in inputs}
    if clash:
        raise error_at(sections[":input"], f"inputs clash with state variables: {', '.join(sorted(clash))}")

    order = VarOrder()
    state_sorts: Dict[str, Sort] = {}
    for v in state:
        state_sorts[v.name] = v.sort
        if v.sort is Sort.REAL:
            order.add(v.name)
    all_sorts = dict(state_sorts)
    for v in state:
        all_sorts[primed(v.name)] = v.sort
        if v.sort is Sort.REAL:
            order.add(primed(v.name))
    for v in inputs:
        all_sorts[v.name] = v.sort
        if v.sort is Sort.REAL:
            order.add(v.name)

    current = TermParser(order, dict(state_sorts))
    full = TermParser(order, all_sorts)
    for key in (":init", ":prop"):
        _check_unprimed(sections[key], key[1:])
    _check_primes(sections[":trans"], state_sorts)
    init = current.formula(sections[":init"])
    prop = current.formula(sections[":prop"])
    trans = full.formula(sections[":trans"])
    system = TransitionSystem(order, state, inputs, init, trans, prop, name)
    logger.debug("parsed system %s: %d state, %d input variables, trans over %s",
                 name or "(unnamed)", len(state), len(inputs), sorted(formula_vars(trans)))
    return system
