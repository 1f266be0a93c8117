"""
模型泛化
蕴含项提取，以及把蕴含项的 CAD 胞腔投影到保留变量上
"""

import logging
from typing import Iterable, List, Mapping, Set

from .cad import cell_basic
from .errors import EvaluationError, SolverError
from .model import (
    ATOM_TYPES, TRUE, And, BoolVar, Formula, Literal, Not, atom_vars, conj,
    evaluate, nnf,
)
from ..utils.constants import Projection

logger = logging.getLogger(__name__)


def implicant(f: Formula, m: Mapping[str, object]) -> List[Literal]:
    """
    公式在模型下的蕴含项

    自顶向下遍历 NNF：合取取全部子公式，析取取第一个为真的子公式

    Raises:
        EvaluationError: 公式在 m 下不为真
    """
    if evaluate(f, m) is not True:
        raise EvaluationError("formula is not true in the model")
    out: List[Literal] = []

    def walk(g: Formula) -> None:
        if isinstance(g, ATOM_TYPES):
            lit = Literal(g, True)
        elif isinstance(g, Not):
            lit = Literal(g.arg, False)
        elif isinstance(g, And):
            for a in g.args:
                walk(a)
            return
        else:
            for a in g.args:
                if evaluate(a, m) is True:
                    walk(a)
                    return
            raise EvaluationError("disjunction has no true child")
        if lit not in out:
            out.append(lit)

    walk(nnf(f))
    return out


def generalize(f: Formula, m: Mapping[str, object], keep: Iterable[str],
               operator: str = Projection.MCCALLUM) -> Formula:
    """
    把模型 m 泛化为只含 keep 变量的公式 G

    G 在 m 下为真，且 G 的每个解都能扩展为 f 的解

    Args:
        f: 公式，在 m 下为真
        m: 模型，需覆盖 f 的全部变量
        keep: 保留的变量，在多项式的变量顺序中必须排在最低

    Raises:
        EvaluationError: f 在 m 下不为真
        SolverError: 保留变量没有排在最低
    """
    keep_set: Set[str] = set(keep)
    lits = implicant(f, m)
    polys = []
    for lit in lits:
        if isinstance(lit.atom, BoolVar):
            continue
        if lit.atom.poly not in polys:
            polys.append(lit.atom.poly)
    parts: List[Formula] = []
    if polys:
        order = polys[0].order
        used: Set[str] = set()
        for lit in lits:
            if not isinstance(lit.atom, BoolVar):
                used |= atom_vars(lit.atom)
        kept_levels = [order.level(n) for n in used if n in keep_set]
        dropped_levels = [order.level(n) for n in used if n not in keep_set]
        if kept_levels and dropped_levels and max(kept_levels) > min(dropped_levels):
            raise SolverError("kept variables must come first in the variable order")
        cell = cell_basic(polys, m, operator=operator)
        for x, atoms in cell.levels.items():
            if x in keep_set:
                parts.extend(atoms)
    for lit in lits:
        if isinstance(lit.atom, BoolVar) and lit.atom.name in keep_set:
            parts.append(lit.formula())
    g = conj(*parts) if parts else TRUE
    if evaluate(g, m) is not True:
        raise EvaluationError("generalization is not true in the model")
    logger.debug("generalized over %s: %s", ", ".join(sorted(keep_set)), g)
    return g
