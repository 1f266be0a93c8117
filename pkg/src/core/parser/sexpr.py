"""
S 表达式读取器
带行列位置的记号与列表，供脚本和转移系统格式共用
"""

from dataclasses import dataclass, field
from typing import List, Union

from ..errors import ParseError


@dataclass(frozen=True)
class Symbol:
    """原子记号（符号、数字或关键字）"""
    text: str
    line: int = 0
    column: int = 0

    @property
    def is_keyword(self) -> bool:
        return self.text.startswith(":")

    def __str__(self) -> str:
        return self.text


@dataclass
class SList:
    """括号列表"""
    items: List["SExpr"] = field(default_factory=list)
    line: int = 0
    column: int = 0

    def __len__(self) -> int:
        return len(self.items)

    def __getitem__(self, i):
        return self.items[i]

    @property
    def head(self) -> str:
        """第一个元素是符号时返回其文本，否则返回空串"""
        if self.items and isinstance(self.items[0], Symbol):
            return self.items[0].text
        return ""

    def __str__(self) -> str:
        return "(" + " ".join(str(i) for i in self.items) + ")"


SExpr = Union[Symbol, SList]


def error_at(node: SExpr, message: str) -> ParseError:
    return ParseError(message, node.line, node.column)


def read_all(text: str) -> List[SExpr]:
    """
    读取文本中的全部顶层 S 表达式

    ';' 到行尾为注释；'|...|' 为带引号的符号

    Raises:
        ParseError: 括号不匹配或引号未闭合
    """
    out: List[SExpr] = []
    stack: List[SList] = []
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            i, line, col = i + 1, line + 1, 1
            continue
        if ch.isspace():
            i, col = i + 1, col + 1
            continue
        if ch == ";":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch == "(":
            stack.append(SList([], line, col))
            i, col = i + 1, col + 1
            continue
        if ch == ")":
            if not stack:
                raise ParseError("unexpected ')'", line, col)
            done = stack.pop()
            (stack[-1].items if stack else out).append(done)
            i, col = i + 1, col + 1
            continue
        start_line, start_col = line, col
        if ch == "|":
            end = text.find("|", i + 1)
            if end < 0:
                raise ParseError("unterminated quoted symbol", line, col)
            token = text[i + 1:end]
            line += token.count("\n")
            col = col + end + 1 - i if "\n" not in token else len(token) - token.rfind("\n")
            i = end + 1
        else:
            j = i
            while j < n and not text[j].isspace() and text[j] not in "();":
                j += 1
            token = text[i:j]
            col += j - i
            i = j
        (stack[-1].items if stack else out).append(Symbol(token, start_line, start_col))
    if stack:
        raise error_at(stack[-1], "unclosed '('")
    return out
