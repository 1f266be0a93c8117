"""
异常定义
所有库代码抛出的异常都继承自 NLItpError，由 CLI 统一转换为退出码
"""

from typing import Optional


class NLItpError(Exception):
    """基础异常"""


class PolynomialError(NLItpError):
    """多项式运算错误（次数退化、整除失败等）"""


class AlgebraicError(NLItpError):
    """实代数数相关错误"""


class EvaluationError(NLItpError):
    """求值错误（赋值不完整、类型不一致）"""


class SolverError(NLItpError):
    """求解器前置条件不满足"""


class InterpolationError(NLItpError):
    """插值过程错误"""


class ParseError(NLItpError):
    """语法错误，带行列信息"""

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        self.message = message
        self.line = line
        self.column = column
        if line is not None:
            message = f"{line}:{column}: {message}"
        super().__init__(message)


class SortError(ParseError):
    """类型（sort）错误"""


class UsageError(NLItpError):
    """命令行参数错误"""
