"""
NLItp 常量定义
"""

import os

# 输入文件扩展名
SCRIPT_EXTENSION = ".nlsmt"
SYSTEM_EXTENSION = ".nlts"

# 环境变量
ENV_TIMEOUT = "NLITP_TIMEOUT"
ENV_LOG_LEVEL = "NLITP_LOG_LEVEL"

# bench 默认单文件超时（秒）
DEFAULT_TIMEOUT = float(os.environ.get(ENV_TIMEOUT, "60"))

# 模型检查默认界
DEFAULT_MAX_K = 10


# 退出码
class ExitCode:
    OK = 0            # sat / unsat / valid / unknown
    FAILURE = 1       # invalid，或插值问题可满足
    USAGE = 2         # 参数、文件或语法错误


# 模型检查引擎
class Engine:
    BMC = "bmc"
    KIND = "kind"
    ITP = "itp"

    ALL = (BMC, KIND, ITP)


# CAD 投影算子
class Projection:
    MCCALLUM = "mccallum"
    COLLINS = "collins"


# 冲突解释使用的胞腔描述
class Explain:
    EXTENDED = "extended"
    BASIC = "basic"


# Tseitin 变换引入的新布尔变量前缀（不会出现在输出模型中）
FRESH_PREFIX = "__n"

# 展开变量副本的分隔符: s@3 表示第 3 步的 s
STEP_SEPARATOR = "@"

# 代数数打印时十进制近似的位数
APPROX_DIGITS = 6

# 区间符号判定的细化次数（之后转为精确判定）
INTERVAL_REFINE_ROUNDS = 8

# 插值主循环迭代上限（有限收敛的监测）
MAX_INTERPOLATION_ROUNDS = 10000

# 胞腔采样某层为空时从头重采的次数
SAMPLE_ATTEMPTS = 20

# 单次 check 的冲突上限（0 表示不限）
DEFAULT_CONFLICT_LIMIT = 0

# bench 输出的 CSV 列
BENCH_COLUMNS = (
    "file", "kind", "verdict", "seconds",
    "conflicts", "decisions", "interpolant_clauses",
)

# 转移关系中后继状态变量的后缀: s' 表示下一步的 s
PRIME_SUFFIX = "'"

# 可达性迭代中每个界的扩张轮数上限
MAX_REACH_ROUNDS = 100
