"""
NLItp 命令行应用
子命令: solve / interpolate / cell / generalize / mc / bench
"""

import argparse
import io
import logging
import os
import sys
import time
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, TextIO, Tuple

from ..core.cad import cell_basic, cell_extended
from ..core.errors import NLItpError, UsageError
from ..core.gen import generalize
from ..core.itp import eliminate_extended, interpolate, query_order
from ..core.mc import Verdict, check
from ..core.mcsat import Solver, SolverConfig
from ..core.model import Assignment, Formula, conj, reorder_formula
from ..core.parser import parse_model, parse_polys, parse_script, parse_system, print_model, print_term
from ..core.parser.script import Command, ProblemScript
from ..utils.constants import (
    DEFAULT_CONFLICT_LIMIT, DEFAULT_MAX_K, DEFAULT_TIMEOUT, SCRIPT_EXTENSION, SYSTEM_EXTENSION,
    Engine, ExitCode, Explain, Projection,
)
from ..utils.log import setup_logging
from ..utils.version import PROJECT_NAME, __version__

logger = logging.getLogger(__name__)

COMMANDS = ("solve", "interpolate", "cell", "generalize", "mc", "bench")


@dataclass
class RunConfig:
    """一次运行的全部选项"""
    command: str
    path: str = ""
    engine: str = Engine.ITP
    max_k: int = DEFAULT_MAX_K
    stats: bool = False
    seed: int = 0
    timeout: float = DEFAULT_TIMEOUT
    explain: str = Explain.EXTENDED
    projection: str = Projection.MCCALLUM
    conflict_limit: int = DEFAULT_CONFLICT_LIMIT
    point: str = ""                  # cell 的样本点
    model: str = ""                  # generalize 的模型
    keep: Tuple[str, ...] = ()       # generalize 保留的变量
    basic: bool = False              # cell 输出基本描述
    jobs: int = 1                    # bench 并行进程数
    output: str = ""                 # bench 的 CSV 输出路径
    log_level: Optional[str] = None
    log_file: str = ""               # 运行结束后导出调试日志

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise UsageError(f"unknown subcommand {self.command!r}")
        if self.timeout < 0:
            raise UsageError("timeout must be non-negative")
        if self.max_k < 0:
            raise UsageError("max-k must be non-negative")
        if self.jobs < 1:
            raise UsageError("jobs must be at least 1")

    def solver_config(self) -> SolverConfig:
        return SolverConfig(self.explain, self.projection, self.conflict_limit)


@dataclass
class RunReport:
    """运行结果：退出码、输出行、结论与统计"""
    code: int = ExitCode.OK
    lines: List[str] = field(default_factory=list)
    verdict: str = ""
    stats: Dict[str, object] = field(default_factory=dict)

    def add_stats(self, counters: Dict[str, int]) -> None:
        for k, v in counters.items():
            if isinstance(v, int):
                self.stats[k] = self.stats.get(k, 0) + v

    @property
    def text(self) -> str:
        return "\n".join(self.lines)


class NLItpApp:
    """命令行应用"""

    def __init__(self, out: Optional[TextIO] = None, err: Optional[TextIO] = None):
        self.out = out or sys.stdout
        self.err = err or sys.stderr

    def run(self, config: RunConfig) -> int:
        """执行并打印结果，返回退出码；库异常与文件错误转换为退出码 2"""
        try:
            report = self.execute(config)
        except (NLItpError, OSError) as exc:
            print(f"error: {exc}", file=self.err)
            return ExitCode.USAGE
        for line in report.lines:
            print(line, file=self.out)
        if config.stats:
            body = " ".join(f"{k}={v}" for k, v in report.stats.items())
            print(f"; stats {body}", file=self.out)
        return report.code

    def execute(self, config: RunConfig) -> RunReport:
        """执行子命令，不打印"""
        handler = {
            "solve": self._solve,
            "interpolate": self._interpolate,
            "cell": self._cell,
            "generalize": self._generalize,
            "mc": self._mc,
            "bench": self._bench,
        }[config.command]
        start = time.perf_counter()
        report = handler(config)
        report.stats["seconds"] = round(time.perf_counter() - start, 3)
        return report

    @staticmethod
    def _read(path: str) -> str:
        if not path:
            raise UsageError("an input file is required")
        with open(path, "r", encoding="utf-8") as f:
            return f.read()

    # ------------------------------------------------------------------
    # solve / interpolate
    # ------------------------------------------------------------------

    def _solve(self, config: RunConfig) -> RunReport:
        script = parse_script(self._read(config.path))
        report = RunReport()
        commands = script.commands or [Command("check-sat")]
        last_model: Optional[Assignment] = None
        formula = conj(script.formula, script.a_formula, script.b_formula)
        for command in commands:
            if command.name == "check-sat":
                last_model = self._check(formula, Assignment(), config, report)
            elif command.name == "check-sat-assuming-model":
                last_model = self._check(formula, command.model, config, report)
            elif command.name == "get-model":
                if last_model is None:
                    report.lines.append('(error "no model available")')
                else:
                    report.lines.append(print_model(last_model))
            elif command.name == "compute-interpolant":
                self._run_interpolation(script, config, report)
        return report

    def _check(self, formula: Formula, m0: Assignment, config: RunConfig,
               report: RunReport) -> Optional[Assignment]:
        order, sorts = query_order([formula], set(m0.keys()))
        solver = Solver(order, sorts, config.solver_config())
        solver.assert_formula(reorder_formula(formula, order))
        result = solver.check_modulo(m0)
        report.add_stats(solver.stats.as_dict())
        report.verdict = result.status.value
        report.lines.append(result.status.value)
        if result.is_unsat and len(m0):
            clause = eliminate_extended(result.interpolant, m0, config.projection)
            report.lines.append(print_term(clause))
        return result.model if result.is_sat else None

    def _interpolate(self, config: RunConfig) -> RunReport:
        script = parse_script(self._read(config.path))
        report = RunReport()
        self._run_interpolation(script, config, report)
        return report

    def _run_interpolation(self, script: ProblemScript, config: RunConfig, report: RunReport) -> None:
        if not script.a_part and not script.b_part:
            raise UsageError("compute-interpolant needs assert-A / assert-B parts")
        a = conj(script.formula, script.a_formula)
        result = interpolate(a, script.b_formula, config.solver_config())
        report.add_stats(result.stats)
        report.verdict = result.status.value
        report.lines.append(result.status.value)
        if result.is_unsat:
            report.lines.append(print_term(result.interpolant))
        elif result.is_sat:
            report.lines.append(print_model(result.model))
            report.code = ExitCode.FAILURE

    # ------------------------------------------------------------------
    # cell / generalize
    # ------------------------------------------------------------------

    def _cell(self, config: RunConfig) -> RunReport:
        order, polys = parse_polys(self._read(config.path))
        point = parse_model(config.point)
        build = cell_basic if config.basic else cell_extended
        cell = build(polys, point, operator=config.projection)
        report = RunReport(verdict="cell")
        report.lines.append("(cell")
        for x in order.names:
            if x in cell.levels:
                atoms = " ".join(print_term(a) for a in cell.level(x)) or "true"
                report.lines.append(f"  ({x} {atoms})")
        report.lines.append(")")
        return report

    def _generalize(self, config: RunConfig) -> RunReport:
        script = parse_script(self._read(config.path))
        formula = conj(script.formula, script.a_formula, script.b_formula)
        m = parse_model(config.model, script.sorts)
        keep = set(config.keep)
        unknown = keep - set(script.sorts)
        if unknown:
            raise UsageError(f"unknown variables to keep: {', '.join(sorted(unknown))}")
        order, _ = query_order([formula], keep)
        g = generalize(reorder_formula(formula, order), m, keep, config.projection)
        return RunReport(lines=[print_term(g)], verdict="generalized")

    # ------------------------------------------------------------------
    # mc / bench
    # ------------------------------------------------------------------

    def _mc(self, config: RunConfig) -> RunReport:
        name = os.path.splitext(os.path.basename(config.path))[0]
        system = parse_system(self._read(config.path), name)
        result = check(system, config.engine, config.max_k, config.solver_config())
        report = RunReport(verdict=result.verdict.value)
        report.add_stats(result.stats.as_dict())
        report.lines.append(result.verdict.value)
        if result.verdict is Verdict.INVALID:
            report.code = ExitCode.FAILURE
            for j, state in enumerate(result.trace.states):
                values = " ".join(f"({n} {print_term(v)})" for n, v in state.items())
                report.lines.append(f"(step {j} {values})")
        elif result.verdict is Verdict.VALID and result.invariant is not None:
            term = print_term(result.invariant)
            if result.depth > 1:
                report.lines.append(f"(invariant {term} :depth {result.depth})")
            else:
                report.lines.append(f"(invariant {term})")
        return report

    def _bench(self, config: RunConfig) -> RunReport:
        from .bench import run_bench, write_csv
        if not os.path.isdir(config.path):
            raise UsageError(f"{config.path} is not a directory")
        rows = run_bench(config.path, config)
        report = RunReport(verdict="bench")
        if config.output:
            with open(config.output, "w", encoding="utf-8", newline="") as f:
                write_csv(rows, f)
            report.lines.append(f"; wrote {len(rows)} rows to {config.output}")
        else:
            buffer = io.StringIO()
            write_csv(rows, buffer)
            report.lines.extend(buffer.getvalue().splitlines())
        return report


# ----------------------------------------------------------------------
# 参数
# ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=PROJECT_NAME.lower(),
        description="Nonlinear real arithmetic: MCSAT solving, interpolation and model checking",
    )
    parser.add_argument("--version", action="version", version=f"{PROJECT_NAME} {__version__}")
    parser.add_argument("--log-level", default=None, help="DEBUG / INFO / WARNING")
    parser.add_argument("--log-file", default="", help="export the debug log to this file")
    sub = parser.add_subparsers(dest="command", required=True)

    def solver_flags(p: argparse.ArgumentParser) -> None:
        p.add_argument("--stats", action="store_true", help="append counters")
        p.add_argument("--explain", choices=(Explain.EXTENDED, Explain.BASIC), default=Explain.EXTENDED)
        p.add_argument("--projection", choices=(Projection.MCCALLUM, Projection.COLLINS),
                       default=Projection.MCCALLUM)
        p.add_argument("--conflict-limit", type=int, default=DEFAULT_CONFLICT_LIMIT)

    p = sub.add_parser("solve", help=f"run a {SCRIPT_EXTENSION} script")
    p.add_argument("path")
    solver_flags(p)

    p = sub.add_parser("interpolate", help="interpolate the assert-A / assert-B parts of a script")
    p.add_argument("path")
    solver_flags(p)

    p = sub.add_parser("cell", help="single CAD cell around a point")
    p.add_argument("--polys", dest="path", required=True)
    p.add_argument("--point", required=True, help="e.g. x=0,y=3")
    p.add_argument("--basic", action="store_true", help="basic constraints instead of root bounds")
    solver_flags(p)

    p = sub.add_parser("generalize", help="generalize a model of a formula")
    p.add_argument("--formula", dest="path", required=True)
    p.add_argument("--model", required=True, help="e.g. x=1,y=2")
    p.add_argument("--keep", required=True, help="comma separated variables")
    solver_flags(p)

    p = sub.add_parser("mc", help=f"model check a {SYSTEM_EXTENSION} system")
    p.add_argument("path")
    p.add_argument("--engine", choices=Engine.ALL, default=Engine.ITP)
    p.add_argument("--max-k", type=int, default=DEFAULT_MAX_K)
    solver_flags(p)

    p = sub.add_parser("bench", help="run every input of a directory and write CSV")
    p.add_argument("path")
    p.add_argument("--engine", choices=Engine.ALL, default=Engine.ITP)
    p.add_argument("--max-k", type=int, default=DEFAULT_MAX_K)
    p.add_argument("--timeout", type=float, default=DEFAULT_TIMEOUT)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--output", default="")
    p.add_argument("--seed", type=int, default=0)
    solver_flags(p)
    return parser


def parse_args(argv: Optional[List[str]] = None) -> RunConfig:
    """命令行参数转为 RunConfig"""
    ns = build_parser().parse_args(argv)
    values = vars(ns)
    keep = tuple(k.strip() for k in values.pop("keep", "").split(",") if k.strip())
    config = RunConfig(
        command=values.pop("command"),
        path=values.pop("path", ""),
        keep=keep,
        **{k: v for k, v in values.items() if v is not None or k == "log_level"},
    )
    return config


def main(argv: Optional[List[str]] = None) -> int:
    """命令行入口"""
    try:
        config = parse_args(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return ExitCode.USAGE
    except SystemExit as exc:
        return ExitCode.OK if exc.code == 0 else ExitCode.USAGE
    buffer = setup_logging(config.log_level, keep=bool(config.log_file))
    logger.debug("run %s", config)
    code = NLItpApp().run(config)
    if buffer is not None and not buffer.export(config.log_file):
        print(f"error: cannot write {config.log_file}", file=sys.stderr)
    return code


def with_command(config: RunConfig, command: str, path: str) -> RunConfig:
    """同一组选项换一个子命令与输入（bench 使用）"""
    return replace(config, command=command, path=path)
