"""
批量运行
目录下每个输入文件在独立进程中运行，超时则终止，结果写为 CSV
"""

import csv
import logging
import os
import queue
import time
from dataclasses import asdict, dataclass
from multiprocessing import Process, Queue
from typing import Dict, List, TextIO, Tuple

from ..core.errors import NLItpError
from ..core.parser import parse_script
from ..utils.constants import BENCH_COLUMNS, SCRIPT_EXTENSION, SYSTEM_EXTENSION

logger = logging.getLogger(__name__)

# 轮询子进程的间隔（秒）
POLL_INTERVAL = 0.01


@dataclass
class BenchRow:
    """CSV 中的一行"""
    file: str
    kind: str                        # solve / interpolate / mc
    verdict: str                     # sat / unsat / valid / invalid / unknown / timeout / error
    seconds: float = 0.0
    conflicts: int = 0
    decisions: int = 0
    interpolant_clauses: int = 0


def input_files(directory: str) -> List[str]:
    """目录下的输入文件，按文件名排序"""
    names = sorted(os.listdir(directory))
    return [os.path.join(directory, n) for n in names
            if n.endswith(SCRIPT_EXTENSION) or n.endswith(SYSTEM_EXTENSION)]


def kind_of(path: str) -> str:
    if path.endswith(SYSTEM_EXTENSION):
        return "mc"
    with open(path, "r", encoding="utf-8") as f:
        script = parse_script(f.read())
    if script.a_part or script.b_part:
        return "interpolate"
    return "solve"


def bench_file(path: str, config) -> BenchRow:
    """在当前进程中运行一个文件"""
    from .app import NLItpApp, with_command

    name = os.path.basename(path)
    start = time.perf_counter()
    try:
        kind = kind_of(path)
        report = NLItpApp().execute(with_command(config, kind, path))
    except (NLItpError, OSError) as exc:
        logger.warning("%s: %s", name, exc)
        return BenchRow(name, "", "error", round(time.perf_counter() - start, 3))
    stats = report.stats
    return BenchRow(
        file=name,
        kind=kind,
        verdict=report.verdict,
        seconds=round(time.perf_counter() - start, 3),
        conflicts=int(stats.get("conflicts", 0)),
        decisions=int(stats.get("decisions", 0)),
        interpolant_clauses=int(stats.get("interpolant_clauses", 0)),
    )


def _worker(index: int, path: str, config, results: Queue) -> None:
    results.put((index, asdict(bench_file(path, config))))


def run_bench(directory: str, config) -> List[BenchRow]:
    """
    运行目录下全部输入

    最多同时运行 config.jobs 个进程；超过 config.timeout 秒（0 表示不限）的进程被终止，
    该行结论为 timeout
    """
    files = input_files(directory)
    rows: Dict[int, BenchRow] = {}
    results: Queue = Queue()
    pending = list(enumerate(files))
    running: List[Tuple[int, Process, float]] = []

    def drain(wait: float = 0.0) -> None:
        while True:
            try:
                index, row = results.get(timeout=wait) if wait else results.get_nowait()
            except queue.Empty:
                return
            rows[index] = BenchRow(**row)

    while pending or running:
        while pending and len(running) < config.jobs:
            index, path = pending.pop(0)
            proc = Process(target=_worker, args=(index, path, config, results))
            proc.start()
            running.append((index, proc, time.perf_counter()))
            logger.info("started %s", os.path.basename(path))
        time.sleep(POLL_INTERVAL)
        drain()
        still: List[Tuple[int, Process, float]] = []
        for index, proc, started in running:
            elapsed = time.perf_counter() - started
            if proc.is_alive() and config.timeout and elapsed > config.timeout:
                proc.terminate()
                proc.join()
                rows.setdefault(index, BenchRow(os.path.basename(files[index]), "", "timeout",
                                                round(elapsed, 3)))
                logger.info("timeout %s", os.path.basename(files[index]))
            elif proc.is_alive():
                still.append((index, proc, started))
            else:
                proc.join()
                if index not in rows:
                    drain(POLL_INTERVAL)
                if index not in rows:
                    logger.warning("%s: worker exited with code %s and no result",
                                   os.path.basename(files[index]), proc.exitcode)
                rows.setdefault(index, BenchRow(os.path.basename(files[index]), "", "error",
                                                round(elapsed, 3)))
        running = still
    drain()
    return [rows[i] for i in sorted(rows)]


def write_csv(rows: List[BenchRow], out: TextIO) -> None:
    writer = csv.writer(out)
    writer.writerow(BENCH_COLUMNS)
    for row in rows:
        data = asdict(row)
        writer.writerow([data[c] for c in BENCH_COLUMNS])
