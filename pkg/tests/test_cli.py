"""命令行：子命令输出与退出码"""

import csv
import io
import shutil

import pytest

from src.cli import NLItpApp, RunConfig, main, parse_args
from src.cli import bench
from src.cli.bench import BenchRow, input_files, kind_of, run_bench, write_csv
from src.core.errors import UsageError
from src.utils.constants import BENCH_COLUMNS, Engine, ExitCode, Explain
from .conftest import sample_path


def run(**options):
    """运行一次，返回 (退出码, 标准输出行, 标准错误)"""
    out, err = io.StringIO(), io.StringIO()
    code = NLItpApp(out, err).run(RunConfig(**options))
    return code, out.getvalue().splitlines(), err.getvalue()


class TestSolve:
    def test_unsat_under_model_prints_explanation(self):
        code, lines, _ = run(command="solve", path=sample_path("disk_guard.nlsmt"))
        assert code == ExitCode.OK
        assert lines == ["unsat", "(or (not (> (* x x) 2)) (not (> x 0)))"]

    @pytest.mark.parametrize("explain", [Explain.EXTENDED, Explain.BASIC])
    def test_algebraic_model(self, explain):
        code, lines, _ = run(command="solve", path=sample_path("sqrt2.nlsmt"), explain=explain)
        assert code == ExitCode.OK
        assert lines == [
            "sat",
            "(model",
            "  (define-fun x () Real (root-of (- (* x x) 2) 2)) ; ~1.414214",
            ")",
        ]

    def test_model_without_check(self, tmp_path):
        path = tmp_path / "m.nlsmt"
        path.write_text("(declare-const x Real)(assert (< x 0))(get-model)(check-sat)")
        code, lines, _ = run(command="solve", path=str(path))
        assert lines[0] == '(error "no model available")'
        assert lines[1] == "sat"

    def test_script_without_commands_is_checked(self, tmp_path):
        path = tmp_path / "q.nlsmt"
        path.write_text("(declare-const x Real)(assert (< (* x x) 0))")
        code, lines, _ = run(command="solve", path=str(path))
        assert (code, lines) == (ExitCode.OK, ["unsat"])

    def test_stats_line(self):
        code, lines, _ = run(command="solve", path=sample_path("sqrt2.nlsmt"), stats=True)
        assert lines[-1].startswith("; stats ")
        assert "conflicts=" in lines[-1]
        assert "seconds=" in lines[-1]

    def test_missing_file(self, tmp_path):
        code, lines, err = run(command="solve", path=str(tmp_path / "none.nlsmt"))
        assert code == ExitCode.USAGE
        assert lines == []
        assert err.startswith("error: ")

    def test_syntax_error_reports_position(self, tmp_path):
        path = tmp_path / "bad.nlsmt"
        path.write_text("(declare-const x Real)\n(assert (< x y))\n")
        code, _, err = run(command="solve", path=str(path))
        assert code == ExitCode.USAGE
        assert "2:" in err and "undeclared symbol 'y'" in err


class TestInterpolate:
    def test_disjoint_parts(self):
        code, lines, _ = run(command="interpolate", path=sample_path("disk_line.nlsmt"))
        assert code == ExitCode.OK
        assert lines[0] == "unsat"
        assert len(lines) == 2
        assert "y" not in lines[1] and "z" not in lines[1]

    def test_overlapping_parts(self):
        code, lines, _ = run(command="interpolate", path=sample_path("overlap.nlsmt"))
        assert code == ExitCode.FAILURE
        assert lines[0] == "sat"
        assert lines[1] == "(model"

    def test_solve_runs_compute_interpolant(self):
        code, lines, _ = run(command="solve", path=sample_path("disk_line.nlsmt"))
        assert lines[0] == "unsat"

    def test_needs_parts(self):
        code, _, err = run(command="interpolate", path=sample_path("sqrt2.nlsmt"))
        assert code == ExitCode.USAGE
        assert "assert-A" in err


class TestCellAndGeneralize:
    def test_extended_cell(self):
        code, lines, _ = run(command="cell", path=sample_path("circle.polys"), point="x=0,y=0")
        assert code == ExitCode.OK
        assert lines[0] == "(cell"
        assert lines[1].startswith("  (x ") and "root-of" in lines[1]
        assert lines[2].startswith("  (y ") and "root-of" in lines[2]
        assert lines[-1] == ")"

    def test_basic_cell(self):
        code, lines, _ = run(command="cell", path=sample_path("circle.polys"),
                             point="x=1,y=2", basic=True)
        assert code == ExitCode.OK
        assert "root-of" not in "\n".join(lines)
        assert lines[1].startswith("  (x ")

    def test_generalize_drops_other_variables(self, tmp_path):
        path = tmp_path / "g.nlsmt"
        path.write_text("(declare-const x Real)(declare-const y Real)"
                        "(assert (< (+ (* x x) (* y y)) 1))")
        code, lines, _ = run(command="generalize", path=str(path), model="x=0,y=0", keep=("x",))
        assert code == ExitCode.OK
        assert len(lines) == 1
        assert "y" not in lines[0]

    def test_generalize_unknown_variable(self, tmp_path):
        path = tmp_path / "g.nlsmt"
        path.write_text("(declare-const x Real)(assert (> x 0))")
        code, _, err = run(command="generalize", path=str(path), model="x=1", keep=("w",))
        assert code == ExitCode.USAGE
        assert "w" in err


class TestModelChecking:
    def test_counterexample(self):
        code, lines, _ = run(command="mc", path=sample_path("counter.nlts"), engine=Engine.BMC)
        assert code == ExitCode.FAILURE
        assert lines == ["invalid", "(step 0 (x 0))", "(step 1 (x 1))", "(step 2 (x 2))"]

    def test_kinduction_prints_invariant(self):
        code, lines, _ = run(command="mc", path=sample_path("square_growth.nlts"), engine=Engine.KIND)
        assert code == ExitCode.OK
        assert lines[0] == "valid"
        assert lines[1].startswith("(invariant ")

    def test_kinduction_reports_invariant_depth(self):
        code, lines, _ = run(command="mc", path=sample_path("swap.nlts"), engine=Engine.KIND, max_k=3)
        assert code == ExitCode.OK
        assert lines[0] == "valid"
        assert lines[1] == "(invariant (>= x 0) :depth 2)"

    def test_bmc_alone_is_inconclusive(self):
        code, lines, _ = run(command="mc", path=sample_path("rotation.nlts"),
                             engine=Engine.BMC, max_k=2)
        assert (code, lines) == (ExitCode.OK, ["unknown"])


class TestArguments:
    def test_parse_generalize(self):
        config = parse_args(["generalize", "--formula", "f.nlsmt", "--model", "x=1",
                             "--keep", "x, b", "--projection", "collins"])
        assert config.command == "generalize"
        assert config.path == "f.nlsmt"
        assert config.keep == ("x", "b")
        assert config.solver_config().projection == "collins"

    def test_parse_mc(self):
        config = parse_args(["--log-level", "debug", "mc", "s.nlts", "--engine", "kind", "--max-k", "3"])
        assert (config.engine, config.max_k, config.log_level) == ("kind", 3, "debug")

    @pytest.mark.parametrize("options", [
        {"command": "prove"},
        {"command": "bench", "timeout": -1},
        {"command": "mc", "max_k": -2},
        {"command": "bench", "jobs": 0},
    ])
    def test_bad_config(self, options):
        with pytest.raises(UsageError):
            RunConfig(**options)

    @pytest.mark.parametrize("argv", [
        [],
        ["solve"],
        ["mc", "s.nlts", "--engine", "pdr"],
        ["mc", "s.nlts", "--max-k", "-1"],
    ])
    def test_usage_errors(self, argv, capsys):
        assert main(argv) == ExitCode.USAGE

    def test_version(self, capsys):
        assert main(["--version"]) == ExitCode.OK
        assert "NLItp" in capsys.readouterr().out

    def test_main_end_to_end(self, capsys):
        assert main(["solve", sample_path("disk_guard.nlsmt")]) == ExitCode.OK
        assert capsys.readouterr().out.splitlines()[0] == "unsat"


class TestBench:
    def test_inputs_and_kinds(self, tmp_path):
        for name in ("sqrt2.nlsmt", "disk_line.nlsmt", "counter.nlts"):
            shutil.copy(sample_path(name), tmp_path / name)
        (tmp_path / "notes.txt").write_text("skip")
        files = input_files(str(tmp_path))
        assert [f.rsplit("/", 1)[-1] for f in files] == ["counter.nlts", "disk_line.nlsmt", "sqrt2.nlsmt"]
        assert [kind_of(f) for f in files] == ["mc", "interpolate", "solve"]

    def test_csv_columns(self):
        buffer = io.StringIO()
        write_csv([BenchRow("a.nlsmt", "solve", "sat", 0.5, 1, 2, 0)], buffer)
        rows = list(csv.reader(io.StringIO(buffer.getvalue())))
        assert tuple(rows[0]) == BENCH_COLUMNS
        assert rows[1] == ["a.nlsmt", "solve", "sat", "0.5", "1", "2", "0"]

    @pytest.mark.slow
    def test_run_directory(self, tmp_path):
        for name in ("sqrt2.nlsmt", "counter.nlts"):
            shutil.copy(sample_path(name), tmp_path / name)
        (tmp_path / "broken.nlsmt").write_text("(assert")
        config = RunConfig(command="bench", path=str(tmp_path), engine=Engine.BMC, jobs=2, timeout=60)
        rows = run_bench(str(tmp_path), config)
        verdicts = {r.file: r.verdict for r in rows}
        assert verdicts == {"broken.nlsmt": "error", "counter.nlts": "invalid", "sqrt2.nlsmt": "sat"}

    @pytest.mark.slow
    def test_silent_worker_is_an_error(self, tmp_path, monkeypatch):
        shutil.copy(sample_path("sqrt2.nlsmt"), tmp_path / "sqrt2.nlsmt")
        monkeypatch.setattr(bench, "_worker", _silent_worker)
        config = RunConfig(command="bench", path=str(tmp_path), engine=Engine.BMC, jobs=1, timeout=30)
        rows = run_bench(str(tmp_path), config)
        assert [(r.file, r.verdict) for r in rows] == [("sqrt2.nlsmt", "error")]


def _silent_worker(index, path, config, results):
    """正常退出但不回报结果"""
