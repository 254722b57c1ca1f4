"""CLI surface: subcommands, problem files, CSV export, exit codes."""

import io
import json
from contextlib import redirect_stderr, redirect_stdout
from fractions import Fraction
from pathlib import Path

import pytest

from canondual import cli
from canondual.benchmarks import thc_objective
from canondual.errors import ProblemFileError
from canondual.oracle import Box

PROBLEMS = Path(__file__).resolve().parent.parent / "problems"


def run_cli(*argv):
    out, err = io.StringIO(), io.StringIO()
    with redirect_stdout(out), redirect_stderr(err):
        code = cli.run(list(argv))
    return code, out.getvalue(), err.getvalue()


class TestSolveCommand:
    def test_solve_gp_json(self):
        code, out, _ = run_cli("solve", "gp", "--format", "json")
        assert code == 0
        data = json.loads(out)
        assert data["certificate"] == "GlobalMinimumCertified"
        assert data["x_star"][0] == pytest.approx(0.0, abs=1e-8)
        assert data["x_star"][1] == pytest.approx(-1.0, abs=1e-8)
        assert data["primal_value"] == pytest.approx(3.0, abs=1e-8)
        assert data["sigma_star"][0] == pytest.approx(-15.0, abs=1e-6)
        assert data["oracle"]["agreement"] is True

    def test_solve_thc_text(self):
        code, out, _ = run_cli("solve", "thc")
        assert code == 0
        assert "GlobalMinimumCertified" in out
        assert "zero-gap triple" in out

    def test_json_schema_is_stable_across_problems(self):
        _, out_gp, _ = run_cli("solve", "gp", "--format", "json", "--no-oracle")
        _, out_file, _ = run_cli(
            "solve", "file", str(PROBLEMS / "convex_1d.json"), "--format", "json", "--no-oracle"
        )
        gp_data, file_data = json.loads(out_gp), json.loads(out_file)
        assert set(gp_data) == set(file_data)

        def finite(node):
            if isinstance(node, dict):
                return all(finite(v) for v in node.values())
            if isinstance(node, list):
                return all(finite(v) for v in node)
            if isinstance(node, float):
                return node == node and abs(node) != float("inf")
            return True

        assert finite(gp_data) and finite(file_data)

    def test_no_oracle_flag(self):
        code, out, _ = run_cli("solve", "thc", "--format", "json", "--no-oracle")
        assert code == 0
        data = json.loads(out)
        assert data["oracle"] == {"value": None, "x": None, "agreement": None}

    def test_solver_overrides_are_echoed(self):
        code, out, _ = run_cli(
            "solve", "gp", "--format", "json", "--no-oracle",
            "--grad-tol", "1e-9", "--max-iter", "50",
        )
        assert code == 0
        data = json.loads(out)
        assert data["config"]["grad_tol"] == 1e-9
        assert data["config"]["max_iter"] == 50

    def test_boundary_problem_exits_2(self):
        code, out, _ = run_cli(
            "solve", "file", str(PROBLEMS / "boundary_1d.json"), "--no-oracle"
        )
        assert code == 2
        assert "BoundaryCritical" in out

    def test_shipped_gp_subproblem_file(self):
        code, out, _ = run_cli(
            "solve", "file", str(PROBLEMS / "gp_g.json"), "--format", "json", "--no-oracle"
        )
        assert code == 0
        data = json.loads(out)
        assert data["sigma_star"][0] == pytest.approx(-15.0, abs=1e-6)
        assert data["x_star"][0] == pytest.approx(3.0, abs=1e-8)


class TestVerifyCommand:
    def test_verify_gp(self):
        code, out, _ = run_cli("verify", "gp")
        assert code == 0
        assert "FAIL" not in out
        assert out.count("PASS") >= 8

    def test_verify_thc(self):
        code, out, _ = run_cli("verify", "thc")
        assert code == 0
        assert "FAIL" not in out

    def test_verify_prints_exact_term_serialization(self):
        _, out, _ = run_cli("verify", "thc")
        assert "f2: 1/6 6 0 | -21/20 4 0 | 2/1 2 0 | 1/1 1 1 | 1/1 0 2" in out
        _, out, _ = run_cli("verify", "gp")
        assert "h: 3/1 4 | -8/1 3 | -6/1 2 | 24/1 1 | 20/1 0" in out
        assert "g: 3/1 4 | -16/1 3 | 18/1 2 | 30/1 0" in out

    def test_verify_file(self):
        code, out, _ = run_cli("verify", "file", str(PROBLEMS / "gp_g.json"))
        assert code == 0
        assert "FAIL" not in out

    def test_failing_check_exits_3(self, monkeypatch):
        from canondual import verify as verify_module
        from canondual.verify import CheckResult

        monkeypatch.setattr(
            verify_module, "verify_gp",
            lambda cfg=None: [CheckResult("rigged", False, "forced failure")],
        )
        code, out, _ = run_cli("verify", "gp")
        assert code == 3
        assert "FAIL  rigged" in out


class TestOracleCommand:
    def test_oracle_gp_json(self):
        code, out, _ = run_cli(
            "oracle", "gp", "--grid", "101", "--starts", "16", "--seed", "7",
            "--format", "json",
        )
        assert code == 0
        data = json.loads(out)
        assert data["grid"]["value"] == pytest.approx(3.0, abs=1e-2)
        assert data["multistart"]["value"] == pytest.approx(3.0, abs=1e-6)

    def test_oracle_box_override(self):
        code, out, _ = run_cli(
            "oracle", "thc", "--box", "-1", "1", "-1", "1", "--grid", "41",
            "--starts", "8", "--seed", "3", "--format", "json",
        )
        assert code == 0
        data = json.loads(out)
        assert data["box"] == {"lower": [-1.0, -1.0], "upper": [1.0, 1.0]}
        assert abs(data["multistart"]["value"]) <= 1e-8


class TestGridCommand:
    def test_export_small_grid(self, tmp_path):
        out_path = tmp_path / "surface.csv"
        code, out, _ = run_cli("grid", "thc", "--n", "3", "--out", str(out_path))
        assert code == 0
        lines = out_path.read_text().splitlines()
        assert lines[0] == "x,y,f"
        assert len(lines) == 1 + 9
        center = [line for line in lines[1:] if line.startswith("0,0,")]
        assert center == ["0,0,0"]

    def test_grid_minimum_close_to_three(self, tmp_path):
        out_path = tmp_path / "gp.csv"
        code, _, _ = run_cli(
            "grid", "gp", "--box", "-2", "2", "-2", "2", "--n", "401", "--out", str(out_path)
        )
        assert code == 0
        values = [
            float(line.rsplit(",", 1)[1]) for line in out_path.read_text().splitlines()[1:]
        ]
        assert len(values) == 401 * 401
        assert abs(min(values) - 3.0) <= 1e-2

    def test_single_node_grid_is_usage_error(self, tmp_path):
        code, _, err = run_cli("grid", "gp", "--n", "1", "--out", str(tmp_path / "x.csv"))
        assert code == 1
        assert "2 nodes" in err


class TestWriteGridCsv:
    def test_values_have_17_significant_digits(self, tmp_path):
        out_path = tmp_path / "pi.csv"
        cli.write_grid_csv(thc_objective(), Box((-1.0, -1.0), (1.0, 1.0)), 2, out_path)
        rows = out_path.read_text().splitlines()[1:]
        assert rows[0].split(",")[2] == f"{thc_objective().eval((-1.0, -1.0)):.17g}"


class TestProblemFiles:
    def test_round_trip_is_exact(self):
        original = cli.load_problem_file_exact(PROBLEMS / "gp_g.json")
        rebuilt = cli.parse_problem_dict(original.to_json_dict())
        assert rebuilt == original
        assert rebuilt.A[0][0] == Fraction(106, 3)

    def test_float_fields_survive_to_problem(self):
        pf = cli.load_problem_file_exact(PROBLEMS / "gp_g.json")
        pr = pf.to_problem()
        assert pr.A.entry(0, 0) == pytest.approx(106.0 / 3.0, abs=1e-15)
        assert pr.ops[0].b[0] == pytest.approx(-8.0 / 3.0, abs=1e-15)

    def test_nonconvex_v_rejected(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({
            "n": 1, "m": 1, "A": [[1]], "f": [0],
            "operators": [{"C": [[0]], "b": [0], "c": 0}],
            "V": [{"a": 0, "beta": 0}],
        }))
        with pytest.raises(ProblemFileError, match=r"a must be > 0"):
            cli.load_problem_file(bad)

    def test_asymmetric_matrix_rejected(self, tmp_path):
        bad = tmp_path / "assym.json"
        bad.write_text(json.dumps({
            "n": 2, "m": 1, "A": [[1, 2], [3, 1]], "f": [0, 0],
            "operators": [{"C": [[0, 0], [0, 0]], "b": [0, 0], "c": 0}],
            "V": [{"a": 1, "beta": 0}],
        }))
        with pytest.raises(ProblemFileError, match="symmetric"):
            cli.load_problem_file(bad)

    def test_parse_error_reports_location(self, tmp_path):
        bad = tmp_path / "broken.json"
        bad.write_text('{"n": 1,\n  "m": }')
        with pytest.raises(ProblemFileError, match=r"broken\.json:2"):
            cli.load_problem_file(bad)

    def test_missing_file_is_usage_error(self):
        code, _, err = run_cli("solve", "file", "/nonexistent/problem.json")
        assert code == 1
        assert "problem.json" in err


class TestUsageErrors:
    def test_unknown_subcommand(self):
        code, _, _ = run_cli("frobnicate")
        assert code == 1

    def test_no_arguments_prints_help(self):
        code, _, err = run_cli()
        assert code == 1
        assert "solve" in err

    def test_file_without_path(self):
        code, _, err = run_cli("solve", "file")
        assert code == 1
        assert "path" in err

    def test_help_exits_zero(self):
        code, _, _ = run_cli("--help")
        assert code == 0


class TestDeterminism:
    @pytest.mark.parametrize("problem", ["gp", "thc"])
    def test_consecutive_json_runs_are_byte_identical(self, problem):
        first = run_cli("solve", problem, "--format", "json")
        second = run_cli("solve", problem, "--format", "json")
        assert first[1].encode() == second[1].encode()
        assert first[0] == second[0] == 0
