import csv
import io
import json
import random
import subprocess
import sys
from fractions import Fraction

import pytest

from exactinterp.bench import run_bench
from exactinterp.bounds import epsilon_multivariate, node_stats
from exactinterp.cli import REPORT_MARKER, main
from exactinterp.expr import Det, dumps
from exactinterp.interp import Grid, RunReport, parse_poly
from oracles import expand, random_expr

import cases

F = Fraction


def run(capsys, *argv):
    try:
        code = main(list(argv))
    except SystemExit as exc:
        code = exc.code
    out = capsys.readouterr()
    return code, out.out, out.err


def split_document(out):
    poly, _, rest = out.partition(REPORT_MARKER + "\n")
    return poly.strip(), json.loads(rest)


class TestRecover:
    @pytest.mark.parametrize("value,bound,want", [
        ("0.333333333333", "1000", "1/3"),
        ("2", "2", "2"),
        ("-0.0277777777778", "181", "-1/36"),
        ("0.5000000001", "4", "1/2"),
    ])
    def test_values(self, capsys, value, bound, want):
        code, out, _ = run(capsys, "recover", "--value", value, "--den-bound", bound)
        assert code == 0 and out.strip() == want

    @pytest.mark.parametrize("argv", [
        ["recover", "--value", "1.2.3", "--den-bound", "5"],
        ["recover", "--value", "0.5", "--den-bound", "1"],
        ["recover", "--value", "0.5"],
        ["nonsense"],
    ])
    def test_bad_input(self, capsys, argv):
        code, _, err = run(capsys, *argv)
        assert code == 3 and err


class TestInterp:
    def test_bivariate_case(self, capsys, tmp_path):
        path = tmp_path / "e.json"
        path.write_text(dumps(cases.BI_EXPR))
        nodes = ";".join(",".join(g) for g in cases.BI_NODES)
        code, out, _ = run(capsys, "interp", str(path), "--vars", "x,y", "--deg", "3,3",
                           "--den-bound", "13", "--nodes", nodes)
        assert code == 0
        text, report = split_document(out)
        assert parse_poly(text, ["x", "y"]).terms() == cases.BI_EXACT
        back = RunReport.from_dict(report)
        assert back.verified and back.retries == 0
        assert back.bound_set.denom_bound == 13

    def test_infix_option(self, capsys):
        code, out, _ = run(capsys, "interp", "-e", "(x - 1/2)*(y + 1/3)", "--vars", "x,y")
        assert code == 0
        assert split_document(out)[0] == "x*y + 1/3*x - 1/2*y - 1/6"

    def test_constant_zero(self, capsys):
        code, out, _ = run(capsys, "interp", "-e", "x - x", "--vars", "x")
        assert code == 0 and split_document(out)[0] == "0"

    def test_unverified_exit(self, capsys):
        code, out, err = run(capsys, "interp", "-e", "x^2/101", "--vars", "x", "--den-bound", "2",
                             "--retries", "1")
        assert code == 2
        text, report = split_document(out)
        assert text == "unrecovered" and report["verified"] is False
        assert "error" in err

    @pytest.mark.parametrize("argv", [
        ["interp", "--vars", "x"],
        ["interp", "-e", "1/x", "--vars", "x"],
        ["interp", "-e", "x*y", "--vars", "x"],
        ["interp", "-e", "x", "--vars", "x", "--deg", "a"],
        ["interp", "-e", "x", "--vars", "x,y", "--nodes", "1,2"],
        ["interp", "-e", "x", "--vars", "x", "--nodes", "1,1"],
        ["interp", "/nonexistent/file.json", "--vars", "x"],
    ])
    def test_bad_input(self, capsys, argv):
        code, _, err = run(capsys, *argv)
        assert code == 3 and "error" in err

    def test_precision_budget(self, capsys):
        code, _, err = run(capsys, "--max-precision-bits", "64", "interp", "-e", "x^8/3",
                           "--vars", "x", "--den-bound", "100000")
        assert code == 3 and "precision" in err.lower()


class TestDetpoly:
    def write(self, tmp_path, rows):
        path = tmp_path / "m.json"
        path.write_text(json.dumps(rows))
        return str(path)

    def test_two_by_two(self, capsys, tmp_path):
        path = self.write(tmp_path, [["x", 1], [1, "x"]])
        code, out, _ = run(capsys, "detpoly", path, "--vars", "x")
        assert code == 0 and split_document(out)[0] == "x^2 - 1"

    def test_identity(self, capsys, tmp_path):
        path = self.write(tmp_path, {"rows": [[1, 0, 0], [0, 1, 0], [0, 0, 1]]})
        code, out, _ = run(capsys, "detpoly", path, "--vars", "x")
        assert code == 0 and split_document(out)[0] == "1"

    def test_node_entries_against_expansion(self, capsys, tmp_path):
        rng = random.Random(97)
        names = ["x", "y", "z"]
        for _ in range(3):
            entries = [[random_expr(rng, names, depth=2) for _ in range(3)] for _ in range(3)]
            path = self.write(tmp_path, [[json.loads(dumps(e)) for e in row] for row in entries])
            code, out, _ = run(capsys, "detpoly", path, "--vars", "x,y,z")
            assert code == 0
            want = expand(Det(tuple(tuple(r) for r in entries)), names)
            assert parse_poly(split_document(out)[0], names).terms() == want

    def test_not_a_matrix(self, capsys, tmp_path):
        code, _, _ = run(capsys, "detpoly", self.write(tmp_path, {"cols": 3}), "--vars", "x")
        assert code == 3
        code, _, _ = run(capsys, "detpoly", self.write(tmp_path, [["x", 1]]), "--vars", "x")
        assert code == 3


class TestBench:
    def test_csv(self, capsys):
        code, out, _ = run(capsys, "bench", "--sizes", "1,2", "--vars", "2", "--trials", "2",
                           "--compare-exact", "--seed", "5")
        assert code == 0
        rows = list(csv.DictReader(io.StringIO(out)))
        assert len(rows) == 4
        assert {r["size"] for r in rows} == {"1", "2"}
        assert all(r["match"] == "true" for r in rows)
        for r in rows:
            exact = F(r["epsilon_exact"])
            assert abs(float(exact) - float(r["epsilon"])) <= 1e-3 * float(exact)

    def test_epsilon_matches_formula(self):
        for row in run_bench([1, 2], 2, 2, compare_exact=False, seed=3, degree=2, max_den=3):
            stats = [node_stats(g) for g in Grid.default(["x", "y"], row.degrees).nodes]
            assert row.epsilon == epsilon_multivariate(row.degrees, stats, row.denom_bound)

    def test_bad_sizes(self, capsys):
        assert run(capsys, "bench", "--sizes", "0")[0] == 3


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "exactinterp", "recover", "--value", "0.25",
                           "--den-bound", "4"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.strip() == "1/4"
