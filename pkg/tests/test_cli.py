import csv
import io
import json
import pathlib

import jsonschema
import pytest

from mzvohno.cli import main

from oracles import LI2_HALF, ZETA2, ZETA3

SCHEMA = json.loads((pathlib.Path(__file__).parents[1] / "docs" / "report.schema.json").read_text())
FAST = ["--N", "200000"]


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, _ = run(capsys, *argv, "--format", "json")
    data = json.loads(out)
    jsonschema.validate(data, SCHEMA)
    return code, data


def value_of(text):
    value, _, err = text.strip().partition(" ± ")
    return float(value), float(err)


class TestDual:
    @pytest.mark.parametrize("arg,expected", [("(3)", "(2,1)"), ("()", "()"), ("(4)", "(2,1,1)")])
    def test_examples(self, capsys, arg, expected):
        code, out, _ = run(capsys, "dual", arg)
        assert code == 0 and out == expected + "\n"

    def test_non_admissible(self, capsys):
        code, out, err = run(capsys, "dual", "(1,2)")
        assert code == 3 and out == ""
        assert "not admissible" in err

    def test_parse_error(self, capsys):
        code, _, err = run(capsys, "dual", "(3")
        assert code == 2 and err.startswith("error:")

    def test_json(self, capsys):
        code, data = run_json(capsys, "dual", "(3)")
        assert code == 0 and data["dual"] == "(2,1)"


class TestEval:
    def test_zeta(self, capsys):
        code, out, _ = run(capsys, "eval", "zeta", "(2)", *FAST)
        v, e = value_of(out)
        assert code == 0 and v == pytest.approx(ZETA2, abs=1e-10) and e < 1e-10

    def test_F(self, capsys):
        code, out, _ = run(capsys, "eval", "F", "(2)", "--lambda", "0", *FAST)
        assert code == 0 and value_of(out)[0] == pytest.approx(ZETA3, abs=1e-10)

    def test_li(self, capsys):
        code, out, _ = run(capsys, "eval", "li", "(2)", "--z", "0.5", *FAST)
        assert code == 0 and value_of(out)[0] == pytest.approx(LI2_HALF, abs=1e-10)

    def test_complex_z(self, capsys):
        code, data = run_json(capsys, "eval", "li", "(2)", "--z", "0.3+0.4j", *FAST)
        assert code == 0 and len(data["value"]) == 2

    @pytest.mark.parametrize("argv", [("f", "((1,1))", "--lambda", "0"),
                                      ("g", "((1,1))", "--lambda", "0"),
                                      ("G", "(1)", "--lambda", "0")])
    def test_other_kinds(self, capsys, argv):
        code, out, _ = run(capsys, "eval", *argv, *FAST)
        assert code == 0 and value_of(out)[0] == pytest.approx(ZETA2, abs=1e-10)

    def test_psi(self, capsys):
        import math
        code, out, _ = run(capsys, "eval", "Psi", "(1)", "--z", "0.4", *FAST)
        assert code == 0 and value_of(out)[0] == pytest.approx(math.log(5 / 3), abs=1e-10)

    def test_json_fields(self, capsys):
        code, data = run_json(capsys, "eval", "f", "((2,1))", "--lambda", "0.5", *FAST)
        assert code == 0
        assert data["N"] == 200000 and data["kind"] == "f" and data["lambda"] == 0.5

    def test_env_default_N(self, capsys, monkeypatch):
        monkeypatch.setenv("MZV_DEFAULT_N", "50000")
        _, data = run_json(capsys, "eval", "zeta", "(3)")
        assert data["N"] == 50000
        _, data = run_json(capsys, "eval", "zeta", "(3)", "--N", "60000")
        assert data["N"] == 60000

    @pytest.mark.parametrize("argv", [("f", "((1,1))", "--lambda", "1.0"),
                                      ("li", "(2)", "--z", "1.5"),
                                      ("zeta", "(1,2)")])
    def test_domain_errors(self, capsys, argv):
        code, _, err = run(capsys, "eval", *argv, *FAST)
        assert code == 3 and err.startswith("error:")

    @pytest.mark.parametrize("argv", [("f", "((1,1))"), ("li", "(2)"), ("zeta", "(x)")])
    def test_usage_errors(self, capsys, argv):
        code, _, _ = run(capsys, "eval", *argv, *FAST)
        assert code == 2

    def test_nonpositive_N(self, capsys):
        code, _, _ = run(capsys, "eval", "zeta", "(2)", "--N", "0")
        assert code == 2


class TestVerify:
    def test_table(self, capsys):
        code, data = run_json(capsys, "verify", "table", "--max-weight", "6", *FAST)
        assert code == 0 and data["passed"]
        assert data["count"] >= 30 and data["failures"] == []

    @pytest.mark.parametrize("suite,w", [("sum", "7"), ("landen", "5"), ("duality", "6"),
                                         ("ohno", "4"), ("reduced", "4"), ("lemma", "4")])
    def test_suites_pass(self, capsys, suite, w):
        code, out, _ = run(capsys, "verify", suite, "--max-weight", w, *FAST)
        assert code == 0
        lines = out.strip().splitlines()
        assert all(line.startswith("PASS") for line in lines[:-1])
        assert lines[-1].startswith(f"{suite}: ")

    def test_difference_boundary(self, capsys):
        # the (1,1) instance fails under f((0,0)) = 0 and passes with -1
        code, out, _ = run(capsys, "verify", "difference", "--max-weight", "3", *FAST)
        assert code == 1
        failing = [line for line in out.splitlines() if line.startswith("FAIL")]
        assert failing and all("(1,1)" in line for line in failing)
        code, _, _ = run(capsys, "verify", "difference", "--max-weight", "3",
                         "--zero-pair-value", "-1", *FAST)
        assert code == 0

    def test_seeded_samples(self, capsys):
        argv = ("verify", "ohno", "--max-weight", "3", "--samples", "random:3", *FAST)
        _, a = run_json(capsys, *argv, "--seed", "7")
        _, b = run_json(capsys, *argv, "--seed", "7")
        _, c = run_json(capsys, *argv, "--seed", "8")
        assert a["samples"] == b["samples"] != c["samples"]
        assert [r["identity"] for r in a["reports"]] == [r["identity"] for r in b["reports"]]

    def test_csv(self, capsys):
        code, out, _ = run(capsys, "verify", "duality", "--max-weight", "3", "--format", "csv", *FAST)
        rows = list(csv.DictReader(io.StringIO(out)))
        assert code == 0 and len(rows) == 3
        assert set(rows[0]) == {"identity", "sample", "residual", "budget", "passed"}

    def test_output_file(self, capsys, tmp_path):
        path = tmp_path / "report.json"
        code, out, _ = run(capsys, "verify", "sum", "--max-weight", "4", "--format", "json",
                           "--output", str(path), *FAST)
        assert code == 0 and out == ""
        jsonschema.validate(json.loads(path.read_text()), SCHEMA)

    def test_bad_suite(self, capsys):
        code, _, err = run(capsys, "verify", "nope")
        assert code == 2 and "invalid choice" in err


class TestFit:
    @pytest.mark.parametrize("pc,line", [("((2,2))", "f(2,2) = 2 F(3) + F(1,2) - z(2) F(1)"),
                                         ("((1,1))", "f(1,1) = F(1)"),
                                         ("((1,2))", "f(1,2) = F(2)")])
    def test_examples(self, capsys, pc, line):
        code, out, _ = run(capsys, "fit", pc, *FAST)
        lines = out.splitlines()
        assert code == 0 and lines[0] == line
        assert lines[1].startswith("held-out residual")

    def test_json(self, capsys):
        code, data = run_json(capsys, "fit", "((2,2))", *FAST)
        assert code == 0 and data["passed"]
        assert data["identity"] == "f(2,2) = 2 F(3) + F(1,2) - z(2) F(1)"

    def test_no_snap(self, capsys):
        code, data = run_json(capsys, "fit", "((1,2))", "--no-snap", *FAST)
        assert code == 0 and data["coefficients"][0] == pytest.approx(1.0, abs=1e-9)

    def test_malformed(self, capsys):
        code, _, _ = run(capsys, "fit", "((2,2)", *FAST)
        assert code == 2
