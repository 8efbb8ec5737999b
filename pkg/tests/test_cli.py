import io
import json
import subprocess
import sys
from pathlib import Path

import pytest

from tkindex.cli import EXIT_COMPUTE, EXIT_OK, EXIT_PARSE, EXIT_VERIFY, main
from tkindex.serialize import SCHEMA

PROBLEM = {
    "version": SCHEMA,
    "group": {"rank": 1, "torsion": []},
    "modules": {"V": {"weights": [[1]], "trivial_real_dim": 0}, "E": {"weights": []}},
    "gen_chars": {
        "all": {"delta": [1]},
        "thom": {"index_thom": {"module": "V", "beta": ["1"]}},
        "one": {"finite": [{"weight": [0], "coeff": 1}]},
    },
    "queries": [
        {"cmd": "index-thom", "module": "V", "beta": "1", "window": "-5..5"},
        {"cmd": "check-dm", "module": "V", "phi": "all"},
        {"cmd": "check-dm", "module": "V", "phi": "one"},
        {"cmd": "coeff", "phi": "thom", "at": "3"},
        {"cmd": "delta", "module": "V"},
        {"cmd": "restrict", "phi": "all", "module": "V", "submodule": "E"},
        {"cmd": "induce", "phi": "all", "chi": "1", "invert": True},
    ],
}


def run(argv):
    out = io.StringIO()
    code = main(argv, out=out)
    return code, out.getvalue()


@pytest.fixture
def problem_file(tmp_path):
    path = tmp_path / "problem.json"
    path.write_text(json.dumps(PROBLEM))
    return str(path)


class TestCommands:
    def test_index_thom_text(self):
        code, out = run(["index-thom", "1", "--beta", "1", "--window", "-5..5"])
        assert code == EXIT_OK
        assert out.strip() == "−t −t² −t³ −t⁴ −t⁵"

    def test_check_dm(self, problem_file):
        code, out = run(["check-dm", "V", "all", "--problem", problem_file])
        assert code == EXIT_OK and out.startswith("ProvedIn")
        code, out = run(["check-dm", "V", "one", "--problem", problem_file])
        assert code == EXIT_OK and out.startswith("ProvedOut")

    def test_coeff_inline(self):
        phi = json.dumps({"literal": {"terms": [{"coeff": 1, "numerator": [0, 0], "denominators": [[1, 0], [0, 1], [1, 1]]}]}})
        code, out = run(["coeff", phi, "--at", "2,2", "--problem", json.dumps({"group": {"rank": 2}})])
        assert code == EXIT_OK and out.strip() == "3"

    def test_run_json_reparses(self, problem_file):
        code, out = run(["run", problem_file, "--format", "json"])
        assert code == EXIT_OK
        rows = [json.loads(line) for line in out.splitlines()]
        assert [r["query"] for r in rows] == list(range(len(PROBLEM["queries"])))
        assert rows[1]["result"]["verdict"] == "ProvedIn"
        assert rows[2]["result"]["verdict"] == "ProvedOut"
        assert rows[3]["result"]["coefficient"] == -1
        assert rows[5]["result"]["truncation"] == []
        assert rows[6]["result"]["truncation"] == [{"coeff": 1, "weight": {"free": [], "torsion": []}}]

    def test_parallel_matches_sequential(self, problem_file):
        a = run(["run", problem_file, "--format", "json"])
        b = run(["run", problem_file, "--format", "json", "--parallel"])
        assert a == b

    def test_deterministic(self, problem_file):
        assert run(["run", problem_file, "--format", "json"]) == run(["run", problem_file, "--format", "json"])

    def test_index_flag_and_decompose(self):
        code, out = run(["index-flag", "1", "--window", "-2..2", "--format", "json"])
        assert code == EXIT_OK
        flags = json.loads(out)["result"]["flags"]
        assert len(flags) == 1
        one = json.dumps({"finite": [{"weight": [0], "coeff": 1}]})
        code, out = run(["decompose", "1", "--assign", "g=" + one, "--gamma", "g=1", "--window", "-3..3"])
        assert code == EXIT_OK
        assert out.splitlines() == ["−t −t² −t³", "in_F: ProvedIn"]

    def test_verify_suite_json(self):
        code, out = run(["verify", "exact-sequence", "--chi", "2", "--seed", "7", "--format", "json"])
        assert code == EXIT_OK
        rows = [json.loads(line) for line in out.splitlines()]
        assert rows and all(r["verdict"] == "pass" for r in rows)

    def test_window_env(self, monkeypatch):
        monkeypatch.setenv("TKINDEX_WINDOW_DEFAULT", "-2..2")
        code, out = run(["index-thom", "1", "--beta", "1"])
        assert code == EXIT_OK and out.strip() == "−t −t²"


class TestExitCodes:
    def test_parse_error_torsion(self, tmp_path):
        bad = dict(PROBLEM, group={"rank": 1, "torsion": [3]}, modules={"V": {"weights": [{"free": [1], "torsion": [5]}]}}, gen_chars={})
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(bad))
        code, out = run(["run", str(path), "--format", "json"])
        assert code == EXIT_PARSE
        assert json.loads(out)["error"]["code"] == "E_INVARIANT"

    def test_parse_error_torsion_only(self, tmp_path):
        bad = dict(PROBLEM, group={"rank": 1, "torsion": [2]}, modules={"V": {"weights": [{"free": [0], "torsion": [1]}]}}, gen_chars={})
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(bad))
        assert run(["run", str(path)])[0] == EXIT_PARSE

    def test_missing_file(self):
        assert run(["run", "/nonexistent/problem.json"])[0] == EXIT_PARSE

    def test_bad_arguments(self):
        assert run(["index-thom", "1"])[0] == EXIT_PARSE
        assert run(["verify", "no-such-suite"])[0] == EXIT_PARSE

    def test_computation_error_has_query_index(self, tmp_path):
        prob = dict(PROBLEM, queries=[{"cmd": "coeff", "phi": "thom", "at": "0"}, {"cmd": "induce", "phi": "one", "chi": "1", "invert": True}])
        path = tmp_path / "p.json"
        path.write_text(json.dumps(prob))
        code, out = run(["run", str(path), "--format", "json"])
        assert code == EXIT_COMPUTE
        rows = [json.loads(line) for line in out.splitlines()]
        assert rows[0]["result"]["coefficient"] == 0
        assert rows[1]["query"] == 1 and rows[1]["error"]["code"] == "E_NOT_PERIODIC"

    def test_inadmissible_beta(self):
        assert run(["index-thom", "1", "--beta", "0"])[0] == EXIT_COMPUTE

    def test_verify_failure_code(self, monkeypatch):
        from tkindex import verify

        def failing(*_a, **_k):
            r = verify.Report("inverse-identity", {})
            r.add("forced", verify.FAIL, {"weight": [0]})
            return [r]

        monkeypatch.setattr(verify, "run_suite", failing)
        code, _ = run(["verify", "inverse-identity"])
        assert code == EXIT_VERIFY


def test_module_entry_point():
    res = subprocess.run(
        [sys.executable, "-m", "tkindex", "index-thom", "1", "--beta", "-1", "--window", "-2..2"],
        capture_output=True,
        text=True,
        check=False,
    )
    assert res.returncode == 0
    assert res.stdout.strip() == "t⁻² +t⁻¹ +1"


def test_documented_example_runs():
    doc = Path(__file__).resolve().parents[1] / "docs" / "hexagonal.json"
    code, out = run(["run", str(doc), "--format", "json"])
    assert code == EXIT_OK
    rows = [json.loads(line) for line in out.splitlines()]
    assert all("error" not in r for r in rows)
