import csv
import io
import json
import re
import subprocess
import sys

import pytest

from collision.cli import main


@pytest.fixture
def sample(tmp_path):
    def write(symbols, name="s.txt"):
        path = tmp_path / name
        path.write_text("\n".join(symbols) + "\n", encoding="utf-8")
        return str(path)

    return write


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


class TestTestUniformity:
    def test_non_uniform_example(self, capsys, sample):
        code, out, _ = run(capsys, "test-uniformity", sample(["a", "a", "b"]), "--m", "4", "--epsilon", "0.2")
        assert code == 1
        assert out.splitlines()[0] == "non_uniform"

    def test_uniform_exit_zero(self, capsys, sample):
        code, out, _ = run(capsys, "test-uniformity", sample(list("abcd")), "--m", "4", "--epsilon", "0.5")
        assert code == 0 and out.startswith("uniform")

    def test_distribution_mode(self, capsys):
        spec = json.dumps({"family": "uniform", "m": 50})
        code, out, _ = run(capsys, "test-uniformity", "--m", "50", "--epsilon", "0.5", "--distribution", spec, "--n", "400", "--json")
        payload = json.loads(out)
        assert payload["n"] == 400 and payload["decision"] in ("uniform", "non_uniform")
        assert code == (1 if payload["decision"] == "non_uniform" else 0)

    def test_more_symbols_than_m(self, capsys, sample):
        code, _, err = run(capsys, "test-uniformity", sample(list("abcde")), "--m", "4", "--epsilon", "0.5")
        assert code == 2 and "distinct" in err

    def test_missing_m(self, capsys, sample):
        code, _, _ = run(capsys, "test-uniformity", sample(["a", "b"]), "--epsilon", "0.5")
        assert code == 2


class TestEstimate:
    def test_all_distinct(self, capsys, sample):
        code, out, _ = run(capsys, "estimate", sample(list("abcdef")))
        assert code == 0
        assert "q_hat = 0.0" in out and "undefined" in out

    def test_json(self, capsys, sample):
        code, out, _ = run(capsys, "estimate", sample(["x", "x", "y"]), "--json")
        payload = json.loads(out)
        assert code == 0
        assert payload["collision_pairs"] == 2
        assert payload["q_hat"] == pytest.approx(1 / 3)

    @pytest.mark.parametrize("content", ["a b\nc\n", "a\n", ""])
    def test_malformed(self, capsys, tmp_path, content):
        path = tmp_path / "bad.txt"
        path.write_text(content)
        code, _, err = run(capsys, "estimate", str(path))
        assert code == 2 and err.startswith("error:")

    def test_missing_file(self, capsys, tmp_path):
        code, _, _ = run(capsys, "estimate", str(tmp_path / "nope.txt"))
        assert code == 2


class TestBounds:
    def test_example(self, capsys):
        code, out, _ = run(capsys, "bounds", "--uniform", "10", "--n", "100", "--json")
        payload = json.loads(out)
        assert code == 0
        assert payload["v2"] == pytest.approx(1.1e-4, rel=1e-12)
        assert payload["b"] == pytest.approx(1e-3, rel=1e-12)

    def test_human_numbers_match_json(self, capsys):
        args = ["bounds", "--zipf", "30", "1.2", "--n", "50", "--epsilon", "0.001,0.01,0.1"]
        _, human, _ = run(capsys, *args)
        _, js, _ = run(capsys, *args, "--json")
        payload = json.loads(js)
        text = json.dumps(payload)
        for number in re.findall(r"-?\d+\.\d+(?:e-?\d+)?", human):
            assert number in text

    def test_envelope_flags(self, capsys):
        code, out, _ = run(capsys, "bounds", "--uniform", "10", "--n", "100", "--c-sq", "3.5", "--json")
        assert code == 0 and json.loads(out)["envelope_constants"]["c_sq"] == 3.5

    def test_needs_one_pmf(self, capsys):
        assert run(capsys, "bounds", "--n", "100")[0] == 2
        assert run(capsys, "bounds", "--uniform", "3", "--weights", "1,2", "--n", "10")[0] == 2

    def test_bad_values(self, capsys):
        assert run(capsys, "bounds", "--uniform", "0", "--n", "10")[0] == 2
        assert run(capsys, "bounds", "--weights", "1,x", "--n", "10")[0] == 2


class TestMomentTable:
    def test_csv(self, capsys):
        code, out, _ = run(capsys, "moment-table", "--n", "2,10", "--p", "0.5", "--d", "2,4")
        rows = list(csv.DictReader(io.StringIO(out)))
        assert code == 0
        assert list(rows[0]) == ["n", "p", "d", "exact", "bound", "ratio"]
        assert len(rows) == 4
        assert float(rows[0]["exact"]) == pytest.approx(0.75)

    def test_out_file(self, capsys, tmp_path):
        out = tmp_path / "t.csv"
        code, printed, _ = run(capsys, "moment-table", "--kind", "symm", "--n", "2", "--p", "0.5", "--d", "4", "--out", str(out))
        assert code == 0 and printed == ""
        row = list(csv.DictReader(out.open()))[0]
        assert float(row["exact"]) == pytest.approx(2.5)

    def test_odd_d(self, capsys):
        assert run(capsys, "moment-table", "--d", "3")[0] == 2


class TestExperiment:
    def write_cfg(self, tmp_path, **kw):
        cfg = {"kind": "tail", "distribution": {"family": "uniform", "m": 20}, "n": 50, "epsilons": [0.5, 2.0], "trials": 20}
        cfg.update(kw)
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(cfg))
        return str(path)

    def test_runs_and_writes(self, capsys, tmp_path):
        out = tmp_path / "r" / "tail.csv"
        code, stdout, _ = run(capsys, "experiment", "--config", self.write_cfg(tmp_path), "--out", str(out), "--json")
        payload = json.loads(stdout)
        assert code == (0 if payload["passed"] else 1)
        assert out.exists() and out.with_suffix(".json").exists()

    def test_flag_overrides(self, capsys, tmp_path):
        _, stdout, _ = run(capsys, "experiment", "--config", self.write_cfg(tmp_path), "--trials", "3", "--seed", "8", "--json")
        payload = json.loads(stdout)
        assert payload["provenance"]["seed"] == 8
        assert all(r["trials"] == 3 for r in payload["rows"])

    def test_failed_check_exit_one(self, capsys, tmp_path):
        # an absurdly small envelope cannot dominate the empirical tail
        path = self.write_cfg(tmp_path, epsilons=[1e-6])
        code, _, _ = run(capsys, "experiment", "--config", path, "--c-out", "1e-9")
        assert code == 1

    def test_bad_config(self, capsys, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        assert run(capsys, "experiment", "--config", str(bad))[0] == 2
        assert run(capsys, "experiment", "--config", self.write_cfg(tmp_path, trials=0))[0] == 2
        assert run(capsys, "experiment", "--config", self.write_cfg(tmp_path, extra=1))[0] == 2

    def test_calibrate_requires_kind(self, capsys, tmp_path):
        assert run(capsys, "calibrate", "--config", self.write_cfg(tmp_path))[0] == 2


def test_unknown_subcommand(capsys):
    assert run(capsys, "frobnicate")[0] == 2


def test_module_entry_point(tmp_path):
    path = tmp_path / "s.txt"
    path.write_text("a\na\nb\n")
    proc = subprocess.run(
        [sys.executable, "-m", "collision", "test-uniformity", str(path), "--m", "4", "--epsilon", "0.2"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 1
    assert proc.stdout.splitlines()[0] == "non_uniform"
