import csv
import io
import json
import subprocess
import sys

import pytest

from entmoments.cli import main, parse_int_range, parse_q_list

HEADER = "m,n,q,mean,second_moment,variance,method,flags"


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


class TestParsing:
    def test_ranges(self):
        assert parse_int_range("2..4") == [2, 3, 4]
        assert parse_int_range("5") == [5]
        assert parse_int_range("3,1,2..3") == [1, 2, 3]

    def test_q_list(self):
        assert parse_q_list("2,1.5,-0.25") == [2.0, 1.5, -0.25]

    def test_bad_range_is_usage_error(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["sweep", "--m", "4..2", "--n", "5", "--q", "2"])
        assert exc.value.code == 2


class TestMoments:
    def test_json_values(self, capsys):
        code, out, _ = run(capsys, "moments", "--m", "2", "--n", "2", "--q", "2", "--format", "json")
        assert code == 0
        row = json.loads(out)
        assert list(row) == HEADER.split(",")
        assert row["mean"] == pytest.approx(0.2, rel=1e-15)
        assert row["variance"] == pytest.approx(3 / 175, rel=1e-15)

    def test_json_round_trip(self, capsys):
        for q in ("2", "2.5", "1"):
            _, out, _ = run(capsys, "moments", "--m", "3", "--n", "4", "--q", q, "--format", "json")
            assert json.dumps(json.loads(out)) + "\n" == out

    def test_exact_strings(self, capsys):
        code, out, _ = run(capsys, "moments", "--m", "2", "--n", "2", "--q", "2", "--mode", "exact",
                           "--format", "json")
        assert code == 0
        row = json.loads(out)
        assert row["variance_exact"] == "3/175"
        assert row["mean_exact"] == "1/5"
        assert json.dumps(row) + "\n" == out

    def test_single_level_zero(self, capsys):
        code, out, _ = run(capsys, "moments", "--m", "1", "--n", "9", "--q", "3", "--format", "json")
        assert code == 0
        assert json.loads(out)["variance"] == 0

    def test_von_neumann_branch(self, capsys):
        code, out, _ = run(capsys, "moments", "--m", "2", "--n", "2", "--q", "1", "--format", "json")
        row = json.loads(out)
        assert code == 0 and row["method"] == "von_neumann"
        assert row["mean"] == pytest.approx(1 / 3, abs=1e-6)
        assert row["variance"] == pytest.approx(0.0321, abs=1e-4)

    def test_text_and_csv(self, capsys):
        _, out, _ = run(capsys, "moments", "--m", "2", "--n", "3", "--q", "2")
        assert "variance" in out and "quadratic" in out
        _, out, _ = run(capsys, "moments", "--m", "2", "--n", "3", "--q", "2", "--format", "csv")
        assert out.splitlines()[0] == HEADER

    @pytest.mark.parametrize("argv,needle", [
        (("--m", "2", "--n", "2", "--q", "-0.5"), "q > -0.5"),
        (("--m", "2", "--n", "2", "--q", "0"), "q != 0"),
        (("--m", "3", "--n", "2", "--q", "2"), "m <= n"),
        (("--m", "2", "--n", "2", "--q", "1.0004"), "|q - 1|"),
        (("--m", "2", "--n", "2", "--q", "2.5", "--mode", "exact"), "integer q"),
    ])
    def test_domain_errors(self, capsys, argv, needle):
        code, out, err = run(capsys, "moments", *argv)
        assert code == 2
        assert out == ""
        assert needle in err

    def test_missing_flag(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["moments", "--m", "2"])
        assert exc.value.code == 2


class TestSweep:
    def test_quadratic_rows(self, capsys):
        code, out, _ = run(capsys, "sweep", "--m", "2..3", "--n", "2..4", "--q", "2")
        assert code == 0
        assert "\r" not in out
        lines = out.splitlines()
        assert lines[0] == HEADER
        rows = list(csv.DictReader(io.StringIO(out)))
        assert len(rows) == 6
        keys = [(int(r["m"]), int(r["n"]), float(r["q"])) for r in rows]
        assert keys == sorted(keys)
        for r in rows:
            m, n = int(r["m"]), int(r["n"])
            ref = 2 * (m * m - 1) * (n * n - 1) / ((m * n + 1) ** 2 * (m * n + 2) * (m * n + 3))
            assert float(r["variance"]) == pytest.approx(ref, rel=1e-15)

    def test_seventeen_digits(self, capsys):
        _, out, _ = run(capsys, "sweep", "--m", "2", "--n", "3", "--q", "2.5")
        row = next(csv.DictReader(io.StringIO(out)))
        assert row["mean"] == format(float(row["mean"]), ".17g")

    def test_error_rows_continue(self, capsys):
        code, out, _ = run(capsys, "sweep", "--m", "2", "--n", "2", "--q", "0,1,2")
        assert code == 0
        rows = list(csv.DictReader(io.StringIO(out)))
        assert [r["method"] for r in rows] == ["error", "von_neumann", "quadratic"]
        assert "q != 0" in rows[0]["flags"]
        assert float(rows[1]["variance"]) == pytest.approx(0.032124297741466, rel=1e-12)

    def test_json_array(self, capsys):
        _, out, _ = run(capsys, "sweep", "--m", "2", "--n", "2..3", "--q", "2,-0.7", "--format", "json")
        rows = json.loads(out)
        assert [r["method"] for r in rows] == ["error", "quadratic", "error", "quadratic"]
        assert json.dumps(rows) + "\n" == out

    def test_workers_same_output(self, capsys):
        argv = ["sweep", "--m", "2..3", "--n", "3..4", "--q", "1.5,2,3"]
        _, serial, _ = run(capsys, *argv, "--workers", "1")
        _, pooled, _ = run(capsys, *argv, "--workers", "3")
        assert serial == pooled


class TestVerify:
    def test_appendix_suite(self, capsys):
        code, out, _ = run(capsys, "verify", "--suite", "appendix")
        assert code == 0
        assert out.rstrip().endswith("checks passed")

    def test_mc_suite(self, capsys):
        code, out, _ = run(capsys, "verify", "--suite", "mc", "--m", "2", "--n", "3", "--q", "2",
                           "--samples", "20000", "--seed", "42", "--format", "json")
        assert code == 0
        checks = json.loads(out)
        assert {c["status"] for c in checks} == {"pass"}
        assert checks[0]["reference"] == pytest.approx(2 / 7, rel=1e-14)
        assert checks[1]["reference"] == pytest.approx(2 / 147, rel=1e-14)

    def test_failure_exit_code(self, capsys, monkeypatch):
        from entmoments import cli
        from entmoments.verify import Check

        monkeypatch.setattr(cli, "run_suite",
                            lambda name, **kw: [Check("forced", 1.0, 2.0, 0.5, 1e-10, False)])
        code, out, _ = run(capsys, "verify", "--suite", "limit")
        assert code == 1
        assert "FAIL" in out

    def test_config_error(self, capsys):
        code, _, err = run(capsys, "verify", "--suite", "mc", "--samples", "100")
        assert code == 2
        assert "samples" in err


class TestEntryPoint:
    def test_module_exit_codes(self):
        base = [sys.executable, "-m", "entmoments"]
        ok = subprocess.run(base + ["moments", "--m", "2", "--n", "2", "--q", "2", "--format", "json"],
                            capture_output=True, text=True)
        assert ok.returncode == 0
        assert json.loads(ok.stdout)["mean"] == 0.2
        bad = subprocess.run(base + ["moments", "--m", "2", "--n", "2", "--q", "0"],
                             capture_output=True, text=True)
        assert bad.returncode == 2
        usage = subprocess.run(base + ["frobnicate"], capture_output=True, text=True)
        assert usage.returncode == 2
