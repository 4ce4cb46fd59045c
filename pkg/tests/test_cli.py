import io
import subprocess
import sys

import pytest

from ehaoi.cli import main


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), out=out, err=err)
    return code, out.getvalue(), err.getvalue()


def kv(text):
    return dict(line.split("=", 1) for line in text.splitlines() if "=" in line and not line.startswith("#"))


class TestSolve:
    def test_half(self):
        code, out, _ = run("solve", "--q", "0.5")
        assert code == 0
        assert "lambda_prime=0.000000000" in out.splitlines()
        assert "lambda_star=2.000000000" in out.splitlines()

    def test_greedy(self):
        code, out, _ = run("solve", "--q", "0.8")
        d = kv(out)
        assert code == 0 and d["regime"] == "greedy" and d["lambda_star"] == "5.000000000"

    def test_threshold(self):
        d = kv(run("solve", "--q", "0.3")[1])
        assert float(d["lambda_prime"]) == pytest.approx(0.470, abs=5e-4)
        assert float(d["lambda_star"]) == pytest.approx(1.409, abs=5e-4)
        assert d["regime"] == "threshold"

    def test_output_starts_with_human_line(self):
        out = run("solve", "--q", "0.3")[1]
        assert out.startswith("# q=0.300000000: threshold policy")


class TestUsageErrors:
    @pytest.mark.parametrize(
        "argv",
        [
            ["solve"],
            ["solve", "--q", "0"],
            ["solve", "--q", "1"],
            ["solve", "--q", "abc"],
            ["solve", "--q", "0.3", "--bogus"],
            ["simulate", "--q", "0.3", "--policy", "wait:2"],
            ["simulate", "--q", "0.3", "--policy", "threshold:-1"],
            ["simulate", "--q", "0.3", "--epochs", "10", "--horizon", "5"],
            ["simulate", "--q", "0.3", "--battery", "0"],
            ["sweep", "--q-min", "0.6", "--q-max", "0.4"],
            ["sweep", "--steps", "1"],
            ["frobnicate"],
        ],
    )
    def test_exit_two(self, argv):
        code, _, _ = run(*argv)
        assert code == 2

    def test_trace_with_reps(self, tmp_path):
        code, _, err = run("simulate", "--q", "0.3", "--reps", "2", "--trace", str(tmp_path / "t.csv"))
        assert code == 2 and "--trace" in err


class TestSimulate:
    def test_optimal_within_three_sigma(self):
        code, out, _ = run("simulate", "--q", "0.3", "--policy", "optimal", "--epochs", "200000", "--seed", "4")
        d = kv(out)
        assert code == 0
        assert abs(float(d["time_avg_aoi"]) - float(d["analytic_lambda_star"])) <= 3 * float(d["std_error"])

    def test_reproducible(self):
        argv = ["simulate", "--q", "0.4", "--policy", "threshold:0.3", "--epochs", "5000", "--seed", "9", "--reps", "3"]
        assert run(*argv)[1] == run(*argv)[1]

    def test_uniform_infinite_battery(self):
        code, out, _ = run("simulate", "--q", "0.4", "--policy", "uniform:1", "--battery", "inf", "--horizon", "20000")
        d = kv(out)
        assert code == 0 and d["battery_capacity"] == "1000" and "battery_note" in d
        assert d["stop"] == "horizon:20000.000000000"

    def test_trace_file(self, tmp_path):
        path = tmp_path / "trace.csv"
        code, _, _ = run("simulate", "--q", "0.3", "--policy", "greedy", "--epochs", "50", "--trace", str(path))
        lines = path.read_text().splitlines()
        assert code == 0
        assert sum(1 for l in lines if l.split(",")[1] == "SUCCESS") == 50
        t, kind, battery, age = lines[0].split(",")
        assert kind == "ARRIVAL" and battery == "1" and len(t.split(".")[1]) == 9


class TestSweep:
    def test_csv_file_and_determinism(self, tmp_path):
        argv = ["sweep", "--q-min", "0.1", "--q-max", "0.9", "--steps", "5", "--simulate", "--epochs", "2000",
                "--reps", "2", "--seed", "3"]
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert run(*argv, "--out", str(a))[0] == 0
        assert run(*argv, "--out", str(b))[0] == 0
        assert a.read_bytes() == b.read_bytes()
        lines = a.read_text().splitlines()
        assert len(lines) == 6 and lines[0].startswith("q,lambda_prime")

    def test_stdout_analytic_only(self):
        code, out, _ = run("sweep", "--q-min", "0.2", "--q-max", "0.8", "--steps", "3")
        assert code == 0
        assert out.splitlines()[2] == "0.5,0,2,2,1.5,,,threshold"


class TestValidate:
    def test_pass(self):
        code, out, _ = run("validate", "--q", "0.3", "--epochs", "100000", "--seed", "2")
        assert code == 0 and out.rstrip().endswith("result=pass")

    def test_failure_exit_status(self, monkeypatch):
        import ehaoi.experiments as experiments

        monkeypatch.setattr(experiments, "Z_FLAG", 0.0)
        code, out, _ = run("validate", "--q", "0.3", "--epochs", "1000", "--seed", "2")
        assert code == 1 and "FLAG" in out


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "ehaoi", "solve", "--q", "0.5"], capture_output=True, text=True)
    assert proc.returncode == 0 and "lambda_star=2.000000000" in proc.stdout
    proc = subprocess.run([sys.executable, "-m", "ehaoi", "solve", "--q", "2"], capture_output=True, text=True)
    assert proc.returncode == 2 and proc.stderr
