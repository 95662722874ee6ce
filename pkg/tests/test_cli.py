import subprocess
import sys

import pytest

from kpsplit.cli import main, seed_check
from kpsplit.io import read_csv, read_snapshot


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_seed_check(capsys):
    assert all(ok for _, ok, _ in seed_check())
    code, out, _ = run(capsys, "--seed-check")
    assert code == 0 and out.count("ok") == 4


def test_bad_arguments_exit_1(capsys):
    assert run(capsys, "no-such-command")[0] == 1
    assert run(capsys, "soliton", "--bogus")[0] == 1
    assert run(capsys, "burgers-convergence", "--orders", "2,x")[0] == 1
    assert run(capsys)[0] == 1
    code, _, err = run(capsys, "cost-compare")
    assert code == 1 and "usage" in err


def test_invalid_values_exit_1(capsys):
    code, _, err = run(capsys, "burgers-convergence", "--orders", "20", "--cells", "4")
    assert code == 1 and "order" in err
    assert run(capsys, "cost-compare", "--runs", "/nonexistent.csv")[0] == 1


def test_numerical_failure_exit_2(capsys):
    code, _, err = run(capsys, "kp-convergence", "--scheme", "exp2", "--nx", "32", "--ny", "32",
                       "--epsilon", "0.01", "--taus", "0.5", "--tau-ref", "0.5", "--tmax", "50")
    assert code == 2 and "numerical failure" in err


def test_burgers_csv_and_determinism(capsys):
    argv = ["burgers-convergence", "--orders", "2,3", "--cells", "8,16", "--tmax", "0.05", "--tau", "0.01"]
    code, a, _ = run(capsys, *argv)
    assert code == 0
    _, b, _ = run(capsys, *argv)
    assert a == b
    meta, rows = read_csv(a)
    assert {"git_revision", "command", "flags"} <= set(meta)
    assert len(rows) == 4 and "wall_time" not in rows[0]
    assert all(r["status"] == "ok" and float(r["error"]) < 1e-2 for r in rows)
    assert rows[1]["dof"] == "32"


def test_trivial_burgers_run(capsys):
    code, out, _ = run(capsys, "burgers-convergence", "--orders", "2,4,8", "--cells", "8",
                       "--tmax", "1e-12", "--tau", "1e-12")
    _, rows = read_csv(out)
    assert code == 0 and all(float(r["error"]) <= 1e-12 for r in rows)


def test_timings_flag_keeps_wall_time(capsys):
    _, out, _ = run(capsys, "burgers-convergence", "--orders", "2", "--cells", "8", "--tmax", "0.01",
                    "--tau", "0.01", "--timings")
    assert "wall_time" in read_csv(out)[1][0]


def test_iteration_study(capsys):
    code, out, _ = run(capsys, "iteration-study", "--cells-x", "32", "--iters-list", "1,3",
                       "--methods", "fixed,newton", "--taus", "0.2", "--tmax", "0.4")
    _, rows = read_csv(out)
    assert code == 0 and len(rows) == 4
    assert {r["method"] for r in rows} == {"fixed_point", "newton"}


def test_kp_run_writes_snapshots(capsys, tmp_path):
    code, _, _ = run(capsys, "kp-run", "--nx", "32", "--ny", "16", "--tau", "0.01", "--tmax", "0.04",
                     "--snapshot-stride", "2", "--out", str(tmp_path), "--csv-snapshot")
    assert code == 0
    bins = sorted(p.name for p in tmp_path.glob("u_*.bin"))
    assert bins == ["u_0000000.bin", "u_0000002.bin", "u_0000004.bin"]
    assert read_snapshot(tmp_path / "u_0000004.bin").values.shape == (16, 32)
    meta, rows = read_csv(tmp_path / "kp_run.csv")
    assert [r["step"] for r in rows] == ["0", "2", "4"]
    assert (tmp_path / "u_0000002.csv").exists()


def test_kp_run_zero_initial_value(capsys):
    code, out, _ = run(capsys, "kp-run", "--ic", "zero", "--nx", "16", "--ny", "8", "--tau", "0.01",
                       "--tmax", "0.02", "--scheme", "exp2")
    _, rows = read_csv(out)
    assert code == 0 and all(float(r["max_abs_u"]) == 0.0 for r in rows)


def test_kp_convergence(capsys):
    code, out, _ = run(capsys, "kp-convergence", "--nx", "32", "--ny", "32", "--taus", "0.02,0.01",
                       "--tau-ref", "0.005", "--tmax", "0.04", "--scheme", "exp2")
    _, rows = read_csv(out)
    assert code == 0 and len(rows) == 2
    code, out, _ = run(capsys, "kp-convergence", "--kind", "space", "--resolutions", "16,32",
                       "--tau", "0.01", "--tmax", "0.02")
    assert code == 0 and len(read_csv(out)[1]) == 2


def test_soliton_short(capsys):
    code, out, _ = run(capsys, "soliton", "--orders", "3", "--tau", "0.01", "--tmax", "0.5",
                       "--nx", "256", "--stride", "10")
    _, rows = read_csv(out)
    times = [float(r["time"]) for r in rows]
    assert code == 0 and times == sorted(times)
    assert abs(float(rows[0]["amplitude"]) - 2.0) <= 1e-3


def test_cost_compare_from_runs(capsys, tmp_path):
    runs = tmp_path / "runs.csv"
    runs.write_text("scheme,order,n_x,n_y,N_x,tau,t_final,error,time_error,space_error,status\n"
                    "strang,4,64,64,64,0.01,0.1,0.05,0.04,0.03,ok\n"
                    "exp2,4,64,64,0,0.01,0.1,0.05,0.04,0.03,ok\n")
    code, out, _ = run(capsys, "cost-compare", "--runs", str(runs), "--tolerances", "0.1")
    _, rows = read_csv(out)
    assert code == 0 and {r["scheme"] for r in rows} == {"strang", "exp2"}
    assert int(rows[0]["cost"]) < int(rows[1]["cost"])


def test_cost_compare_rejects_wrong_table(capsys, tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b\n1,2\n")
    assert run(capsys, "cost-compare", "--runs", str(bad))[0] == 1


def test_console_script_entry():
    out = subprocess.run([sys.executable, "-m", "kpsplit.cli", "--seed-check"], capture_output=True, text=True)
    assert out.returncode == 0
