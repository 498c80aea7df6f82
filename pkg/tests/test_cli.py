import subprocess
import sys

import pytest

from rmtlaws.cli import main


def run(*argv, env=None):
    return subprocess.run([sys.executable, "-m", "rmtlaws", *argv], capture_output=True, text=True, env=env)


def test_solve_semicircle(capsys):
    assert main(["solve", "--law", "semicircle", "--z", "0+2i"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("s_re,s_im")
    assert len(lines) == 2
    s_re, s_im = (float(v) for v in lines[1].split(",")[:2])
    assert s_re == pytest.approx(0.0, abs=1e-15)
    assert s_im == pytest.approx(0.41421356237309505)


def test_solve_silverstein_and_deformed(capsys):
    assert main(["solve", "--law", "silverstein", "--h", "1:1", "--y", "0.5", "--z", "1+1i"]) == 0
    header, row = capsys.readouterr().out.splitlines()
    assert header == "m_re,m_im,residual,iters"
    assert float(row.split(",")[2]) <= 1e-12
    assert main(["solve", "--law", "deformed", "--h", "0.5:1.0,0.5:4.0", "--z", "2i"]) == 0
    header, row = capsys.readouterr().out.splitlines()
    assert header == "s_re,s_im,g_re,g_im,residual,iters"


def test_solve_usage_errors(capsys):
    assert main(["solve", "--law", "silverstein", "--z", "1i"]) == 2
    assert main(["solve", "--law", "semicircle", "--z", "1-1i"]) == 2
    with pytest.raises(SystemExit) as exc:
        main(["solve", "--law", "deformed", "--h", "0.5:1,0.4:2", "--z", "1i"])
    assert exc.value.code == 2
    assert "weights sum to 0.9" in capsys.readouterr().err


def test_missing_required_flag_exits_2_with_help():
    proc = run("solve", "--law", "semicircle")
    assert proc.returncode == 2
    assert "usage:" in proc.stderr and "--z" in proc.stderr
    assert proc.stdout == ""
    proc = run("lsd", "--ensemble", "wigner", "--sizes", "10", "--reps", "1", "--bogus")
    assert proc.returncode == 2
    assert "usage:" in proc.stderr


def test_solver_failure_exits_1(capsys):
    code = main(["solve", "--law", "silverstein", "--h", "0.5:1,0.5:4", "--y", "0.5", "--z", "0.01+0.01i",
                 "--max-iter", "2"])
    assert code == 1


def test_lsd_is_byte_identical(tmp_path):
    argv = ("lsd", "--ensemble", "wigner", "--sizes", "200,500", "--reps", "5", "--seed", "42")
    first, second = run(*argv), run(*argv)
    assert first.returncode == 0, first.stderr
    assert first.stdout == second.stdout
    out = tmp_path / "lsd.csv"
    assert main([*argv, "--workers", "2", "--out", str(out)]) == 0
    assert out.read_bytes() == first.stdout.encode()


def test_seed_from_environment(tmp_path):
    import os

    env = dict(os.environ, RMTLAWS_SEED="42")
    argv = ("lsd", "--ensemble", "wigner", "--sizes", "50", "--reps", "2")
    from_env = run(*argv, env=env).stdout
    assert from_env == run(*argv, "--seed", "42").stdout
    assert from_env != run(*argv, "--seed", "43", env=env).stdout


def test_lsd_failure_exit_code(capsys):
    assert main(["lsd", "--ensemble", "wigner", "--sizes", "50", "--reps", "2", "--ks-threshold", "1e-9"]) == 1


def test_metric_check(tmp_path, capsys):
    assert main(["metric-check", "--spaces", "6", "--dims", "1-8", "--samples", "2000", "--seed", "1"]) == 0
    line = capsys.readouterr().out.strip()
    tri, sym, zero = line.split(",")
    assert float(tri) <= 1e-12 and float(sym) == 0.0 and int(zero) == 0
    out = tmp_path / "m.csv"
    assert main(["metric-check", "--spaces", "6", "--dims", "1-8", "--samples", "2000", "--seed", "1",
                 "--out", str(out)]) == 0
    assert out.read_text().splitlines() == [
        "max_triangle_violation,max_symmetry_violation,zero_distance_failures", line]


def test_spiked_and_clt_commands(tmp_path):
    spiked = run("spiked", "--lambdas", "3,1", "--n", "200", "--reps", "100", "--block-draws", "2000",
                 "--seed", "1", "--rotation", "random")
    assert spiked.returncode in (0, 1), spiked.stderr
    assert spiked.stdout.startswith("record,group,replicate,statistic,value,se,theory,passed\n")
    clt = run("clt", "--n", "50", "--reps", "200", "--z", "2i,1.5i", "--seed", "3", "--workers", "2")
    assert clt.returncode in (0, 1), clt.stderr
    assert clt.stdout == run("clt", "--n", "50", "--reps", "200", "--z", "2i,1.5i", "--seed", "3").stdout
    assert run("clt", "--n", "50", "--reps", "10", "--z", "2i").returncode == 2
