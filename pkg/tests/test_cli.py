import csv
import subprocess
import sys

import numpy as np
import pytest

from csframes.cli import _fmt, main, write_csv


@pytest.fixture(autouse=True)
def no_env_out(monkeypatch):
    monkeypatch.delenv("CSFRAMES_OUT", raising=False)


def write_cfg(tmp_path, text, name="run.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def read(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_fmt():
    assert _fmt(True) == "true" and _fmt(np.bool_(False)) == "false"
    assert _fmt(float("nan")) == "nan" and _fmt(float("inf")) == "inf"
    assert _fmt(0.1) == "0.10000000000000001"
    assert _fmt(np.int64(3)) == "3"


def test_write_csv_is_atomic_and_terminated(tmp_path):
    out = tmp_path / "sub" / "x.csv"
    write_csv(out, ["a", "b"], [(1, 0.5), (2, float("nan"))])
    assert out.read_text() == "a,b\n1,0.5\n2,nan\n"
    write_csv(out, ["name"], [("[A,B]",)])
    assert out.read_text() == 'name\n"[A,B]"\n'
    assert [p.name for p in out.parent.iterdir()] == ["x.csv"]


def test_eval_photon_added(tmp_path):
    cfg = write_cfg(tmp_path, "[family]\nkind = photon_added\nlambda = 0.5\n[task]\nz = 1i, 0.3\n")
    out = tmp_path / "out"
    assert main(["eval", "--config", cfg, "--out", str(out)]) == 0
    rows = read(out / "eval.csv")
    assert len(rows) == 2
    got = complex(float(rows[0]["dual_overlap_re"]), float(rows[0]["dual_overlap_im"]))
    assert got == pytest.approx(np.exp(-0.25 - 1j), abs=1e-12)
    assert rows[0]["domain_ok"] == "true"
    coeffs = read(out / "eval_coefficients.csv")
    assert len(coeffs) == 2 * 64


def test_nmax_override(tmp_path):
    cfg = write_cfg(tmp_path, "[family]\nkind = canonical\n[task]\nkind = eval\nz = 0.5\n")
    assert main(["eval", "--config", cfg, "--out", str(tmp_path / "o"), "--nmax", "30"]) == 0
    assert len(read(tmp_path / "o" / "eval_coefficients.csv")) == 30


def test_output_precedence(tmp_path, monkeypatch):
    cfg = write_cfg(tmp_path, f"[family]\nkind = canonical\n[task]\nz = 0.1\noutput = {tmp_path / 'from_cfg'}\n")
    assert main(["eval", "--config", cfg]) == 0
    assert (tmp_path / "from_cfg" / "eval.csv").exists()
    assert main(["eval", "--config", cfg, "--out", str(tmp_path / "from_flag")]) == 0
    assert (tmp_path / "from_flag" / "eval.csv").exists()
    monkeypatch.setenv("CSFRAMES_OUT", str(tmp_path / "from_env"))
    assert main(["eval", "--config", cfg, "--out", str(tmp_path / "ignored")]) == 0
    assert (tmp_path / "from_env" / "eval.csv").exists()
    assert not (tmp_path / "ignored").exists()


def test_verify_passes_and_is_deterministic(tmp_path):
    cfg = write_cfg(tmp_path, "[family]\nkind = rescaled\nnonlinearity = q_osc\nq = 0.9\n[task]\n")
    assert main(["verify", "--config", cfg, "--out", str(tmp_path / "a")]) == 0
    assert main(["verify", "--config", cfg, "--out", str(tmp_path / "b")]) == 0
    a = (tmp_path / "a" / "verify.csv").read_bytes()
    assert a == (tmp_path / "b" / "verify.csv").read_bytes()
    rows = read(tmp_path / "a" / "verify.csv")
    assert rows and all(r["passed"] == "true" for r in rows)


def test_verify_seed_changes_points(tmp_path):
    cfg = write_cfg(tmp_path, "[family]\nkind = binomial\nmu = 0.5\n[task]\n")
    main(["verify", "--config", cfg, "--out", str(tmp_path / "a"), "--seed", "1"])
    main(["verify", "--config", cfg, "--out", str(tmp_path / "b"), "--seed", "2"])
    assert (tmp_path / "a" / "verify.csv").read_bytes() != (tmp_path / "b" / "verify.csv").read_bytes()


def test_verify_failure_exit_code(tmp_path):
    # the standard trapped-ion radius cannot be certified, so domain checks fail
    cfg = write_cfg(tmp_path, "[family]\nkind = rescaled\nnonlinearity = trapped_ion\neta = 0.1\n[task]\n")
    assert main(["verify", "--config", cfg, "--out", str(tmp_path / "o")]) == 1
    rows = read(tmp_path / "o" / "verify.csv")
    assert any(r["passed"] == "false" for r in rows)


def test_moments_gp(tmp_path):
    cfg = write_cfg(tmp_path, "[family]\nkind = gp\n[task]\nkind = moments\nmax_n = 12\ntol = 1e-8\n")
    assert main(["moments", "--config", cfg, "--out", str(tmp_path)]) == 0
    summary = read(tmp_path / "moments_summary.csv")[0]
    assert summary["status"] == "ok"
    assert float(summary["residual"]) <= 1e-8
    assert float(summary["frame_deviation"]) <= 1e-6
    assert len(read(tmp_path / "moments.csv")) == 13


def test_moments_infeasible(tmp_path):
    cfg = write_cfg(tmp_path, "[family]\nkind = gp\n[task]\nkind = moments\nmax_n = 12\nn_nodes = 2\ntol = 1e-12\n")
    assert main(["moments", "--config", cfg, "--out", str(tmp_path)]) == 1
    assert read(tmp_path / "moments_summary.csv")[0]["status"] == "infeasible"


def test_scan(tmp_path):
    cfg = write_cfg(tmp_path, "[family]\nkind = gp\n[task]\nkind = scan\nn_r = 3\nn_theta = 4\n")
    assert main(["scan", "--config", cfg, "--out", str(tmp_path)]) == 0
    rows = read(tmp_path / "scan.csv")
    assert len(rows) == 12
    assert all(r["domain_ok"] == "true" for r in rows)
    # the outer ring needs more than 64 terms
    assert {r["status"] for r in rows} == {"ok", "TruncationInsufficient"}
    assert all(r["status"] == "ok" for r in rows if float(r["r"]) < 0.5)


def test_dual_compare(tmp_path):
    cfg = write_cfg(tmp_path, "[family]\nkind = bg\nkappa = 1.5\n[task]\nkind = dual-compare\nz = 0.2, 0.1-0.3i\n")
    assert main(["dual-compare", "--config", cfg, "--out", str(tmp_path)]) == 0
    rows = read(tmp_path / "dual_compare.csv")
    assert len(rows) == 2 and all(float(r["abs_error"]) < 1e-10 for r in rows)


def test_config_errors_exit_2(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "[family]\nkind = canonical\nbogus = 1\n[task]\n")
    assert main(["eval", "--config", cfg]) == 2
    assert "line 3" in capsys.readouterr().err
    assert main(["eval", "--config", str(tmp_path / "missing.cfg")]) == 2
    cfg2 = write_cfg(tmp_path, "[family]\nkind = canonical\n[task]\nz = 0.1\n", "b.cfg")
    assert main(["eval", "--config", cfg2, "--nmax", "1"]) == 2


def test_library_error_exit_1(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "[family]\nkind = gp\n[task]\nz = 1.5\n")
    assert main(["eval", "--config", cfg, "--out", str(tmp_path)]) == 1
    assert "OutsideDomain" in capsys.readouterr().err


def test_console_help():
    res = subprocess.run([sys.executable, "-m", "csframes.cli", "--help"], capture_output=True, text=True)
    assert res.returncode == 0
    assert "[family]" in res.stdout and "CSFRAMES_OUT" in res.stdout
