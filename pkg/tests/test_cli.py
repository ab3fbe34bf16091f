import subprocess
import sys
from pathlib import Path

import pytest

from pennsfv import io
from pennsfv.cli import main

RUN = """
[grid]
d = 2
level = 0
origin = [-1.0, -1.0]

[shape]
kind = "ring"
r_in = 0.2
r_out = 0.7

[fluid]
a = 1.0
gamma = 1.4
mu = 0.1
lambda = 0.0
alpha = 0.6
eps = 0.0625

[solver]
T = 0.1

[initial]
experiment = "exp1"

[output]
dir = "{out}"
snapshot_every = 1
vtk = true
"""

STUDY = """
[fluid]
a = 1.0
gamma = 1.4
mu = 0.1
lambda = 0.0
alpha = 0.6
eps = 0.015625

[solver]
T = 0.1

[initial]
experiment = "exp1"

[study]
mode = "fixed"
levels = [0, 1, 2]
m_ref = 3

[output]
dir = "{out}"
"""


def _write(tmp_path, text, name="c.toml", **kw):
    p = tmp_path / name
    p.write_text(text.format(**kw))
    return str(p)


def test_run_writes_outputs(tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["run", _write(tmp_path, RUN, out=out)]) == 0
    diag = list(out.glob("diag_exp1_*.csv"))
    snaps = list(out.glob("*.pnsf"))
    assert len(diag) == 1 and len(snaps) == 3 and len(list(out.glob("*.vtk"))) == 3
    hdr, cols, data = io.read_csv(diag[0])
    assert cols == ["t", "mass", "ekin", "eint", "visc_diss", "pen_diss", "dnum_ut", "dnum_uj",
                    "dnum_ua", "dnum_rt", "dnum_rj", "slack"]
    assert data.shape[0] == 2 and hdr["fluid.gamma"] == 1.4 and len(hdr["config_hash"]) == 16
    assert "exp1: n=10 steps=2" in capsys.readouterr().out
    final = [s for s in snaps if "_k" not in s.name][0]
    assert main(["info", str(final)]) == 0
    text = capsys.readouterr().out
    assert "gamma   1.4" in text and "mass    " in text


def test_out_flag_overrides(tmp_path):
    cfg = _write(tmp_path, RUN, out=tmp_path / "ignored")
    assert main(["run", cfg, "--out", str(tmp_path / "o2")]) == 0
    assert list((tmp_path / "o2").glob("diag_*.csv")) and not (tmp_path / "ignored").exists()


def test_config_errors_exit_2(tmp_path, capsys):
    cfg = _write(tmp_path, RUN.replace("gamma = 1.4", "gamma = 0.9"), out=tmp_path)
    assert main(["run", cfg]) == 2
    assert "gamma must exceed 1" in capsys.readouterr().err
    cfg = _write(tmp_path, RUN.replace("gamma = 1.4\n", ""), out=tmp_path)
    assert main(["run", cfg]) == 2
    assert "fluid.gamma" in capsys.readouterr().err


def test_solver_failure_reports_step(tmp_path, capsys):
    bad = RUN.replace("T = 0.1", "T = 0.1\nmax_picard = 1\ntol_nl = 1e-300")
    assert main(["run", _write(tmp_path, bad, out=tmp_path / "f")]) == 3
    err = capsys.readouterr().err
    assert "solver failure at step 1" in err


def test_exponents(capsys):
    assert main(["exponents", "2", "1.4", "0.6"]) == 0
    lines = dict(l.split(None, 1) for l in capsys.readouterr().out.splitlines() if l.startswith("beta"))
    assert float(lines["beta_RE"]) == pytest.approx(0.6)
    assert main(["exponents", "3", "1.2", "2"]) == 0
    assert "2(gamma-1)" in capsys.readouterr().out.replace("γ", "gamma")
    assert main(["exponents", "2", "1.4", "-1"]) == 2


def test_verify(capsys):
    assert main(["verify"]) == 0
    out = capsys.readouterr().out
    assert out.count("PASS") == 7 and "FAIL" not in out
    assert main(["verify", "--suite", "energy"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert len(out) == 1 and out[0].startswith("energy") and "PASS" in out[0]
    assert main(["verify", "--suite", "scheme", "--mutate", "pressure-sign"]) == 1
    assert "FAIL" in capsys.readouterr().out
    assert main(["verify", "--suite", "nope"]) == 2


def test_study_tables_and_resume(tmp_path, capsys):
    out = tmp_path / "s"
    cfg = _write(tmp_path, STUDY, out=out)
    assert main(["study", cfg]) == 0
    assert "EOC" in capsys.readouterr().out
    _, cols, err = io.read_csv(out / "errors.csv")
    _, _, eoc = io.read_csv(out / "eoc.csv")
    assert err.shape == (3, 6) and eoc.shape == (2, 6) and cols[0] == "h"
    first = {p.name: p.read_bytes() for p in out.glob("*.csv")}
    # simulate an interrupted study: drop the summaries and one cached case
    (out / "errors.csv").unlink()
    (out / "eoc.csv").unlink()
    victim = sorted(out.glob("*.pnsf"))[0]
    victim.unlink()
    victim.with_suffix(".json").unlink()
    assert main(["study", cfg, "--resume"]) == 0
    again = {p.name: p.read_bytes() for p in out.glob("*.csv")}
    assert again == first
    assert main(["study", cfg, "--no-resume"]) == 0
    assert {p.name: p.read_bytes() for p in out.glob("*.csv")} == first


def test_console_script(tmp_path):
    r = subprocess.run([sys.executable, "-m", "pennsfv.cli", "exponents", "2", "1.4", "0.6"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and "beta_RE" in r.stdout
