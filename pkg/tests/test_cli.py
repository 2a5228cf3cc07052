import json
import math
import subprocess
import sys
from fractions import Fraction

import pytest

from cantor_density.cli import RunConfig, build_parser, main, read_config
from cantor_density.errors import InvalidInput

SUBCOMMANDS = [
    ["constants"], ["staircase"], ["monotone"], ["density"], ["tau"], ["gamma"],
    ["gamma", "check"], ["gamma", "classify"], ["gamma", "enumerate"], ["dim"],
    ["dim", "survivor"], ["dim", "levelset"], ["atlas"], ["oracle"],
    ["oracle", "blocks"], ["oracle", "ballmeasure"],
]


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def records(out):
    return [json.loads(line) for line in out.splitlines() if line.strip()]


@pytest.mark.parametrize("cmd", SUBCOMMANDS, ids=lambda c: "-".join(c))
def test_help(cmd, capsys):
    with pytest.raises(SystemExit) as exc:
        main(cmd + ["--help"])
    assert exc.value.code == 0
    assert "usage" in capsys.readouterr().out


def test_constants(capsys):
    code, out, _ = run(capsys, "constants", "--rho", "1/3")
    assert code == 0
    rec = {r["name"]: r for r in records(out)}
    assert rec["t_G"]["value"] == "1/4"
    assert abs(float(rec["t_KL"]["value"]) - 0.08519) < 1e-4
    assert abs(float(rec["s"]["value"]) - math.log(2) / math.log(3)) < 1e-15
    assert abs(float(rec["q_KL"]["value"]) - 1.78723) < 1e-5
    assert all("provenance" in r for r in rec.values())


def test_density_example(capsys):
    code, out, _ = run(capsys, "density", "--rho", "1/3", "--coding", "(01)")
    assert code == 0
    (r,) = records(out)
    assert r["tau"] == "1/4"
    assert 0 < float(r["lower"]) < float(r["upper"]) < 1


def test_gamma_examples(capsys):
    code, out, _ = run(capsys, "gamma", "check", "--coding", "(011)")
    assert code == 0 and records(out)[0]["value"] is False
    code, out, _ = run(capsys, "gamma", "classify", "--coding", "(01)")
    assert records(out)[0]["kind"] == "IsolatedInGamma"
    code, out, _ = run(capsys, "gamma", "enumerate", "--max-period", "4")
    rows = records(out)
    assert {r["coding"] for r in rows} >= {"(0)", "(01)"}


def test_dim_examples(capsys):
    code, out, _ = run(capsys, "dim", "levelset", "--rho", "1/3", "--t", "1/13")
    (r,) = records(out)
    assert code == 0 and r["kind"] == "EBranch"
    assert r["value"].startswith("0.4380")
    code, out, _ = run(capsys, "dim", "survivor", "--t", "0")
    assert abs(float(records(out)[0]["value"]) - math.log(2) / math.log(3)) < 1e-12


def test_tau(capsys):
    code, out, _ = run(capsys, "tau", "--coding", "(01)")
    assert records(out)[0]["value"] == "1/4"
    code, out, _ = run(capsys, "tau", "--x", "1/4", "--numeric", "50")
    r = records(out)[0]
    assert r["value"] == "1/4" and r["certified"] is False


def test_staircase_csv(capsys, tmp_path):
    code, out, _ = run(capsys, "staircase", "--rho", "1/3", "--max-word-len", "8")
    assert code == 0
    assert "4,117,1,13,0.438017879485942,110" in out
    path = tmp_path / "s.csv"
    path.write_text(out)
    code, out2, _ = run(capsys, "monotone", str(path))
    assert code == 0 and records(out2)[0]["violations"] == 0


def test_staircase_empty_range(capsys):
    code, out, _ = run(capsys, "staircase", "--t-min", "1/2", "--t-max", "1/3")
    assert code == 0
    assert out.strip().splitlines() == ["t_left_num,t_left_den,t_right_num,t_right_den,psi,word,converged"]


def test_staircase_svg(capsys, tmp_path):
    dest = tmp_path / "s.svg"
    code, _, _ = run(capsys, "staircase", "--max-word-len", "6", "--format", "svg", "--out", str(dest))
    assert code == 0
    assert dest.read_text().startswith("<svg") or "<svg" in dest.read_text()


def test_monotone_failure(capsys, tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("t_left_num,t_left_den,t_right_num,t_right_den,psi,word,converged\n"
                    "0,1,1,10,0.1,a,true\n1,5,1,4,0.3,b,true\n")
    code, out, _ = run(capsys, "monotone", str(path))
    assert code == 4 and records(out)[0]["value"] is False
    path.write_text("nonsense\n1,2\n")
    code, _, err = run(capsys, "monotone", str(path))
    assert code == 2


def test_atlas_csv(capsys):
    code, out, _ = run(capsys, "atlas", "--max-word-len", "5")
    lines = out.splitlines()
    assert lines[0] == "word,t_left,t_right,psi,nesting_depth"
    assert any(line.startswith("110,4/117,1/13,") for line in lines)


def test_oracles(capsys):
    code, out, _ = run(capsys, "oracle", "blocks", "--coding", "(001)", "--n", "7", "--n-min", "1")
    assert [r["count"] for r in records(out)] == [2, 4, 6, 10, 16, 26, 42]
    code, out, _ = run(capsys, "oracle", "ballmeasure", "--x", "0", "--r", "1/3")
    r = records(out)[0]
    assert r["lower"] == r["upper"] == "1/2"


def test_exit_codes(capsys):
    assert run(capsys, "constants", "--rho", "1/2")[0] == 2
    with pytest.raises(SystemExit) as exc:
        main(["constants", "--rho", "abc"])
    assert exc.value.code == 2
    capsys.readouterr()
    code, _, err = run(capsys, "density", "--x", "1/2")
    assert code == 4 and "NotInCantorSet" in err
    code, _, err = run(capsys, "oracle", "blocks", "--coding", "(001)", "--n", "30")
    assert code == 3 and "ResourceLimit" in err
    assert run(capsys, "staircase", "--max-word-len", "20")[0] == 3
    assert run(capsys, "density", "--coding", "0(2)")[0] == 2
    assert run(capsys, "density")[0] == 2


def test_determinism(capsys):
    outs = {run(capsys, "staircase", "--max-word-len", "9")[1] for _ in range(2)}
    assert len(outs) == 1
    outs = {run(capsys, "constants")[1] for _ in range(2)}
    assert len(outs) == 1


def test_thread_env_does_not_change_output(capsys, monkeypatch):
    monkeypatch.setenv("CANTOR_DENSITY_THREADS", "1")
    a = run(capsys, "staircase", "--max-word-len", "12")[1]
    monkeypatch.setenv("CANTOR_DENSITY_THREADS", "2")
    b = run(capsys, "staircase", "--max-word-len", "12")[1]
    assert a == b


def test_config_file(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# settings\nrho = 1/4\nprecision=30\n")
    assert read_config(str(cfg)) == {"rho": Fraction(1, 4), "precision": 30}
    code, out, _ = run(capsys, "constants", "--config", str(cfg))
    rec = {r["name"]: r for r in records(out)}
    assert rec["t_G"]["value"] == "1/5"
    # flags win over the file
    code, out, _ = run(capsys, "constants", "--config", str(cfg), "--rho", "1/3")
    assert {r["name"]: r for r in records(out)}["t_G"]["value"] == "1/4"
    bad = tmp_path / "bad.cfg"
    bad.write_text("colour=blue\n")
    assert run(capsys, "constants", "--config", str(bad))[0] == 2
    assert run(capsys, "constants", "--config", str(tmp_path / "missing.cfg"))[0] == 2


def test_flags_after_subcommand(capsys):
    a = run(capsys, "--rho", "1/4", "constants")[1]
    b = run(capsys, "constants", "--rho", "1/4")[1]
    assert a == b


def test_run_config_validation():
    with pytest.raises(InvalidInput):
        RunConfig(tol=0)
    with pytest.raises(InvalidInput):
        RunConfig(precision=5)
    assert build_parser().prog == "cantor-density"


def test_console_script():
    proc = subprocess.run([sys.executable, "-m", "cantor_density.cli", "gamma", "check", "--coding", "(01)"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["value"] is True
