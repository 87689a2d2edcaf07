import json

import numpy as np
import pytest

from gsdecay import __version__
from gsdecay.cli import check_resolvent, main, validate_config
from gsdecay.errors import ConfigError

FAST_KERNELS = {"fk": {"paths": 4000, "steps": 100}}


def write(tmp_path, cfg, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return str(p)


def outputs(d):
    return {p.name: p.read_bytes() for p in sorted(d.iterdir())}


def test_solve_harmonic(tmp_path):
    out = tmp_path / "o"
    assert main(["solve", "--out", str(out), "--quiet"]) == 0
    (csv,) = out.glob("*groundstate.csv")
    head = dict(l[2:].split(": ", 1) for l in csv.read_text().splitlines() if l.startswith("#"))
    assert float(head["lambda0"]) == pytest.approx(1.0, abs=1e-4)
    assert head["gsdecay_version"] == __version__
    assert head["config_hash"] in csv.name


def test_invalid_delta_names_field(tmp_path, capsys):
    cfg = write(tmp_path, {"envelopes": [{"side": "upper", "epsilon": 0.5, "delta": 1.5}]})
    assert main(["solve", "--config", cfg, "--out", str(tmp_path / "o")]) == 2
    assert "envelopes[0].delta" in capsys.readouterr().err


def test_unknown_key_rejected(tmp_path, capsys):
    cfg = write(tmp_path, {"grid": {"d": 1, "L": 5, "n": 100, "spacing": 2}})
    assert main(["solve", "--config", cfg, "--out", str(tmp_path / "o")]) == 2
    assert "grid.spacing" in capsys.readouterr().err


def test_malformed_json(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    assert main(["solve", "--config", str(p), "--out", str(tmp_path / "o")]) == 2


def test_solver_failure_exit_code(tmp_path):
    cfg = write(tmp_path, {"solver": {"tol": 1e-15, "max_iter": 2}})
    assert main(["solve", "--config", cfg, "--out", str(tmp_path / "o"), "--quiet"]) == 3


def test_table_potential_solve(tmp_path):
    xs = np.linspace(-6, 6, 241)
    (tmp_path / "v.csv").write_text("x,V\n" + "".join(f"{x},{x * x}\n" for x in xs))
    cfg = write(tmp_path, {"potential": {"kind": "table", "path": "v.csv", "params": {"confining": True}},
                           "grid": {"d": 1, "L": 6.0, "n": 1000}})
    out = tmp_path / "o"
    assert main(["solve", "--config", cfg, "--out", str(out), "--quiet"]) == 0
    (csv,) = out.glob("table-d1-*groundstate.csv")
    lam = float([l for l in csv.read_text().splitlines() if l.startswith("# lambda0")][0].split(": ")[1])
    assert lam == pytest.approx(1.0, abs=2e-3)


def test_envelope_command(tmp_path):
    out = tmp_path / "o"
    assert main(["envelope", "--out", str(out), "--quiet"]) == 0
    names = [p.name for p in out.iterdir()]
    assert any(n.endswith("report.txt") for n in names) and any(n.endswith("ratio.csv") for n in names)
    (rep,) = out.glob("*report.txt")
    assert "pass: true" in rep.read_text()


def test_envelope_exponential_condition_fails(tmp_path):
    cfg = write(tmp_path, {"potential": {"kind": "exponential", "params": {"rate": 1.0}},
                           "grid": {"d": 1, "L": 8.0, "n": 2000}})
    out = tmp_path / "o"
    assert main(["envelope", "--config", cfg, "--out", str(out), "--quiet"]) == 0
    (rep,) = out.glob("*report.txt")
    assert "condition.I.eps0.1: fails" in rep.read_text()


def test_kernel_checks_default_plan_passes(tmp_path):
    cfg = write(tmp_path, FAST_KERNELS)
    assert main(["kernel-checks", "--config", cfg, "--out", str(tmp_path / "o"), "--quiet"]) == 0


def test_seed_change_keeps_verdicts(tmp_path):
    cfg = write(tmp_path, FAST_KERNELS)
    texts = []
    for seed in ("1", "2"):
        out = tmp_path / seed
        assert main(["kernel-checks", "--config", cfg, "--out", str(out), "--seed", seed, "--quiet"]) == 0
        (txt,) = out.glob("*kernel-checks.txt")
        texts.append(txt.read_text().splitlines())
    verdicts = [[l for l in t if l.endswith((": pass", ": FAIL"))] for t in texts]
    assert verdicts[0] == verdicts[1]
    assert texts[0] != texts[1]


def test_check_failure_exit_code(tmp_path):
    cfg = write(tmp_path, {**FAST_KERNELS, "checks": {"fk_oracle": False, "sandwich": False, "resolvent": False,
                                                        "dirichlet": True, "exit_time": False},
                           "dirichlet": {"c_min": 5.0}})
    assert main(["kernel-checks", "--config", cfg, "--out", str(tmp_path / "o"), "--quiet"]) == 4


def test_resolvent_grid_d1():
    ok, rows = check_resolvent([1.0, 4.0, 16.0], [0.5, 1.0, 2.0, 5.0], [1])
    assert ok and len(rows) == 12


def test_byte_identical_outputs(tmp_path):
    cfg = write(tmp_path, FAST_KERNELS)
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["report", "--config", cfg, "--out", str(a), "--seed", "17", "--quiet"]) == 0
    assert main(["report", "--config", cfg, "--out", str(b), "--seed", "17", "--quiet"]) == 0
    oa, ob = outputs(a), outputs(b)
    assert oa == ob and len(oa) >= 8
    for blob in oa.values():
        text = blob.decode()
        assert f"# gsdecay_version: {__version__}" in text and "# config_hash: " in text


def test_output_env_override(tmp_path, monkeypatch):
    monkeypatch.setenv("GSDECAY_OUT", str(tmp_path / "env"))
    assert main(["solve", "--quiet"]) == 0
    assert list((tmp_path / "env").glob("*groundstate.csv"))
    assert main(["solve", "--quiet", "--out", str(tmp_path / "flag")]) == 0
    assert list((tmp_path / "flag").glob("*groundstate.csv"))


def test_validate_config_normalizes_and_hashes():
    a = validate_config({"grid": {"n": 1000}})
    b = validate_config({"grid": {"n": 1000}, "out": "elsewhere"})
    assert a.hash == b.hash
    assert validate_config({"grid": {"n": 1000}}, seed=3).hash != a.hash
    with pytest.raises(ConfigError):
        validate_config({"fk": {"paths": 10}})
    with pytest.raises(ConfigError):
        validate_config({"potential": {"kind": "power", "params": {"beta": -1}}})
