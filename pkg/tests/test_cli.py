import io
import json

import pytest

from quadflow.cli import main
from quadflow.form import custom, dump_model


def run(argv):
    out = io.StringIO()
    code = main(argv, out=out)
    return code, out.getvalue()


def test_analyze_hermite(tmp_path):
    path = tmp_path / "r.json"
    code, text = run(["analyze", "--model", "hermite", "--d", "2", "--json", str(path)])
    assert code == 0
    data = json.loads(path.read_text())
    assert data["mu"] == pytest.approx(2)
    assert data["singular_space"]["dim"] == 0
    assert "mu               2" in text


def test_analyze_kfp():
    code, text = run(["analyze", "--model", "kfp", "--a", "-2"])
    assert code == 0
    assert "mu               1.5\n" in text
    assert "shifted rate     1\n" in text


def test_analyze_mixed(tmp_path):
    path = tmp_path / "r.json"
    code, _ = run(["analyze", "--model", "mixed", "--d1", "1", "--d2", "1", "--t", "1", "--json", str(path)])
    data = json.loads(path.read_text())
    assert code == 0
    assert data["mu_prime"] == pytest.approx(1)
    assert data["dispersive"][0]["singular_values"][0] == pytest.approx(1 + 2**0.5, abs=1e-12)


def test_exit_nondissipative(tmp_path):
    path = tmp_path / "m.json"
    dump_model(custom([[1.0, 0.0], [0.0, -1.0]]), path)
    assert run(["analyze", "--file", str(path)])[0] == 2
    assert run(["analyze", "--file", str(path), "--allow-nondissipative"])[0] == 0


def test_exit_invalid_model():
    assert run(["analyze", "--model", "kfp", "--a", "0"])[0] == 2
    assert run(["analyze", "--model", "kfp"])[0] == 2


def test_exit_nonsymplectic_split(tmp_path):
    path = tmp_path / "heat.toml"
    dump_model(custom([[0.0, 0.0], [0.0, -1.0]]), path)
    assert run(["analyze", "--file", str(path)])[0] == 0
    assert run(["analyze", "--file", str(path), "--split"])[0] == 3
    assert run(["decay", "--file", str(path)])[0] == 3


def test_exit_nondiagonalizable():
    assert run(["analyze", "--model", "kfp", "--a", "0.25"])[0] == 4


def test_decay_hermite_and_twisted(tmp_path):
    code, text = run(["decay", "--model", "hermite", "--csv-dir", str(tmp_path)])
    assert code == 0
    assert "fitted rate    -1" in text
    assert (tmp_path / "hermite_d_1_diagonal.csv").exists()
    assert run(["decay", "--model", "twisted", "--d", "1"])[0] == 0


def test_decay_rate_violation():
    # a tolerance of zero cannot be met by a numerical fit on a short grid
    assert run(["decay", "--model", "kfp", "--a", "-2", "--tmin", "0", "--tmax", "1", "--steps", "5", "--rate-tol", "0"])[0] == 5


def test_decay_zero_steps(tmp_path):
    code, _ = run(["decay", "--model", "hermite", "--steps", "0", "--csv-dir", str(tmp_path)])
    assert code == 0
    assert (tmp_path / "hermite_d_1_diagonal.csv").read_text() == "t,|w-z|,|K|,envelope,ratio\n"


def test_decay_outputs_are_deterministic(tmp_path):
    outs = []
    for k in range(2):
        d = tmp_path / str(k)
        code, _ = run(["decay", "--model", "mixed", "--steps", "4", "--csv-dir", str(d), "--json", str(d / "r.json"), "--nu", "0.5", "--schur"])
        assert code == 0
        outs.append({p.name: p.read_bytes() for p in sorted(d.iterdir())})
    assert outs[0] == outs[1]
    data = json.loads(outs[0]["r.json"])
    assert data["verification"]["fractional"]["rate"] == pytest.approx(1.0)


def test_verify_none(tmp_path):
    path = tmp_path / "v.json"
    code, text = run(["verify", "--suite", "none", "--json", str(path)])
    assert code == 0
    assert json.loads(path.read_text())["passed"] is True


def test_verify_paper_examples():
    code, text = run(["verify", "--suite", "paper-examples"])
    assert code == 0, text
    assert "FAIL" not in text


def test_verify_failure_exit(monkeypatch):
    from quadflow import acceptance

    broken = acceptance.Check("broken", "always fails", ("invariants",), lambda rng: (False, "nope"))
    monkeypatch.setattr(acceptance, "REGISTRY", [broken])
    code, text = run(["verify", "--suite", "invariants"])
    assert code == 1
    assert "FAIL  broken" in text
