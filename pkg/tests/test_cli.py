import csv
import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from qwdist.cli import main
from qwdist.gates import CNOT
from qwdist.io import matrix_to_json, povm_to_json
from qwdist.budget import example1_povm


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def write(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


def test_w1_unitary_catalog(capsys):
    code, out, _ = run(capsys, "w1-unitary", "--u", "I", "--v", "CNOT")
    assert code == 0
    obj = json.loads(out)
    assert obj["value"] == pytest.approx(math.sqrt(2))
    assert obj["method"] == "analytic-catalog"


def test_w1_unitary_numeric_is_deterministic(capsys):
    args = ("w1-unitary", "--v", "CNOT*(H⊗I)", "--restarts", "4", "--seed", "3")
    _, first, _ = run(capsys, *args)
    _, second, _ = run(capsys, *args)
    assert first == second
    obj = json.loads(first)
    assert obj["method"] == "numeric-ascent"
    assert obj["restarts_used"] == 4


def test_w1_unitary_from_files_with_verify(tmp_path, capsys):
    u = write(tmp_path / "u.json", matrix_to_json(np.eye(4)))
    v = write(tmp_path / "v.json", matrix_to_json(CNOT))
    code, out, _ = run(capsys, "w1-unitary", "--u", u, "--v", v, "--method", "numeric",
                       "--restarts", "4", "--verify")
    obj = json.loads(out)
    assert code == 0
    assert obj["value"] == pytest.approx(math.sqrt(2), abs=1e-2)
    assert obj["verification"]["consistent"]


def test_w1_state_identical(tmp_path, capsys):
    a = write(tmp_path / "a.json", matrix_to_json(np.diag([0.5, 0.25, 0.25, 0.0])))
    code, out, _ = run(capsys, "w1-state", "--rho", a, "--sigma", a, "--verify")
    obj = json.loads(out)
    assert code == 0
    assert obj["value"] == 0.0
    assert obj["verification"]["valid"]


def test_w1_state_vectors(tmp_path, capsys):
    a = write(tmp_path / "a.json", matrix_to_json(np.array([[0], [1], [0], [0]])))
    b = write(tmp_path / "b.json", matrix_to_json(np.array([[0], [0], [1], [0]])))
    code, out, _ = run(capsys, "w1-state", "--rho", a, "--sigma", b, "--format", "csv")
    assert code == 0
    row = next(csv.DictReader(io.StringIO(out)))
    assert float(row["value"]) == pytest.approx(2.0, abs=1e-6)


def test_w1_state_nonconvergence_exit_code(tmp_path, capsys):
    rng = np.random.default_rng(0)
    G = rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8))
    rho = G @ G.conj().T
    rho /= np.trace(rho).real
    a = write(tmp_path / "a.json", matrix_to_json(rho))
    b = write(tmp_path / "b.json", matrix_to_json(np.diag(np.arange(8.0)) / 28))
    code, out, _ = run(capsys, "w1-state", "--rho", a, "--sigma", b, "--tolerance", "1e-12",
                       "--max-iterations", "5")
    assert code == 2
    assert json.loads(out)["converged"] is False


def test_budget_example(capsys):
    code, out, _ = run(capsys, "budget", "--alpha", "0.3", "--t", "5", "--povm", "example1")
    assert code == 0
    assert json.loads(out)["threshold"] == pytest.approx(0.12, abs=1e-12)


def test_budget_scenario_and_pairs(tmp_path, capsys):
    pairs = write(tmp_path / "pairs.json", [{"u": matrix_to_json(np.eye(2)), "v": matrix_to_json(np.eye(2))}])
    povm = write(tmp_path / "povm.json", povm_to_json(example1_povm()))
    code, out, _ = run(capsys, "budget", "--alpha", "0.3", "--t", "5", "--povm", povm, "--pairs", pairs)
    assert code == 0
    assert json.loads(out)["sequence"]["sum"] == 0.0
    code, out, _ = run(capsys, "budget", "--alpha", "0.3", "--t", "5", "--theta", "1.5")
    assert json.loads(out)["scenario"]["admissible"] is False


def test_error_rate_channels(tmp_path, capsys):
    code, out, _ = run(capsys, "error-rate", "--u", "H", "--channel", "depolarizing:0.1", "--restarts", "4")
    assert code == 0
    assert json.loads(out)["exact"] == pytest.approx(0.05)
    code, out, _ = run(capsys, "error-rate", "--u", "CNOT", "--channel", "unitary:CP(theta=pi,k=4)")
    assert json.loads(out)["exact"] == pytest.approx(1 / math.sqrt(2))
    ch = write(tmp_path / "ch.json", {"kind": "mixed", "terms": [
        {"p": 0.5, "matrix": matrix_to_json(np.eye(2))},
        {"p": 0.5, "matrix": matrix_to_json(np.diag([1, -1]))}]})
    code, out, _ = run(capsys, "error-rate", "--u", "H", "--channel", ch, "--restarts", "4")
    assert code == 0
    obj = json.loads(out)
    assert obj["channel"] == "mixed-unitary"
    assert obj["bracket"][0] <= obj["point_estimate"] + 1e-9


def test_catalog_listing_and_lookup(capsys):
    code, out, _ = run(capsys, "catalog")
    rows = json.loads(out)["catalog"]
    assert sum(1 for r in rows if r["gate"].startswith("PERM4")) == 24
    code, out, _ = run(capsys, "catalog", "--v", "SWAP", "--format", "pretty")
    assert code == 0 and "analytic-catalog" in out
    code, out, _ = run(capsys, "catalog", "--v", "CNOT*(H⊗I)")
    assert json.loads(out)["in_catalog"] is False


def test_witness(capsys):
    code, out, _ = run(capsys, "witness", "--theta", str(math.pi), "--amplitudes",
                       f"0.5,0,{1 / math.sqrt(2)},0.5", "--verify")
    obj = json.loads(out)
    assert code == 0
    assert obj["total"] == pytest.approx(math.sqrt(2))
    assert obj["verification"]["consistent"]


@pytest.mark.parametrize("argv,flag", [
    (["w1-unitary", "--v", "FOO"], "--v"),
    (["w1-unitary", "--u", "CNOT", "--v", "X"], "--u"),
    (["budget", "--alpha", "2", "--t", "5"], "--alpha"),
    (["budget", "--alpha", "0.3", "--t", "0"], "--t"),
    (["error-rate", "--u", "H", "--channel", "depolarizing:x"], "--channel"),
    (["error-rate", "--u", "H", "--channel", "depolarizing:1.5"], "--channel"),
    (["witness", "--theta", "1", "--amplitudes", "1,1,0,0"], "--amplitudes"),
    (["w1-unitary", "--v", "X", "--restarts", "0"], "--restarts"),
])
def test_argument_errors_exit_1(capsys, argv, flag):
    code, out, err = run(capsys, *argv)
    assert code == 1
    assert flag in err
    assert out == ""


def test_malformed_file_names_field(tmp_path, capsys):
    bad = write(tmp_path / "rho.json", {"rows": 2, "cols": 2, "data": [[1, 0]]})
    ok = write(tmp_path / "ok.json", matrix_to_json(np.eye(2) / 2))
    code, _, err = run(capsys, "w1-state", "--rho", bad, "--sigma", ok)
    assert code == 1
    assert "--rho" in err and "expected 4 entries" in err
    code, _, err = run(capsys, "w1-state", "--rho", ok, "--sigma", str(tmp_path / "none.json"))
    assert code == 1 and "--sigma" in err


def test_parser_errors_exit_1(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["w1-unitary"])
    assert exc.value.code == 1
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 1


def test_reproduce_paper_writes_outputs(tmp_path, capsys):
    code, out, _ = run(capsys, "reproduce-paper", "--out", str(tmp_path), "--format", "csv")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert rows and all(r["status"] in ("pass", "flagged") for r in rows)
    assert (tmp_path / "reproduce.csv").read_text() == out
    for name in ("controlled_phase_distance", "cnot_unitary_error_rate", "cnot_depolarizing_bracket"):
        assert (tmp_path / f"{name}.csv").exists()
        assert (tmp_path / f"{name}.png").stat().st_size > 0


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "qwdist", "catalog", "--v", "CZ"], capture_output=True, text=True)
    assert res.returncode == 0
    assert json.loads(res.stdout)["value"] == pytest.approx(math.sqrt(2))
