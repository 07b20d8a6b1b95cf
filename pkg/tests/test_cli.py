import json
import subprocess
import sys

import pytest

from unitary_eis.cli import main
from unitary_eis.qexp import deserialize, serialize


def run_cli(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_branch_example(capsys):
    code, out, _ = run_cli(capsys, "branch", "--d", "2", "--q", "2", "--s", "2")
    doc = json.loads(out)
    assert code == 0
    assert doc["constituent_dimensions"] == [9, 1] and doc["dimension_sum"] == 10
    assert doc["check"] == "PASS"


def test_branch_restrict(capsys):
    code, out, _ = run_cli(capsys, "branch", "--kind", "restrict", "--d", "2", "--r", "1", "--s", "1")
    assert code == 0 and len(json.loads(out)["constituents"]) == 10


def test_split_prime_config_error(capsys):
    code, out, err = run_cli(capsys, "enum", "--delta", "-1", "--p", "7")
    assert code == 2 and out == ""
    assert "field.p" in err and "prime not split" in err


@pytest.mark.parametrize("argv,path", [
    (["eis", "--n", "2", "--k", "1"], "weight.k"),
    (["theta", "--n", "3", "--k", "3"], "n"),
    (["verify", "--kind", "nonsense"], "kind"),
    (["eis", "--bound", "abc"], "bound"),
    (["hwvec"], "lambda"),
    (["eis", "--cusp", "{bad"], "cusp"),
])
def test_config_errors_carry_paths(capsys, argv, path):
    code, _, err = run_cli(capsys, *argv)
    assert code == 2
    assert err.startswith(f"config error: {path}")


def test_enum(capsys):
    code, out, _ = run_cli(capsys, "enum", "--n", "2", "--bound", "3")
    assert code == 0 and json.loads(out)["count"] == 11


def test_hwvec(capsys):
    code, out, _ = run_cli(capsys, "hwvec", "--lambda", "1,1", "--r", "2", "--s", "2")
    doc = json.loads(out)
    assert code == 0 and len(doc["terms"]) == 2


def test_verify_weight_shift_pass(capsys):
    code, out, _ = run_cli(capsys, "verify", "--kind", "weight-shift", "--k", "4", "--bound", "6",
                           "--precision", "8", "--cusp", "all", "--samples", "2")
    doc = json.loads(out)
    assert code == 0 and doc["status"] == "PASS"
    assert len(doc["runs"]) == 4 and all(r["max_discrepancy"] == 0 for r in doc["runs"])


def test_verify_fail_exit_code(capsys):
    pert = json.dumps({"x": [1, 1], "y": [1, 0, 0, 2]})
    code, out, _ = run_cli(capsys, "verify", "--k", "4", "--bound", "4", "--precision", "6", "--perturb", pert)
    doc = json.loads(out)
    assert code == 1 and doc["status"] == "FAIL" and doc["runs"][0]["mismatches"] >= 1


def test_output_is_deterministic_and_round_trips(capsys, tmp_path):
    args = ["eis", "--n", "2", "--k", "3", "--nu", "1", "--bound", "4", "--precision", "5", "--seed", "3"]
    _, first, _ = run_cli(capsys, *args)
    _, second, _ = run_cli(capsys, *args)
    assert first == second
    f = deserialize(first)
    assert serialize(f).decode() == first.strip()
    out = tmp_path / "theta.json"
    code, _, _ = run_cli(capsys, "theta", "--k", "2", "--lambda", "1", "--bound", "4", "--output", str(out))
    assert code == 0
    text = out.read_text().strip()
    assert serialize(deserialize(text)).decode() == text


def test_config_file_with_flag_override(capsys, tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({
        "field": {"delta": -1, "p": 5}, "n": 2, "bound": 3, "weight": {"k": 2, "nu": 0},
        "mode": {"padic": {"p": 5, "j": 4}},
        "function": {"builtin": "constant", "value": 1, "side": "H"},
    }))
    code, out, _ = run_cli(capsys, "integrate", "--config", str(cfg))
    doc = json.loads(out)
    assert code == 0 and doc["integral"]["mode"] == {"padic": {"p": 5, "j": 4}}
    assert doc["integral"]["bound"] == 3
    code, out, _ = run_cli(capsys, "integrate", "--config", str(cfg), "--bound", "4", "--exact")
    doc = json.loads(out)
    assert doc["integral"]["bound"] == 4 and doc["integral"]["mode"] == "exact"
    assert doc["pullback"]["m"] == 1


def test_bad_config_file(capsys, tmp_path):
    cfg = tmp_path / "bad.json"
    cfg.write_text("{")
    code, _, err = run_cli(capsys, "enum", "--config", str(cfg))
    assert code == 2 and "config" in err
    code, _, err = run_cli(capsys, "enum", "--config", str(tmp_path / "missing.json"))
    assert code == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "unitary_eis", "branch", "--d", "1", "--q", "3", "--s", "2"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["constituents"] == [{"left": [1, 0, 0], "right": [1, 0]}]
