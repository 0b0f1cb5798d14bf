import json
import subprocess
import sys
from pathlib import Path

import pytest

from gennum.cli import main

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_eval(capsys):
    code, out, _ = run(capsys, "eval", "e^(1)")
    assert code == 0
    assert "v: 1\n" in out and "norm: e^-1\n" in out


def test_eval_zero(capsys):
    code, out, _ = run(capsys, "eval", "e^(1) - e^(1)")
    assert "v: inf" in out and "norm: 0" in out


def test_dist(capsys):
    code, out, _ = run(capsys, "dist", "e^(1)", "e^(1)+e^(3)")
    assert out.startswith("distance: e^-3\n")


def test_check_e(capsys):
    code, out, _ = run(capsys, "check-e", "const(1)")
    assert code == 0 and out.endswith("verdict: PASS\n")
    code, out, _ = run(capsys, "check-e", "power(-1)")
    assert code == 1 and "clause: valuation" in out


def test_model(capsys):
    code, out, _ = run(capsys, "model", "0", "1", "--point", "4*e^(2)")
    assert code == 0 and "patched: 1\n" in out
    code, out, _ = run(capsys, "model", "0", "1", "--point", "2*e^(1)")
    assert code == 0 and "sphere point: yes" in out
    code, out, _ = run(capsys, "model", "0", "1", "--point", "1")
    assert code == 1


def test_geometric_intersect(capsys):
    code, out, _ = run(capsys, "intersect", str(SCENARIOS / "geometric.json"))
    assert code == 0
    assert "verdict: VERIFIED" in out
    assert "witness: e^(1) + e^(2)" in out and "e^(20)\n" in out


def test_broken_nesting(capsys):
    code, out, _ = run(capsys, "run", str(SCENARIOS / "broken.json"))
    assert code == 1 and "failure: i=5" in out


def test_malformed(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(capsys, "run", str(bad))[0] == 2
    bad.write_text(json.dumps({"kind": "intersect", "balls": [{"center": "e^(", "rho": "1"}]}))
    assert run(capsys, "run", str(bad))[0] == 2
    bad.write_text(json.dumps({"kind": "nope"}))
    assert run(capsys, "run", str(bad))[0] == 2
    assert run(capsys, "run", str(tmp_path / "missing.json"))[0] == 2


def test_kind_mismatch(capsys):
    assert run(capsys, "hb", str(SCENARIOS / "fixpoint.json"))[0] == 2


@pytest.mark.parametrize("name", ["hb", "fixpoint", "check"])
def test_other_scenarios(capsys, name):
    code, out, _ = run(capsys, "run", str(SCENARIOS / f"{name}.json"))
    assert code == 0 and out.endswith("verdict: VERIFIED\n")


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "gennum", "eval", "e^(1/2)"], capture_output=True, text=True)
    assert proc.returncode == 0 and "v: 1/2" in proc.stdout
