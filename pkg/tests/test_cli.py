import json
import math
import subprocess
import sys

import jsonschema
import pytest

from gromolab.cli import main
from gromolab.schema import REPORT_SCHEMA

VALIDATOR = jsonschema.Draft202012Validator(REPORT_SCHEMA)


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def report(capsys, *argv):
    code, out, err = run(capsys, *argv)
    doc = json.loads(out)
    VALIDATOR.validate(doc)
    return code, doc


def test_schema_is_well_formed():
    jsonschema.Draft202012Validator.check_schema(REPORT_SCHEMA)


def test_classify_example(capsys):
    code, doc = report(capsys, "classify", "--matrix", "2,0;0,0.5")
    assert code == 0 and doc["status"] == "ok"
    p = doc["payload"]
    assert p["class"] == "Hyperbolic" and p["fixed"] == [0, "inf"]
    assert p["length"] == pytest.approx(1.386294, abs=1e-6)
    assert doc["config"]["seed"] == 0


def test_classify_other_classes(capsys):
    assert report(capsys, "classify", "--matrix", "1,1;0,1")[1]["payload"]["class"] == "Parabolic"
    assert report(capsys, "classify", "--matrix", "0,1;-1,0")[1]["payload"]["class"] == "Elliptic"


@pytest.mark.parametrize("matrix", ["2,0;0", "1,2;3,4", "a,b;c,d", ""])
def test_malformed_matrix_exits_two(capsys, matrix):
    code, doc = report(capsys, "classify", "--matrix", matrix)
    assert code == 2 and doc["status"] == "error" and doc["error"]


def test_growth_csv_and_json(capsys, tmp_path):
    csv_file = tmp_path / "g.csv"
    code, doc = report(capsys, "growth", "--group", "free:2", "--rmax", "6", "--csv", str(csv_file))
    assert code == 0
    rows = csv_file.read_text().strip().split("\n")
    assert rows[0] == "R,count"
    assert [tuple(map(int, r.split(","))) for r in rows[1:]] == [(R, 2 * 3**R - 1) for R in range(7)]
    code, out, _ = run(capsys, "growth", "--group", "free:2", "--rmax", "6", "--format", "csv")
    assert out.strip().split("\n")[-1] == "6,1457"


def test_growth_tree_prefix_and_bad_group(capsys):
    assert report(capsys, "growth", "--group", "tree:free:2", "--rmax", "3")[0] == 0
    assert report(capsys, "growth", "--group", "torus:2", "--rmax", "3")[0] == 2


def test_delta_commands(capsys):
    code, doc = report(capsys, "delta", "--space", "tree:free:2", "--samples", "200", "--radius", "3")
    assert code == 0 and doc["payload"]["value"] == 0
    code, doc = report(capsys, "delta", "--samples", "500", "--box", "-2,2,0.5,3")
    assert code == 0 and 0 < doc["payload"]["value"] <= math.log(3) + 1e-9


def test_length_command(capsys):
    code, doc = report(capsys, "length", "--matrix", "2,0;0,0.5", "--base", "1,1", "--nmax", "256")
    assert code == 0
    p = doc["payload"]
    assert p["lo"] <= 2 * math.log(2) <= p["hi"]


def test_empirical_delta_needs_acceptance(capsys):
    code, doc = report(capsys, "length", "--matrix", "2,0;0,0.5", "--delta", "empirical")
    assert code == 2 and "accept" in doc["error"]
    code, _ = report(capsys, "length", "--matrix", "2,0;0,0.5", "--nmax", "64",
                     "--delta", "empirical", "--accept-empirical-delta")
    assert code == 0


def test_margulis_command(capsys):
    code, doc = report(capsys, "margulis", "--matrix", "1.2840254166877414,0;0,0.7788007830714049",
                       "--R", "2", "--samples", "200", "--grid", "-1,1,0.5,2,5,5")
    assert code == 0 and doc["status"] == "ok"


def test_pingpong_modes(capsys):
    code, doc = report(capsys, "pingpong", "--a", "1,2;0,1", "--b", "1,0;2,1", "--base", "0,1")
    assert code == 1 and doc["status"] == "failed"
    assert doc["payload"]["verdict"] == "FAIL"
    code, doc = report(capsys, "pingpong", "--a", "1,4;0,1", "--b", "1,0;4,1", "--base", "0,1",
                       "--mode", "schottky", "--range", "2")
    assert doc["payload"]["mode"] == "schottky"
    assert code in (0, 1)


def test_oracle_exit_codes(capsys):
    code, doc = report(capsys, "oracle", "--a", "1,2;0,1", "--b", "1,0;2,1", "--maxlen", "6")
    assert code == 0 and doc["payload"]["relation"] is None
    code, doc = report(capsys, "oracle", "--a", "1,1;0,1", "--b", "1,0;1,1", "--maxlen", "6")
    assert code == 3 and doc["status"] == "relation_found"
    assert doc["payload"]["relation"] == ["aBa", "AbA"]
    code, doc = report(capsys, "oracle", "--a", "1.5,0;0,0.6666666666666666", "--b", "1,0;1,1", "--maxlen", "3")
    assert code == 2


def test_bounds_command(capsys):
    code, doc = report(capsys, "bounds", "--name", "collar_lower",
                       "--params", "delta=ln3,alpha=1.3169578969248166,H=1,sys=0.01")
    assert code == 0
    assert doc["payload"]["values"]["N1"] == 11
    assert doc["payload"]["values"]["value"] == pytest.approx(math.log(100 / 11) / 11, abs=1e-10)
    code, doc = report(capsys, "bounds", "--name", "entropy_lower_group", "--params", "delta=0,entropy=0.01")
    assert code == 1
    code, doc = report(capsys, "bounds", "--name", "entropy_lower_group", "--params", "delta=0,entropy=ln3")
    assert code == 0
    assert report(capsys, "bounds", "--name", "nope")[0] == 2
    assert report(capsys, "bounds", "--name", "tube_radii", "--params", "delta=ln3,alpha=1,H=1,eps=5")[0] == 2


def test_unknown_flag_exits_two(capsys):
    assert main(["classify", "--bogus"]) == 2
    capsys.readouterr()


def test_thread_variable_is_validated(capsys, monkeypatch):
    monkeypatch.setenv("GROMOLAB_THREADS", "zero")
    code, doc = report(capsys, "classify", "--matrix", "2,0;0,0.5")
    assert code == 2 and "GROMOLAB_THREADS" in doc["error"]
    monkeypatch.setenv("GROMOLAB_THREADS", "4")
    assert report(capsys, "classify", "--matrix", "2,0;0,0.5")[0] == 0


def test_output_file(capsys, tmp_path):
    target = tmp_path / "r.json"
    code, out, _ = run(capsys, "classify", "--matrix", "2,0;0,0.5", "--output", str(target))
    assert code == 0 and out == ""
    VALIDATOR.validate(json.loads(target.read_text()))


def test_repeat_runs_are_byte_identical(capsys):
    argv = ["delta", "--samples", "300", "--seed", "7"]
    first = run(capsys, *argv)[1]
    assert first == run(capsys, *argv)[1]
    assert first != run(capsys, "delta", "--samples", "300", "--seed", "8")[1]


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "gromolab", "classify", "--matrix", "2,0;0,0.5"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["payload"]["class"] == "Hyperbolic"
    assert "Hyperbolic" in proc.stderr
