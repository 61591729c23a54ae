import csv
import io
import json
from fractions import Fraction
from pathlib import Path

import pytest

from hausfill.cli import main

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_dimension_csv(capsys):
    code, out, _ = run(capsys, "--config", str(CONFIGS / "dimension_cantor.cfg"))
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 8
    assert float(rows[0]["slope"]) == pytest.approx(0.6309, abs=0.02)


def test_fill_certificate(capsys):
    code, out, _ = run(capsys, "fill", "--depth", "6")
    assert code == 0
    doc = json.loads(out)
    levels = doc["result"]["certificate"]["levels"]
    assert len(levels) == 6
    for row in levels:
        assert Fraction(row["smallness_exact"]) < Fraction(1, row["n"])
    assert doc["config"]["depth"] == 6 and doc["config"]["space"] == "square"


def test_fill_trace_csv(capsys):
    code, out, _ = run(capsys, "fill", "--depth", "2", "--format", "csv", "--sample-size", "5")
    assert code == 0
    assert out.splitlines()[0] == "x,level,f0,f1,error_bound"
    assert len(out.splitlines()) == 1 + 5 * 3


def test_empty_config_is_invalid(capsys, tmp_path):
    p = tmp_path / "empty.cfg"
    p.write_text("# nothing\n\n")
    code, _, err = run(capsys, "--config", str(p))
    assert code == 4
    assert json.loads(err)["error"]["code"] == "config-invalid"


@pytest.mark.parametrize("argv,code", [
    ((), 4),
    (("explode",), 4),
    (("fill", "--s-dim", "0.5"), 4),
    (("fill", "--space", "snowflake:1:0.5"), 4),
    (("hfun", "frobnicate"), 4),
    (("dimension", "--depth", "ten"), 4),
    (("measure", "--deltas", "0.1,0.2"), 2),
    (("dimension", "--set", "empty"), 10),
    (("fill", "--set", "point:0.5", "--depth", "2"), 6),
    (("blowup", "--depth", "13"), 8),
    (("net", "--space", "cube:2", "--levels", "30"), 5),
])
def test_error_codes(capsys, argv, code):
    got, out, err = run(capsys, *argv)
    assert got == code
    assert out == ""
    assert json.loads(err)["status"] == "error"


def test_unknown_config_key(capsys, tmp_path):
    p = tmp_path / "bad.cfg"
    p.write_text("command = dimension\nflavour = mint\n")
    code, _, err = run(capsys, "--config", str(p))
    assert code == 4 and "flavour" in err


def test_overrides_win(capsys, tmp_path):
    p = tmp_path / "d.cfg"
    p.write_text("command = dimension\nset = square\ndepth_lo = 2\ndepth = 6\n")
    code, out, _ = run(capsys, "--config", str(p), "--set", "cantor")
    doc = json.loads(out)
    assert doc["config"]["set"] == "cantor"
    assert doc["result"]["slope"] == pytest.approx(0.6309, abs=0.02)


def test_out_file(capsys, tmp_path):
    target = tmp_path / "net.json"
    code, out, _ = run(capsys, "net", "--space", "circle", "--levels", "3", "--out", str(target))
    assert code == 0 and out == ""
    assert json.loads(target.read_text())["result"]["sizes"] == [1, 2, 4, 8]


def test_hfun_actions(capsys):
    _, out, _ = run(capsys, "hfun", "precedes", "--gauge", "power:0.5", "--gauge2", "dimfun:1")
    assert json.loads(out)["result"]["verdict"] == "precedes"
    _, out, _ = run(capsys, "hfun", "check", "--gauge", "exp-inv")
    assert json.loads(out)["result"]["verdict"] == "not-finite-order"


def test_measure_trend(capsys):
    _, out, _ = run(capsys, "--config", str(CONFIGS / "measure_cantor.cfg"))
    assert json.loads(out)["result"]["trend"] == "growing"


def test_module_entry_point():
    import subprocess
    import sys

    res = subprocess.run([sys.executable, "-m", "hausfill", "net", "--levels", "2", "--format", "csv"],
                         capture_output=True, text=True, check=True)
    assert res.stdout.splitlines()[0] == "n,k,covering_radius,bound"
