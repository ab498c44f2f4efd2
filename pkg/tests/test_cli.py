import csv
import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from tanglekit import cli
from tanglekit.bipartite import negativity
from tanglekit.core import DensityMatrix, PureState, named_state, random_density_matrix
from tanglekit.stateio import dump_state, load_state
from tanglekit.symfam import family_state, ghzw_curve

SQ3 = math.sqrt(3)


@pytest.fixture
def files(tmp_path):
    states = {
        "ghz": named_state("ghz", n=3),
        "w": named_state("w", n=3),
        "bell": named_state("bell"),
        "product": PureState(np.array([1, 0, 0, 0]), (2, 2)),
        "mixed8": DensityMatrix(np.eye(8) / 8, (2, 2, 2)),
        "ghz4": named_state("ghz", n=4),
        "ghzsym": family_state("ghzsym", x=0.45, y=0.4),
        "r22": random_density_matrix((2, 2), 4),
    }
    out = {}
    for name, s in states.items():
        out[name] = tmp_path / f"{name}.json"
        dump_state(s, out[name])
    (tmp_path / "bad.json").write_text("{not json")
    out["bad"] = tmp_path / "bad.json"
    return out


def run(argv):
    buf = io.StringIO()
    code = cli.main([str(a) for a in argv], out=buf)
    return code, buf.getvalue()


# ------------------------------------------------------------ measure

def test_measure_ghz_tau3(files):
    code, text = run(["measure", "--state", files["ghz"], "--measures", "tau3"])
    assert code == 0
    doc = json.loads(text)
    assert doc["seed"] == 0
    (row,) = doc["measures"]
    assert row["name"] == "tau3" and row["kind"] == "exact"
    assert row["value"] == pytest.approx(1, abs=1e-12)


def test_measure_bell_negativity_csv(files):
    code, text = run(["measure", "--state", files["bell"], "--measures", "negativity", "--csv"])
    assert code == 0
    lines = text.splitlines()
    assert lines[0] == "# seed=0"
    rows = list(csv.DictReader(lines[1:]))
    assert float(rows[0]["value"]) == pytest.approx(0.5)


def test_every_value_has_kind(files):
    code, text = run(["measure", "--state", files["r22"], "--measures",
                      "negativity,concurrence,eof,fef,cren"])
    assert code == 0
    for row in json.loads(text)["measures"]:
        assert row["kind"] in ("exact", "lower", "upper")


def test_malformed_json(files, capsys):
    code, text = run(["measure", "--state", files["bad"], "--measures", "tau3"])
    assert code == 2
    assert text == ""
    assert "invalid JSON" in capsys.readouterr().err


def test_missing_file(tmp_path):
    assert run(["measure", "--state", tmp_path / "none.json", "--measures", "tau3"])[0] == 2


def test_unknown_measure(files):
    assert run(["measure", "--state", files["bell"], "--measures", "nope"])[0] == 2


def test_dimension_mismatch(files, capsys):
    code, _ = run(["measure", "--state", files["bell"], "--measures", "tau3"])
    assert code == 3
    assert "dimension" in capsys.readouterr().err


def test_argparse_errors_exit_2():
    with pytest.raises(SystemExit) as exc:
        run(["measure"])
    assert exc.value.code == 2


def test_timing_opt_in(files):
    _, plain = run(["measure", "--state", files["bell"], "--measures", "negativity"])
    _, timed = run(["measure", "--state", files["bell"], "--measures", "negativity", "--timing"])
    assert "seconds" not in plain
    assert "seconds" in json.loads(timed)["measures"][0]


def test_roundtrip_changes_little(files, tmp_path):
    rho = load_state(files["r22"])
    again = tmp_path / "again.json"
    dump_state(rho, again)
    assert abs(negativity(load_state(again)) - negativity(rho)) < 1e-9


# ------------------------------------------------------------ classify

def test_classify_w(files):
    doc = json.loads(run(["classify", "--state", files["w"]])[1])
    assert doc["class"] == "W"
    assert doc["invariants"]["tau3"] == pytest.approx(0, abs=1e-12)


def test_classify_bell(files):
    doc = json.loads(run(["classify", "--state", files["bell"]])[1])
    assert doc["class"] == "entangled, Schmidt number ≥ 2"


def test_classify_product(files):
    assert json.loads(run(["classify", "--state", files["product"]])[1])["class"] == "separable"


def test_classify_ghz_symmetric(files):
    doc = json.loads(run(["classify", "--state", files["ghzsym"]])[1])
    assert doc["class"] == "GHZ"
    assert doc["invariants"]["x"] == pytest.approx(0.45)


def test_classify_unsupported(files):
    assert run(["classify", "--state", files["ghz4"]])[0] == 4


# ------------------------------------------------------------ witness

@pytest.mark.parametrize("name,witness,value,detected", [
    ("ghz", "ghz_proj", -0.25, True),
    ("mixed8", "ghz_proj", 0.625, False),
    ("bell", "proj2qubit", -0.5, True),
])
def test_witness(files, name, witness, value, detected):
    doc = json.loads(run(["witness", "--state", files[name], "--witness", witness])[1])
    assert doc["value"] == pytest.approx(value)
    assert doc["detected"] is detected


def test_witness_unknown_name(files):
    with pytest.raises(SystemExit) as exc:
        run(["witness", "--state", files["ghz"], "--witness", "nope"])
    assert exc.value.code == 2


def test_witness_dims(files):
    assert run(["witness", "--state", files["bell"], "--witness", "ghz_proj"])[0] == 3


# ------------------------------------------------------------ scan

def read_scan(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_scan_grid_one(tmp_path):
    for family in ("ghzsym", "axi"):
        out = tmp_path / f"{family}.csv"
        assert run(["scan", "--family", family, "--grid", 1, "--out", out])[0] == 0
        rows = read_scan(out)
        assert len(rows) == 1
        assert float(rows[0]["x"]) == 0 and float(rows[0]["y"]) == 0


def test_scan_columns_and_format(tmp_path):
    out = tmp_path / "g.csv"
    run(["scan", "--family", "ghzsym", "--grid", 7, "--out", out])
    text = out.read_text().splitlines()
    assert text[0] == "x,y,class,tau3,gmec,negativity"
    for line in text[1:]:
        for cell in line.split(",")[:2]:
            assert len(cell.replace("-", "").replace(".", "").lstrip("0")) <= 12


def test_scan_unwritable(tmp_path):
    assert run(["scan", "--family", "ghzsym", "--grid", 3, "--out", tmp_path / "no" / "x.csv"])[0] == 2


def _in_polygon(poly, x, y):
    """Even-odd rule over all edges at once."""
    p = np.asarray(poly)
    x1, y1 = p[:, 0], p[:, 1]
    x2, y2 = np.roll(x1, -1), np.roll(y1, -1)
    with np.errstate(divide="ignore", invalid="ignore"):
        cross = ((y1 > y) != (y2 > y)) & (x < x1 + (y - y1) * (x2 - x1) / (y2 - y1))
    return bool(cross.sum() % 2)


def test_scan_ghzsym_matches_curve(tmp_path):
    m = 100
    out = tmp_path / "g.csv"
    run(["scan", "--family", "ghzsym", "--grid", m, "--out", out])
    rows = read_scan(out)
    curve = np.array([ghzw_curve(v) for v in np.linspace(0, 1, 2001)])
    # GHZ side of the curve, padded past the triangle edges so that grid
    # points on an edge are not ambiguous
    region = [tuple(p) for p in curve] + [(1.0, curve[-1, 1]), (1.0, 1.0), (0.0, 1.0)]
    cell = math.hypot(1 / (m - 1), (SQ3 / 4 + 1 / (4 * SQ3)) / (m - 1))
    mismatches = 0
    for r in rows:
        x, y = float(r["x"]), float(r["y"])
        if (r["class"] == "GHZ") != _in_polygon(region, abs(x), y):
            gap = np.hypot(curve[:, 0] - abs(x), curve[:, 1] - y).min()
            assert gap <= cell, (x, y, r["class"])
            mismatches += 1
    assert len(rows) > m * m / 3
    assert mismatches < m


def test_scan_axi_bands(tmp_path):
    d, m = 4, 100
    out = tmp_path / "a.csv"
    run(["scan", "--family", "axi", "--d", d, "--grid", m, "--out", out])
    rows = read_scan(out)
    rng = np.random.default_rng(0)
    for i in rng.choice(len(rows), 300, replace=False):
        r = rows[i]
        x, y = float(r["x"]), float(r["y"])
        n = negativity(family_state("axi", x=x, y=y, d=d))
        assert float(r["negativity"]) == pytest.approx(n, abs=1e-9)
        if x >= 0:
            k = int(r["class"][1:])
            assert k - 2 - 1e-9 <= 2 * n <= k - 1 + 1e-9
        else:
            assert r["class"] == ""


def test_scan_thread_independent(tmp_path, monkeypatch):
    outs = []
    for threads in ("1", "4"):
        monkeypatch.setenv("TANGLEKIT_THREADS", threads)
        out = tmp_path / f"t{threads}.csv"
        run(["scan", "--family", "ghzsym", "--grid", 30, "--out", out])
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


# ------------------------------------------------------------ entry point

def test_console_script_byte_identical(files):
    cmd = [sys.executable, "-m", "tanglekit.cli", "measure", "--state", str(files["r22"]),
           "--measures", "negativity,cren,fef", "--seed", "3"]
    a = subprocess.run(cmd, capture_output=True, check=True).stdout
    b = subprocess.run(cmd, capture_output=True, check=True).stdout
    assert a == b
    assert json.loads(a)["seed"] == 3
