import io
import json
from importlib import resources

import pytest

from lobthermo.calibration import depth_to_csv
from lobthermo.cli import run
from lobthermo.gibbs import GasParams, mean_bid_occupancy

DATA = resources.files("lobthermo") / "data"
WORKED = str(DATA / "worked_book.json")
HEADER = "date,open,high,low,close,volume\n"
GAS = ["--t-bid", "2", "--mu-bid", "-4", "--t-ask", "3", "--mu-ask", "-5"]


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return str(p)


def test_clear_worked(capsys):
    assert run(["clear", "--input", WORKED]) == 0
    assert capsys.readouterr().out == "price,tradeable\n24.00,1000\n"


def test_clear_json(capsys):
    assert run(["clear", "--input", WORKED, "--format", "json", "--prev-close", "23.90"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["price"] == 24.0 and doc["tradeable"] == 1000
    assert [lv["tradeable"] for lv in doc["levels"]] == [400, 1000, 200]


def test_clear_stdin(capsys, monkeypatch):
    monkeypatch.setattr("sys.stdin", io.StringIO((DATA / "worked_book.json").read_text()))
    assert run(["clear", "--input", "-"]) == 0
    assert "24.00,1000" in capsys.readouterr().out


def test_clear_no_trade(tmp_path, capsys):
    path = write(tmp_path, "b.json", '{"tick": 1, "orders": [{"side": "bid", "price": 5, "qty": 3}]}')
    assert run(["clear", "--input", path]) == 1
    assert "NoTrade" in capsys.readouterr().err


def test_clear_bad_json(tmp_path, capsys):
    assert run(["clear", "--input", write(tmp_path, "b.json", "{oops")]) == 2
    assert "ParseError" in capsys.readouterr().err


def test_missing_file(capsys):
    assert run(["clear", "--input", "/nonexistent/book.json"]) == 2


def test_thermo_header_only(tmp_path, capsys):
    assert run(["thermo", "--input", write(tmp_path, "e.csv", HEADER)]) == 0
    assert capsys.readouterr().out.count("\n") == 1
    assert run(["thermo", "--input", write(tmp_path, "e.csv", HEADER), "--format", "json"]) == 0
    assert capsys.readouterr().out == "[]\n"


def test_thermo_options(tmp_path, capsys):
    text = HEADER + "2020-01-01,10,10,10,10,5\n" + "".join(
        f"2020-01-0{d},10,12,9,10,1000\n" for d in range(2, 7)
    )
    path = write(tmp_path, "b.csv", text)
    out = str(tmp_path / "o.csv")
    assert run(["thermo", "--input", path, "--vao-window", "5", "--output", out]) == 0
    last = open(out).read().splitlines()[-1]
    assert last.split(",")[7] == "5000"


def test_thermo_zero_volume_policy(tmp_path, capsys):
    path = write(tmp_path, "b.csv", HEADER + "2020-01-01,10,10,10,10,5\n2020-01-02,10,12,9,10,0\n")
    assert run(["thermo", "--input", path]) == 0
    assert capsys.readouterr().out.splitlines()[1].endswith("ZERO_VOLUME")
    assert run(["thermo", "--input", path, "--keep-zero-volume"]) == 1
    assert "ZeroVolume" in capsys.readouterr().err


@pytest.mark.parametrize(
    "body,code,name",
    [
        ("2020-01-02,10,9,12,10,1\n", 1, "InvariantError"),
        ("2020-01-02,10,12,9,10,1\n2020-01-01,10,12,9,10,1\n", 1, "OrderingError"),
        ("2020-01-02,10,12,9,10,x\n", 2, "ParseError"),
        ("2020-01-02,10,12,9,10,1\n", 1, "TooFewBars"),
    ],
)
def test_thermo_errors(tmp_path, capsys, body, code, name):
    assert run(["thermo", "--input", write(tmp_path, "b.csv", HEADER + body)]) == code
    assert name in capsys.readouterr().err


def test_fit_ok(tmp_path, capsys):
    g = GasParams.bid(2.0, -4.0)
    pts = [(e, mean_bid_occupancy(e, g)) for e in (-3, -2, -1, 0, 1)]
    assert run(["fit", "--side", "bid", "--input", write(tmp_path, "d.csv", depth_to_csv(pts))]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["status"] == "ok"
    assert doc["temperature"] == pytest.approx(2.0, rel=1e-9)
    assert doc["chemical_potential"] == pytest.approx(-4.0, rel=1e-9)


def test_fit_one_point(tmp_path, capsys):
    assert run(["fit", "--side", "bid", "--input", write(tmp_path, "d.csv", "offset,quantity\n0,1\n")]) == 1
    assert "InsufficientData" in capsys.readouterr().err


def test_fit_wrong_slope_is_data(tmp_path, capsys):
    text = "offset,quantity\n-1,0.1\n0,0.5\n1,2\n"
    assert run(["fit", "--side", "bid", "--input", write(tmp_path, "d.csv", text)]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["status"] == "WrongSlopeSign" and doc["slope"] < 0


def test_sample_deterministic(capsys):
    argv = ["sample", *GAS, "--prev-close", "100", "--tick", "0.05", "--seed", "9"]
    assert run(argv) == 0
    first = capsys.readouterr().out
    assert run(argv) == 0
    assert capsys.readouterr().out == first
    assert json.loads(first)["tick"] == 0.05


def test_sample_then_clear(tmp_path, capsys):
    assert run(["sample", *GAS, "--prev-close", "100", "--tick", "0.05", "--mean",
                "--output", str(tmp_path / "m.json")]) == 0
    assert run(["clear", "--input", str(tmp_path / "m.json"), "--prev-close", "100"]) == 0
    price = capsys.readouterr().out.splitlines()[1].split(",")[0]
    assert abs(float(price) - 99.60) <= 0.05 + 1e-12


def test_sample_empty_grid(capsys):
    argv = ["sample", "--t-bid", "1", "--mu-bid", "-0.01", "--t-ask", "1", "--mu-ask", "-0.01",
            "--prev-close", "100", "--tick", "0.05"]
    assert run(argv) == 1
    assert "EmptyGrid" in capsys.readouterr().err


def test_curve(capsys):
    assert run(["curve", *GAS, "--tick", "0.5"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "offset,bid,ask"
    offsets = [float(l.split(",")[0]) for l in lines[1:]]
    assert offsets[0] == -3.5 and offsets[-1] == 4.5
    row = dict(zip(("offset", "bid", "ask"), lines[1:][offsets.index(0.0)].split(",")))
    assert float(row["bid"]) == pytest.approx(1 / (2.718281828459045**2 - 1), rel=1e-12)


def test_curve_json(capsys):
    assert run(["curve", *GAS, "--tick", "1", "--format", "json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert [d["offset"] for d in doc] == [-3, -2, -1, 0, 1, 2, 3, 4]


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["bogus"],
        ["curve", "--t-bid", "-1", "--mu-bid", "-4", "--t-ask", "3", "--mu-ask", "-5"],
        ["curve", "--t-bid", "1", "--mu-bid", "4", "--t-ask", "3", "--mu-ask", "-5"],
        ["thermo", "--vao-window", "0"],
        ["thermo", "--format", "xml"],
        ["sample", *GAS, "--prev-close", "100", "--tick", "0"],
        ["fit", "--side", "middle"],
    ],
)
def test_usage_errors(argv, capsys):
    assert run(argv) == 2
    assert "usage" in capsys.readouterr().err
