import csv
import io
import json
from fractions import Fraction

import pytest

from selfish_cc.cli import ExperimentConfig, cmd_tradeoff, main, to_decimal


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows_of(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_to_decimal():
    assert to_decimal(Fraction(77, 6)) == "12.8333333333"
    assert to_decimal(Fraction(20)) == "20"
    assert to_decimal(Fraction(0)) == "0"
    assert to_decimal(Fraction(1, 3), 4) == "0.3333"
    assert to_decimal(Fraction(-7, 2)) == "-3.5"


def test_tradeoff_20_12(capsys):
    code, out, _ = run(capsys, "tradeoff", "--K", "20", "--alpha", "12")
    assert code == 0
    rows = rows_of(out)
    assert len(rows) == 21
    assert [rows[0][c] for c in ("R_lb", "R_man", "R_uncoded_selfish", "R_uncoded_unselfish")] == ["20"] * 4
    assert rows[12]["R_lb"] == "0" and rows[12]["R_uncoded_selfish"] == "0"
    assert rows[1]["R_lb"] == "12.8333333333"
    assert rows[13]["R_lb"] == "" and rows[13]["R_man"] != ""


def test_tradeoff_is_deterministic(capsys):
    _, a, _ = run(capsys, "tradeoff", "--K", "9", "--alpha", "4", "--f", "2")
    _, b, _ = run(capsys, "tradeoff", "--K", "9", "--alpha", "4", "--f", "2")
    assert a == b


def test_tradeoff_json_has_exact_values(capsys):
    code, out, _ = run(capsys, "tradeoff", "--K", "20", "--alpha", "12", "--format", "json")
    data = json.loads(out)
    cell = data["rows"][1]["R_lb"]
    assert (cell["num"], cell["den"]) == (77, 6)
    assert data["rows"][13]["R_lb"] is None


def test_tradeoff_gnuplot(capsys):
    _, out, _ = run(capsys, "tradeoff", "--K", "4", "--alpha", "2", "--gnuplot")
    lines = out.splitlines()
    assert lines[0].startswith("# t M R_lb")
    assert lines[3].split()[2] == "0"  # t = alpha
    assert lines[4].split()[2] == "NaN"


def test_tradeoff_warns_alpha_equals_K(capsys):
    code, _, err = run(capsys, "tradeoff", "--K", "4", "--alpha", "4", "--f", "1")
    assert code == 0 and "f >= K" in err


def test_gains_row(capsys):
    code, out, _ = run(capsys, "gains", "--K", "20", "--gamma", "1/20")
    row = rows_of(out)[0]
    assert row["unselfish"] == "2"
    assert row["bound[K/2]"] == "1.33333333333"
    assert row["limit[K/2]"] == "2"


def test_gains_default_grid(capsys):
    _, out, _ = run(capsys, "gains")
    rows = rows_of(out)
    assert [int(r["K"]) for r in rows] == list(range(20, 401, 20))
    for r in rows:
        assert float(r["bound[K/2]"]) < float(r["limit[K/2]"])


@pytest.mark.parametrize("scenario,load", [("5-4-1-t2", "7/6"), ("5-4-1-t3", "1/2"), ("6-5-1-t3", "9/10"), ("5-3-3-t2", "1")])
def test_demo_scenarios(capsys, scenario, load):
    code, out, _ = run(capsys, "demo", "--scenario", scenario)
    assert code == 0
    assert f"load {load} " in out and "TIGHT" in out


def test_demo_json(capsys):
    code, out, _ = run(capsys, "demo", "--scenario", "6-5-1-t3", "--format", "json")
    data = json.loads(out)
    assert data["ok"] and len(data["messages"]) == 9
    assert (data["load"]["num"], data["load"]["den"]) == (9, 10)


def test_demo_needs_scenario(capsys):
    code, _, err = run(capsys, "demo")
    assert code == 2 and "scenario" in err


def test_verify_541(capsys):
    code, out, _ = run(capsys, "verify", "--K", "5", "--alpha", "4")
    assert code == 0
    status = {r["property"]: r["status"] for r in rows_of(out)}
    assert status["circular-schemes"] == "pass"
    assert "fail" not in status.values()


def test_verify_641_counts_720(capsys):
    code, out, _ = run(capsys, "verify", "--K", "6", "--alpha", "4", "--format", "json")
    data = {r["property"]: r for r in json.loads(out)}
    assert code == 0
    assert data["averaged-bound"]["detail"].startswith("720 bounds")


def test_verify_322(capsys):
    code, out, _ = run(capsys, "verify", "--K", "3", "--alpha", "2", "--f", "2")
    status = {r["property"]: (r["status"], r["detail"]) for r in rows_of(out)}
    assert code == 0
    assert status["circular-count"][0] == "pass" and "formula 16" in status["circular-count"][1]


def test_verify_reports_cap_per_property(capsys):
    code, out, _ = run(capsys, "verify", "--K", "5", "--alpha", "3", "--cap", "10")
    status = {r["property"]: r["status"] for r in rows_of(out)}
    assert code == 3
    assert status["acyclic-sets"] == "cap-exceeded"
    assert status["coefficient-forms"] == "pass"


def test_count(capsys):
    _, out, _ = run(capsys, "count", "--K", "6", "--alpha", "4")
    row = rows_of(out)[0]
    assert row["circular"] == "120" and row["circular_enumerated"] == "120"
    _, out, _ = run(capsys, "count", "--K", "5", "--alpha", "4")
    assert rows_of(out)[0]["circular_distinct"] == "24"
    _, out, _ = run(capsys, "count", "--K", "2", "--alpha", "1")
    assert rows_of(out)[0]["valid"] == "1"


def test_count_beyond_cap(capsys):
    code, out, _ = run(capsys, "count", "--K", "12", "--alpha", "6")
    assert code == 0 and rows_of(out)[0]["valid_enumerated"] == ""
    code, _, err = run(capsys, "count", "--K", "12", "--alpha", "6", "--enumerate")
    assert code == 3 and "cap" in err


def test_invalid_config(capsys):
    assert run(capsys, "tradeoff", "--K", "3", "--alpha", "5")[0] == 2
    assert run(capsys, "tradeoff")[0] == 2
    assert run(capsys, "verify", "--K", "5", "--alpha", "4", "--t", "7")[0] == 2
    assert run(capsys, "nonsense")[0] == 2
    assert run(capsys, "gains", "--gamma", "abc")[0] == 2


def test_out_file(tmp_path, capsys):
    path = tmp_path / "t.csv"
    assert main(["tradeoff", "--K", "5", "--alpha", "4", "--out", str(path)]) == 0
    assert path.read_text().startswith("t,M,R_lb")
    assert capsys.readouterr().out == ""


def test_cmd_tradeoff_direct():
    tab = cmd_tradeoff(ExperimentConfig("tradeoff", K=20, alpha=12))
    lb = [r[2] for r in tab.rows[:13]]
    assert lb[0] == 20 and lb[12] == 0
    assert all(a > b for a, b in zip(lb, lb[1:]))
