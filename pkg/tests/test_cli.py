import csv
import io
import json
import os
import re

import numpy as np
import pytest

from epochscan.cli import RunConfig, main
from epochscan.report import SCHEMA_PATH
from epochscan.synth import ProcessSpec, generate

GARCH = {"omega": 0.05, "alpha": 0.10, "beta": 0.80}
FAST = ["--rals-reps", "1000"]


def _write_prices(path, returns):
    prices = 50.0 * np.exp(np.concatenate([[0.0], np.cumsum(returns)]))
    dates = np.datetime64("2003-06-02") + np.arange(prices.shape[0])
    with open(path, "w") as fh:
        fh.write("date,price\n")
        for d, p in zip(dates, prices):
            fh.write(f"{d},{float(p)!r}\n")
    return str(path)


@pytest.fixture(scope="module")
def inputs(tmp_path_factory):
    base = tmp_path_factory.mktemp("inputs")
    garch = _write_prices(base / "garch.csv",
                          0.01 * generate(ProcessSpec("garch11", 2000, seed=1, params=GARCH)))
    noise = _write_prices(base / "noise.csv",
                          0.01 * generate(ProcessSpec("gaussian_iid", 800, seed=2)))
    return garch, noise


@pytest.fixture(scope="module")
def analyzed(inputs, tmp_path_factory):
    out = tmp_path_factory.mktemp("out")
    code = main(["analyze", *inputs, "--out", str(out), *FAST])
    return code, out


def _read(path):
    with open(path, "rb") as fh:
        return fh.read()


def test_analyze_exit_and_outputs(analyzed):
    code, out = analyzed
    assert code == 0
    assert sorted(os.listdir(out)) == sorted([
        "report.json", "summary.csv", "unitroot.csv", "battery.csv", "epochs_summary.csv",
        "epochs.csv", "garch_timeline.svg", "noise_timeline.svg"])


def test_report_validates_against_schema(analyzed):
    jsonschema = pytest.importorskip("jsonschema")
    _, out = analyzed
    with open(SCHEMA_PATH) as fh:
        schema = json.load(fh)
    jsonschema.Draft202012Validator.check_schema(schema)
    doc = json.loads(_read(out / "report.json"))
    jsonschema.validate(doc, schema)
    assert doc["schema_version"] == "1.0"


def test_garch_battery_grid(analyzed):
    _, out = analyzed
    rows = list(csv.reader(io.StringIO(_read(out / "battery.csv").decode())))
    assert rows[0] == ["test", "setting", "garch", "noise"]
    assert rows[1][0] == "AR order"
    assert len(rows) == 2 + 12
    for row in rows[2:]:
        if row[0] in ("McLeod-Li", "ARCH-LM"):
            assert float(row[2]) < 0.05


def test_epochs_files(analyzed):
    _, out = analyzed
    doc = json.loads(_read(out / "report.json"))
    summary = list(csv.DictReader(io.StringIO(_read(out / "epochs_summary.csv").decode())))
    assert [r["instrument_id"] for r in summary] == ["garch", "noise"]
    for row, inst in zip(summary, doc["instruments"]):
        scan = inst["scan"]
        assert int(row["total_windows"]) == scan["total_windows"]
        assert int(row["total_windows"]) * 28 + int(row["discarded_tail"]) == \
            inst["n_returns"] - inst["ar_fit"]["order"]
    sig = list(csv.DictReader(io.StringIO(_read(out / "epochs.csv").decode())))
    assert len(sig) == sum(i["scan"]["significant_windows"] for i in doc["instruments"])


def test_svg_is_presentation_only(inputs, analyzed, tmp_path):
    _, with_svg = analyzed
    code = main(["analyze", *inputs, "--out", str(tmp_path), "--format", "json,csv", *FAST])
    assert code == 0
    for name in os.listdir(tmp_path):
        assert _read(tmp_path / name) == _read(with_svg / name)
    assert not any(n.endswith(".svg") for n in os.listdir(tmp_path))


def test_repeat_is_byte_identical(inputs, analyzed, tmp_path):
    _, first = analyzed
    assert main(["analyze", *inputs, "--out", str(tmp_path), *FAST, "--workers", "2"]) == 0
    for name in os.listdir(first):
        assert _read(tmp_path / name) == _read(first / name)


def test_empty_file_fails(tmp_path, capsys):
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    code = main(["analyze", str(empty), "--out", str(tmp_path / "o"), *FAST])
    assert code != 0
    err = [json.loads(line) for line in capsys.readouterr().err.splitlines()]
    assert any("no data rows" in e["error"] for e in err)


def test_partial_failure_keeps_other_instruments(inputs, tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("date,price\n2020-01-01,1\n2020-01-02,0\n")
    out = tmp_path / "o"
    assert main(["analyze", inputs[1], str(bad), "--out", str(out), *FAST]) == 1
    doc = json.loads(_read(out / "report.json"))
    assert [i["instrument_id"] for i in doc["instruments"]] == ["noise"]
    assert doc["errors"][0]["instrument_id"] == "bad"
    assert "nonpositive price at line 3" in doc["errors"][0]["error"]


def test_env_var_sets_default_out_dir(inputs, tmp_path, monkeypatch):
    monkeypatch.setenv("EPOCHSCAN_OUT_DIR", str(tmp_path / "env"))
    assert main(["analyze", inputs[1], "--format", "json", *FAST]) == 0
    assert os.path.exists(tmp_path / "env" / "report.json")
    assert main(["analyze", inputs[1], "--format", "json", "--out", str(tmp_path / "flag"),
                 *FAST]) == 0
    assert os.path.exists(tmp_path / "flag" / "report.json")


def test_us_dates(inputs, tmp_path):
    assert main(["analyze", inputs[1], "--format", "json", "--date-style", "us",
                 "--out", str(tmp_path), *FAST]) == 0
    doc = json.loads(_read(tmp_path / "report.json"))
    window = doc["instruments"][0]["scan"]["windows"][0]
    assert re.fullmatch(r"\d\d/\d\d/\d\d", window["start_date"])
    assert doc["config"]["date_style"] == "us"


@pytest.mark.parametrize("argv", [
    ["analyze", "x.csv", "--format", "pdf"],
    ["analyze", "x.csv", "--lags", "a,b"],
    ["simulate", "--test", "mcleod_li", "--mode", "size"],
])
def test_usage_errors(argv):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code != 0


def test_duplicate_inputs_rejected(inputs, tmp_path, capsys):
    assert main(["analyze", inputs[0], inputs[0], "--out", str(tmp_path)]) == 2
    assert "distinct" in capsys.readouterr().err
    with pytest.raises(ValueError):
        RunConfig(inputs=("a.csv",), formats=frozenset())


@pytest.fixture
def process_file(tmp_path):
    path = tmp_path / "proc.json"
    path.write_text(json.dumps({"family": "gaussian_iid", "n": 1000}))
    return str(path)


def test_simulate_size(process_file, tmp_path):
    out = tmp_path / "sim"
    code = main(["simulate", "--process", process_file, "--test", "mcleod_li:15",
                 "--mode", "size", "--reps", "1000", "--seed", "3", "--out", str(out),
                 "--format", "json,csv"])
    assert code == 0
    doc = json.loads(_read(out / "simulate_mcleod_li_15_size.json"))
    assert 0.03 <= doc["rejection_rate"] <= 0.07
    assert doc["replications"] == 1000 and doc["seed"] == 3
    assert os.path.exists(out / "simulate_mcleod_li_15_size.csv")


def test_simulate_repeat_identical(process_file, tmp_path):
    args = ["simulate", "--process", process_file, "--test", "arch_lm:5", "--mode", "power",
            "--reps", "200", "--seed", "8"]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--out", str(tmp_path / "b"), "--workers", "2"]) == 0
    name = "simulate_arch_lm_5_power.json"
    assert _read(tmp_path / "a" / name) == _read(tmp_path / "b" / name)


def test_simulate_unknown_test(process_file, tmp_path, capsys):
    code = main(["simulate", "--process", process_file, "--test", "hinich", "--mode", "size",
                 "--out", str(tmp_path)])
    assert code != 0
    assert "unknown test_id" in capsys.readouterr().err


def test_simulate_bad_process(tmp_path):
    path = tmp_path / "p.json"
    path.write_text('{"family": "garch11", "n": 100, "params": {"omega": -1, "alpha": 0, "beta": 0}}')
    assert main(["simulate", "--process", str(path), "--test", "adf", "--mode", "size",
                 "--out", str(tmp_path)]) == 2


def test_eight_instruments_full_length(tmp_path):
    paths = []
    for k in range(8):
        spec = ProcessSpec("ar", 4266, seed=100 + k, params={"coefficients": [0.5, -0.3]})
        paths.append(_write_prices(tmp_path / f"inst{k}.csv", 0.01 * generate(spec)))
    out = tmp_path / "out"
    assert main(["analyze", *paths, "--out", str(out), "--format", "json", *FAST]) == 0
    doc = json.loads(_read(out / "report.json"))
    assert len(doc["instruments"]) == 8
    for inst in doc["instruments"]:
        assert inst["n_prices"] == 4267 and inst["ar_fit"]["order"] == 2
        assert inst["scan"]["total_windows"] == 152 and inst["scan"]["discarded_tail"] == 8
