import json
import os

import pytest

from superfix.cli import main, parse_r
from superfix.experiments import CSV_HEADER


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_parse_r_forms():
    from fractions import Fraction
    assert parse_r("2") == 2
    assert parse_r("1.1") == Fraction(11, 10)
    assert parse_r("3/4") == Fraction(3, 4)
    with pytest.raises(Exception):
        parse_r("abc")
    with pytest.raises(Exception):
        parse_r("-1")


def test_simulate_complete_csv(capsys):
    code, out, _ = run_cli(capsys, "simulate", "--complete", "3", "--r", "2",
                           "--runs", "20000", "--seed", "5")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == CSV_HEADER
    fields = lines[1].split(",")
    assert fields[0] == ""  # no k for a plain graph
    assert abs(float(fields[6]) - 4 / 7) < 0.02
    assert fields[11] == "event"


def test_simulate_superstar_json_lines(capsys):
    code, out, _ = run_cli(capsys, "simulate", "--superstar", "3", "3", "3",
                           "--r", "2", "--runs", "500", "--seed", "5",
                           "--engine", "leafskip", "--format", "json-lines")
    assert code == 0
    record = json.loads(out.strip())
    assert record["k"] == 3 and record["runs"] == 500
    assert record["engine"] == "leafskip"
    assert record["ref_r_pow_minus_k"] == 0.125
    assert set(record) == set(CSV_HEADER.split(","))


def test_simulate_determinism_and_env_seed(capsys, monkeypatch):
    args = ("simulate", "--complete", "2", "--r", "2", "--runs", "50")
    def fields(out):
        # drop the wall-clock column, the only timing-dependent field
        return out.splitlines()[1].split(",")[:-1]

    monkeypatch.setenv("MORAN_SEED", "99")
    code, out1, _ = run_cli(capsys, *args)
    code2, out2, _ = run_cli(capsys, *args)
    assert code == code2 == 0 and fields(out1) == fields(out2)
    _, out3, _ = run_cli(capsys, *args, "--seed", "99")
    assert fields(out3) == fields(out1)
    monkeypatch.setenv("MORAN_SEED", "boom")
    code, _, err = run_cli(capsys, *args)
    assert code == 2 and "MORAN_SEED" in err


def test_simulate_argument_errors(capsys):
    code, _, _ = run_cli(capsys, "simulate", "--complete", "3",
                         "--runs", "10")  # missing --r
    assert code == 2
    code, _, _ = run_cli(capsys, "simulate", "--complete", "3", "--r", "2",
                         "--runs", "10", "--engine", "lumped")
    assert code == 2  # lumped engine needs a superstar target
    code, _, _ = run_cli(capsys, "simulate", "--complete", "3", "--r", "2",
                         "--runs", "10", "--bogus")
    assert code == 2


def test_simulate_output_file(tmp_path, capsys):
    path = tmp_path / "row.csv"
    code, out, _ = run_cli(capsys, "simulate", "--star", "4", "--r", "2",
                           "--runs", "100", "--seed", "1",
                           "--output", str(path))
    assert code == 0 and out == ""
    assert path.read_text().splitlines()[0] == CSV_HEADER


def test_exact_complete(capsys):
    code, out, _ = run_cli(capsys, "exact", "--complete", "3", "--r", "2")
    assert code == 0
    assert out.startswith("4/7")
    code, out, _ = run_cli(capsys, "exact", "--complete", "3", "--r", "1/2")
    assert code == 0 and out.startswith("1/7")


def test_exact_cap_message(capsys):
    code, _, err = run_cli(capsys, "exact", "--complete", "20", "--r", "2")
    assert code == 2
    assert "12" in err and "20" in err


def test_exact_float_mode_between_caps(capsys):
    code, out, _ = run_cli(capsys, "exact", "--star", "13", "--r", "2")
    assert code == 0
    assert 0.0 < float(out.strip()) < 1.0


def test_restricted_full_and_limit(capsys):
    code, out, _ = run_cli(capsys, "restricted", "--limit-only", "--r", "2")
    assert code == 0
    assert "64/67" in out and "67/3" in out
    code, out, _ = run_cli(capsys, "restricted", "--L", "10", "--M", "10",
                           "--r", "2")
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith("q(")
    assert "0.900366130" in lines[0]
    assert any("upper bound" in ln for ln in lines)
    assert any(ln.startswith("gap") for ln in lines)


def test_restricted_argument_errors(capsys):
    code, _, _ = run_cli(capsys, "restricted", "--L", "0", "--M", "5",
                         "--r", "2")
    assert code == 2
    code, _, err = run_cli(capsys, "restricted", "--L", "5", "--r", "2")
    assert code == 2 and "--M" in err


def test_grid_end_to_end(tmp_path, capsys):
    grid_file = tmp_path / "grid.csv"
    grid_file.write_text("k,leaves,reservoir,r,runs\n"
                         "3,2,2,2,200\n3,2,2,4,200\n4,2,2,2,200\n")
    out_dir = tmp_path / "out"
    code, _, _ = run_cli(capsys, "grid", "--grid-file", str(grid_file),
                         "--out-dir", str(out_dir), "--seed", "7",
                         "--engine", "leafskip", "--table", "--figures")
    assert code == 0
    results = (out_dir / "results.csv").read_text().splitlines()
    assert results[0] == CSV_HEADER and len(results) == 4
    jsonl = [json.loads(ln)
             for ln in (out_dir / "results.jsonl").read_text().splitlines()]
    assert len(jsonl) == 3 and jsonl[0]["k"] == "3"
    assert (out_dir / "plot_data_k3.csv").exists()
    assert (out_dir / "plot_data_k4.csv").exists()
    assert (out_dir / "table.txt").exists()
    assert (out_dir / "extinction_k3.png").exists()
    # determinism: rerun into a fresh directory, identical csv
    out2 = tmp_path / "out2"
    run_cli(capsys, "grid", "--grid-file", str(grid_file),
            "--out-dir", str(out2), "--seed", "7", "--engine", "leafskip")
    assert (out2 / "results.csv").read_text().splitlines()[1].split(",")[:12] \
        == results[1].split(",")[:12]


def test_grid_malformed_file(tmp_path, capsys):
    grid_file = tmp_path / "grid.csv"
    grid_file.write_text("k,leaves,reservoir,r,runs\n"
                         "k,leaves,reservoir,r,runs\n")
    code, _, err = run_cli(capsys, "grid", "--grid-file", str(grid_file),
                           "--out-dir", str(tmp_path / "o"))
    assert code == 2 and "duplicate header" in err
    code, _, _ = run_cli(capsys, "grid", "--grid-file",
                         str(tmp_path / "missing.csv"),
                         "--out-dir", str(tmp_path / "o"))
    assert code == 2


def test_help_exits_zero(capsys):
    code, out, _ = run_cli(capsys, "--help")
    assert code == 0
    for name in ("simulate", "exact", "restricted", "grid"):
        assert name in out


def test_console_script_installed():
    import shutil
    assert shutil.which("superfix") is not None or os.environ.get("CI")
