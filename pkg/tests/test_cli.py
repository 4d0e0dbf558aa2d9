import csv
import json
import subprocess
import sys
from pathlib import Path

from spherefield.cli import main

SMALL_MODEL = {"model": {"L_max": 8, "d": 3}}


def write_config(tmp_path, doc, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc), encoding="utf-8")
    return str(path)


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def comparable_files(directory):
    """Report files that must be byte-stable; the manifest carries the
    run timestamp and is the one deliberately excluded output."""
    return sorted(
        p for p in Path(directory).iterdir() if p.name != "manifest.json"
    )


# ---------------------------------------------------------------------------
# selftest


def test_selftest_passes_and_reports(tmp_path, capsys):
    code = main(["selftest", "--out", str(tmp_path / "o")])
    out = capsys.readouterr().out
    assert code == 0
    assert "addition_formula_through_64" in out
    payload = json.loads((tmp_path / "o" / "selftest.json").read_text())
    names = {check["name"]: check for check in payload["checks"]}
    assert payload["pass"] is True
    assert names["legendre_at_one_through_256"]["pass"] is True
    assert names["addition_formula_through_64"]["observed"] <= 1e-10


def test_selftest_reports_injected_grid_fault(tmp_path, capsys):
    cfg = write_config(tmp_path, {"selftest": {"inject_fault": "grid_band"}})
    code = main(["selftest", "--config", cfg, "--out", str(tmp_path / "o")])
    out = capsys.readouterr().out
    assert code == 1
    assert "FAIL transform_round_trip" in out
    payload = json.loads((tmp_path / "o" / "selftest.json").read_text())
    names = {check["name"]: check for check in payload["checks"]}
    assert names["transform_round_trip"]["pass"] is False
    assert payload["pass"] is False


# ---------------------------------------------------------------------------
# simulate


def test_simulate_row_count_and_rerun_bytes(tmp_path):
    cfg = write_config(tmp_path, {"model": {"L_max": 6, "d": 2}})
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    assert main(["simulate", "--config", cfg, "--out", str(out_a), "--seed", "9"]) == 0
    assert main(["simulate", "--config", cfg, "--out", str(out_b), "--seed", "9"]) == 0
    rows = read_rows(out_a / "realization.csv")
    assert rows[0] == ["node_index", "theta", "phi", "v_1", "v_2"]
    assert len(rows) - 1 == 7 * 13
    assert (out_a / "realization.csv").read_bytes() == (out_b / "realization.csv").read_bytes()


def test_simulate_band_limit_zero_constant_field(tmp_path):
    cfg = write_config(tmp_path, {"model": {"L_max": 0, "d": 3}})
    out = tmp_path / "o"
    assert main(["simulate", "--config", cfg, "--out", str(out), "--format", "csv"]) == 0
    rows = read_rows(out / "realization.csv")
    assert len(rows) - 1 == 1  # (L+1)(2L+1) with L = 0
    assert not (out / "realization.svg").exists()


# ---------------------------------------------------------------------------
# verify


def test_verify_ergodicity_passes(tmp_path):
    cfg = write_config(tmp_path, SMALL_MODEL)
    out = tmp_path / "o"
    code = main(
        ["verify", "ergodicity", "--config", cfg, "--out", str(out),
         "--replicates", "2000", "--ell", "2,4,8", "--seed", "5"]
    )
    assert code == 0
    rows = read_rows(out / "ergodicity.csv")
    assert rows[0] == ["ell", "theo_mse", "emp_mse", "mc_se", "replicates", "pass"]
    assert [row[0] for row in rows[1:]] == ["2", "4", "8"]
    assert all(row[-1] == "true" for row in rows[1:])


def test_verify_ergodicity_detects_corrupted_sampler(tmp_path):
    doc = dict(SMALL_MODEL)
    doc["selftest"] = {"inject_fault": "sampler_scale"}
    cfg = write_config(tmp_path, doc)
    out = tmp_path / "o"
    code = main(
        ["verify", "ergodicity", "--config", cfg, "--out", str(out),
         "--replicates", "2000", "--ell", "4", "--seed", "5"]
    )
    assert code == 1
    rows = read_rows(out / "ergodicity.csv")  # partial reports still written
    assert rows[1][-1] == "false"
    payload = json.loads((out / "report_ergodicity.json").read_text())
    assert payload["pass"] is False


def test_verify_clt_report_covers_csv_numbers(tmp_path):
    cfg = write_config(tmp_path, SMALL_MODEL)
    out = tmp_path / "o"
    code = main(
        ["verify", "clt", "--config", cfg, "--out", str(out),
         "--replicates", "2000", "--ell", "4,8", "--seed", "5"]
    )
    assert code == 0
    rows = read_rows(out / "clt.csv")
    assert rows[0][:4] == ["ell", "d2_bound_exact", "d2_bound_simplified", "d2_proxy"]
    payload = json.loads((out / "report_clt.json").read_text())
    assert payload["pass"] is True
    by_ell = {rec["ell"]: rec for rec in payload["montecarlo"]}
    theo_by_ell = {rec["ell"]: rec for rec in payload["theoretical"]}
    for row in rows[1:]:
        ell = int(row[0])
        assert float(row[1]) == theo_by_ell[ell]["d2_bound_exact"]
        assert float(row[3]) == by_ell[ell]["d2_proxy"]
        assert float(row[5]) == by_ell[ell]["ks_distance"]
        assert float(row[7]) == by_ell[ell]["emp_cum4"]


def test_verify_schoenberg_coincidence_dominates(tmp_path):
    cfg = write_config(tmp_path, SMALL_MODEL)
    out = tmp_path / "o"
    code = main(["verify", "schoenberg", "--config", cfg, "--out", str(out), "--seed", "3"])
    assert code == 0
    rows = read_rows(out / "schoenberg.csv")
    assert rows[0] == ["t", "trace_Rt", "nuclear_Rt", "tail_bound", "pass"]
    nuclear = [float(row[2]) for row in rows[1:]]
    ts = [float(row[0]) for row in rows[1:]]
    assert ts[-1] == 1.0
    assert nuclear[-1] == max(nuclear)
    assert all(row[-1] == "true" for row in rows[1:])


def test_verify_rerun_and_parallel_bytes(tmp_path):
    cfg = write_config(tmp_path, SMALL_MODEL)
    dirs = [tmp_path / name for name in ("a", "b", "c")]
    for extra, out in zip(([], [], ["--workers", "3"]), dirs):
        code = main(
            ["verify", "ergodicity", "--config", cfg, "--out", str(out),
             "--replicates", "2000", "--ell", "4,8", "--seed", "11", *extra]
        )
        assert code == 0
    base = comparable_files(dirs[0])
    for other in dirs[1:]:
        files = comparable_files(other)
        assert [p.name for p in files] == [p.name for p in base]
        for left, right in zip(base, files):
            assert left.read_bytes() == right.read_bytes(), left.name


# ---------------------------------------------------------------------------
# usage and I/O errors


def test_unknown_config_key_is_usage_error(tmp_path):
    cfg = write_config(tmp_path, {"model": {"Lmax": 4}})
    assert main(["selftest", "--config", cfg]) == 64


def test_bad_flag_is_usage_error():
    assert main(["verify", "nonsense"]) == 64
    assert main(["simulate", "--no-such-flag"]) == 64


def test_out_of_range_degrees_are_usage_error(tmp_path):
    cfg = write_config(tmp_path, {"model": {"L_max": 4, "d": 2}})
    assert main(["verify", "clt", "--config", cfg, "--ell", "9", "--replicates", "500"]) == 64


def test_too_few_replicates_is_usage_error(tmp_path):
    cfg = write_config(tmp_path, SMALL_MODEL)
    assert main(["verify", "clt", "--config", cfg, "--replicates", "50"]) == 64


def test_degenerate_degrees_are_usage_error(tmp_path):
    cfg = write_config(
        tmp_path, {"model": {"lambda_table": [[1.0], [0.0]]}, "mc": {"ells": [1]}}
    )
    assert main(["verify", "clt", "--config", cfg, "--replicates", "500"]) == 64


def test_unwritable_output_is_io_error(tmp_path):
    blocker = tmp_path / "blocker"
    blocker.write_text("not a directory")
    cfg = write_config(tmp_path, SMALL_MODEL)
    code = main(
        ["verify", "schoenberg", "--config", cfg, "--out", str(blocker / "sub")]
    )
    assert code == 2


def test_console_entry_point_runs():
    proc = subprocess.run(
        [sys.executable, "-m", "spherefield.cli", "--version"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert "spherefield" in proc.stdout
