"""CSV and JSON report emission.

Numbers are written in their shortest round-trip decimal form so that a
rerun with the same seed produces byte-identical files; the only output
carrying wall-clock state is the sidecar run manifest.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from .verify import MonteCarloReport, TheoreticalQuantities

SCHEMA_VERSION = 1

ERGODICITY_HEADER = ["ell", "theo_mse", "emp_mse", "mc_se", "replicates", "pass"]
CLT_HEADER = [
    "ell",
    "d2_bound_exact",
    "d2_bound_simplified",
    "d2_proxy",
    "tv_bound",
    "ks_emp",
    "cum4_theo",
    "cum4_emp",
    "cum4_se",
    "pass",
]
SCHOENBERG_HEADER = ["t", "trace_Rt", "nuclear_Rt", "tail_bound", "pass"]
REALIZATION_BASE_HEADER = ["node_index", "theta", "phi"]


def format_value(value) -> str:
    """Shortest decimal that round-trips the value; booleans lowercase."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int,)):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return repr(value)
    return str(value)


def write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(format_value(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def write_json(path: Path, payload: dict) -> None:
    path.write_text(
        json.dumps(payload, sort_keys=True, indent=1) + "\n", encoding="utf-8", newline="\n"
    )


@dataclass(frozen=True)
class RunManifest:
    """Run metadata; the created timestamp makes this the one output file
    that differs between reruns."""

    artifact_version: str
    command: str
    config_hash: str
    master_seed: int
    created_utc: str
    exit_status: int


def make_manifest(version: str, command: str, cfg_hash: str, master_seed: int, exit_status: int) -> RunManifest:
    return RunManifest(
        artifact_version=version,
        command=command,
        config_hash=cfg_hash,
        master_seed=master_seed,
        created_utc=datetime.now(timezone.utc).isoformat(),
        exit_status=exit_status,
    )


def write_manifest(path: Path, manifest: RunManifest) -> None:
    write_json(path, dataclasses.asdict(manifest))


def deterministic_manifest_block(manifest: RunManifest) -> dict:
    """Manifest subset embedded in reports; excludes wall-clock fields."""
    return {
        "artifact_version": manifest.artifact_version,
        "command": manifest.command,
        "config_hash": manifest.config_hash,
        "master_seed": manifest.master_seed,
    }


def theoretical_record(theo: TheoreticalQuantities) -> dict:
    return dataclasses.asdict(theo)


def montecarlo_record(report: MonteCarloReport) -> dict:
    record = dataclasses.asdict(report)
    record["pass"] = report.passed
    return record


def ergodicity_rows(theos: list[TheoreticalQuantities], reports: list[MonteCarloReport]) -> list[list]:
    rows = []
    for theo, rep in zip(theos, reports):
        rows.append(
            [
                rep.ell,
                theo.mse,
                rep.emp_mse,
                rep.emp_mse_se,
                rep.replicates,
                bool(rep.mse_pass and rep.fourth_moment_pass),
            ]
        )
    return rows


def clt_rows(theos: list[TheoreticalQuantities], reports: list[MonteCarloReport]) -> list[list]:
    rows = []
    for theo, rep in zip(theos, reports):
        rows.append(
            [
                rep.ell,
                theo.d2_bound_exact,
                theo.d2_bound_simplified,
                rep.d2_proxy,
                theo.tv_bound,
                rep.ks_distance,
                theo.cum4_reduced,
                rep.emp_cum4,
                rep.emp_cum4_se,
                bool(rep.scalar_var_pass and rep.cum4_pass and rep.ks_pass and rep.d2_pass),
            ]
        )
    return rows
