"""CSV and manifest emission for study results.

Tabular outputs are RFC-4180 CSV with LF line endings and '.' decimals;
floats serialize with the shortest round-trip decimal (repr), so downstream
plotting is lossless.  Manifests are JSON and carry the fully resolved
configuration; rerunning from a manifest reproduces every CSV byte for byte.
"""

from __future__ import annotations

import csv
import json
from datetime import datetime, timezone
from pathlib import Path

from .studies import StudyResult


def format_cell(value) -> str:
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, (int,)):
        return str(value)
    if isinstance(value, float):
        return repr(value)
    if value is None:
        return ""
    return str(value)


def write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_cell(v) for v in row])


def write_per_rep(path: Path, columns: list[str], per_rep: list[dict]) -> None:
    write_csv(path, columns, [[row[c] for c in columns] for row in per_rep])


def write_summary(path: Path, summary: list[tuple]) -> None:
    rows = [[metric, value, stderr] for metric, value, stderr in summary]
    write_csv(path, ["metric", "value", "stderr"], rows)


def write_extras(outdir: Path, extras: dict[str, list[dict]]) -> list[Path]:
    written = []
    for name, rows in extras.items():
        if not rows:
            continue
        path = outdir / f"{name}.csv"
        header = list(rows[0].keys())
        write_csv(path, header, [[row[c] for c in header] for row in rows])
        written.append(path)
    return written


def write_study_outputs(outdir: Path, result: StudyResult) -> list[Path]:
    outdir.mkdir(parents=True, exist_ok=True)
    per_rep = outdir / "per_rep.csv"
    summary = outdir / "summary.csv"
    write_per_rep(per_rep, result.columns, result.per_rep)
    write_summary(summary, result.summary)
    return [per_rep, summary] + write_extras(outdir, result.extras)


def write_manifest(
    path: Path,
    command: str,
    config: dict,
    outputs: list[Path],
    seed: int,
    started: datetime,
    version: str,
) -> None:
    manifest = {
        "command": command,
        "config": config,
        "version": version,
        "outputs": [p.name for p in outputs],
        "seed": seed,
        "started": started.isoformat(),
        "finished": datetime.now(timezone.utc).isoformat(),
    }
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def utcnow() -> datetime:
    return datetime.now(timezone.utc)
