"""Run reports: JSON and CSV serialisation with provenance."""

from __future__ import annotations

import csv
import io
import json
import math
import subprocess
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

SCHEMA_VERSION = 1
CSV_COLUMNS = ("name", "value", "stderr", "kind", "d", "N", "alpha", "seed", "samples")


def version_string() -> str:
    """Package version with the git commit appended when available (``0.1.0+g1a2b3c4``)."""
    from . import __version__

    try:
        out = subprocess.run(
            ["git", "rev-parse", "--short", "HEAD"],
            cwd=Path(__file__).resolve().parent,
            capture_output=True,
            text=True,
            timeout=5,
            check=True,
        )
        rev = out.stdout.strip()
    except (OSError, subprocess.SubprocessError):
        rev = ""
    return f"{__version__}+g{rev}" if rev else __version__


def jsonable(obj):
    """Convert numpy scalars and arrays, fractions and dataclass results to JSON types."""
    if hasattr(obj, "to_dict"):
        return jsonable(obj.to_dict())
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, Fraction):
        return str(obj)
    return obj


@dataclass
class RunReport:
    """Everything needed to rerun a command and compare its numbers."""

    command: str
    params: dict
    results: list
    seed: int | None = None
    wall_time_ms: float = 0.0
    suite_pass: bool | None = None
    version: str = field(default_factory=version_string)
    schema_version: int = SCHEMA_VERSION

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "version": self.version,
            "command": self.command,
            "params": jsonable(self.params),
            "results": jsonable(self.results),
            "seed": jsonable(self.seed),
            "wall_time_ms": self.wall_time_ms,
            "suite_pass": jsonable(self.suite_pass),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "RunReport":
        data = json.loads(text)
        return cls(
            command=data["command"],
            params=data["params"],
            results=data["results"],
            seed=data["seed"],
            wall_time_ms=data["wall_time_ms"],
            suite_pass=data["suite_pass"],
            version=data["version"],
            schema_version=data["schema_version"],
        )

    def __eq__(self, other):
        if not isinstance(other, RunReport):
            return NotImplemented
        return self.to_json() == other.to_json()

    def csv_rows(self) -> list[dict]:
        rows = []
        for item in jsonable(self.results):
            rows.append(_csv_row(item, self.params, self.seed))
        return rows

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for row in self.csv_rows():
            writer.writerow(row)
        return buf.getvalue()


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v) if math.isfinite(v) else str(v)
    return v


def _csv_row(item: dict, params: dict, seed) -> dict:
    p = item.get("params") or {}
    row = {
        "name": item.get("name", item.get("family", "")),
        "value": item.get("value"),
        "stderr": item.get("stderr"),
        "kind": item.get("kind", item.get("method", "")),
        "d": p.get("d", item.get("d", params.get("d"))),
        "N": p.get("N", item.get("N", params.get("N"))),
        "alpha": p.get("alpha", params.get("alpha")),
        "seed": item.get("seed", seed),
        "samples": item.get("samples", params.get("samples")),
    }
    return {k: _fmt(v) for k, v in row.items()}
