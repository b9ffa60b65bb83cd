"""Run reports: a JSON document with an embedded manifest, plus a CSV export.

Complex numbers are written as separate real and imaginary fields.  JSON uses
Python's shortest round-trip float repr; the CSV uses 17 significant digits.
Both are exact at double precision.  Only the manifest timestamp varies
between otherwise identical runs.
"""

from __future__ import annotations

import csv
import datetime as _dt
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from . import __version__

TIMESTAMP_KEY = "timestamp"


@dataclass(frozen=True)
class RunManifest:
    command: str
    config_hash: str
    rng_seed: int
    grid_points: int
    m_max: int
    policy: dict
    version: str = __version__
    timestamp: str = field(default_factory=lambda: _dt.datetime.now(_dt.timezone.utc).isoformat())

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "config_hash": self.config_hash,
            "rng_seed": self.rng_seed,
            "grid_points": self.grid_points,
            "m_max": self.m_max,
            "policy": self.policy,
            "version": self.version,
            TIMESTAMP_KEY: self.timestamp,
        }


def _finite(x: float) -> float | str:
    return x if math.isfinite(x) else repr(x)


def cplx(z: complex) -> dict[str, float | str]:
    z = complex(z)
    return {"re": _finite(z.real), "im": _finite(z.imag)}


def dumps(manifest: RunManifest, rows: list[dict], summary: dict) -> str:
    doc = {"manifest": manifest.to_dict(), "rows": rows, "summary": summary}
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def body(text: str) -> str:
    """Report text with the timestamp removed, for reproducibility checks."""
    doc = json.loads(text)
    doc["manifest"].pop(TIMESTAMP_KEY, None)
    return json.dumps(doc, sort_keys=True, indent=2)


def _flatten(prefix: str, value: Any, out: dict):
    if isinstance(value, dict):
        for k in sorted(value):
            _flatten(f"{prefix}.{k}" if prefix else k, value[k], out)
    elif isinstance(value, (list, tuple)):
        for i, v in enumerate(value):
            _flatten(f"{prefix}.{i}", v, out)
    elif isinstance(value, float):
        out[prefix] = format(value, ".17g")
    else:
        out[prefix] = value


def to_csv(rows: list[dict]) -> str:
    flat = []
    for row in rows:
        out: dict = {}
        _flatten("", row, out)
        flat.append(out)
    columns: list[str] = []
    for row in flat:
        for key in row:
            if key not in columns:
                columns.append(key)
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    writer.writeheader()
    writer.writerows(flat)
    return buf.getvalue()


def write(path: str | Path, manifest: RunManifest, rows: list[dict], summary: dict) -> tuple[Path, Path]:
    """Write ``path`` (JSON) and the CSV export beside it."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(manifest, rows, summary))
    csv_path = path.with_suffix(".csv") if path.suffix != ".csv" else path.with_suffix(".rows.csv")
    csv_path.write_text(to_csv(rows))
    return path, csv_path
