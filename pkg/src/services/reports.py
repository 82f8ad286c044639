"""Artifact rendering: CSV tables, a JSON summary and a markdown digest.

Every renderer is a pure function of the artifact, so the same config and
seed give byte-identical files. Column lists are frozen per table; new
columns are only ever appended.
"""
from __future__ import annotations

import csv
import enum
import hashlib
import io
import json
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, Iterable, List, Sequence

import numpy as np

logger = logging.getLogger(__name__)

MARKDOWN_ROWS = 50


def plain(value: Any) -> Any:
    """Convert numpy scalars and arrays, Fractions, enums and tuples into JSON values."""
    if isinstance(value, dict):
        return {str(plain(k)): plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return [plain(v) for v in value.tolist()]
    if isinstance(value, enum.Enum):
        return value.value
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    if value is None or isinstance(value, str):
        return value
    return str(value)


@dataclass
class Table:
    columns: List[str]
    rows: List[Dict[str, Any]] = field(default_factory=list)

    def add(self, **row):
        self.rows.append(row)


@dataclass
class Artifact:
    kind: str
    title: str
    summary: Dict[str, Any]
    tables: Dict[str, Table] = field(default_factory=dict)

    def payload(self) -> Dict[str, Any]:
        return plain({"kind": self.kind, "summary": self.summary,
                      "tables": {name: table.rows for name, table in self.tables.items()}})

    @property
    def checksum(self) -> str:
        """sha256 of the canonical JSON payload."""
        raw = json.dumps(self.payload(), sort_keys=True, separators=(",", ":"), ensure_ascii=False)
        return hashlib.sha256(raw.encode("utf-8")).hexdigest()


def _cell(value: Any) -> str:
    value = plain(value)
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, dict)):
        return json.dumps(value, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
    return str(value)


def render_csv(table: Table) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([_cell(row.get(column)) for column in table.columns])
    return buffer.getvalue()


def render_json(artifact: Artifact) -> str:
    body = {**artifact.payload(), "checksum": artifact.checksum}
    return json.dumps(body, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def _short(value: Any) -> str:
    value = plain(value)
    if isinstance(value, float):
        return f"{value:.6g}"
    if value is None:
        return "–"
    return _cell(value).replace("|", "\\|")


def markdown_table(columns: Sequence[str], rows: Iterable[Dict[str, Any]]) -> str:
    lines = ["| " + " | ".join(columns) + " |", "|" + "---|" * len(columns)]
    for row in rows:
        lines.append("| " + " | ".join(_short(row.get(column)) for column in columns) + " |")
    return "\n".join(lines)


def render_markdown(artifact: Artifact) -> str:
    """
    The render_markdown function writes a human-readable digest: the scalar entries of the
    summary as a list, nested entries as JSON, then every table (long tables are cut).

    :param artifact: Artifact: the experiment output
    :return: str: markdown text
    """
    out = [f"# {artifact.title}", ""]
    for key, value in artifact.summary.items():
        value = plain(value)
        if isinstance(value, (dict, list)):
            out.append(f"- **{key}**: `{json.dumps(value, sort_keys=True, ensure_ascii=False)}`")
        else:
            out.append(f"- **{key}**: {_short(value)}")
    for name, table in artifact.tables.items():
        out += ["", f"## {name}", "", markdown_table(table.columns, table.rows[:MARKDOWN_ROWS])]
        if len(table.rows) > MARKDOWN_ROWS:
            out.append(f"\n_{len(table.rows) - MARKDOWN_ROWS} more rows in {artifact.kind}_{name}.csv_")
    out += ["", f"checksum `{artifact.checksum}`", ""]
    return "\n".join(out)


def write_artifacts(artifact: Artifact, out_dir, formats: Iterable[str] = ("csv", "json", "markdown")) -> List[Path]:
    """
    The write_artifacts function stores the artifact under out_dir: one CSV per table
    (``<kind>_<table>.csv``), ``<kind>.json`` and ``<kind>.md``.

    :param artifact: Artifact: the experiment output
    :param out_dir: directory, created when missing
    :param formats: Iterable[str]: any of csv, json and markdown
    :return: the written paths
    """
    target = Path(out_dir)
    target.mkdir(parents=True, exist_ok=True)
    formats = {getattr(f, "value", f) for f in formats}
    written = []
    if "csv" in formats:
        for name, table in artifact.tables.items():
            path = target / f"{artifact.kind}_{name}.csv"
            path.write_text(render_csv(table), encoding="utf-8")
            written.append(path)
    if "json" in formats:
        path = target / f"{artifact.kind}.json"
        path.write_text(render_json(artifact), encoding="utf-8")
        written.append(path)
    if "markdown" in formats:
        path = target / f"{artifact.kind}.md"
        path.write_text(render_markdown(artifact), encoding="utf-8")
        written.append(path)
    logger.info("wrote %d artifact file(s) to %s", len(written), target)
    return written
