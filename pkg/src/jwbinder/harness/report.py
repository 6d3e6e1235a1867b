"""JSON Lines reports: a header record, then one record per input file."""

from __future__ import annotations

import json
import pathlib

from .signatures import ConfigError

SCHEMA = "jwbinder.report"
SCAN_SCHEMA = "jwbinder.scan"
VERSION = 1
TIMING_KEYS = ("timings", "elapsed_seconds")


def header(schema: str = SCHEMA, **extra) -> dict:
    return {"record": "header", "schema": schema, "version": VERSION, **extra}


class ReportWriter:
    """Single serialization point for report records; flushes after every line."""

    def __init__(self, path, schema: str = SCHEMA, **extra):
        self.path = pathlib.Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._fh = self.path.open("w", encoding="utf-8")
        self._write(header(schema, **extra))

    def _write(self, record: dict) -> None:
        self._fh.write(json.dumps(record, sort_keys=True, ensure_ascii=False) + "\n")
        self._fh.flush()

    def write(self, entry: dict) -> None:
        self._write({"record": "file", **entry})

    def close(self) -> None:
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def read_report(path) -> tuple[dict, list[dict]]:
    """``(header, entries)``; raises :class:`ConfigError` on a malformed file."""
    path = pathlib.Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read report {path}: {exc}") from exc
    records = []
    for n, line in enumerate(lines, 1):
        if not line.strip():
            continue
        try:
            records.append(json.loads(line))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}:{n}: invalid JSON ({exc.msg})") from exc
    if not records or records[0].get("record") != "header":
        raise ConfigError(f"{path}: missing header record")
    head = records[0]
    if head.get("version") != VERSION:
        raise ConfigError(f"{path}: unsupported report version {head.get('version')}")
    return head, [r for r in records[1:] if r.get("record") == "file"]


def strip_timings(record):
    """Copy of a record without timing fields (for determinism comparisons)."""
    if isinstance(record, dict):
        return {k: strip_timings(v) for k, v in record.items() if k not in TIMING_KEYS}
    if isinstance(record, list):
        return [strip_timings(v) for v in record]
    return record
