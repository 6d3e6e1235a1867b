"""Scan the original and reconstructed variants of an analyzed corpus."""

from __future__ import annotations

import logging
import pathlib
import re

from .metrics import DetectionMatrix
from .report import SCAN_SCHEMA, read_report
from .scanner import ExternalScanner
from .signatures import ConfigError, load_signatures, scan_signatures

log = logging.getLogger(__name__)

VARIANT_RE = re.compile(r"^(?P<stem>.+)\.(?P<variant>code|data|all)\.js$")


def signature_engines(paths) -> dict[str, list]:
    """``{engine id: rules}``, one engine per signatures file."""
    engines: dict[str, list] = {}
    for path in paths:
        base = f"sig:{pathlib.Path(path).stem}"
        name, k = base, 1
        while name in engines:
            k += 1
            name = f"{base}#{k}"
        engines[name] = load_signatures(path)
    return engines


def corpus_samples(directory) -> list[dict]:
    """``[{"file": original, "variants": {variant: path}}]`` for an analyzed directory.

    Uses ``report.jsonl`` when present (skipping files the pipeline could not
    process); otherwise groups ``<stem>.<variant>.js`` files by stem.
    """
    directory = pathlib.Path(directory)
    if not directory.is_dir():
        raise ConfigError(f"{directory} is not a directory")
    report = directory / "report.jsonl"
    samples = []
    if report.exists():
        _, entries = read_report(report)
        for entry in entries:
            if entry.get("status") != "ok":
                continue
            variants = {"baseline": entry["file"]}
            variants.update({k: v for k, v in entry.get("outputs", {}).items() if k in ("code", "data", "all")})
            samples.append({"file": entry["file"], "variants": variants})
        return samples
    groups: dict[str, dict] = {}
    for f in sorted(directory.glob("*.js")):
        m = VARIANT_RE.match(f.name)
        stem, variant = (m["stem"], m["variant"]) if m else (f.name.removesuffix(".js"), "baseline")
        groups.setdefault(stem, {})[variant] = str(f)
    for stem, variants in sorted(groups.items()):
        samples.append({"file": variants.get("baseline", stem), "variants": variants})
    return samples


def scan_sample(sample: dict, engines: dict, scanner: ExternalScanner | None = None) -> dict:
    verdicts: dict = {}
    rules: dict = {}
    errors: dict = {}
    for variant, path in sorted(sample["variants"].items()):
        try:
            text = pathlib.Path(path).read_text(encoding="utf-8", errors="replace")
        except OSError as exc:
            errors[variant] = f"unreadable: {exc}"
            continue
        row, matched = {}, {}
        for engine, rule_set in engines.items():
            verdict = scan_signatures(text, rule_set)
            row[engine] = verdict.detected
            matched[engine] = verdict.rules
        if scanner is not None:
            result = scanner.scan_bytes(text.encode("utf-8"), pathlib.Path(path).name)
            if result.error:
                errors[variant] = result.error
            for engine, detected in result.engines.items():
                row[f"ext:{engine}"] = detected
        verdicts[variant] = row
        rules[variant] = matched
    return {"file": sample["file"], "verdicts": verdicts, "rules": rules, "errors": errors}


def scan_corpus(directory, engines: dict, scanner: ExternalScanner | None = None) -> list[dict]:
    return [scan_sample(s, engines, scanner) for s in corpus_samples(directory)]


def matrix_from_records(records) -> DetectionMatrix:
    """Detection matrix from scan records (or report entries carrying ``verdicts``)."""
    records = [r for r in records if r.get("verdicts")]
    engines = sorted({e for r in records for row in r["verdicts"].values() for e in row})
    matrix = DetectionMatrix(engines)
    for r in records:
        matrix.add_sample(r["file"], r["verdicts"])
    return matrix


def load_matrix(path) -> DetectionMatrix:
    head, records = read_report(path)
    if head.get("schema") != SCAN_SCHEMA and not any("verdicts" in r for r in records):
        raise ConfigError(f"{path} has no scanner verdicts; run `jwbinder scan` first")
    return matrix_from_records(records)
