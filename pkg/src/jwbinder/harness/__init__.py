"""Corpus orchestration, scanners, metrics and reports."""

from .metrics import DEFAULT_THRESHOLD, DetectionMatrix, Metrics, compute_metrics
from .pipeline import RunConfig, run_pipeline
from .report import ReportWriter, read_report
from .runner import discover_inputs, run_corpus
from .scanner import ExternalScanner, ScannerConfig, ScanResult
from .scanning import load_matrix, matrix_from_records, scan_corpus
from .signatures import ConfigError, Rule, Verdict, load_signatures, parse_signatures, scan_signatures

__all__ = [
    "DEFAULT_THRESHOLD", "ConfigError", "DetectionMatrix", "ExternalScanner", "Metrics", "ReportWriter", "Rule",
    "RunConfig", "ScanResult", "ScannerConfig", "Verdict", "compute_metrics", "discover_inputs", "load_matrix",
    "load_signatures", "matrix_from_records", "parse_signatures", "read_report", "run_corpus", "run_pipeline",
    "scan_corpus", "scan_signatures",
]
