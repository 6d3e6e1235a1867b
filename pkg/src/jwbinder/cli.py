"""Command line: ``jwbinder analyze|scan|metrics|oracle``.

Exit codes: 0 success, 1 partial failures present, 2 configuration error.
"""

from __future__ import annotations

import argparse
import json
import logging
import pathlib
import sys

from . import __version__
from .harness.metrics import DEFAULT_THRESHOLD, compute_metrics
from .harness.pipeline import RunConfig, failure_count
from .harness.report import SCAN_SCHEMA, ReportWriter, read_report
from .harness.runner import discover_inputs, run_corpus
from .harness.scanner import ExternalScanner, ScannerConfig
from .harness.scanning import load_matrix, scan_corpus, signature_engines
from .harness.signatures import ConfigError

log = logging.getLogger("jwbinder")

EXIT_OK, EXIT_PARTIAL, EXIT_CONFIG = 0, 1, 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="jwbinder", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="more logging (repeatable)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="reconstruct JS/Wasm programs as pure JavaScript")
    p.add_argument("path", help="a .js file or a directory searched recursively")
    p.add_argument("--mode", choices=("code", "data", "all"), default="all",
                   help="variant to write; 'all' writes code, data and all")
    p.add_argument("--out-dir", default="out")
    p.add_argument("--assets-dir", default=None, help="where fetched .wasm files can be found")
    p.add_argument("--timeout", type=int, default=300, help="per-file wall-clock limit in seconds")
    p.add_argument("--parallelism", type=int, default=1)
    p.add_argument("--dump-pdg", action="store_true", help="also write <name>.pdg.dot")
    p.add_argument("--max-depth", type=int, default=64, help="backward data-flow depth for binary recovery")
    p.set_defaults(handler=cmd_analyze)

    p = sub.add_parser("scan", help="scan original and reconstructed variants")
    p.add_argument("dir", help="output directory of `analyze`")
    p.add_argument("--signatures", nargs="+", default=[], help="signature files, one engine each")
    p.add_argument("--endpoint", default=None, help="external scanner submit URL")
    p.add_argument("--poll-url", default=None, help="poll URL template with {id}")
    p.add_argument("--api-key-env", default="JWBINDER_SCANNER_KEY")
    p.add_argument("--cache-dir", default=None, help="scan cache (default <dir>/.scan-cache)")
    p.add_argument("--poll-interval", type=float, default=2.0)
    p.add_argument("--allow-network", action="store_true")
    p.set_defaults(handler=cmd_scan)

    p = sub.add_parser("metrics", help="SDR and ADE per variant")
    p.add_argument("report", help="scan.jsonl (or a report carrying verdicts)")
    p.add_argument("--threshold", type=int, default=DEFAULT_THRESHOLD)
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.set_defaults(handler=cmd_metrics)

    p = sub.add_parser("oracle", help=argparse.SUPPRESS)
    p.add_argument("wasm", help="binary module")
    p.add_argument("--func", type=int, default=None, help="function index")
    p.add_argument("--export", default=None, help="exported function name")
    p.add_argument("--args", nargs="*", default=[])
    p.add_argument("--check", action="store_true", help="also evaluate the abstraction and compare")
    p.set_defaults(handler=cmd_oracle)
    return parser


def cmd_analyze(args) -> int:
    config = RunConfig(mode=args.mode, out_dir=args.out_dir, assets_dir=args.assets_dir,
                       timeout_seconds=args.timeout, parallelism=args.parallelism,
                       dump_pdg=args.dump_pdg, max_depth=args.max_depth)
    config.validate()
    files = discover_inputs(args.path, config.out_dir)
    report = pathlib.Path(config.out_dir) / "report.jsonl"
    entries = run_corpus(files, config, report)
    failed = 0
    for entry in entries:
        n = failure_count(entry)
        failed += n > 0
        print(f"{entry['status']:<12} {entry['file']}  sites={entry['sites']['instantiation']} "
              f"invocations={entry['sites']['invocations']} failures={n}")
    print(f"{len(entries)} file(s), {failed} with failures; report: {report}")
    return EXIT_PARTIAL if failed else EXIT_OK


def cmd_scan(args) -> int:
    if not args.signatures and not args.endpoint:
        raise ConfigError("scan needs --signatures and/or --endpoint")
    engines = signature_engines(args.signatures)
    scanner = None
    if args.endpoint:
        cache = args.cache_dir or str(pathlib.Path(args.dir) / ".scan-cache")
        scanner = ExternalScanner(ScannerConfig(args.endpoint, args.poll_url, args.api_key_env, cache,
                                                args.poll_interval), allow_network=args.allow_network)
    records = scan_corpus(args.dir, engines, scanner)
    out = pathlib.Path(args.dir) / "scan.jsonl"
    with ReportWriter(out, SCAN_SCHEMA, signature_engines=sorted(engines)) as writer:
        for record in records:
            writer.write(record)
    _attach_verdicts(pathlib.Path(args.dir) / "report.jsonl", records)

    detected: dict[str, int] = {}
    errors = 0
    for record in records:
        errors += bool(record["errors"])
        for variant, row in record["verdicts"].items():
            detected[variant] = detected.get(variant, 0) + any(row.values())
        for variant, err in sorted(record["errors"].items()):
            print(f"{record['file']} [{variant}]: {err}")
    for variant in sorted(detected):
        print(f"{variant:<9} detected by any engine: {detected[variant]}/{len(records)}")
    print(f"scan results: {out}")
    return EXIT_PARTIAL if errors else EXIT_OK


def _attach_verdicts(report_path: pathlib.Path, records) -> None:
    """Copy the per-variant verdicts into the reconstruction report entries."""
    if not report_path.exists():
        return
    head, entries = read_report(report_path)
    by_file = {r["file"]: r["verdicts"] for r in records}
    extra = {k: v for k, v in head.items() if k not in ("record", "schema", "version")}
    with ReportWriter(report_path, head["schema"], **extra) as writer:
        for entry in entries:
            entry.pop("record", None)
            if entry["file"] in by_file:
                entry["verdicts"] = by_file[entry["file"]]
            writer.write(entry)


def cmd_metrics(args) -> int:
    if args.threshold < 1:
        raise ConfigError("--threshold must be positive")
    matrix = load_matrix(args.report)
    try:
        metrics = compute_metrics(matrix, args.threshold)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if args.json:
        print(json.dumps({k: m.as_dict() for k, m in metrics.items()}, sort_keys=True))
        return EXIT_OK
    print(f"threshold {args.threshold}, {len(matrix.samples)} samples, {len(matrix.engines)} engines")
    print(f"{'variant':<9} {'SDR':>7} {'ADE':>6}")
    for variant in ("baseline", "code", "data", "all", "combined"):
        if variant in metrics:
            m = metrics[variant]
            print(f"{variant:<9} {100 * m.sdr:6.1f}% {m.ade:6.2f}")
    return EXIT_OK


def _parse_value(vtype: str, text: str):
    try:
        if vtype in ("f32", "f64"):
            return float(text)
        return int(text, 0)
    except ValueError:
        raise ConfigError(f"bad {vtype} argument {text!r}") from None


def cmd_oracle(args) -> int:
    from .oracle import differential_check, interp_wasm
    from .oracle.numeric import Trap
    from .wasm import WasmDecodeError, decode_module

    try:
        module = decode_module(pathlib.Path(args.wasm).read_bytes())
    except (OSError, WasmDecodeError) as exc:
        raise ConfigError(f"cannot load {args.wasm}: {exc}") from exc
    idx = args.func
    if args.export is not None:
        idx = module.exported_func(args.export)
        if idx is None:
            raise ConfigError(f"no exported function {args.export!r}")
    if idx is None:
        raise ConfigError("give --func or --export")
    if not 0 <= idx < module.num_imported_funcs + len(module.functions):
        raise ConfigError(f"function index {idx} out of range")
    params = module.func_type(idx).params
    if len(args.args) != len(params):
        raise ConfigError(f"function {idx} takes {len(params)} argument(s)")
    values = [_parse_value(t, a) for t, a in zip(params, args.args)]
    try:
        results, trace = interp_wasm(module, idx, values)
        print(json.dumps({"results": results, "trace": trace.calls}))
    except Trap as trap:
        print(json.dumps({"trap": trap.kind}))
    if args.check:
        report = differential_check(module, idx, [values])
        status = "ok" if report.ok else (report.error or report.mismatches[0].reason)
        print(f"differential: {status}")
        return EXIT_OK if report.ok else EXIT_PARTIAL
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.handler(args)
    except ConfigError as exc:
        print(f"jwbinder: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
