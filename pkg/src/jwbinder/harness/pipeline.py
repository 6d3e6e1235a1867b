"""One input file through the whole analysis: parse, PDG, interop, SSR, output."""

from __future__ import annotations

import hashlib
import logging
import pathlib
import sys
import threading
import time
from dataclasses import asdict, dataclass

from .. import js
from ..interop import find_interops, recover_all
from ..pdg import build_pdg
from ..reconstruct import MODES, reconstruct_modes
from ..wasm import WasmDecodeError, decode_module
from .signatures import ConfigError

log = logging.getLogger(__name__)

STACK_SIZE = 512 * 1024 * 1024
RECURSION_LIMIT = 200_000


@dataclass
class RunConfig:
    mode: str = "all"                 # code | data | all (all writes every variant)
    out_dir: str = "out"
    assets_dir: str | None = None
    timeout_seconds: int = 300
    parallelism: int = 1
    signatures_path: str | None = None
    scanner_endpoint: str | None = None
    api_key_env: str = "JWBINDER_SCANNER_KEY"
    dump_pdg: bool = False
    max_depth: int = 64

    def validate(self) -> None:
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {', '.join(MODES)}")
        if self.timeout_seconds <= 0:
            raise ConfigError("timeout must be positive")
        if self.parallelism <= 0:
            raise ConfigError("parallelism must be positive")
        if self.assets_dir is not None and not pathlib.Path(self.assets_dir).is_dir():
            raise ConfigError(f"assets dir {self.assets_dir} does not exist")
        out = pathlib.Path(self.out_dir)
        try:
            out.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise ConfigError(f"cannot create out dir {out}: {exc}") from exc

    @property
    def variants(self) -> tuple[str, ...]:
        return MODES if self.mode == "all" else (self.mode,)

    def as_dict(self) -> dict:
        return asdict(self)


def call_with_big_stack(fn, *args, **kwargs):
    """Run ``fn`` in a thread with a large stack; the recursive passes need it on deep inputs."""
    box: dict = {}

    def target():
        try:
            box["value"] = fn(*args, **kwargs)
        except BaseException as exc:           # re-raised in the caller
            box["error"] = exc

    old_size = threading.stack_size()
    old_limit = sys.getrecursionlimit()
    threading.stack_size(STACK_SIZE)
    sys.setrecursionlimit(max(old_limit, RECURSION_LIMIT))
    try:
        worker = threading.Thread(target=target, name="jwbinder-pipeline")
        worker.start()
        worker.join()
    finally:
        threading.stack_size(old_size)
        sys.setrecursionlimit(old_limit)
    if "error" in box:
        raise box["error"]
    return box.get("value")


def new_entry(path) -> dict:
    return {
        "file": str(path),
        "status": "ok",
        "error": None,
        "sites": {"instantiation": 0, "modularization": 0, "runtime": 0, "invocations": 0},
        "binaries": [],
        "abstraction_failures": [],
        "outputs": {},
        "timings": {"data_flow_seconds": 0.0, "ssr_seconds": 0.0},
    }


def failure_count(entry: dict) -> int:
    n = 0 if entry["status"] == "ok" else 1
    n += sum(1 for b in entry["binaries"] if not b["resolved"] or b.get("decode_error"))
    n += len(entry["abstraction_failures"])
    return n


def run_pipeline(path, config: RunConfig, output_stem: str | None = None) -> dict:
    """Analyze one file and write its reconstructions; returns the report entry.

    Never raises for problems with the input itself: syntax errors give an
    ``unparseable`` entry, anything unexpected an ``error`` entry.
    """
    try:
        return call_with_big_stack(_run, pathlib.Path(path), config, output_stem)
    except Exception as exc:                    # noqa: BLE001 - one bad file must not sink a corpus run
        log.exception("pipeline failed on %s", path)
        entry = new_entry(path)
        entry.update(status="error", error=f"{type(exc).__name__}: {exc}")
        return entry


def _run(path: pathlib.Path, config: RunConfig, output_stem: str | None) -> dict:
    entry = new_entry(path)
    stem = output_stem or path.name.removesuffix(".js")
    try:
        source = path.read_text(encoding="utf-8", errors="surrogateescape")
    except OSError as exc:
        entry.update(status="error", error=f"unreadable: {exc}")
        return entry

    t0 = time.perf_counter()
    try:
        ast = js.parse_js(source)
    except js.JsSyntaxError as exc:
        entry.update(status="unparseable", error=str(exc))
        entry["timings"]["data_flow_seconds"] = time.perf_counter() - t0
        return entry
    pdg = build_pdg(ast)
    interops = find_interops(pdg)
    binaries = recover_all(pdg, interops, config.assets_dir, config.max_depth)
    t1 = time.perf_counter()
    entry["sites"] = {
        "instantiation": len(interops.instantiation_sites),
        "modularization": len(interops.modularization_sites),
        "runtime": len(interops.runtime_sites),
        "invocations": len(interops.export_invocations),
    }

    modules = {}
    for index, origin in sorted(binaries.items()):
        record = {"site": index, "kind": origin.kind, "resolved": origin.resolved, "reason": origin.reason,
                  "detail": origin.detail, "size": None, "sha256": None, "decode_error": None}
        if origin.resolved:
            record["size"] = len(origin.bytes)
            record["sha256"] = hashlib.sha256(origin.bytes).hexdigest()
            try:
                modules[index] = decode_module(origin.bytes)
            except WasmDecodeError as exc:
                record["decode_error"] = f"{type(exc).__name__}: {exc}"
            else:
                for diag in modules[index].diagnostics:
                    entry["abstraction_failures"].append({"site": index, "reason": diag})
        entry["binaries"].append(record)

    results = reconstruct_modes(pdg, interops, modules, config.variants)
    out_dir = pathlib.Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    seen_failures = set()
    for variant, (text, ipdg) in results.items():
        target = out_dir / f"{stem}.{variant}.js"
        target.write_text(text, encoding="utf-8", errors="surrogateescape")
        entry["outputs"][variant] = str(target)
        for name, reason in ipdg.failures:
            if (name, reason) not in seen_failures:
                seen_failures.add((name, reason))
                entry["abstraction_failures"].append({"export": name, "reason": reason})
    if config.dump_pdg:
        target = out_dir / f"{stem}.pdg.dot"
        target.write_text(pdg.dump_dot(), encoding="utf-8")
        entry["outputs"]["pdg"] = str(target)
    entry["timings"] = {"data_flow_seconds": t1 - t0, "ssr_seconds": time.perf_counter() - t1}
    return entry
