"""Corpus runner: one worker process per file, bounded parallelism, hard timeouts.

Each file runs in a forked process so that a pathological input can be killed
once it exceeds ``timeout_seconds`` without affecting the others. Entries are
released to the report in input order (a finished file waits only for files
listed before it), which keeps reports byte-identical across runs regardless
of scheduling.
"""

from __future__ import annotations

import logging
import multiprocessing
import pathlib
import time
from collections import deque
from multiprocessing.connection import wait

from .pipeline import RunConfig, new_entry, run_pipeline
from .report import ReportWriter
from .signatures import ConfigError

log = logging.getLogger(__name__)

OUTPUT_SUFFIXES = (".code.js", ".data.js", ".all.js")


def discover_inputs(path, out_dir=None) -> list[pathlib.Path]:
    """A single file, or every ``*.js`` under a directory (sorted, outputs excluded)."""
    path = pathlib.Path(path)
    if path.is_file():
        return [path]
    if not path.is_dir():
        raise ConfigError(f"input {path} does not exist")
    out = pathlib.Path(out_dir).resolve() if out_dir else None
    files = []
    for f in sorted(path.rglob("*.js")):
        if not f.is_file() or f.name.endswith(OUTPUT_SUFFIXES):
            continue
        if out is not None and out in f.resolve().parents:
            continue
        files.append(f)
    return files


def output_stems(files) -> list[str]:
    """Output basenames, disambiguated with ``_<k>`` when two inputs share a name."""
    seen: dict[str, int] = {}
    stems = []
    for f in files:
        base = pathlib.Path(f).name.removesuffix(".js")
        k = seen.get(base, 0)
        seen[base] = k + 1
        stems.append(base if k == 0 else f"{base}_{k}")
    return stems


def _worker(conn, path, config: RunConfig, stem: str) -> None:
    try:
        entry = run_pipeline(path, config, stem)
    except BaseException as exc:               # noqa: BLE001 - reported to the parent
        entry = new_entry(path)
        entry.update(status="error", error=f"{type(exc).__name__}: {exc}")
    conn.send(entry)
    conn.close()


def timeout_entry(path, seconds) -> dict:
    entry = new_entry(path)
    entry.update(status="timeout", error=f"analysis exceeded {seconds}s")
    return entry


def run_corpus(files, config: RunConfig, report_path=None, isolate: bool = True) -> list[dict]:
    """Analyze ``files``; returns the entries in input order (and writes the report if asked).

    ``isolate=False`` runs everything in-process, without timeout enforcement.
    """
    files = [pathlib.Path(f) for f in files]
    stems = output_stems(files)
    writer = ReportWriter(report_path, config=_header_config(config)) if report_path else None
    results: dict[int, dict] = {}
    released = 0

    def release():
        nonlocal released
        while released in results:
            if writer:
                writer.write(results[released])
            released += 1

    try:
        if not isolate:
            for i, f in enumerate(files):
                start = time.perf_counter()
                results[i] = run_pipeline(f, config, stems[i])
                results[i]["elapsed_seconds"] = time.perf_counter() - start
                release()
        else:
            _run_isolated(files, stems, config, results, release)
    finally:
        if writer:
            writer.close()
    return [results[i] for i in range(len(files))]


def _run_isolated(files, stems, config: RunConfig, results: dict, release) -> None:
    ctx = multiprocessing.get_context("fork")
    pending = deque(enumerate(files))
    running: dict = {}                         # connection -> (index, process, start, deadline)
    while pending or running:
        while pending and len(running) < config.parallelism:
            i, f = pending.popleft()
            recv, send = ctx.Pipe(duplex=False)
            proc = ctx.Process(target=_worker, args=(send, f, config, stems[i]), daemon=True)
            proc.start()
            send.close()
            start = time.monotonic()
            running[recv] = (i, proc, start, start + config.timeout_seconds)
            log.debug("started %s (pid %s)", f, proc.pid)
        soonest = min(deadline for _, _, _, deadline in running.values())
        for conn in wait(list(running), timeout=max(0.0, soonest - time.monotonic())):
            i, proc, start, _ = running.pop(conn)
            try:
                entry = conn.recv()
            except EOFError:
                proc.join()
                entry = new_entry(files[i])
                entry.update(status="error", error=f"worker died (exit code {proc.exitcode})")
            conn.close()
            proc.join()
            entry["elapsed_seconds"] = time.monotonic() - start
            results[i] = entry
            log.info("%s: %s", files[i], entry["status"])
        now = time.monotonic()
        for conn, (i, proc, start, deadline) in list(running.items()):
            if now >= deadline:
                proc.kill()
                proc.join()
                conn.close()
                del running[conn]
                entry = timeout_entry(files[i], config.timeout_seconds)
                entry["elapsed_seconds"] = now - start
                results[i] = entry
                log.warning("%s: timed out after %ss", files[i], config.timeout_seconds)
        release()


def _header_config(config: RunConfig) -> dict:
    # only settings that change the analysis; paths and parallelism would break report determinism
    return {"mode": config.mode, "timeout_seconds": config.timeout_seconds, "max_depth": config.max_depth}
