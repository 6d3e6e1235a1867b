"""The eight acceptance criteria; a summary line per criterion is printed at the end of the run."""

import json
import pathlib
import random
import time

import pytest

from corpus import (FIXTURES, IMPORT_FIXTURES, MALICIOUS_RULES, PURE_JS, REFERENCE_ENGINES, large_js, large_wat,
                    reference_counts, wat2wasm, wat_corpus, write_benign_corpus)
from jwbinder import js
from jwbinder.harness.metrics import DetectionMatrix, compute_metrics
from jwbinder.harness.pipeline import RunConfig, run_pipeline
from jwbinder.harness.signatures import parse_signatures, scan_signatures
from jwbinder.interop import InteropMap
from jwbinder.js.ast import structurally_equal
from jwbinder.oracle import differential_check
from jwbinder.pdg import build_pdg
from jwbinder.reconstruct import integrate, reconstruct
from jwbinder.wasm import MalformedLeb, decode_module, decode_uleb
from wasmgen import random_args, random_module
from watdecl import declarations

RULES = {r.id: r for r in parse_signatures(MALICIOUS_RULES)}


def read(path):
    return pathlib.Path(path).read_text(encoding="utf-8")


def test_criterion_1_motivating_example_uplift(tmp_path):
    start = time.perf_counter()
    entry = run_pipeline(FIXTURES / "motivating.js", RunConfig(out_dir=str(tmp_path)))
    original = read(FIXTURES / "motivating.js")
    outputs = {k: read(p) for k, p in entry["outputs"].items()}
    assert not RULES["payload-write"].matches(original)
    assert RULES["payload-write"].matches(outputs["all"])
    assert RULES["payload-only"].matches(outputs["data"])
    assert RULES["write-in-loop"].matches(outputs["code"])
    assert not scan_signatures(original, list(RULES.values())).detected
    assert time.perf_counter() - start < 2


def test_criterion_2_differential_fidelity():
    start = time.perf_counter()
    functions = inputs = 0
    for seed in range(100):
        wat, params, _ = random_module(seed, memory=seed % 3 != 0)
        module = decode_module(wat2wasm(wat))
        assert module.num_imported_funcs == 0
        rng = random.Random(1000 + seed)
        vectors = [random_args(rng, params) for _ in range(20)]
        report = differential_check(module, module.exported_func("run"), vectors)
        assert report.error is None, (seed, report.error)
        assert report.mismatches == [], (seed, report.mismatches[0])
        assert report.checked + report.skipped == 20
        functions += 1
        inputs += report.checked
    assert functions >= 100 and inputs >= 100 * 20 * 0.95
    assert time.perf_counter() - start < 60


def test_criterion_3_host_call_traces():
    assert len(IMPORT_FIXTURES) == 10
    assert IMPORT_FIXTURES[0].name == "motivating"
    traced = 0
    for fix in IMPORT_FIXTURES:
        module = decode_module(wat2wasm(fix.wat))
        assert module.num_imported_funcs >= 1
        report = differential_check(module, module.exported_func(fix.export), fix.inputs, fix.host, fix.bindings)
        assert report.ok, (fix.name, report.error or report.mismatches[0].reason)
        assert report.checked == len(fix.inputs)
        traced += 1
    assert traced == 10


def test_criterion_4_benign_side_effects(tmp_path):
    files = write_benign_corpus(tmp_path / "benign", 50)
    assert len(files) == 50
    rules = list(RULES.values())
    config = RunConfig(out_dir=str(tmp_path / "out"))
    for f in files:
        entry = run_pipeline(f, config)
        assert entry["status"] == "ok", (f, entry["error"])
        assert entry["sites"]["instantiation"] >= 1 and all(b["resolved"] for b in entry["binaries"])
        assert not scan_signatures(read(f), rules).detected
        for variant, path in entry["outputs"].items():
            text = read(path)
            js.parse_js(text)
            assert not scan_signatures(text, rules).detected, (f, variant)


def test_criterion_5_metric_math():
    metrics = compute_metrics(DetectionMatrix.from_counts(reference_counts(), REFERENCE_ENGINES))
    assert (metrics["baseline"].as_dict()["sdr_percent"], round(metrics["baseline"].ade, 1)) == (49.1, 4.1)
    assert (metrics["combined"].as_dict()["sdr_percent"], round(metrics["combined"].ade, 1)) == (86.2, 8.3)
    two = compute_metrics(DetectionMatrix.from_counts({"baseline": [2, 2]}, 2), threshold=2)["baseline"]
    assert (100 * two.sdr, two.ade) == (100.0, 2.0)
    none = compute_metrics(DetectionMatrix.from_counts({"baseline": [0]}, 2), threshold=2)["baseline"]
    assert (100 * none.sdr, none.ade) == (0.0, 0.0)


def test_criterion_6_decoder_conformance():
    corpus = wat_corpus()
    assert len(corpus) >= 100
    for name, wat in corpus:
        decl = declarations(wat)
        m = decode_module(wat2wasm(wat))
        assert [(i.module, i.field, i.kind) for i in m.imports] == decl.imports, name
        assert len(m.types) >= decl.types, name
        assert (len(m.functions), len(m.tables), len(m.memories), len(m.globals), len(m.elements)) == (
            decl.functions, decl.tables, decl.memories, decl.globals, decl.elements), name
        assert sorted(e.name for e in m.exports) == sorted(decl.exports), name
        assert [(s.offset, s.bytes) for s in m.data_segments] == decl.data, name
        assert all(f.body is not None for f in m.functions), name
    assert decode_uleb(bytes([0xE5, 0x8E, 0x26]), 0) == (624485, 3)
    assert decode_uleb(bytes([0x00]), 0) == (0, 1)
    with pytest.raises(MalformedLeb):
        decode_uleb(bytes([0x80] * 6), 0)


def test_criterion_7_throughput(tmp_path):
    wasm = wat2wasm(large_wat())
    source = large_js(wasm)
    assert len(wasm) >= 50_000 and len(source.encode()) >= 300_000
    path = tmp_path / "large.js"
    path.write_text(source)
    start = time.perf_counter()
    entry = run_pipeline(path, RunConfig(out_dir=str(tmp_path / "out")))
    elapsed = time.perf_counter() - start
    assert entry["status"] == "ok" and entry["sites"]["invocations"] >= 1
    assert set(entry["timings"]) == {"data_flow_seconds", "ssr_seconds"}
    assert all(isinstance(v, float) and v >= 0 for v in entry["timings"].values())
    json.dumps(entry)
    assert elapsed < 30


def fixture_sources(tmp_path):
    sources = {"motivating": read(FIXTURES / "motivating.js")}
    sources.update({f"pure-{k}": s for k, s in enumerate(PURE_JS)})
    for f in write_benign_corpus(tmp_path / "benign", 50):
        sources[f.name] = read(f)
    return sources


def test_criterion_8_idempotence_and_identity(tmp_path):
    for name, src in fixture_sources(tmp_path).items():
        ast = js.parse_js(src)
        printed = js.print_js(ast)
        assert structurally_equal(js.parse_js(printed), ast), name
        assert js.print_js(js.parse_js(printed)) == printed, name
        text = reconstruct(integrate(build_pdg(ast), InteropMap(), {}, {}, "all"))
        assert structurally_equal(js.parse_js(text), ast), name
