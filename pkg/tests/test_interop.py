import base64

import pytest

from jwbinder import js
from jwbinder.interop import find_interops, load_key_apis, recover_all, recover_binary
from jwbinder.js import ast as A
from jwbinder.pdg import build_pdg

EMPTY_WASM = bytes([0, 97, 115, 109, 1, 0, 0, 0])


def analyze(src, assets=None, max_depth=64):
    pdg = build_pdg(js.parse_js(src))
    interops = find_interops(pdg)
    binaries = recover_all(pdg, interops, assets, max_depth)
    return pdg, interops, binaries


def test_motivating_map(motivating_source):
    pdg, im, binaries = analyze(motivating_source)
    assert len(im.instantiation_sites) == 1
    site = im.instantiation_sites[0]
    assert site.api == "WebAssembly.Instance"
    assert [inv.export_name for inv in im.export_invocations] == ["foo"]
    assert im.export_invocations[0].site is site
    assert im.import_bindings[("env", "document_write")].path == "document.write"
    origin = binaries[site.index]
    assert origin.kind == "inline-typed-array" and origin.bytes.startswith(EMPTY_WASM[:4])
    node = im.export_invocations[0].node
    assert "wasmInstance.foo()" in motivating_source[node.start:node.end + 2]


def test_pure_js_is_empty():
    _, im, binaries = analyze("var total = 0; for (var i = 0; i < 3; i++) { total += i; }")
    assert im.empty and binaries == {}


def test_promise_parameter_flow():
    _, im, _ = analyze("WebAssembly.instantiate(buf, imp).then(r => r.instance.exports.run());")
    (inv,) = im.export_invocations
    assert inv.export_name == "run"
    assert inv.site is im.instantiation_sites[0]


def test_inline_typed_array():
    _, im, binaries = analyze("WebAssembly.instantiate(new Uint8Array([0,97,115,109,1,0,0,0]));")
    origin = binaries[im.instantiation_sites[0].index]
    assert (origin.kind, origin.bytes) == ("inline-typed-array", EMPTY_WASM)


def test_base64_via_char_codes():
    encoded = base64.b64encode(EMPTY_WASM).decode()
    assert encoded == "AGFzbQEAAAA="
    src = (f'var s = atob("{encoded}"); var b = new Uint8Array(s.length);'
           "for (var i = 0; i < s.length; i++) { b[i] = s.charCodeAt(i); }"
           "WebAssembly.instantiate(b);")
    _, im, binaries = analyze(src)
    origin = binaries[0]
    assert (origin.kind, origin.bytes) == ("base64-string", base64.b64decode(encoded))


def test_hex_string_pairs():
    src = ('var hex = "0061736d01000000"; var bytes = new Uint8Array(hex.length / 2);'
           "for (var i = 0; i < hex.length; i += 2) { bytes[i / 2] = parseInt(hex.substr(i, 2), 16); }"
           "WebAssembly.instantiate(bytes);")
    _, _, binaries = analyze(src)
    assert (binaries[0].kind, binaries[0].bytes) == ("hex-string", bytes.fromhex("0061736d01000000"))


def test_fetch_asset(tmp_path):
    (tmp_path / "mod.wasm").write_bytes(EMPTY_WASM)
    src = 'WebAssembly.instantiateStreaming(fetch("mod.wasm"));'
    _, _, found = analyze(src, str(tmp_path))
    assert (found[0].kind, found[0].bytes) == ("asset-file", EMPTY_WASM)
    _, _, missing = analyze(src)
    assert (missing[0].kind, missing[0].reason) == ("unresolved", "network-only")


def test_fetch_asset_by_basename(tmp_path):
    (tmp_path / "mod.wasm").write_bytes(EMPTY_WASM)
    _, _, found = analyze('WebAssembly.instantiateStreaming(fetch("https://cdn.example/x/mod.wasm"));',
                          str(tmp_path))
    assert found[0].kind == "asset-file"


def test_dynamic_construction():
    _, _, binaries = analyze("var b = new Uint8Array(n); WebAssembly.instantiate(b);")
    assert (binaries[0].kind, binaries[0].reason) == ("unresolved", "dynamic-construction")


def test_depth_exceeded():
    chain = "var v0 = new Uint8Array([0,97,115,109,1,0,0,0]);" + "".join(
        f"var v{i + 1} = v{i};" for i in range(10)) + "WebAssembly.instantiate(v10);"
    _, _, shallow = analyze(chain, max_depth=4)
    assert (shallow[0].kind, shallow[0].reason) == ("unresolved", "depth-exceeded")
    _, _, deep = analyze(chain)
    assert deep[0].kind == "inline-typed-array"


def test_two_instances_of_one_module():
    src = ("var m = new WebAssembly.Module(new Uint8Array([0,97,115,109,1,0,0,0]));"
           "var i1 = new WebAssembly.Instance(m, {}); var i2 = new WebAssembly.Instance(m, {});"
           "i1.exports.f(); i2.exports.g();")
    _, im, binaries = analyze(src)
    assert len(im.instantiation_sites) == 2
    assert [(inv.export_name, inv.site.index) for inv in im.export_invocations] == [
        ("f", im.instantiation_sites[0].index), ("g", im.instantiation_sites[1].index)]
    assert all(b.kind == "inline-typed-array" for b in binaries.values())


def test_import_bindings_unwrap_forwarders():
    src = ("var imp = {env: {log: console.log, w: function (a, b) { document.write(a, b); }, k: 5}};"
           "WebAssembly.instantiate(bytes, imp);")
    _, im, _ = analyze(src)
    paths = {k: b.path for k, b in im.import_bindings.items()}
    assert paths[("env", "log")] == "console.log"
    assert paths[("env", "w")] == "document.write"
    assert len(set(im.import_bindings)) == len(im.import_bindings)


def test_invocations_attributed_to_known_sites(motivating_source):
    _, im, _ = analyze(motivating_source)
    sites = {id(s) for s in im.instantiation_sites}
    assert all(id(inv.site) in sites for inv in im.export_invocations)


def test_key_api_table_is_data():
    table = load_key_apis()
    for api in ("WebAssembly.instantiate", "WebAssembly.instantiateStreaming", "WebAssembly.compile",
                "WebAssembly.compileStreaming", "WebAssembly.Module", "WebAssembly.Instance",
                "WebAssembly.Memory", "WebAssembly.Table"):
        assert api in table


def test_sites_use_key_apis(motivating_source):
    table = load_key_apis()
    _, im, _ = analyze(motivating_source)
    assert all(s.api in table for s in im.instantiation_sites + im.modularization_sites)


@pytest.mark.parametrize("src", [
    "WebAssembly.instantiate(buf, imp).then(r => r.instance.exports.run());",
    "var m = new WebAssembly.Module(b); var i = new WebAssembly.Instance(m, {env: {f: alert}}); i.exports.go(1);",
])
def test_stable_under_reformatting(src):
    _, a, _ = analyze(src)
    _, b, _ = analyze(js.print_js(js.parse_js(src)))
    assert a.summary() == b.summary()


def test_recover_binary_direct():
    pdg = build_pdg(js.parse_js("WebAssembly.compile(new Uint8Array([0,97,115,109,1,0,0,0]));"))
    im = find_interops(pdg)
    site = (im.instantiation_sites + im.modularization_sites)[0]
    origin = recover_binary(pdg, site)
    assert origin.bytes == EMPTY_WASM
    assert any(isinstance(n, A.ArrayExpression) for n in origin.provenance)
