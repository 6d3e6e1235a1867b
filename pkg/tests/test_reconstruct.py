import re

import pytest

from corpus import MALICIOUS_RULES, PURE_JS, js_bytes, reconstruct_source, wat2wasm
from jwbinder import js
from jwbinder.harness.signatures import parse_signatures, scan_signatures
from jwbinder.interop import InteropMap, find_interops
from jwbinder.js import ast as A
from jwbinder.pdg import build_pdg
from jwbinder.reconstruct import integrate, reconstruct

RULES = {r.id: r for r in parse_signatures(MALICIOUS_RULES)}


def strings_of(text):
    return {n.value for n in A.walk(js.parse_js(text)) if isinstance(n, A.Literal) and isinstance(n.value, str)}


def callees_of(text):
    return {js.print_js(A.Program([A.ExpressionStatement(n.callee)])).strip().rstrip(";")
            for n in A.walk(js.parse_js(text)) if isinstance(n, A.CallExpression)}


def declared_names(text):
    out = []
    for n in A.walk(js.parse_js(text)):
        if isinstance(n, A.VariableDeclarator):
            out.append(n.id.name)
        elif isinstance(n, A.FunctionDeclaration):
            out.append(n.id.name)
    return out


@pytest.fixture(scope="module")
def motivating_outputs(motivating_source):
    return {mode: text for mode, (text, _) in reconstruct_source(motivating_source).items()}


def test_motivating_all_has_payload_and_loop(motivating_outputs):
    text = motivating_outputs["all"]
    assert "http://malicious.example/payload.js" in text
    assert re.search(r"L_[\d_]+: for \(;;\) \{[^}]*document\.write\(", text, re.S)
    assert RULES["payload-write"].matches(text)


def test_motivating_code_inlines_call(motivating_outputs):
    text = motivating_outputs["code"]
    assert "wasmInstance.foo()" not in text
    assert RULES["write-in-loop"].matches(text)
    assert "DATA_0" not in text


def test_motivating_data_keeps_call(motivating_outputs, motivating_source):
    text = motivating_outputs["data"]
    assert "wasmInstance.foo();" in text
    assert RULES["payload-only"].matches(text)
    assert text.index("const DATA_0 =") < text.index("new WebAssembly.Instance")


def test_motivating_original_evades(motivating_source):
    assert not RULES["payload-write"].matches(motivating_source)


def test_outputs_reparse(motivating_outputs):
    for text in motivating_outputs.values():
        js.parse_js(text)


def test_mode_monotonicity(motivating_outputs):
    assert strings_of(motivating_outputs["all"]) >= strings_of(motivating_outputs["data"])
    assert callees_of(motivating_outputs["all"]) >= callees_of(motivating_outputs["code"])


def test_deterministic(motivating_source, motivating_outputs):
    again = {m: t for m, (t, _) in reconstruct_source(motivating_source).items()}
    assert again == motivating_outputs


@pytest.mark.parametrize("src", PURE_JS)
def test_no_interop_identity(src):
    printed = js.print_js(js.parse_js(src))
    for text, ipdg in reconstruct_source(src).values():
        assert text == printed
        assert ipdg.splices == []


def test_empty_program():
    assert {m: t for m, (t, _) in reconstruct_source("").items()} == {"code": "", "data": "", "all": ""}


def test_integrate_with_empty_map():
    src = "var a = 1; if (a) { b(a); }"
    pdg = build_pdg(js.parse_js(src))
    for mode in ("code", "data", "all"):
        assert reconstruct(integrate(pdg, InteropMap(), {}, {}, mode)) == js.print_js(js.parse_js(src))
    with pytest.raises(ValueError):
        integrate(pdg, InteropMap(), {}, {}, "both")


def test_two_sites_disjoint_namespaces():
    wasm = wat2wasm('(module (memory 1) (data (i32.const 0) "hello world") (func (export "f")))')
    src = (f"var b = new Uint8Array({js_bytes(wasm)}); var m = new WebAssembly.Module(b);"
           "var i1 = new WebAssembly.Instance(m, {}); var i2 = new WebAssembly.Instance(m, {});"
           "i1.exports.f(); i2.exports.f();")
    text = reconstruct_source(src, ("all",))["all"][0]
    decls = re.findall(r"const (\w*DATA_\d+\w*) =", text)
    first = {d for d in decls if not d.startswith("W")}
    second = {d for d in decls if d.startswith("W1_")}
    assert first and second and not first & second
    assert len(decls) == len(set(decls))
    assert "i1.exports.f()" not in text and "i2.exports.f()" not in text


def test_arguments_bound_and_value_hoisted():
    wasm = wat2wasm('(module (func (export "add") (param i32 i32) (result i32)'
                    ' (i32.add (local.get 0) (local.get 1))))')
    src = (f"var inst = new WebAssembly.Instance(new WebAssembly.Module(new Uint8Array({js_bytes(wasm)})), {{}});"
           "var total = inst.exports.add(x(), 4) * 2;")
    text = reconstruct_source(src, ("code",))["code"][0]
    assert re.search(r"const p0_\d+ = x\(\);", text)
    assert re.search(r"const p1_\d+ = 4;", text)
    assert re.search(r"var total = T_[\d_]+ \* 2;", text)
    assert text.count("x()") == 1


def test_generated_names_avoid_source_identifiers():
    wasm = wat2wasm('(module (memory 1) (data (i32.const 0) "abcdefgh") (func (export "f") (result i32) (i32.const 5)))')
    src = (f"var DATA_0 = 1, C_0 = 2, MEM = 3; var i = new WebAssembly.Instance("
           f"new WebAssembly.Module(new Uint8Array({js_bytes(wasm)})), {{}}); var r = i.exports.f();")
    text = reconstruct_source(src, ("all",))["all"][0]
    decls = declared_names(text)
    assert {"DATA_0", "C_0", "MEM"} <= set(decls)
    assert len(decls) == len(set(decls))


def test_helper_prelude_once():
    wasm = wat2wasm('(module (func (export "f") (param i32) (result i32) (i32.popcnt (local.get 0)))'
                    ' (func (export "g") (param i32) (result i32) (i32.popcnt (local.get 0))))')
    src = (f"var i = new WebAssembly.Instance(new WebAssembly.Module(new Uint8Array({js_bytes(wasm)})), {{}});"
           "i.exports.f(1); i.exports.g(2);")
    text, ipdg = reconstruct_source(src, ("code",))["code"]
    assert text.count("function popcnt(") == 1
    assert text.index("function popcnt(") < text.index("new WebAssembly")
    kinds = [s.kind for s in ipdg.splices]
    assert kinds.count("helper-prelude") == 1 and kinds.count("invocation-replacement") == 2


def test_failed_export_left_untouched():
    wasm = wat2wasm('(module (func (export "f")))')
    src = (f"var i = new WebAssembly.Instance(new WebAssembly.Module(new Uint8Array({js_bytes(wasm)})), {{}});"
           "i.exports.missing();")
    text, ipdg = reconstruct_source(src, ("code",))["code"]
    assert "i.exports.missing();" in text
    assert ipdg.failures == [("missing", "export not found")]


def test_splices_respect_interop_map(motivating_source):
    (_, ipdg), = reconstruct_source(motivating_source, ("all",)).values()
    kinds = sorted(s.kind for s in ipdg.splices)
    assert kinds == ["helper-prelude", "instantiation-insertion", "invocation-replacement"]
    assert not scan_signatures(js.print_js(js.parse_js(motivating_source)), [RULES["payload-write"]]).detected
