import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jwbinder import js
from jwbinder.js import ast as A
from jwbinder.pdg import build_pdg, flows_from, flows_to


def idents(pdg, name):
    return [n for n in A.walk(pdg.ast) if isinstance(n, A.Identifier) and n.name == name]


def edge_names(pdg):
    return {(d.name, u.name, var) for d, u, var in pdg.data_edges}


def test_motivating_module_def_reaches_instantiation(motivating_source):
    pdg = build_pdg(js.parse_js(motivating_source))
    decl, *uses = idents(pdg, "wasmModule")
    assert any(d is decl and u is uses[0] for d, u, _ in pdg.data_edges)
    inst_call = next(n for n in A.walk(pdg.ast) if isinstance(n, A.NewExpression)
                     and getattr(n.callee, "property", None) and n.callee.property.name == "Instance")
    assert uses[0] is inst_call.arguments[0]


def test_motivating_instance_flows_to_invocation(motivating_source):
    pdg = build_pdg(js.parse_js(motivating_source))
    decl = idents(pdg, "wasmInstance")[0]
    call = next(n for n in A.walk(pdg.ast) if isinstance(n, A.CallExpression)
                and isinstance(n.callee, A.MemberExpression) and n.callee.property.name == "foo")
    reached = flows_from(pdg, decl)
    assert call.callee.object in reached


def test_flows_to_reaches_module_construction(motivating_source):
    pdg = build_pdg(js.parse_js(motivating_source))
    use = idents(pdg, "wasmModule")[1]
    construction = next(n for n in A.walk(pdg.ast) if isinstance(n, A.NewExpression)
                        and isinstance(n.callee, A.MemberExpression) and n.callee.property.name == "Module")
    assert construction in flows_to(pdg, use)


def test_true_edge_from_if():
    pdg = build_pdg(js.parse_js("if (c) { f(); }"))
    labelled = [(a, b) for a, b, lab in pdg.control_edges if lab == "True"]
    assert len(labelled) == 1
    src, dst = labelled[0]
    assert isinstance(src, A.IfStatement)
    assert isinstance(dst, A.ExpressionStatement) and isinstance(dst.expression, A.CallExpression)


def test_false_edges_and_origins():
    pdg = build_pdg(js.parse_js("if (c) { f(); } else { g(); } while (x) { h(); } var y = a ? 1 : 2;"))
    labels = {lab for _, _, lab in pdg.control_edges}
    assert {"True", "False", "Uncond"} <= labels
    for src, _, lab in pdg.control_edges:
        if lab in ("True", "False"):
            assert isinstance(src, (A.IfStatement, A.ForStatement, A.WhileStatement, A.ConditionalExpression,
                                    A.DoWhileStatement))


def test_dead_definition_has_no_edges():
    assert build_pdg(js.parse_js("var x = 1;")).data_edges == []


def test_straight_line_soundness():
    pdg = build_pdg(js.parse_js("var a = 1; var b = a; use(b);"))
    a_def = idents(pdg, "a")[0]
    b_def = idents(pdg, "b")[0]
    assert b_def in flows_from(pdg, a_def)


def test_unreferenced_literal_flows_nowhere():
    pdg = build_pdg(js.parse_js("42;"))
    lit = next(n for n in A.walk(pdg.ast) if isinstance(n, A.Literal))
    assert flows_from(pdg, lit) == set()


def test_edges_point_def_to_use():
    pdg = build_pdg(js.parse_js("var a = 1; a = 2; f(a);"))
    for d, u, _ in pdg.data_edges:
        assert pdg.order(d) < pdg.order(u) or pdg.binding(d) is pdg.binding(u)
    assert ("a", "a", "a") in edge_names(pdg)


def test_var_is_function_scoped_and_let_block_scoped():
    pdg = build_pdg(js.parse_js("function f() { if (c) { var v = 1; let w = 2; } return v + w; }"))
    v_def, v_use = idents(pdg, "v")
    w_def, w_use = idents(pdg, "w")
    pairs = {(id(d), id(u)) for d, u, _ in pdg.data_edges}
    assert (id(v_def), id(v_use)) in pairs
    assert (id(w_def), id(w_use)) not in pairs


def test_hoisted_function_declaration():
    pdg = build_pdg(js.parse_js("run(); function run() { return 1; }"))
    call_id, decl_id = idents(pdg, "run")
    assert any(d is decl_id and u is call_id for d, u, _ in pdg.data_edges)


def test_promise_callback_parameter():
    src = "WebAssembly.instantiate(buf, {}).then(function (r) { r.instance.exports.run(); });"
    pdg = build_pdg(js.parse_js(src))
    call = next(n for n in A.walk(pdg.ast) if isinstance(n, A.CallExpression)
                and isinstance(n.callee, A.MemberExpression) and n.callee.property.name == "instantiate")
    param = idents(pdg, "r")[0]
    assert param in flows_from(pdg, call)


def test_object_literal_alias_one_level():
    pdg = build_pdg(js.parse_js("var g = document.write; var imp = {env: {write: g}}; use(imp);"))
    g_def = idents(pdg, "g")[0]
    assert idents(pdg, "imp")[1] in flows_from(pdg, g_def)


def test_dump_format():
    dot = build_pdg(js.parse_js("var a = 1; if (a) { f(a); }")).dump_dot()
    assert "DEF->USE var=a" in dot and "CTL label=True" in dot and "CTL label=Uncond" in dot
    assert dot.startswith("digraph pdg {")


def test_unresolved_globals_recorded():
    pdg = build_pdg(js.parse_js("mystery(1);"))
    assert "mystery" in pdg.unresolved


def test_deterministic(motivating_source):
    a = build_pdg(js.parse_js(motivating_source)).dump_dot()
    b = build_pdg(js.parse_js(motivating_source)).dump_dot()
    assert a == b


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.sampled_from("abcde"), st.sampled_from("abcde1")), min_size=1, max_size=8))
def test_flows_mutually_consistent(assignments):
    src = "".join(f"var {x} = {y};\n" for x, y in assignments) + "use(a, b, c, d, e);\n"
    pdg = build_pdg(js.parse_js(src))
    nodes = list(A.walk(pdg.ast))
    for n1 in nodes:
        for n2 in flows_from(pdg, n1):
            assert n1 in flows_to(pdg, n2)
