import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from corpus import PURE_JS
from jwbinder import js
from jwbinder.js import ast as A


def roundtrip(src):
    first = js.parse_js(src)
    second = js.parse_js(js.print_js(first))
    return first, second


def test_minimal_declaration():
    prog = js.parse_js("var a = 1;")
    assert isinstance(prog, A.Program)
    (decl,) = prog.body
    assert isinstance(decl, A.VariableDeclaration)
    (d,) = decl.declarations
    assert d.id.name == "a" and isinstance(d.init, A.Literal) and d.init.value == 1


def test_malformed_reports_position():
    with pytest.raises(js.JsSyntaxError) as info:
        js.parse_js("var = ;")
    err = info.value
    assert (err.line, err.col) == (1, 5)
    assert err.expected == "identifier"


def test_motivating_has_module_construction(motivating_source):
    prog = js.parse_js(motivating_source)
    news = [n for n in A.walk(prog) if isinstance(n, A.NewExpression)]
    callees = [(n.callee.object.name, n.callee.property.name) for n in news
               if isinstance(n.callee, A.MemberExpression) and isinstance(n.callee.object, A.Identifier)]
    assert ("WebAssembly", "Module") in callees


def test_assignment_prints_as_table_row():
    stmt = A.AssignStatement("=", A.Identifier("v"), A.Identifier("e"))
    assert js.print_js(stmt).strip() == "v = e;"


def test_labeled_loop_form():
    node = A.LabeledStatement("L0", A.ForStatement(None, None, None, A.BlockStatement([A.BreakStatement("L0")])))
    assert js.print_js(node).rstrip("\n") == "L0: for (;;) {\n  break L0;\n}"


def test_if_idempotence_case():
    a, b = roundtrip("if (a) { b(); }")
    assert A.structurally_equal(a, b)


@pytest.mark.parametrize("src", [
    "class A {}", 'import x from "y";', "async function f() {}", "function* g() {}", "var r = /ab/;",
])
def test_rejected_constructs(src):
    with pytest.raises(js.JsSyntaxError):
        js.parse_js(src)


@pytest.mark.parametrize("src", PURE_JS)
def test_pure_corpus_roundtrip(src):
    a, b = roundtrip(src)
    assert A.structurally_equal(a, b)
    assert js.print_js(a) == js.print_js(b)


def test_formatting_conventions():
    out = js.print_js(js.parse_js("var s='it'; if(x){y()}"))
    assert out == 'var s = "it";\nif (x) {\n  y();\n}\n'


def test_spans_nested_and_ordered(motivating_source):
    prog = js.parse_js(motivating_source)
    last = -1
    for node in A.walk(prog):
        assert node.start >= last
        last = node.start
        for child in A.iter_child_nodes(node):
            assert node.start <= child.start <= child.end <= node.end


def test_single_parent(motivating_source):
    prog = js.parse_js(motivating_source)
    seen = set()
    for node in A.walk(prog):
        for child in A.iter_child_nodes(node):
            assert id(child) not in seen
            seen.add(id(child))


def test_identifier_lexeme_verbatim():
    prog = js.parse_js("var $x_1 = caf\u00e9 + _9;")
    names = [n.name for n in A.walk(prog) if isinstance(n, A.Identifier)]
    assert names == ["$x_1", "caf\u00e9", "_9"]


def test_empty_program():
    assert js.print_js(js.parse_js("")) == ""


# -- property: parse . print . parse is stable ------------------------------------------

idents = st.sampled_from(["a", "b", "foo", "$x", "_y", "wasm"])
numbers = st.one_of(st.integers(0, 2**40), st.floats(0, 1e6, allow_nan=False).map(lambda f: round(f, 3)))
strings = st.text(alphabet=st.characters(min_codepoint=32, max_codepoint=126), max_size=8).map(
    lambda s: '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"')
atoms = st.one_of(idents, numbers.map(str), strings, st.just("null"), st.just("true"))


def _expr(children):
    binop = st.sampled_from(["+", "-", "*", "/", "%", "<", ">=", "===", "!==", "&&", "||", "&", "|", "^",
                             "<<", ">>", ">>>"])
    return st.one_of(
        st.tuples(children, binop, children).map(lambda t: f"({t[0]} {t[1]} {t[2]})"),
        st.tuples(st.sampled_from(["-", "!", "~", "typeof "]), children).map(lambda t: f"{t[0]}{t[1]}"),
        st.tuples(idents, st.lists(children, max_size=3)).map(lambda t: f"{t[0]}({', '.join(t[1])})"),
        st.tuples(children, idents).map(lambda t: f"({t[0]}).{t[1]}"),
        st.tuples(children, children).map(lambda t: f"{t[0]}[{t[1]}]"),
        st.lists(children, max_size=3).map(lambda xs: "[" + ", ".join(xs) + "]"),
        st.tuples(children, children, children).map(lambda t: f"({t[0]} ? {t[1]} : {t[2]})"),
        st.tuples(idents, children).map(lambda t: f"{{{t[0]}: {t[1]}}}"),
    )


exprs = st.recursive(atoms, _expr, max_leaves=12)


def _stmt(children):
    return st.one_of(
        st.tuples(exprs, st.lists(children, max_size=3)).map(
            lambda t: f"if ({t[0]}) {{ {' '.join(t[1])} }}"),
        st.tuples(exprs, st.lists(children, max_size=2)).map(
            lambda t: f"while ({t[0]}) {{ {' '.join(t[1])} break; }}"),
        st.tuples(idents, st.lists(children, max_size=2)).map(
            lambda t: f"L: for (;;) {{ {' '.join(t[1])} break L; }}"),
        st.tuples(idents, st.lists(idents, max_size=3, unique=True), st.lists(children, max_size=2)).map(
            lambda t: f"function {t[0]}({', '.join(t[1])}) {{ {' '.join(t[2])} return {t[0]}; }}"),
    )


simple_stmts = st.one_of(
    st.tuples(st.sampled_from(["var", "let", "const"]), idents, exprs).map(lambda t: f"{t[0]} {t[1]} = {t[2]};"),
    st.tuples(idents, exprs).map(lambda t: f"{t[0]} = {t[1]};"),
    exprs.map(lambda e: f"({e});"),
)
programs = st.lists(st.recursive(simple_stmts, _stmt, max_leaves=6), max_size=5).map("\n".join)


@settings(max_examples=150, deadline=None)
@given(programs)
def test_roundtrip_property(src):
    a, b = roundtrip(src)
    assert A.structurally_equal(a, b)
    assert js.print_js(b) == js.print_js(a)
