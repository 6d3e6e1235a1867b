import leb128
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from corpus import wat2wasm, wat_corpus
from jwbinder.wasm import (BadMagic, MalformedLeb, MalformedModule, TruncatedSection, WasmDecodeError,
                           decode_body, decode_module, decode_sleb, decode_uleb)
from jwbinder.wasm.leb128 import encode_sleb, encode_uleb
from watdecl import declarations

HEADER = bytes([0x00, 0x61, 0x73, 0x6D, 0x01, 0x00, 0x00, 0x00])


def ops(body):
    return [(i.op, i.imm) for i in body]


def test_header_only_module_is_empty():
    m = decode_module(HEADER)
    assert (m.types, m.imports, m.functions, m.exports, m.data_segments) == ([], [], [], [], [])


def test_bad_magic():
    with pytest.raises(BadMagic) as info:
        decode_module(bytes([0xFF]) + HEADER[1:])
    assert info.value.offset == 0


def test_bad_version():
    with pytest.raises(BadMagic):
        decode_module(HEADER[:4] + bytes([2, 0, 0, 0]))


def test_motivating_shape(motivating_module):
    m = motivating_module
    assert len(m.imports) == 1 and m.imports[0].field == "document_write"
    assert len(m.functions) == 1
    assert [e.name for e in m.exports] == ["foo"]
    assert len(m.data_segments) == 1
    assert m.data_segments[0].bytes.startswith(b"<script src=")


def test_leb_examples():
    assert decode_uleb(bytes([0xE5, 0x8E, 0x26]), 0) == (624485, 3)
    assert leb128.u.decode(bytes([0xE5, 0x8E, 0x26])) == 624485
    assert decode_uleb(bytes([0x00]), 0) == (0, 1)
    with pytest.raises(MalformedLeb):
        decode_uleb(bytes([0x80] * 6), 0)


def test_leb_offset_is_relative_to_start():
    assert decode_uleb(bytes([0xFF, 0xE5, 0x8E, 0x26]), 1) == (624485, 4)


def test_leb_truncated():
    with pytest.raises(WasmDecodeError):
        decode_uleb(bytes([0x80, 0x80]), 0)


@given(st.integers(0, 2**32 - 1))
def test_uleb_matches_reference(n):
    data = leb128.u.encode(n)
    assert decode_uleb(data, 0) == (n, len(data))
    assert encode_uleb(n) == data


@given(st.integers(-2**31, 2**31 - 1))
def test_sleb_matches_reference(n):
    data = leb128.i.encode(n)
    assert decode_sleb(data, 0) == (n, len(data))
    assert encode_sleb(n) == data


@given(st.integers(-2**63, 2**63 - 1))
def test_sleb64_matches_reference(n):
    data = leb128.i.encode(n)
    assert decode_sleb(data, 0, 64) == (n, len(data))


def test_body_mul():
    body = decode_body(bytes([0x41, 0x02, 0x41, 0x03, 0x6C, 0x0B]))
    assert ops(body) == [("i32.const", (2,)), ("i32.const", (3,)), ("i32.mul", ())]


def test_empty_body():
    assert decode_body(bytes([0x0B])) == []


def test_block_br_nesting(assemble):
    m = assemble('(module (func (block (nop) (br 0) (nop))))')
    body = m.functions[0].body
    assert [i.op for i in body] == ["block"]
    assert [(i.op, i.imm) for i in body[0].body] == [("nop", ()), ("br", (0,)), ("nop", ())]


def test_if_else_arms(assemble):
    m = assemble('(module (func (param i32) (if (local.get 0) (then (nop)) (else (unreachable)))))')
    (_, node) = m.functions[0].body
    assert node.op == "if" and [i.op for i in node.body] == ["nop"] and [i.op for i in node.orelse] == ["unreachable"]


def test_br_table_immediates(assemble):
    m = assemble('(module (func (param i32) (block (block (br_table 0 1 0 (local.get 0))))))')
    inner = m.functions[0].body[0].body[0].body
    assert inner[-1].op == "br_table" and inner[-1].imm == ((0, 1), 0)


def test_unbalanced_body():
    with pytest.raises(WasmDecodeError):
        decode_body(bytes([0x02, 0x40, 0x01]))


def test_truncated_section():
    data = wat2wasm('(module (func (export "f") (result i32) (i32.const 7)))')
    with pytest.raises(TruncatedSection) as info:
        decode_module(data[:-3])
    assert 0 <= info.value.offset <= len(data)


def test_section_order_enforced():
    type_sec = bytes([0x01, 0x04, 0x01, 0x60, 0x00, 0x00])
    func_sec = bytes([0x03, 0x02, 0x01, 0x00])
    with pytest.raises(MalformedModule):
        decode_module(HEADER + func_sec + type_sec)


def test_unknown_and_custom_sections_recorded():
    custom = bytes([0x00, 0x05, 0x04]) + b"note"
    unknown = bytes([0x1F, 0x01, 0x00])
    m = decode_module(HEADER + custom + unknown)
    assert m.custom_sections == ["note"]
    assert m.skipped_sections == [0x1F]


def test_unsupported_opcode_skips_function(assemble):
    m = assemble('(module (func (export "ok") (result i32) (i32.const 1))'
                 ' (func (export "simd") (drop (v128.const i32x4 0 0 0 0))))')
    assert m.functions[0].body is not None
    assert m.functions[1].body is None and "0xfd" in m.functions[1].error
    assert m.diagnostics


def test_dynamic_data_offset(assemble):
    m = assemble('(module (import "env" "base" (global i32)) (memory 1) (data (global.get 0) "xy"))')
    (seg,) = m.data_segments
    assert seg.offset is None and seg.bytes == b"xy"


def test_constant_data_offset(assemble):
    m = assemble('(module (memory 1) (data (i32.const 4096) "\\00\\ff\\10"))')
    assert m.data_segments[0].offset == 4096 and m.data_segments[0].bytes == bytes([0, 255, 16])


def test_deterministic(motivating_module):
    data = wat2wasm(open(__file__.replace("test_wasm_decoder.py", "fixtures/motivating.wat")).read())
    assert decode_module(data) == decode_module(data) == motivating_module


@settings(max_examples=200, deadline=None)
@given(st.data())
def test_error_offsets_in_range(data):
    raw = bytearray(wat2wasm('(module (memory 1) (data (i32.const 0) "abc") (func (export "f") (param i32)'
                             ' (result i32) (i32.add (local.get 0) (i32.const 300))))'))
    cut = data.draw(st.integers(0, len(raw)))
    raw = raw[:cut]
    if raw:
        pos = data.draw(st.integers(0, len(raw) - 1))
        raw[pos] = data.draw(st.integers(0, 255))
    try:
        decode_module(bytes(raw))
    except WasmDecodeError as exc:
        assert 0 <= exc.offset <= len(raw)


@pytest.mark.parametrize("name,wat", [pytest.param(n, w, id=n) for n, w in wat_corpus()[:20]])
def test_corpus_sample_matches_declarations(name, wat):
    decl = declarations(wat)
    m = decode_module(wat2wasm(wat))
    assert len(m.imports) == len(decl.imports)
    assert len(m.functions) == decl.functions
    assert sorted(e.name for e in m.exports) == sorted(decl.exports)
    assert [(s.offset, s.bytes) for s in m.data_segments] == decl.data
