"""MVP core opcode table (plus the sign-extension operators).

Each entry maps an opcode byte to ``(mnemonic, immediate-kind)``. Immediate
kinds drive the decoder: ``none``, ``block``, ``label``, ``br_table``,
``func``, ``call_indirect``, ``local``, ``global``, ``memarg``, ``memidx``,
``i32``, ``i64``, ``f32``, ``f64``.
"""

from __future__ import annotations

VALTYPES = {0x7F: "i32", 0x7E: "i64", 0x7D: "f32", 0x7C: "f64"}
REFTYPES = {0x70: "funcref", 0x6F: "externref"}

OPCODES: dict[int, tuple[str, str]] = {
    0x00: ("unreachable", "none"),
    0x01: ("nop", "none"),
    0x02: ("block", "block"),
    0x03: ("loop", "block"),
    0x04: ("if", "block"),
    0x0C: ("br", "label"),
    0x0D: ("br_if", "label"),
    0x0E: ("br_table", "br_table"),
    0x0F: ("return", "none"),
    0x10: ("call", "func"),
    0x11: ("call_indirect", "call_indirect"),
    0x1A: ("drop", "none"),
    0x1B: ("select", "none"),
    0x20: ("local.get", "local"),
    0x21: ("local.set", "local"),
    0x22: ("local.tee", "local"),
    0x23: ("global.get", "global"),
    0x24: ("global.set", "global"),
    0x3F: ("memory.size", "memidx"),
    0x40: ("memory.grow", "memidx"),
    0x41: ("i32.const", "i32"),
    0x42: ("i64.const", "i64"),
    0x43: ("f32.const", "f32"),
    0x44: ("f64.const", "f64"),
}

_LOADS_STORES = [
    "i32.load", "i64.load", "f32.load", "f64.load",
    "i32.load8_s", "i32.load8_u", "i32.load16_s", "i32.load16_u",
    "i64.load8_s", "i64.load8_u", "i64.load16_s", "i64.load16_u", "i64.load32_s", "i64.load32_u",
    "i32.store", "i64.store", "f32.store", "f64.store",
    "i32.store8", "i32.store16", "i64.store8", "i64.store16", "i64.store32",
]

_INT_TEST = ["eqz", "eq", "ne", "lt_s", "lt_u", "gt_s", "gt_u", "le_s", "le_u", "ge_s", "ge_u"]
_FLOAT_CMP = ["eq", "ne", "lt", "gt", "le", "ge"]
_INT_ARITH = ["clz", "ctz", "popcnt", "add", "sub", "mul", "div_s", "div_u", "rem_s", "rem_u",
              "and", "or", "xor", "shl", "shr_s", "shr_u", "rotl", "rotr"]
_FLOAT_ARITH = ["abs", "neg", "ceil", "floor", "trunc", "nearest", "sqrt",
                "add", "sub", "mul", "div", "min", "max", "copysign"]
_CONVERSIONS = [
    "i32.wrap_i64", "i32.trunc_f32_s", "i32.trunc_f32_u", "i32.trunc_f64_s", "i32.trunc_f64_u",
    "i64.extend_i32_s", "i64.extend_i32_u", "i64.trunc_f32_s", "i64.trunc_f32_u",
    "i64.trunc_f64_s", "i64.trunc_f64_u",
    "f32.convert_i32_s", "f32.convert_i32_u", "f32.convert_i64_s", "f32.convert_i64_u", "f32.demote_f64",
    "f64.convert_i32_s", "f64.convert_i32_u", "f64.convert_i64_s", "f64.convert_i64_u", "f64.promote_f32",
    "i32.reinterpret_f32", "i64.reinterpret_f64", "f32.reinterpret_i32", "f64.reinterpret_i64",
    "i32.extend8_s", "i32.extend16_s", "i64.extend8_s", "i64.extend16_s", "i64.extend32_s",
]


def _fill(start: int, names: list[str], kind: str = "none") -> None:
    for i, name in enumerate(names):
        OPCODES[start + i] = (name, kind)


_fill(0x28, _LOADS_STORES, "memarg")
_fill(0x45, [f"i32.{n}" for n in _INT_TEST])
_fill(0x50, [f"i64.{n}" for n in _INT_TEST])
_fill(0x5B, [f"f32.{n}" for n in _FLOAT_CMP])
_fill(0x61, [f"f64.{n}" for n in _FLOAT_CMP])
_fill(0x67, [f"i32.{n}" for n in _INT_ARITH])
_fill(0x79, [f"i64.{n}" for n in _INT_ARITH])
_fill(0x8B, [f"f32.{n}" for n in _FLOAT_ARITH])
_fill(0x99, [f"f64.{n}" for n in _FLOAT_ARITH])
_fill(0xA7, _CONVERSIONS)

MNEMONICS = {name: byte for byte, (name, _) in OPCODES.items()}

# bytes we recognise but deliberately refuse, with the reason reported in diagnostics
REJECTED = {
    0x06: "exception handling", 0x07: "exception handling", 0x08: "exception handling",
    0x09: "exception handling", 0x18: "exception handling", 0x19: "exception handling",
    0x12: "tail calls", 0x13: "tail calls",
    0x1C: "reference types", 0x25: "reference types", 0x26: "reference types",
    0xD0: "reference types", 0xD1: "reference types", 0xD2: "reference types",
    0xFB: "garbage collection", 0xFC: "bulk memory / saturating truncation",
    0xFD: "SIMD", 0xFE: "threads",
}

# natural access width in bytes for each memory instruction
ACCESS_WIDTH = {
    "i32.load": 4, "i64.load": 8, "f32.load": 4, "f64.load": 8,
    "i32.load8_s": 1, "i32.load8_u": 1, "i32.load16_s": 2, "i32.load16_u": 2,
    "i64.load8_s": 1, "i64.load8_u": 1, "i64.load16_s": 2, "i64.load16_u": 2,
    "i64.load32_s": 4, "i64.load32_u": 4,
    "i32.store": 4, "i64.store": 8, "f32.store": 4, "f64.store": 8,
    "i32.store8": 1, "i32.store16": 2, "i64.store8": 1, "i64.store16": 2, "i64.store32": 4,
}


def result_type(op: str) -> str | None:
    """Value type produced by a plain (non-control, non-variable) operator, or None."""
    prefix, _, rest = op.partition(".")
    if prefix not in VALTYPES.values():
        return None
    if rest.startswith("store"):
        return None
    if prefix in ("f32", "f64") and rest in _FLOAT_CMP:
        return "i32"
    if prefix in ("i32", "i64") and rest in _INT_TEST:
        return "i32"
    return prefix


def operand_types(op: str) -> tuple[str, ...]:
    """Operand types (bottom to top) consumed by a plain operator."""
    prefix, _, rest = op.partition(".")
    if rest.startswith("load"):
        return ("i32",)
    if rest.startswith("store"):
        return ("i32", prefix)
    if rest == "const":
        return ()
    if rest in ("extend8_s", "extend16_s", "extend32_s"):
        return (prefix,)
    if "_" in rest and rest.split("_")[0] in ("wrap", "trunc", "extend", "convert", "demote", "promote", "reinterpret"):
        return (rest.split("_")[1],)
    if rest in ("eqz", "clz", "ctz", "popcnt") or rest in _FLOAT_ARITH[:7]:
        return (prefix,)
    return (prefix, prefix)
