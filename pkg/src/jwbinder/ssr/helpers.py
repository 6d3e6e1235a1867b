"""User-defined JavaScript functions standing in for Wasm operators JS lacks.

Each helper is plain ES6 within the supported parser subset. Generated code
calls helpers by name; the reconstruction prepends the definitions it needs,
once, in a fixed order. The oracle never executes this text: it evaluates
helper calls through the operator tag carried on the call node.
"""

from __future__ import annotations

# operator mnemonic -> helper name (binary/unary ops without a JS operator)
OP_HELPERS = {
    "i32.clz": "clz", "i32.ctz": "ctz", "i32.popcnt": "popcnt",
    "i32.div_u": "div_u", "i32.rem_u": "rem_u", "i32.shr_u": "shr_u",
    "i32.rotl": "rotl", "i32.rotr": "rotr",
    "i32.lt_u": "lt_u", "i32.gt_u": "gt_u", "i32.le_u": "le_u", "i32.ge_u": "ge_u",
    "i64.clz": "clz64", "i64.ctz": "ctz64", "i64.popcnt": "popcnt64",
    "i64.div_u": "div_u64", "i64.rem_u": "rem_u64", "i64.shr_u": "shr_u64",
    "i64.rotl": "rotl64", "i64.rotr": "rotr64",
    "i64.lt_u": "lt_u64", "i64.gt_u": "gt_u64", "i64.le_u": "le_u64", "i64.ge_u": "ge_u64",
    "f32.nearest": "nearest", "f64.nearest": "nearest",
    "f32.copysign": "copysign", "f64.copysign": "copysign",
    "memory.size": "memory_size", "memory.grow": "memory_grow",
}

_U64 = "BigInt.asUintN(64, BigInt(a))"

SOURCES: dict[str, str] = {
    "popcnt": """
function popcnt(x) {
  x = x >>> 0;
  let n = 0;
  while (x !== 0) {
    n += x & 1;
    x = x >>> 1;
  }
  return n;
}""",
    "clz": """
function clz(x) {
  return Math.clz32(x);
}""",
    "ctz": """
function ctz(x) {
  x = x | 0;
  if (x === 0) {
    return 32;
  }
  return 31 - Math.clz32(x & -x);
}""",
    "rotl": """
function rotl(x, k) {
  k = k & 31;
  return (x << k | x >>> (32 - k)) | 0;
}""",
    "rotr": """
function rotr(x, k) {
  k = k & 31;
  return (x >>> k | x << (32 - k)) | 0;
}""",
    "div_u": """
function div_u(a, b) {
  if (b >>> 0 === 0) {
    throw "div-by-zero";
  }
  return Math.trunc((a >>> 0) / (b >>> 0)) | 0;
}""",
    "rem_u": """
function rem_u(a, b) {
  if (b >>> 0 === 0) {
    throw "div-by-zero";
  }
  return (a >>> 0) % (b >>> 0) | 0;
}""",
    "shr_u": """
function shr_u(a, b) {
  return (a >>> (b & 31)) | 0;
}""",
    "lt_u": """
function lt_u(a, b) {
  return a >>> 0 < b >>> 0;
}""",
    "gt_u": """
function gt_u(a, b) {
  return a >>> 0 > b >>> 0;
}""",
    "le_u": """
function le_u(a, b) {
  return a >>> 0 <= b >>> 0;
}""",
    "ge_u": """
function ge_u(a, b) {
  return a >>> 0 >= b >>> 0;
}""",
    "i64": """
function i64(s) {
  return BigInt(s);
}""",
    "popcnt64": f"""
function popcnt64(a) {{
  let x = {_U64};
  let n = 0;
  while (x !== BigInt(0)) {{
    n += Number(x & BigInt(1));
    x = x >> BigInt(1);
  }}
  return n;
}}""",
    "clz64": f"""
function clz64(a) {{
  let x = {_U64};
  let n = 64;
  while (x !== BigInt(0)) {{
    n -= 1;
    x = x >> BigInt(1);
  }}
  return n;
}}""",
    "ctz64": f"""
function ctz64(a) {{
  let x = {_U64};
  if (x === BigInt(0)) {{
    return 64;
  }}
  let n = 0;
  while ((x & BigInt(1)) === BigInt(0)) {{
    n += 1;
    x = x >> BigInt(1);
  }}
  return n;
}}""",
    "div_u64": """
function div_u64(a, b) {
  const x = BigInt.asUintN(64, BigInt(a));
  const y = BigInt.asUintN(64, BigInt(b));
  if (y === BigInt(0)) {
    throw "div-by-zero";
  }
  return BigInt.asIntN(64, x / y);
}""",
    "rem_u64": """
function rem_u64(a, b) {
  const x = BigInt.asUintN(64, BigInt(a));
  const y = BigInt.asUintN(64, BigInt(b));
  if (y === BigInt(0)) {
    throw "div-by-zero";
  }
  return BigInt.asIntN(64, x % y);
}""",
    "shr_u64": """
function shr_u64(a, b) {
  return BigInt.asIntN(64, BigInt.asUintN(64, BigInt(a)) >> (BigInt(b) & BigInt(63)));
}""",
    "rotl64": """
function rotl64(a, b) {
  const x = BigInt.asUintN(64, BigInt(a));
  const k = BigInt(b) & BigInt(63);
  return BigInt.asIntN(64, x << k | x >> (BigInt(64) - k));
}""",
    "rotr64": """
function rotr64(a, b) {
  const x = BigInt.asUintN(64, BigInt(a));
  const k = BigInt(b) & BigInt(63);
  return BigInt.asIntN(64, x >> k | x << (BigInt(64) - k));
}""",
    "lt_u64": """
function lt_u64(a, b) {
  return BigInt.asUintN(64, BigInt(a)) < BigInt.asUintN(64, BigInt(b));
}""",
    "gt_u64": """
function gt_u64(a, b) {
  return BigInt.asUintN(64, BigInt(a)) > BigInt.asUintN(64, BigInt(b));
}""",
    "le_u64": """
function le_u64(a, b) {
  return BigInt.asUintN(64, BigInt(a)) <= BigInt.asUintN(64, BigInt(b));
}""",
    "ge_u64": """
function ge_u64(a, b) {
  return BigInt.asUintN(64, BigInt(a)) >= BigInt.asUintN(64, BigInt(b));
}""",
    "nearest": """
function nearest(x) {
  const r = Math.round(x);
  if (Math.abs(x % 1) === 0.5 && r % 2 !== 0) {
    return r - 1;
  }
  return r;
}""",
    "copysign": """
function copysign(a, b) {
  if (b < 0 || Object.is(b, -0)) {
    return -Math.abs(a);
  }
  return Math.abs(a);
}""",
    "memory_size": """
function memory_size() {
  return 1;
}""",
    "memory_grow": """
function memory_grow(delta) {
  return -1;
}""",
}


def _conversion_source(name: str, op: str) -> str:
    dst, _, rest = op.partition(".")
    kind = rest.split("_")[0]
    if kind == "trunc":
        signed = rest.endswith("_s")
        bits = 32 if dst == "i32" else 64
        lo, hi = (-(2 ** (bits - 1)), 2 ** (bits - 1)) if signed else (0, 2 ** bits)
        return f"""
function {name}(x) {{
  if (x !== x) {{
    throw "invalid-conversion";
  }}
  const t = Math.trunc(x);
  if (t < {lo} || t >= {hi}) {{
    throw "integer-overflow";
  }}
  return t;
}}"""
    if op == "i32.wrap_i64":
        body = "return Number(BigInt.asIntN(32, BigInt(x)));"
    elif op == "i64.extend_i32_s":
        body = "return x | 0;"
    elif op == "i64.extend_i32_u":
        body = "return x >>> 0;"
    elif kind == "convert":
        body = "return Math.fround(Number(x));" if dst == "f32" else "return Number(x);"
        if rest.endswith("_u"):
            body = ("return Math.fround(Number(BigInt.asUintN(64, BigInt(x))));" if dst == "f32"
                    else "return Number(BigInt.asUintN(64, BigInt(x)));")
            if "i32" in rest:
                body = "return Math.fround(x >>> 0);" if dst == "f32" else "return x >>> 0;"
    elif op == "f32.demote_f64":
        body = "return Math.fround(x);"
    elif op == "f64.promote_f32":
        body = "return x;"
    elif kind == "reinterpret":
        src_arr, dst_arr = {
            "i32.reinterpret_f32": ("Float32Array", "Int32Array"),
            "f32.reinterpret_i32": ("Int32Array", "Float32Array"),
            "i64.reinterpret_f64": ("Float64Array", "BigInt64Array"),
            "f64.reinterpret_i64": ("BigInt64Array", "Float64Array"),
        }[op]
        value = "BigInt(x)" if src_arr == "BigInt64Array" else "x"
        body = f"return new {dst_arr}(new {src_arr}([{value}]).buffer)[0];"
    elif rest.startswith("extend") and rest.endswith("_s"):
        width = int(rest[len("extend"):-2])
        body = (f"return x << {32 - width} >> {32 - width};" if dst == "i32"
                else f"return Number(BigInt.asIntN({width}, BigInt(x)));")
    else:
        raise KeyError(op)
    return f"""
function {name}(x) {{
  {body}
}}"""


CONVERSION_OPS = (
    "i32.wrap_i64", "i32.trunc_f32_s", "i32.trunc_f32_u", "i32.trunc_f64_s", "i32.trunc_f64_u",
    "i64.extend_i32_s", "i64.extend_i32_u", "i64.trunc_f32_s", "i64.trunc_f32_u",
    "i64.trunc_f64_s", "i64.trunc_f64_u",
    "f32.convert_i32_s", "f32.convert_i32_u", "f32.convert_i64_s", "f32.convert_i64_u", "f32.demote_f64",
    "f64.convert_i32_s", "f64.convert_i32_u", "f64.convert_i64_s", "f64.convert_i64_u", "f64.promote_f32",
    "i32.reinterpret_f32", "i64.reinterpret_f64", "f32.reinterpret_i32", "f64.reinterpret_i64",
    "i32.extend8_s", "i32.extend16_s", "i64.extend8_s", "i64.extend16_s", "i64.extend32_s",
)

for _op in CONVERSION_OPS:
    _name = _op.replace(".", "_")
    OP_HELPERS[_op] = _name
    SOURCES[_name] = _conversion_source(_name, _op)

HELPER_ORDER = tuple(SOURCES)


def helper_source(name: str, alias: str | None = None) -> str:
    """JavaScript definition of a helper, optionally renamed to ``alias``."""
    text = SOURCES[name].strip()
    if alias and alias != name:
        text = text.replace(f"function {name}(", f"function {alias}(", 1)
    return text


def prelude(names, aliases: dict[str, str] | None = None) -> str:
    """Definitions for the given helper names in canonical order."""
    aliases = aliases or {}
    wanted = set(names)
    return "\n".join(helper_source(n, aliases.get(n)) for n in HELPER_ORDER if n in wanted)
