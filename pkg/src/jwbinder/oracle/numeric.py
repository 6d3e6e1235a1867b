"""WebAssembly numeric semantics on plain Python values.

Integers are kept in canonical signed form (i32 in [-2^31, 2^31), i64 in
[-2^63, 2^63)); f32 and f64 values are Python floats, f32 results rounded to
single precision. Operators are looked up by mnemonic in :data:`UNARY` and
:data:`BINARY`; failing operations raise :class:`Trap`.
"""

from __future__ import annotations

import math
import struct


class Trap(Exception):
    """Wasm trap. ``kind`` is one of the names in :data:`TRAP_KINDS`."""

    def __init__(self, kind: str):
        self.kind = kind
        super().__init__(kind)


TRAP_KINDS = (
    "div-by-zero", "integer-overflow", "unreachable", "oob-memory", "invalid-conversion",
    "undefined-element", "indirect-call-type-mismatch", "call-stack-exhausted",
)

MASK32 = 0xFFFFFFFF
MASK64 = 0xFFFFFFFFFFFFFFFF
_F32_MAX = 3.4028234663852886e38
_F32_OVERFLOW = 2.0 ** 128 - 2.0 ** 103   # smallest magnitude that rounds to infinity


def s32(x: int) -> int:
    x &= MASK32
    return x - (1 << 32) if x & 0x80000000 else x


def s64(x: int) -> int:
    x &= MASK64
    return x - (1 << 64) if x & (1 << 63) else x


def u32(x: int) -> int:
    return x & MASK32


def u64(x: int) -> int:
    return x & MASK64


def f32(x: float) -> float:
    """Round a double to the nearest single-precision value."""
    if math.isnan(x) or math.isinf(x):
        return x
    if abs(x) >= _F32_OVERFLOW:
        return math.copysign(math.inf, x)
    return struct.unpack("<f", struct.pack("<f", x))[0]


def _int_to_float(n: int, mantissa_bits: int) -> float:
    """Round an integer to a float with the given significand width (ties to even)."""
    if n == 0:
        return 0.0
    sign = -1.0 if n < 0 else 1.0
    m = abs(n)
    excess = m.bit_length() - mantissa_bits
    if excess > 0:
        q, r = divmod(m, 1 << excess)
        half = 1 << (excess - 1)
        if r > half or (r == half and q & 1):
            q += 1
        return sign * math.ldexp(float(q), excess)
    return sign * float(m)


def int_to_f32(n: int) -> float:
    return f32(_int_to_float(n, 24))


def int_to_f64(n: int) -> float:
    return _int_to_float(n, 53)


WRAP = {"i32": s32, "i64": s64, "f32": f32, "f64": float}
BITS = {"i32": 32, "i64": 64}


def canonical(vtype: str, value) -> int | float:
    """Coerce a Python number into the canonical representation of a value type."""
    if vtype in ("i32", "i64"):
        return WRAP[vtype](int(value))
    return WRAP[vtype](float(value))


# -- integer helpers ---------------------------------------------------------------

def _clz(x: int, bits: int) -> int:
    x &= (1 << bits) - 1
    return bits - x.bit_length()


def _ctz(x: int, bits: int) -> int:
    x &= (1 << bits) - 1
    if x == 0:
        return bits
    return (x & -x).bit_length() - 1


def _popcnt(x: int, bits: int) -> int:
    return bin(x & ((1 << bits) - 1)).count("1")


def _div_s(a: int, b: int, bits: int) -> int:
    if b == 0:
        raise Trap("div-by-zero")
    if a == -(1 << (bits - 1)) and b == -1:
        raise Trap("integer-overflow")
    q = abs(a) // abs(b)
    return q if (a < 0) == (b < 0) else -q


def _rem_s(a: int, b: int) -> int:
    if b == 0:
        raise Trap("div-by-zero")
    r = abs(a) % abs(b)
    return -r if a < 0 else r


def _div_u(a: int, b: int, mask: int) -> int:
    if b & mask == 0:
        raise Trap("div-by-zero")
    return (a & mask) // (b & mask)


def _rem_u(a: int, b: int, mask: int) -> int:
    if b & mask == 0:
        raise Trap("div-by-zero")
    return (a & mask) % (b & mask)


def _rotl(a: int, b: int, bits: int) -> int:
    mask = (1 << bits) - 1
    k = b % bits
    a &= mask
    return ((a << k) | (a >> (bits - k))) & mask


def _rotr(a: int, b: int, bits: int) -> int:
    mask = (1 << bits) - 1
    k = b % bits
    a &= mask
    return ((a >> k) | (a << (bits - k))) & mask


def _int_ops(t: str) -> tuple[dict, dict]:
    bits = BITS[t]
    mask = (1 << bits) - 1
    wrap = WRAP[t]

    def b(x):
        return int(bool(x))

    unary = {
        f"{t}.eqz": lambda a: b(a == 0),
        f"{t}.clz": lambda a: _clz(a, bits),
        f"{t}.ctz": lambda a: _ctz(a, bits),
        f"{t}.popcnt": lambda a: _popcnt(a, bits),
        f"{t}.extend8_s": lambda a: wrap(((a & 0xFF) ^ 0x80) - 0x80),
        f"{t}.extend16_s": lambda a: wrap(((a & 0xFFFF) ^ 0x8000) - 0x8000),
    }
    if t == "i64":
        unary["i64.extend32_s"] = lambda a: s64(s32(a))
    binary = {
        f"{t}.add": lambda a, c: wrap(a + c),
        f"{t}.sub": lambda a, c: wrap(a - c),
        f"{t}.mul": lambda a, c: wrap(a * c),
        f"{t}.div_s": lambda a, c: wrap(_div_s(a, c, bits)),
        f"{t}.div_u": lambda a, c: wrap(_div_u(a, c, mask)),
        f"{t}.rem_s": lambda a, c: wrap(_rem_s(a, c)),
        f"{t}.rem_u": lambda a, c: wrap(_rem_u(a, c, mask)),
        f"{t}.and": lambda a, c: wrap(a & c),
        f"{t}.or": lambda a, c: wrap(a | c),
        f"{t}.xor": lambda a, c: wrap(a ^ c),
        f"{t}.shl": lambda a, c: wrap(a << (c % bits)),
        f"{t}.shr_s": lambda a, c: wrap(a >> (c % bits)),
        f"{t}.shr_u": lambda a, c: wrap((a & mask) >> (c % bits)),
        f"{t}.rotl": lambda a, c: wrap(_rotl(a, c, bits)),
        f"{t}.rotr": lambda a, c: wrap(_rotr(a, c, bits)),
        f"{t}.eq": lambda a, c: b(a == c),
        f"{t}.ne": lambda a, c: b(a != c),
        f"{t}.lt_s": lambda a, c: b(a < c),
        f"{t}.lt_u": lambda a, c: b(a & mask < c & mask),
        f"{t}.gt_s": lambda a, c: b(a > c),
        f"{t}.gt_u": lambda a, c: b(a & mask > c & mask),
        f"{t}.le_s": lambda a, c: b(a <= c),
        f"{t}.le_u": lambda a, c: b(a & mask <= c & mask),
        f"{t}.ge_s": lambda a, c: b(a >= c),
        f"{t}.ge_u": lambda a, c: b(a & mask >= c & mask),
    }
    return unary, binary


# -- float helpers -----------------------------------------------------------------

def _fmin(a: float, c: float) -> float:
    if math.isnan(a) or math.isnan(c):
        return math.nan
    if a == 0 and c == 0:
        return a if math.copysign(1, a) < 0 else c
    return min(a, c)


def _fmax(a: float, c: float) -> float:
    if math.isnan(a) or math.isnan(c):
        return math.nan
    if a == 0 and c == 0:
        return a if math.copysign(1, a) > 0 else c
    return max(a, c)


def _keep_sign(fn):
    def op(a: float) -> float:
        if math.isnan(a) or math.isinf(a) or a == 0:
            return a
        r = float(fn(a))
        return math.copysign(r, a) if r == 0 else r
    return op


_fceil = _keep_sign(math.ceil)
_ffloor = _keep_sign(math.floor)
_ftrunc = _keep_sign(math.trunc)
_fnearest = _keep_sign(round)  # Python rounds half to even


def _fdiv(a: float, c: float) -> float:
    if c == 0:
        if math.isnan(a) or a == 0:
            return math.nan
        return math.copysign(math.inf, a) * math.copysign(1, c)
    return a / c


def _fsqrt(a: float) -> float:
    if math.isnan(a) or a < 0:
        return math.nan
    return math.sqrt(a)


def _float_ops(t: str) -> tuple[dict, dict]:
    r = WRAP[t]

    def b(x):
        return int(bool(x))

    unary = {
        f"{t}.abs": lambda a: abs(a),
        f"{t}.neg": lambda a: -a,
        f"{t}.ceil": _fceil,
        f"{t}.floor": _ffloor,
        f"{t}.trunc": _ftrunc,
        f"{t}.nearest": _fnearest,
        f"{t}.sqrt": lambda a: r(_fsqrt(a)),
    }
    binary = {
        f"{t}.add": lambda a, c: r(a + c) if not (math.isinf(a) and math.isinf(c) and a != c) else math.nan,
        f"{t}.sub": lambda a, c: r(a - c) if not (math.isinf(a) and math.isinf(c) and a == c) else math.nan,
        f"{t}.mul": lambda a, c: r(a * c) if not ((math.isinf(a) and c == 0) or (math.isinf(c) and a == 0)) else math.nan,
        f"{t}.div": lambda a, c: r(_fdiv(a, c)),
        f"{t}.min": _fmin,
        f"{t}.max": _fmax,
        f"{t}.copysign": lambda a, c: math.copysign(a, c),
        f"{t}.eq": lambda a, c: b(a == c),
        f"{t}.ne": lambda a, c: b(a != c),
        f"{t}.lt": lambda a, c: b(a < c),
        f"{t}.gt": lambda a, c: b(a > c),
        f"{t}.le": lambda a, c: b(a <= c),
        f"{t}.ge": lambda a, c: b(a >= c),
    }
    return unary, binary


# -- conversions ------------------------------------------------------------------

def _trunc(bits: int, signed: bool):
    lo, hi = (-(1 << (bits - 1)), 1 << (bits - 1)) if signed else (0, 1 << bits)
    wrap = s32 if bits == 32 else s64

    def op(a: float) -> int:
        if math.isnan(a):
            raise Trap("invalid-conversion")
        if math.isinf(a):
            raise Trap("integer-overflow")
        t = math.trunc(a)
        if not lo <= t < hi:
            raise Trap("integer-overflow")
        return wrap(t)
    return op


def _reinterpret(src_fmt: str, dst_fmt: str):
    def op(a):
        if src_fmt in ("<i", "<q"):
            mask = MASK32 if src_fmt == "<i" else MASK64
            packed = struct.pack("<I" if src_fmt == "<i" else "<Q", a & mask)
        else:
            packed = struct.pack(src_fmt, a)
        return struct.unpack(dst_fmt, packed)[0]
    return op


CONVERSIONS = {
    "i32.wrap_i64": s32,
    "i32.trunc_f32_s": _trunc(32, True), "i32.trunc_f32_u": _trunc(32, False),
    "i32.trunc_f64_s": _trunc(32, True), "i32.trunc_f64_u": _trunc(32, False),
    "i64.extend_i32_s": lambda a: s64(s32(a)),
    "i64.extend_i32_u": lambda a: a & MASK32,
    "i64.trunc_f32_s": _trunc(64, True), "i64.trunc_f32_u": _trunc(64, False),
    "i64.trunc_f64_s": _trunc(64, True), "i64.trunc_f64_u": _trunc(64, False),
    "f32.convert_i32_s": lambda a: int_to_f32(s32(a)),
    "f32.convert_i32_u": lambda a: int_to_f32(a & MASK32),
    "f32.convert_i64_s": lambda a: int_to_f32(s64(a)),
    "f32.convert_i64_u": lambda a: int_to_f32(a & MASK64),
    "f32.demote_f64": f32,
    "f64.convert_i32_s": lambda a: int_to_f64(s32(a)),
    "f64.convert_i32_u": lambda a: int_to_f64(a & MASK32),
    "f64.convert_i64_s": lambda a: int_to_f64(s64(a)),
    "f64.convert_i64_u": lambda a: int_to_f64(a & MASK64),
    "f64.promote_f32": float,
    "i32.reinterpret_f32": _reinterpret("<f", "<i"),
    "i64.reinterpret_f64": _reinterpret("<d", "<q"),
    "f32.reinterpret_i32": _reinterpret("<i", "<f"),
    "f64.reinterpret_i64": _reinterpret("<q", "<d"),
}

UNARY: dict = {}
BINARY: dict = {}
for _t in ("i32", "i64"):
    _u, _b = _int_ops(_t)
    UNARY.update(_u)
    BINARY.update(_b)
for _t in ("f32", "f64"):
    _u, _b = _float_ops(_t)
    UNARY.update(_u)
    BINARY.update(_b)
UNARY.update(CONVERSIONS)


def apply(op: str, args: list) -> int | float:
    """Evaluate a numeric operator by mnemonic."""
    if op in BINARY:
        return BINARY[op](args[0], args[1])
    return UNARY[op](args[0])


# -- memory access --------------------------------------------------------------------

PAGE_SIZE = 65536

_LOAD_FORMATS = {
    "i32.load": ("<i", 4, "i32"), "i64.load": ("<q", 8, "i64"),
    "f32.load": ("<f", 4, "f32"), "f64.load": ("<d", 8, "f64"),
    "i32.load8_s": ("<b", 1, "i32"), "i32.load8_u": ("<B", 1, "i32"),
    "i32.load16_s": ("<h", 2, "i32"), "i32.load16_u": ("<H", 2, "i32"),
    "i64.load8_s": ("<b", 1, "i64"), "i64.load8_u": ("<B", 1, "i64"),
    "i64.load16_s": ("<h", 2, "i64"), "i64.load16_u": ("<H", 2, "i64"),
    "i64.load32_s": ("<i", 4, "i64"), "i64.load32_u": ("<I", 4, "i64"),
}

_STORE_FORMATS = {
    "i32.store": ("<I", 4, MASK32), "i64.store": ("<Q", 8, MASK64),
    "f32.store": ("<f", 4, None), "f64.store": ("<d", 8, None),
    "i32.store8": ("<B", 1, 0xFF), "i32.store16": ("<H", 2, 0xFFFF),
    "i64.store8": ("<B", 1, 0xFF), "i64.store16": ("<H", 2, 0xFFFF), "i64.store32": ("<I", 4, MASK32),
}


def effective_address(addr: int, offset: int, width: int, memory: bytearray) -> int:
    ea = (addr & MASK32) + offset
    if ea + width > len(memory):
        raise Trap("oob-memory")
    return ea


def load(op: str, memory: bytearray, addr: int, offset: int) -> int | float:
    fmt, width, _ = _LOAD_FORMATS[op]
    ea = effective_address(addr, offset, width, memory)
    return struct.unpack_from(fmt, memory, ea)[0]


def store(op: str, memory: bytearray, addr: int, offset: int, value) -> None:
    fmt, width, mask = _STORE_FORMATS[op]
    ea = effective_address(addr, offset, width, memory)
    if mask is not None:
        value = value & mask
    struct.pack_into(fmt, memory, ea, value)


def memory_grow(memory: bytearray, delta: int, max_pages: int | None) -> int:
    old = len(memory) // PAGE_SIZE
    new = old + (delta & MASK32)
    limit = 65536 if max_pages is None else min(max_pages, 65536)
    # keep the oracle desk-sized: refuse growth beyond 256 MiB like an engine under memory pressure
    if new > limit or new > 4096:
        return -1
    memory.extend(bytes((new - old) * PAGE_SIZE))
    return old


def values_equal(vtype: str, a, b) -> bool:
    """Exact comparison; floats bitwise except that any NaN equals any NaN."""
    if vtype in ("f32", "f64"):
        if isinstance(a, float) and isinstance(b, float):
            if math.isnan(a) or math.isnan(b):
                return math.isnan(a) and math.isnan(b)
            fmt = "<d"
            return struct.pack(fmt, a) == struct.pack(fmt, b)
        return False
    return type(a) is type(b) and a == b
