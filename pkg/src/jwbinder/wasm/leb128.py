"""LEB128 variable-length integers as used by the WebAssembly binary format."""

from __future__ import annotations

from .errors import MalformedLeb


def _max_bytes(bits: int) -> int:
    return (bits + 6) // 7


def _clamp(data: bytes, pos: int) -> int:
    return max(0, min(pos, len(data) - 1)) if data else 0


def decode_uleb(data: bytes, offset: int = 0, bits: int = 32) -> tuple[int, int]:
    """Decode an unsigned LEB128 value; return ``(value, offset_after)``."""
    result = 0
    shift = 0
    pos = offset
    for i in range(_max_bytes(bits)):
        if pos >= len(data):
            raise MalformedLeb("unexpected end of data inside LEB128", _clamp(data, pos))
        byte = data[pos]
        pos += 1
        result |= (byte & 0x7F) << shift
        if not byte & 0x80:
            if i == _max_bytes(bits) - 1 and byte >> (bits - shift):
                raise MalformedLeb(f"LEB128 value exceeds {bits} bits", pos - 1)
            return result, pos
        shift += 7
    raise MalformedLeb(f"LEB128 longer than {_max_bytes(bits)} bytes", _clamp(data, pos - 1))


def decode_sleb(data: bytes, offset: int = 0, bits: int = 32) -> tuple[int, int]:
    """Decode a signed LEB128 value; return ``(value, offset_after)``."""
    result = 0
    shift = 0
    pos = offset
    limit = _max_bytes(bits)
    for i in range(limit):
        if pos >= len(data):
            raise MalformedLeb("unexpected end of data inside LEB128", _clamp(data, pos))
        byte = data[pos]
        pos += 1
        result |= (byte & 0x7F) << shift
        shift += 7
        if not byte & 0x80:
            if i == limit - 1:
                # the unused high bits of the last byte must replicate the sign bit
                used = bits - 7 * (limit - 1)
                rest = (byte & 0x7F) >> (used - 1)
                if rest not in (0, (0x7F >> (used - 1))):
                    raise MalformedLeb(f"signed LEB128 value exceeds {bits} bits", pos - 1)
            if byte & 0x40:
                result -= 1 << shift
            return result, pos
    raise MalformedLeb(f"LEB128 longer than {limit} bytes", _clamp(data, pos - 1))


def encode_uleb(value: int) -> bytes:
    out = bytearray()
    while True:
        byte = value & 0x7F
        value >>= 7
        if value:
            out.append(byte | 0x80)
        else:
            out.append(byte)
            return bytes(out)


def encode_sleb(value: int) -> bytes:
    out = bytearray()
    while True:
        byte = value & 0x7F
        value >>= 7
        done = (value == 0 and not byte & 0x40) or (value == -1 and byte & 0x40)
        out.append(byte if done else byte | 0x80)
        if done:
            return bytes(out)
