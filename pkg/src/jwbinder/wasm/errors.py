"""Decoder error hierarchy; every error carries the byte offset it refers to."""

from __future__ import annotations


class WasmDecodeError(Exception):
    def __init__(self, message: str, offset: int):
        self.offset = offset
        super().__init__(f"{message} at offset {offset}")


class BadMagic(WasmDecodeError):
    pass


class TruncatedSection(WasmDecodeError):
    pass


class MalformedLeb(WasmDecodeError):
    pass


class MalformedModule(WasmDecodeError):
    """Structurally invalid module: bad section order, unbalanced blocks, dangling indices."""


class UnsupportedOpcode(WasmDecodeError):
    def __init__(self, byte: int, offset: int, detail: str = ""):
        self.byte = byte
        suffix = f" ({detail})" if detail else ""
        super().__init__(f"unsupported opcode 0x{byte:02x}{suffix}", offset)


class UnsupportedFeature(WasmDecodeError):
    """Module-level construct outside the MVP core (multiple memories, reference types, ...)."""
