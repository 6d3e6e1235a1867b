"""WebAssembly binary decoding."""

from .decoder import (DataSegment, ElementSegment, Export, Function, FuncType, Global, Import,
                      Instruction, Limits, MemoryLimits, WasmModule, decode_body, decode_module,
                      iter_instructions)
from .errors import (BadMagic, MalformedLeb, MalformedModule, TruncatedSection, UnsupportedFeature,
                     UnsupportedOpcode, WasmDecodeError)
from .leb128 import decode_sleb, decode_uleb

__all__ = [
    "DataSegment", "ElementSegment", "Export", "Function", "FuncType", "Global", "Import",
    "Instruction", "Limits", "MemoryLimits", "WasmModule", "decode_body", "decode_module",
    "iter_instructions", "BadMagic", "MalformedLeb", "MalformedModule", "TruncatedSection",
    "UnsupportedFeature", "UnsupportedOpcode", "WasmDecodeError", "decode_sleb", "decode_uleb",
]
