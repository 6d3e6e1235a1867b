"""WebAssembly binary decoder (MVP core).

``decode_module`` turns a binary into a :class:`WasmModule`. Function bodies are
decoded into nested :class:`Instruction` lists: ``block``/``loop``/``if`` carry
their bodies (and the ``else`` arm) instead of flat ``end`` markers.

A function using an instruction outside the supported set is kept with
``body=None`` and a diagnostic; the rest of the module still decodes.
"""

from __future__ import annotations

import logging
import struct
from dataclasses import dataclass, field

from .errors import (BadMagic, MalformedModule, TruncatedSection, UnsupportedFeature,
                     UnsupportedOpcode, WasmDecodeError)
from .leb128 import decode_sleb, decode_uleb
from .opcodes import OPCODES, REFTYPES, REJECTED, VALTYPES

log = logging.getLogger(__name__)

MAGIC = b"\x00asm"
VERSION = b"\x01\x00\x00\x00"

SECTION_NAMES = {
    0: "custom", 1: "type", 2: "import", 3: "function", 4: "table", 5: "memory", 6: "global",
    7: "export", 8: "start", 9: "element", 10: "code", 11: "data", 12: "datacount",
}
# canonical order of the known sections (datacount sits between element and code)
_SECTION_RANK = {1: 1, 2: 2, 3: 3, 4: 4, 5: 5, 6: 6, 7: 7, 8: 8, 9: 9, 12: 10, 10: 11, 11: 12}

EXTERNAL_KINDS = {0: "func", 1: "table", 2: "memory", 3: "global"}

MAX_LOCALS = 50_000


@dataclass
class Instruction:
    op: str
    imm: tuple = ()
    body: list | None = None     # block / loop / if (then arm)
    orelse: list | None = None   # if: else arm (None when absent)
    offset: int = -1             # byte offset of the opcode in the module

    @property
    def blocktype(self):
        """None (no result), a value type name, or a type index."""
        return self.imm[0] if self.op in ("block", "loop", "if") else None

    def __repr__(self) -> str:
        parts = [self.op]
        if self.imm:
            parts.append(repr(self.imm))
        if self.body is not None:
            parts.append(f"body={self.body!r}")
        if self.orelse is not None:
            parts.append(f"else={self.orelse!r}")
        return f"Instruction({', '.join(parts)})"


@dataclass
class FuncType:
    params: tuple[str, ...]
    results: tuple[str, ...]


@dataclass
class Limits:
    min: int
    max: int | None = None


MemoryLimits = Limits


@dataclass
class Import:
    module: str
    field: str
    kind: str            # func | table | memory | global
    desc: object         # func: type index; memory: Limits; table: (reftype, Limits); global: (valtype, mutable)


@dataclass
class Function:
    type_idx: int
    locals: list[str]
    body: list[Instruction] | None
    index: int = -1              # index in the function index space (imports first)
    error: str | None = None     # set when the body could not be decoded
    offset: int = -1


@dataclass
class Export:
    name: str
    kind: str
    index: int


@dataclass
class Global:
    type: str
    mutable: bool
    init: list[Instruction]


@dataclass
class Table:
    reftype: str
    limits: Limits


@dataclass
class DataSegment:
    mem_idx: int
    offset_expr: list[Instruction]
    bytes: bytes
    offset: int | None = None    # evaluated start address; None when dynamic or passive
    passive: bool = False


@dataclass
class ElementSegment:
    table_idx: int
    offset_expr: list[Instruction]
    func_indices: list[int]
    offset: int | None = None
    mode: str = "active"          # active | passive | declarative


@dataclass
class WasmModule:
    types: list[FuncType] = field(default_factory=list)
    imports: list[Import] = field(default_factory=list)
    functions: list[Function] = field(default_factory=list)
    tables: list[Table] = field(default_factory=list)
    memories: list[Limits] = field(default_factory=list)
    globals: list[Global] = field(default_factory=list)
    exports: list[Export] = field(default_factory=list)
    start: int | None = None
    elements: list[ElementSegment] = field(default_factory=list)
    data_segments: list[DataSegment] = field(default_factory=list)
    custom_sections: list[str] = field(default_factory=list)
    skipped_sections: list[int] = field(default_factory=list)
    diagnostics: list[str] = field(default_factory=list)

    @property
    def func_imports(self) -> list[Import]:
        return [imp for imp in self.imports if imp.kind == "func"]

    @property
    def num_imported_funcs(self) -> int:
        return sum(1 for imp in self.imports if imp.kind == "func")

    @property
    def global_imports(self) -> list[Import]:
        return [imp for imp in self.imports if imp.kind == "global"]

    def func_type(self, func_idx: int) -> FuncType:
        n = self.num_imported_funcs
        if func_idx < n:
            return self.types[self.func_imports[func_idx].desc]
        return self.types[self.functions[func_idx - n].type_idx]

    def function(self, func_idx: int) -> Function | None:
        """Internal function for an index, or None for imports."""
        n = self.num_imported_funcs
        return None if func_idx < n else self.functions[func_idx - n]

    def global_type(self, global_idx: int) -> tuple[str, bool]:
        imported = self.global_imports
        if global_idx < len(imported):
            return imported[global_idx].desc
        g = self.globals[global_idx - len(imported)]
        return g.type, g.mutable

    def export_names(self, kind: str = "func") -> list[str]:
        return [e.name for e in self.exports if e.kind == kind]

    def exported_func(self, name: str) -> int | None:
        for e in self.exports:
            if e.kind == "func" and e.name == name:
                return e.index
        return None

    def has_memory(self) -> bool:
        return bool(self.memories) or any(imp.kind == "memory" for imp in self.imports)


class _Reader:
    """Cursor over a byte buffer with bounds-checked primitive reads."""

    def __init__(self, data: bytes, pos: int = 0, end: int | None = None):
        self.data = data
        self.pos = pos
        self.end = len(data) if end is None else end

    def _clamp(self, pos: int) -> int:
        return max(0, min(pos, len(self.data) - 1))

    def need(self, n: int) -> None:
        if self.pos + n > self.end:
            raise TruncatedSection(f"need {n} bytes, {self.end - self.pos} left", self._clamp(self.pos))

    def byte(self) -> int:
        self.need(1)
        b = self.data[self.pos]
        self.pos += 1
        return b

    def raw(self, n: int) -> bytes:
        self.need(n)
        chunk = self.data[self.pos:self.pos + n]
        self.pos += n
        return bytes(chunk)

    def _leb(self, fn, bits: int) -> int:
        if self.pos >= self.end:
            raise TruncatedSection("unexpected end of section", self._clamp(self.pos))
        value, new_pos = fn(self.data[:self.end], self.pos, bits)
        self.pos = new_pos
        return value

    def u32(self) -> int:
        return self._leb(decode_uleb, 32)

    def s32(self) -> int:
        return self._leb(decode_sleb, 32)

    def s33(self) -> int:
        return self._leb(decode_sleb, 33)

    def s64(self) -> int:
        return self._leb(decode_sleb, 64)

    def name(self) -> str:
        length = self.u32()
        start = self.pos
        raw = self.raw(length)
        try:
            return raw.decode("utf-8")
        except UnicodeDecodeError:
            raise MalformedModule("name is not valid UTF-8", self._clamp(start)) from None

    def count(self, min_item_size: int = 1) -> int:
        """Read a vector length and sanity-check it against the bytes remaining."""
        at = self.pos
        n = self.u32()
        if n * min_item_size > self.end - self.pos:
            raise TruncatedSection(f"vector of {n} items does not fit", self._clamp(at))
        return n

    def valtype(self) -> str:
        at = self.pos
        b = self.byte()
        if b in VALTYPES:
            return VALTYPES[b]
        if b in REFTYPES or b == 0x7B:
            raise UnsupportedFeature(f"value type 0x{b:02x} (reference types / SIMD)", self._clamp(at))
        raise MalformedModule(f"invalid value type 0x{b:02x}", self._clamp(at))

    def limits(self) -> Limits:
        at = self.pos
        flag = self.byte()
        if flag == 0:
            return Limits(self.u32())
        if flag == 1:
            lo = self.u32()
            return Limits(lo, self.u32())
        if flag in (2, 3, 4, 5, 6, 7):
            raise UnsupportedFeature(f"limits flag 0x{flag:02x} (threads / memory64)", self._clamp(at))
        raise MalformedModule(f"invalid limits flag 0x{flag:02x}", self._clamp(at))

    def reftype(self) -> str:
        at = self.pos
        b = self.byte()
        if b == 0x70:
            return "funcref"
        if b == 0x6F:
            raise UnsupportedFeature("externref tables (reference types)", self._clamp(at))
        raise MalformedModule(f"invalid reference type 0x{b:02x}", self._clamp(at))


def _blocktype(r: _Reader):
    b = r.data[r.pos] if r.pos < r.end else None
    if b == 0x40:
        r.pos += 1
        return None
    if b in VALTYPES:
        r.pos += 1
        return VALTYPES[b]
    if b is not None and (b in REFTYPES or b == 0x7B):
        raise UnsupportedFeature(f"block type 0x{b:02x}", r.pos)
    at = r.pos
    idx = r.s33()
    if idx < 0:
        raise MalformedModule("invalid block type", r._clamp(at))
    return idx


def _decode_instructions(r: _Reader) -> list[Instruction]:
    """Decode instructions up to the `end` that closes the outermost sequence."""
    root: list[Instruction] = []
    # stack of (instruction list being filled, owning structured instruction or None)
    stack: list[tuple[list[Instruction], Instruction | None]] = [(root, None)]
    while True:
        at = r.pos
        if r.pos >= r.end:
            raise MalformedModule("missing end (unbalanced block structure)", r._clamp(at))
        code = r.byte()
        current, owner = stack[-1]
        if code == 0x0B:  # end
            stack.pop()
            if not stack:
                return root
            continue
        if code == 0x05:  # else
            if owner is None or owner.op != "if" or owner.orelse is not None:
                raise MalformedModule("else without matching if", at)
            owner.orelse = []
            stack[-1] = (owner.orelse, owner)
            continue
        entry = OPCODES.get(code)
        if entry is None:
            raise UnsupportedOpcode(code, at, REJECTED.get(code, "unknown"))
        op, kind = entry
        ins = Instruction(op, offset=at)
        if kind == "none":
            pass
        elif kind == "block":
            ins.imm = (_blocktype(r),)
            ins.body = []
            current.append(ins)
            stack.append((ins.body, ins))
            continue
        elif kind in ("label", "func", "local", "global"):
            ins.imm = (r.u32(),)
        elif kind == "br_table":
            n = r.count()
            targets = tuple(r.u32() for _ in range(n))
            ins.imm = (targets, r.u32())
        elif kind == "call_indirect":
            type_idx = r.u32()
            table_at = r.pos
            table_idx = r.u32()
            if table_idx != 0:
                raise UnsupportedOpcode(code, table_at, "call_indirect on a non-zero table (reference types)")
            ins.imm = (type_idx, table_idx)
        elif kind == "memarg":
            align_at = r.pos
            align = r.u32()
            if align & 0x40:
                raise UnsupportedOpcode(code, align_at, "explicit memory index (multi-memory)")
            ins.imm = (align, r.u32())
        elif kind == "memidx":
            mem_at = r.pos
            if r.byte() != 0:
                raise UnsupportedOpcode(code, mem_at, "non-zero memory index (multi-memory)")
            ins.imm = (0,)
        elif kind == "i32":
            ins.imm = (r.s32(),)
        elif kind == "i64":
            ins.imm = (r.s64(),)
        elif kind == "f32":
            ins.imm = (struct.unpack("<f", r.raw(4))[0],)
        elif kind == "f64":
            ins.imm = (struct.unpack("<d", r.raw(8))[0],)
        current.append(ins)


def decode_body(data: bytes, offset: int = 0, end: int | None = None) -> list[Instruction]:
    """Decode an instruction sequence terminated by ``end`` (a function body without its locals)."""
    return _decode_instructions(_Reader(data, offset, end))


def _locals(r: _Reader) -> list[str]:
    out: list[str] = []
    groups = r.count(2)
    for _ in range(groups):
        at = r.pos
        n = r.u32()
        if len(out) + n > MAX_LOCALS:
            raise MalformedModule("too many locals", r._clamp(at))
        out.extend([r.valtype()] * n)
    return out


def _const_offset(expr: list[Instruction]) -> int | None:
    if len(expr) == 1 and expr[0].op == "i32.const":
        return expr[0].imm[0] & 0xFFFFFFFF
    return None


class _ModuleDecoder:
    def __init__(self, data: bytes):
        self.data = bytes(data)
        self.module = WasmModule()
        self.func_type_indices: list[int] = []
        self.code_seen = False

    def decode(self) -> WasmModule:
        data = self.data
        if len(data) < 4 or data[:4] != MAGIC:
            raise BadMagic("not a WebAssembly binary (bad magic)", 0)
        if len(data) < 8 or data[4:8] != VERSION:
            raise BadMagic("unsupported WebAssembly version", min(4, len(data) - 1))
        r = _Reader(data, 8)
        last_rank = 0
        while r.pos < len(data):
            section_at = r.pos
            sid = r.byte()
            size = r.u32()
            body_start = r.pos
            if body_start + size > len(data):
                raise TruncatedSection(f"{SECTION_NAMES.get(sid, sid)} section overruns the binary",
                                       section_at)
            section = _Reader(data, body_start, body_start + size)
            if sid == 0:
                self._custom(section)
            elif sid in _SECTION_RANK:
                rank = _SECTION_RANK[sid]
                if rank <= last_rank:
                    raise MalformedModule(f"{SECTION_NAMES[sid]} section out of order", section_at)
                last_rank = rank
                getattr(self, "_" + SECTION_NAMES[sid])(section)
                if section.pos != section.end:
                    raise MalformedModule(f"{SECTION_NAMES[sid]} section size mismatch", section.pos if section.pos < len(data) else section_at)
            else:
                self.module.skipped_sections.append(sid)
                self.module.diagnostics.append(f"skipped unknown section id {sid} at offset {section_at}")
            r.pos = body_start + size
        if self.func_type_indices and not self.code_seen:
            raise MalformedModule("function section without code section", max(0, len(data) - 1))
        self._check_indices()
        return self.module

    # -- sections -------------------------------------------------------------

    def _custom(self, r: _Reader) -> None:
        try:
            self.module.custom_sections.append(r.name())
        except WasmDecodeError:
            self.module.custom_sections.append("")

    def _type(self, r: _Reader) -> None:
        for _ in range(r.count()):
            at = r.pos
            form = r.byte()
            if form != 0x60:
                raise MalformedModule(f"expected function type 0x60, got 0x{form:02x}", at)
            params = tuple(r.valtype() for _ in range(r.count()))
            results = tuple(r.valtype() for _ in range(r.count()))
            self.module.types.append(FuncType(params, results))

    def _import(self, r: _Reader) -> None:
        for _ in range(r.count()):
            module = r.name()
            name = r.name()
            at = r.pos
            kind = r.byte()
            if kind == 0:
                desc: object = r.u32()
            elif kind == 1:
                desc = (r.reftype(), r.limits())
            elif kind == 2:
                desc = r.limits()
            elif kind == 3:
                desc = (r.valtype(), self._mutability(r))
            else:
                raise UnsupportedFeature(f"import kind 0x{kind:02x}", at)
            self.module.imports.append(Import(module, name, EXTERNAL_KINDS[kind], desc))
        self._check_memories(r)

    def _function(self, r: _Reader) -> None:
        self.func_type_indices = [r.u32() for _ in range(r.count())]

    def _table(self, r: _Reader) -> None:
        for _ in range(r.count()):
            self.module.tables.append(Table(r.reftype(), r.limits()))
        if len(self.module.tables) + sum(1 for i in self.module.imports if i.kind == "table") > 1:
            raise UnsupportedFeature("multiple tables", r._clamp(r.pos))

    def _memory(self, r: _Reader) -> None:
        for _ in range(r.count()):
            self.module.memories.append(r.limits())
        self._check_memories(r)

    def _check_memories(self, r: _Reader) -> None:
        total = len(self.module.memories) + sum(1 for i in self.module.imports if i.kind == "memory")
        if total > 1:
            raise UnsupportedFeature("multiple memories", r._clamp(r.pos - 1))

    @staticmethod
    def _mutability(r: _Reader) -> bool:
        at = r.pos
        flag = r.byte()
        if flag not in (0, 1):
            raise MalformedModule("invalid global mutability", at)
        return flag == 1

    def _global(self, r: _Reader) -> None:
        for _ in range(r.count()):
            vtype = r.valtype()
            mutable = self._mutability(r)
            self.module.globals.append(Global(vtype, mutable, _decode_instructions(r)))

    def _export(self, r: _Reader) -> None:
        seen = set()
        for _ in range(r.count()):
            at = r.pos
            name = r.name()
            kind = r.byte()
            if kind not in EXTERNAL_KINDS:
                raise UnsupportedFeature(f"export kind 0x{kind:02x}", at)
            if name in seen:
                raise MalformedModule(f"duplicate export name {name!r}", at)
            seen.add(name)
            self.module.exports.append(Export(name, EXTERNAL_KINDS[kind], r.u32()))

    def _start(self, r: _Reader) -> None:
        self.module.start = r.u32()

    def _element(self, r: _Reader) -> None:
        for _ in range(r.count()):
            at = r.pos
            flags = r.u32()
            if flags > 3:
                raise UnsupportedFeature(f"element segment flags {flags} (expression elements)", at)
            table_idx = 0
            expr: list[Instruction] = []
            mode = "active"
            if flags == 2:
                table_idx = r.u32()
            if flags in (0, 2):
                expr = _decode_instructions(r)
            else:
                mode = "passive" if flags == 1 else "declarative"
            if flags != 0:
                kind_at = r.pos
                if r.byte() != 0x00:
                    raise UnsupportedFeature("element kind other than funcref", kind_at)
            indices = [r.u32() for _ in range(r.count())]
            offset = _const_offset(expr) if mode == "active" else None
            self.module.elements.append(ElementSegment(table_idx, expr, indices, offset, mode))

    def _datacount(self, r: _Reader) -> None:
        r.u32()

    def _code(self, r: _Reader) -> None:
        self.code_seen = True
        at = r.pos
        n = r.count()
        if n != len(self.func_type_indices):
            raise MalformedModule(f"code section has {n} bodies, function section declares "
                                  f"{len(self.func_type_indices)}", at)
        base = self.module.num_imported_funcs
        for i in range(n):
            size = r.u32()
            start = r.pos
            r.need(size)
            body_reader = _Reader(self.data, start, start + size)
            func = Function(self.func_type_indices[i], [], None, index=base + i, offset=start)
            try:
                func.locals = _locals(body_reader)
                func.body = _decode_instructions(body_reader)
                if body_reader.pos != body_reader.end:
                    raise MalformedModule("trailing bytes after function body", body_reader.pos)
            except (UnsupportedOpcode, UnsupportedFeature) as exc:
                func.body = None
                func.error = str(exc)
                message = f"function {base + i} skipped: {exc}"
                self.module.diagnostics.append(message)
                log.info(message)
            self.module.functions.append(func)
            r.pos = start + size

    def _data(self, r: _Reader) -> None:
        for _ in range(r.count()):
            at = r.pos
            flags = r.u32()
            mem_idx = 0
            expr: list[Instruction] = []
            passive = False
            if flags == 0:
                expr = _decode_instructions(r)
            elif flags == 1:
                passive = True
            elif flags == 2:
                mem_idx = r.u32()
                if mem_idx != 0:
                    raise UnsupportedFeature("data segment for a non-zero memory", at)
                expr = _decode_instructions(r)
            else:
                raise MalformedModule(f"invalid data segment flags {flags}", at)
            length = r.u32()
            payload = r.raw(length)
            offset = None if passive else _const_offset(expr)
            self.module.data_segments.append(DataSegment(mem_idx, expr, payload, offset, passive))

    # -- validation -----------------------------------------------------------

    def _check_indices(self) -> None:
        m = self.module
        last = max(0, len(self.data) - 1)
        total_funcs = m.num_imported_funcs + len(m.functions)
        for imp in m.func_imports:
            if imp.desc >= len(m.types):
                raise MalformedModule(f"import {imp.module}.{imp.field} uses unknown type {imp.desc}", last)
        for f in m.functions:
            if f.type_idx >= len(m.types):
                raise MalformedModule(f"function {f.index} uses unknown type {f.type_idx}", last)
        for e in m.exports:
            if e.kind == "func" and e.index >= total_funcs:
                raise MalformedModule(f"export {e.name!r} refers to unknown function {e.index}", last)
        for seg in m.elements:
            for idx in seg.func_indices:
                if idx >= total_funcs:
                    raise MalformedModule(f"element segment refers to unknown function {idx}", last)
        if m.start is not None and m.start >= total_funcs:
            raise MalformedModule(f"start function {m.start} does not exist", last)


def decode_module(data: bytes) -> WasmModule:
    """Decode a complete binary. Raises a :class:`WasmDecodeError` subclass on malformed input."""
    if not data:
        raise BadMagic("empty input", 0)
    return _ModuleDecoder(data).decode()


def iter_instructions(body: list[Instruction]):
    """Pre-order walk over a nested instruction list."""
    stack = list(reversed(body))
    while stack:
        ins = stack.pop()
        yield ins
        if ins.orelse is not None:
            stack.extend(reversed(ins.orelse))
        if ins.body is not None:
            stack.extend(reversed(ins.body))
