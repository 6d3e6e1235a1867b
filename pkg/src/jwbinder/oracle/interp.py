"""Reference interpreter for the supported Wasm subset.

Straightforward structured interpretation: ``run`` executes an instruction
list and returns ``None`` on fallthrough or the relative depth of a pending
branch. Imported functions are served by host stubs keyed by the JS callee
path they are bound to, and every host call is recorded in a trace.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

from ..wasm import WasmModule
from . import numeric as N
from .numeric import Trap

log = logging.getLogger(__name__)

RETURN = -1
MAX_CALL_DEPTH = 128
MAX_INITIAL_PAGES = 4096
DEFAULT_FUEL = 5_000_000

# host stub: (memory, args) -> (result or None, args as they should appear in the trace)
HostFn = Callable[[bytearray, list], tuple]


class OutOfFuel(Exception):
    """The step budget ran out (likely a non-terminating input); not a Wasm trap."""


@dataclass
class HostTrace:
    calls: list = field(default_factory=list)   # [(callee path, [args])]

    def record(self, path: str, args) -> None:
        self.calls.append((path, list(args)))

    def __eq__(self, other) -> bool:
        return isinstance(other, HostTrace) and self.calls == other.calls


def default_host(memory: bytearray, args: list) -> tuple:
    return None, list(args)


def string_host(memory: bytearray, args: list) -> tuple:
    """Stub for ``(ptr, len)`` string sinks such as ``document.write``: traces the decoded text."""
    if len(args) >= 2:
        ptr, length = args[0] & N.MASK32, args[1] & N.MASK32
        return None, [bytes(memory[ptr:ptr + length]).decode("latin-1")]
    return None, list(args)


def import_paths(module: WasmModule, bindings=None) -> dict[int, str]:
    """Callee path per imported function, matching the names used by the abstraction."""
    from ..ssr.abstraction import normalize_bindings
    bound = normalize_bindings(module, bindings)
    return {i: bound.get(i) or f"IMPORT_{i}" for i in range(module.num_imported_funcs)}


def call_host(fn: HostFn | None, path: str, memory: bytearray, args: list, result: str | None,
              trace: HostTrace):
    value, traced = (fn or default_host)(memory, list(args))
    trace.record(path, traced)
    if result is None:
        return None
    return N.canonical(result, value if value is not None else 0)


def const_value(expr) -> int | None:
    """Value of a constant expression (``i32.const``/``i64.const``/float const); None otherwise."""
    if expr and expr[0].op.endswith(".const"):
        return expr[0].imm[0]
    return None


def initial_memory(module: WasmModule) -> bytearray:
    """Linear memory with every active data segment applied."""
    if not module.memories:
        pages = 0
        for imp in module.imports:
            if imp.kind == "memory":
                pages = imp.desc.min
    else:
        pages = module.memories[0].min
    if pages > MAX_INITIAL_PAGES:
        raise Trap("oob-memory")
    memory = bytearray(pages * N.PAGE_SIZE)
    for seg in module.data_segments:
        if seg.passive or seg.offset is None:
            continue
        end = seg.offset + len(seg.bytes)
        if end > len(memory):
            raise Trap("oob-memory")
        memory[seg.offset:end] = seg.bytes
    return memory


def initial_globals(module: WasmModule) -> list:
    values = []
    for imp in module.global_imports:
        values.append(N.canonical(imp.desc[0], 0))
    for g in module.globals:
        init = g.init[0] if g.init else None
        if init is not None and init.op == "global.get":
            values.append(values[init.imm[0]])
        elif init is not None and init.op.endswith(".const"):
            values.append(N.canonical(g.type, init.imm[0]))
        else:
            values.append(N.canonical(g.type, 0))
    return values


def initial_table(module: WasmModule, table_idx: int = 0) -> list:
    size = 0
    if table_idx < len(module.tables):
        size = module.tables[table_idx].limits.min
    table: list = [None] * size
    for seg in module.elements:
        if seg.mode != "active" or seg.table_idx != table_idx or seg.offset is None:
            continue
        end = seg.offset + len(seg.func_indices)
        if end > len(table):
            table.extend([None] * (end - len(table)))
        table[seg.offset:end] = seg.func_indices
    return table


class Instance:
    """One instantiated module: memory, globals, table and host bindings."""

    def __init__(self, module: WasmModule, host: dict | None = None, bindings=None,
                 fuel: int = DEFAULT_FUEL, memory: bytearray | None = None):
        self.module = module
        self.host = host or {}
        self.paths = import_paths(module, bindings)
        self.memory = memory if memory is not None else initial_memory(module)
        self.max_pages = module.memories[0].max if module.memories else None
        self.globals = initial_globals(module)
        self.tables = {i: initial_table(module, i) for i in range(max(1, len(module.tables)))}
        self.trace = HostTrace()
        self.fuel = fuel
        self.depth = 0

    def tick(self) -> None:
        self.fuel -= 1
        if self.fuel < 0:
            raise OutOfFuel()

    def invoke(self, func_idx: int, args: list) -> list:
        module = self.module
        ftype = module.func_type(func_idx)
        if func_idx < module.num_imported_funcs:
            path = self.paths[func_idx]
            result = call_host(self.host.get(path), path, self.memory, args,
                               ftype.results[0] if ftype.results else None, self.trace)
            return [] if result is None else [result]
        func = module.function(func_idx)
        if func.body is None:
            raise ValueError(f"function {func_idx} was not decoded: {func.error}")
        if self.depth >= MAX_CALL_DEPTH:
            raise Trap("call-stack-exhausted")
        self.depth += 1
        try:
            locals_ = [N.canonical(t, a) for t, a in zip(ftype.params, args)]
            locals_ += [N.canonical(t, 0) for t in func.locals]
            stack: list = []
            self.run(func.body, stack, locals_)
            n = len(ftype.results)
            return stack[len(stack) - n:] if n else []
        finally:
            self.depth -= 1

    def arity(self, ins) -> int:
        bt = ins.blocktype
        if bt is None:
            return 0
        if isinstance(bt, str):
            return 1
        return len(self.module.types[bt].results)

    def _land(self, stack: list, height: int, arity: int) -> None:
        """Unwind a branch to a block/if: keep the top ``arity`` values."""
        if arity:
            vals = stack[-arity:]
            del stack[height:]
            stack.extend(vals)
        else:
            del stack[height:]

    def run(self, body: list, stack: list, locals_: list):
        for ins in body:
            op = ins.op
            if op == "local.get":
                stack.append(locals_[ins.imm[0]])
            elif op == "local.set":
                locals_[ins.imm[0]] = stack.pop()
            elif op == "local.tee":
                locals_[ins.imm[0]] = stack[-1]
            elif op.endswith(".const"):
                stack.append(N.canonical(op[:3], ins.imm[0]))
            elif op in ("block", "if"):
                if op == "if":
                    chosen = ins.body if stack.pop() != 0 else (ins.orelse or [])
                else:
                    chosen = ins.body
                height = len(stack)
                r = self.run(chosen, stack, locals_)
                if r is not None:
                    if r == 0:
                        self._land(stack, height, self.arity(ins))
                    else:
                        return r if r == RETURN else r - 1
            elif op == "loop":
                height = len(stack)
                while True:
                    self.tick()
                    r = self.run(ins.body, stack, locals_)
                    if r is None:
                        break
                    if r == 0:
                        del stack[height:]
                        continue
                    return r if r == RETURN else r - 1
            elif op == "br":
                return ins.imm[0]
            elif op == "br_if":
                if stack.pop() != 0:
                    return ins.imm[0]
            elif op == "br_table":
                targets, default = ins.imm
                i = stack.pop() & N.MASK32
                return targets[i] if i < len(targets) else default
            elif op == "return":
                return RETURN
            elif op == "call":
                self.tick()
                self._call(ins.imm[0], stack)
            elif op == "call_indirect":
                self.tick()
                type_idx, table_idx = ins.imm
                i = stack.pop() & N.MASK32
                table = self.tables.get(table_idx, [])
                if i >= len(table) or table[i] is None:
                    raise Trap("undefined-element")
                target = table[i]
                if self.module.func_type(target) != self.module.types[type_idx]:
                    raise Trap("indirect-call-type-mismatch")
                self._call(target, stack)
            elif op == "drop":
                stack.pop()
            elif op == "select":
                c = stack.pop()
                b = stack.pop()
                a = stack.pop()
                stack.append(a if c != 0 else b)
            elif op == "global.get":
                stack.append(self.globals[ins.imm[0]])
            elif op == "global.set":
                self.globals[ins.imm[0]] = stack.pop()
            elif op == "unreachable":
                raise Trap("unreachable")
            elif op == "nop":
                pass
            elif op == "memory.size":
                stack.append(len(self.memory) // N.PAGE_SIZE)
            elif op == "memory.grow":
                stack.append(N.memory_grow(self.memory, stack.pop(), self.max_pages))
            elif ".load" in op:
                stack.append(N.load(op, self.memory, stack.pop(), ins.imm[1]))
            elif ".store" in op:
                value = stack.pop()
                N.store(op, self.memory, stack.pop(), ins.imm[1], value)
            elif op in N.BINARY:
                b = stack.pop()
                stack[-1] = N.BINARY[op](stack[-1], b)
            elif op in N.UNARY:
                stack[-1] = N.UNARY[op](stack[-1])
            else:
                raise ValueError(f"unsupported instruction {op}")
        return None

    def _call(self, func_idx: int, stack: list) -> None:
        n = len(self.module.func_type(func_idx).params)
        args = stack[len(stack) - n:] if n else []
        if n:
            del stack[-n:]
        stack.extend(self.invoke(func_idx, args))


def interp_wasm(module: WasmModule, func_index: int, args: list, host: dict | None = None,
                bindings=None, fuel: int = DEFAULT_FUEL) -> tuple[list, HostTrace]:
    """Run one function on fresh instance state. Traps propagate as :class:`Trap`."""
    inst = Instance(module, host, bindings, fuel)
    results = inst.invoke(func_index, list(args))
    return results, inst.trace
