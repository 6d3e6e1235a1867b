"""Rule-based abstraction of Wasm functions and data segments into JS syntax units.

Each function body is folded over a simulated operand stack. Every value the
stack can hold is a plain identifier: constants become ``const C_n = c;``,
operator results ``const T_n = ...;``, locals/params/globals are pushed by
name. Structured control flow becomes labeled ``for (;;)`` loops, breaks and
continues.

Emitted nodes carry ``meta`` tags (``{"op": mnemonic}`` and friends) so the
oracle evaluator can re-run the fragment with Wasm numeric semantics; the
generated text itself never depends on them.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

from .. import js
from ..js import ast as A
from ..wasm import WasmModule
from ..wasm.opcodes import operand_types, result_type
from .helpers import OP_HELPERS
from .names import NameGenerator

log = logging.getLogger(__name__)

MAX_SAFE_INTEGER = 2 ** 53 - 1
MAX_NESTING = 5000

JS_BINARY = {
    "add": "+", "sub": "-", "mul": "*", "div_s": "/", "rem_s": "%", "div": "/",
    "and": "&", "or": "|", "xor": "^", "shl": "<<", "shr_s": ">>",
    "eq": "===", "ne": "!==", "lt_s": "<", "gt_s": ">", "le_s": "<=", "ge_s": ">=",
    "lt": "<", "gt": ">", "le": "<=", "ge": ">=",
}
MATH_CALLS = {"abs": "abs", "ceil": "ceil", "floor": "floor", "trunc": "trunc", "sqrt": "sqrt",
              "min": "min", "max": "max"}
PRINTABLE = frozenset(range(0x20, 0x7F)) | {0x09, 0x0A, 0x0D}


class AbstractionError(Exception):
    """The function cannot be abstracted; it is skipped with a diagnostic."""


class StackUnderflow(AbstractionError):
    def __init__(self, instr, position: int):
        self.instr = instr
        self.position = position
        super().__init__(f"stack underflow at {getattr(instr, 'op', instr)} (offset {position})")


@dataclass
class AbstractValue:
    """One operand-stack slot: always a named value."""
    name: str
    vtype: str
    const_value: int | float | None = None
    mutable: bool = False

    @property
    def expr(self) -> A.Identifier:
        return A.Identifier(self.name)


class AbstractStack:
    def __init__(self, values=None):
        self.values: list[AbstractValue] = list(values or [])

    def __len__(self) -> int:
        return len(self.values)

    def push(self, value: AbstractValue) -> None:
        self.values.append(value)

    def top(self) -> AbstractValue | None:
        return self.values[-1] if self.values else None


@dataclass
class JsFragment:
    """Abstraction of one function (or of a module's data segments)."""
    statements: list = field(default_factory=list)
    result_expr: A.Node | None = None
    helpers_used: set = field(default_factory=set)
    func_index: int | None = None
    params: list = field(default_factory=list)
    result_type: str | None = None
    declared: set = field(default_factory=set)      # fragment-local names (renamed per inlined copy)
    assigned_params: set = field(default_factory=set)
    calls: set = field(default_factory=set)          # internal function indices called
    indirect_types: set = field(default_factory=set)
    imports_used: set = field(default_factory=set)
    diagnostics: list = field(default_factory=list)
    error: str | None = None

    @property
    def failed(self) -> bool:
        return self.error is not None

    def program(self) -> A.Program:
        return A.Program(list(self.statements))

    def text(self) -> str:
        return js.print_js(self.program()).rstrip("\n")

    def as_function(self, name: str) -> A.FunctionDeclaration:
        """Declared form ``function name(p0, ...) { ...; return result; }``."""
        body = list(self.statements)
        if self.error is not None:
            body = [A.ThrowStatement(A.Literal("abstraction-failed"), meta={"trap": "abstraction-failed"})]
        elif self.result_expr is not None:
            body.append(A.ReturnStatement(self.result_expr))
        return A.FunctionDeclaration(A.Identifier(name), [A.Identifier(p) for p in self.params],
                                     A.BlockStatement(body), meta={"func": self.func_index})


# -- literal construction -----------------------------------------------------------------

def number_literal(vtype: str, value, i64_name: str = "i64") -> A.Node:
    """JS expression for a Wasm constant, tagged with its exact typed value."""
    meta = {"op": f"{vtype}.const", "value": value}
    if vtype in ("f32", "f64"):
        value = float(value)
        if math.isnan(value):
            return A.Identifier("NaN", meta=meta)
        if math.isinf(value):
            if value > 0:
                return A.Identifier("Infinity", meta=meta)
            return A.UnaryExpression("-", A.Identifier("Infinity"), meta=meta)
        if value == 0 and math.copysign(1.0, value) < 0:
            return A.UnaryExpression("-", A.Literal(0), meta=meta)
    elif vtype == "i64" and abs(value) > MAX_SAFE_INTEGER:
        return A.CallExpression(A.Identifier(i64_name), [A.Literal(str(value))], meta=meta)
    if value < 0:
        return A.UnaryExpression("-", A.Literal(-value), meta=meta)
    return A.Literal(value, meta=meta)


def needs_i64(vtype: str, value) -> bool:
    return vtype == "i64" and abs(value) > MAX_SAFE_INTEGER


def const_decl(name: str, init: A.Node, kind: str = "const") -> A.VariableDeclaration:
    return A.VariableDeclaration(kind, [A.VariableDeclarator(A.Identifier(name), init)])


def assign(name: str, value: A.Node) -> A.AssignStatement:
    return A.AssignStatement("=", A.Identifier(name), value)


def path_expression(path: str) -> A.Node:
    """``"document.write"`` -> member expression."""
    parts = path.split(".")
    if all(p.isidentifier() for p in parts):
        node: A.Node = A.Identifier(parts[0])
        for part in parts[1:]:
            node = A.MemberExpression(node, A.Identifier(part), False)
        return node
    stmt = js.parse_js(f"({path});").body[0]
    return stmt.expression


def zero(vtype: str) -> A.Node:
    return number_literal(vtype, 0.0 if vtype in ("f32", "f64") else 0)


# -- per-function context -------------------------------------------------------------------

@dataclass
class Frame:
    kind: str                    # func | block | loop | if
    label: str | None
    result: str | None           # value type produced, if any
    height: int
    result_var: str | None = None


class Context:
    """State for abstracting one function body.

    ``module_state`` supplies module-level names (memory, globals, callees);
    without it, a context can still abstract straight-line code for tests.
    """

    def __init__(self, params=(), locals=(), results=(), names: NameGenerator | None = None,
                 module_state: "ModuleAbstraction | None" = None, func_index: int | None = None):
        self.names = names or NameGenerator()
        self.mod = module_state
        self.func_index = func_index
        self.nparams = len(params)
        self.local_types = list(params) + list(locals)
        self.local_names = [self.names.fixed(f"p{i}") if i < self.nparams else self.names.fixed(f"loc{i}")
                            for i in range(len(self.local_types))]
        self.results = tuple(results)
        self.stack = AbstractStack()
        self.out: list = []
        self.frames: list[Frame] = []
        self.unreachable = False
        self.final_value: AbstractValue | None = None
        self.helpers_used: set = set()
        self.calls: set = set()
        self.indirect_types: set = set()
        self.imports_used: set = set()
        self.assigned_params: set = set()
        self.diagnostics: list = []
        self.current = None

    # stack primitives
    def pop(self) -> AbstractValue:
        floor = self.frames[-1].height if self.frames else 0
        if len(self.stack) <= floor:
            raise StackUnderflow(self.current, getattr(self.current, "offset", -1))
        return self.stack.values.pop()

    def peek(self) -> AbstractValue:
        floor = self.frames[-1].height if self.frames else 0
        if len(self.stack) <= floor:
            raise StackUnderflow(self.current, getattr(self.current, "offset", -1))
        return self.stack.values[-1]

    def emit(self, stmt) -> None:
        self.out.append(stmt)

    def temp(self, expr: A.Node, vtype: str, prefix: str = "T") -> AbstractValue:
        name = self.names.fresh(prefix)
        self.emit(const_decl(name, expr))
        value = AbstractValue(name, vtype)
        self.stack.push(value)
        return value

    def helper(self, name: str) -> str:
        self.helpers_used.add(name)
        return self.names.helper(name)

    # module-level names
    @property
    def mem_name(self) -> str:
        return self.mod.mem_name if self.mod else "MEM"

    def global_name(self, idx: int) -> str:
        return self.mod.global_name(idx) if self.mod else f"glob{idx}"

    def global_type(self, idx: int) -> str:
        return self.mod.module.global_type(idx)[0] if self.mod else "i32"

    # spilling: stack slots naming a variable about to change get snapshotted first
    def spill(self, predicate) -> None:
        replaced: dict[str, AbstractValue] = {}
        for i, value in enumerate(self.stack.values):
            if value.mutable and predicate(value.name):
                if value.name not in replaced:
                    name = self.names.fresh("T")
                    self.emit(const_decl(name, A.Identifier(value.name)))
                    replaced[value.name] = AbstractValue(name, value.vtype)
                self.stack.values[i] = replaced[value.name]

    def spill_all(self) -> None:
        self.spill(lambda name: True)

    def spill_globals(self) -> None:
        if self.mod is None:
            return
        globals_ = set(self.mod.global_names.values())
        self.spill(lambda name: name in globals_)

    # -- control flow -------------------------------------------------------------------

    def blocktype(self, ins) -> str | None:
        bt = ins.blocktype
        if bt is None or isinstance(bt, str):
            return bt
        ftype = self.mod.module.types[bt] if self.mod and bt < len(self.mod.module.types) else None
        if ftype is None or ftype.params or len(ftype.results) > 1:
            raise AbstractionError(f"multi-value block type {bt} unsupported")
        return ftype.results[0] if ftype.results else None

    def sequence(self, instrs, frame: Frame) -> list:
        """Abstract a nested body into its own statement list."""
        if len(self.frames) >= MAX_NESTING:
            raise AbstractionError("block nesting too deep")
        saved_out, saved_unreachable = self.out, self.unreachable
        self.out, self.unreachable = [], False
        self.frames.append(frame)
        for ins in instrs or ():
            if self.unreachable:
                break
            self.instruction(ins)
        if not self.unreachable and frame.result is not None:
            value = self.pop()
            self.emit(assign(frame.result_var, value.expr))
        if not self.unreachable and len(self.stack) != frame.height:
            raise AbstractionError(f"stack height mismatch at end of {frame.kind}")
        del self.stack.values[frame.height:]
        self.frames.pop()
        body, self.out, self.unreachable = self.out, saved_out, saved_unreachable
        return body

    def label_of(self, frame: Frame) -> str:
        if frame.label is None:
            frame.label = self.names.fresh("L")
        return frame.label

    def branch(self, depth: int) -> list:
        if depth >= len(self.frames):
            raise AbstractionError(f"branch depth {depth} out of range")
        frame = self.frames[-1 - depth]
        if frame.kind == "loop":
            return [A.ContinueStatement(self.label_of(frame))]
        stmts = []
        if frame.kind == "func":
            if self.results:
                if frame.result_var is None:
                    frame.result_var = self.names.fresh("R")
                stmts.append(assign(frame.result_var, self.peek().expr))
        elif frame.result is not None:
            stmts.append(assign(frame.result_var, self.peek().expr))
        stmts.append(A.BreakStatement(self.label_of(frame)))
        return stmts

    def structured(self, ins) -> None:
        rtype = self.blocktype(ins)
        cond = self.pop() if ins.op == "if" else None
        self.spill_all()
        label = self.names.fresh("L") if ins.op != "if" else None
        result_var = None
        if rtype is not None:
            result_var = self.names.fresh("B")
            self.emit(const_decl(result_var, zero(rtype), "let"))
        frame = Frame(ins.op, label, rtype, len(self.stack), result_var)
        if ins.op == "if":
            then = self.sequence(ins.body, frame)
            orelse = self.sequence(ins.orelse, frame) if ins.orelse is not None else None
            stmt = A.IfStatement(cond.expr, A.BlockStatement(then),
                                 A.BlockStatement(orelse) if orelse is not None else None)
            if frame.label is not None:
                stmt = A.LabeledStatement(frame.label, stmt)
        else:
            body = self.sequence(ins.body, frame)
            body.append(A.BreakStatement(label))
            stmt = A.LabeledStatement(label, A.ForStatement(None, None, None, A.BlockStatement(body)))
        self.emit(stmt)
        if rtype is not None:
            self.stack.push(AbstractValue(result_var, rtype, mutable=True))

    # -- calls --------------------------------------------------------------------------

    def call(self, ins) -> None:
        if self.mod is None:
            raise AbstractionError("call outside a module context")
        module = self.mod.module
        target = ins.imm[0]
        ftype = module.func_type(target)
        args = [self.pop() for _ in ftype.params][::-1]
        self.spill_globals()
        if target < module.num_imported_funcs:
            callee, meta = self.mod.import_callee(target, self)
        else:
            self.calls.add(target)
            callee, meta = A.Identifier(self.mod.func_name(target)), {"func": target}
        self.finish_call(A.CallExpression(callee, [a.expr for a in args], meta=meta), ftype)

    def finish_call(self, call: A.CallExpression, ftype) -> None:
        if len(ftype.results) > 1:
            raise AbstractionError("multi-value call results unsupported")
        call.meta = {**call.meta, "result": ftype.results[0] if ftype.results else None}
        if ftype.results:
            self.temp(call, ftype.results[0])
        else:
            self.emit(A.ExpressionStatement(call))

    def call_indirect(self, ins) -> None:
        if self.mod is None:
            raise AbstractionError("call_indirect outside a module context")
        type_idx, table_idx = ins.imm
        module = self.mod.module
        ftype = module.types[type_idx]
        index = self.pop()
        args = [self.pop() for _ in ftype.params][::-1]
        self.spill_globals()
        target = None
        if index.const_value is not None:
            target = self.mod.table_slots(table_idx).get(index.const_value & 0xFFFFFFFF)
            if target is not None and module.func_type(target) != ftype:
                target = None
        if target is not None:
            if target < module.num_imported_funcs:
                callee, meta = self.mod.import_callee(target, self)
            else:
                self.calls.add(target)
                callee, meta = A.Identifier(self.mod.func_name(target)), {"func": target}
        else:
            self.indirect_types.add((type_idx, table_idx))
            stub = self.mod.indirect_name(type_idx, table_idx)
            callee = A.CallExpression(A.Identifier(stub), [index.expr], meta={"stub": stub})
            meta = {"indirect": type_idx, "table": table_idx}
        self.finish_call(A.CallExpression(callee, [a.expr for a in args], meta=meta), ftype)

    # -- the rule table -----------------------------------------------------------------

    def instruction(self, ins) -> None:
        self.current = ins
        op = ins.op
        if op in ("block", "loop", "if"):
            self.structured(ins)
        elif op == "nop":
            pass
        elif op == "unreachable":
            self.emit(A.ThrowStatement(A.Literal("unreachable"), meta={"trap": "unreachable"}))
            self.unreachable = True
        elif op == "br":
            for stmt in self.branch(ins.imm[0]):
                self.emit(stmt)
            self.unreachable = True
        elif op == "br_if":
            cond = self.pop()
            self.emit(A.IfStatement(cond.expr, A.BlockStatement(self.branch(ins.imm[0])), None))
        elif op == "br_table":
            targets, default = ins.imm
            index = self.pop()
            for i, depth in enumerate(targets):
                test = A.BinaryExpression("===", index.expr, number_literal("i32", i), meta={"op": "i32.eq"})
                self.emit(A.IfStatement(test, A.BlockStatement(self.branch(depth)), None))
            for stmt in self.branch(default):
                self.emit(stmt)
            self.unreachable = True
        elif op == "return":
            if len(self.frames) == 1:
                # top level: the value on the stack is the function result, the rest is dead
                if self.results:
                    self.final_value = self.peek()
            else:
                for stmt in self.branch(len(self.frames) - 1):
                    self.emit(stmt)
            self.unreachable = True
        elif op == "call":
            self.call(ins)
        elif op == "call_indirect":
            self.call_indirect(ins)
        elif op == "drop":
            self.pop()
        elif op == "select":
            c, b, a = self.pop(), self.pop(), self.pop()
            self.temp(A.ConditionalExpression(c.expr, a.expr, b.expr, meta={"op": "select"}), a.vtype)
        elif op == "local.get":
            idx = ins.imm[0]
            self.stack.push(AbstractValue(self.local(idx), self.local_types[idx], mutable=True))
        elif op in ("local.set", "local.tee"):
            idx = ins.imm[0]
            name = self.local(idx)
            value = self.pop()
            self.spill(lambda n: n == name)
            self.emit(assign(name, value.expr))
            if idx < self.nparams:
                self.assigned_params.add(name)
            if op == "local.tee":
                self.stack.push(AbstractValue(name, self.local_types[idx], mutable=True))
        elif op == "global.get":
            idx = ins.imm[0]
            self.stack.push(AbstractValue(self.global_name(idx), self.global_type(idx), mutable=True))
        elif op == "global.set":
            name = self.global_name(ins.imm[0])
            value = self.pop()
            self.spill(lambda n: n == name)
            self.emit(assign(name, value.expr))
        elif op == "memory.size":
            call = A.CallExpression(A.Identifier(self.helper("memory_size")), [], meta={"op": op})
            self.temp(call, "i32")
        elif op == "memory.grow":
            delta = self.pop()
            call = A.CallExpression(A.Identifier(self.helper("memory_grow")), [delta.expr], meta={"op": op})
            self.temp(call, "i32")
        elif op.endswith(".const"):
            vtype = op.split(".")[0]
            value = ins.imm[0]
            name = self.names.fresh("C")
            i64_name = self.helper("i64") if needs_i64(vtype, value) else "i64"
            self.emit(const_decl(name, number_literal(vtype, value, i64_name)))
            self.stack.push(AbstractValue(name, vtype, const_value=value))
        elif ".load" in op:
            addr = self.pop()
            self.temp(self.memory_ref(op, addr, ins.imm[1]), result_type(op))
        elif ".store" in op:
            value, addr = self.pop(), self.pop()
            target = self.memory_ref(op, addr, ins.imm[1])
            self.emit(A.AssignStatement("=", target, value.expr, meta={"op": op, "offset": ins.imm[1]}))
        else:
            self.operator(op)

    def local(self, idx: int) -> str:
        if idx >= len(self.local_names):
            raise AbstractionError(f"local index {idx} out of range")
        return self.local_names[idx]

    def memory_ref(self, op: str, addr: AbstractValue, offset: int) -> A.MemberExpression:
        prop: A.Node = addr.expr
        if offset:
            prop = A.BinaryExpression("+", prop, A.Literal(offset), meta={"op": "ea"})
        return A.MemberExpression(A.Identifier(self.mem_name), prop, True, meta={"op": op, "offset": offset})

    def operator(self, op: str) -> None:
        rtype = result_type(op)
        if rtype is None:
            raise AbstractionError(f"unsupported instruction {op}")
        operands = [self.pop() for _ in operand_types(op)][::-1]
        base = op.split(".", 1)[1]
        meta = {"op": op}
        if op in OP_HELPERS:
            expr = A.CallExpression(A.Identifier(self.helper(OP_HELPERS[op])), [v.expr for v in operands], meta=meta)
        elif base == "eqz":
            expr = A.BinaryExpression("===", operands[0].expr, A.Literal(0), meta=meta)
        elif base == "neg":
            expr = A.UnaryExpression("-", operands[0].expr, meta=meta)
        elif base in MATH_CALLS and op[0] == "f":
            callee = A.MemberExpression(A.Identifier("Math"), A.Identifier(MATH_CALLS[base]), False)
            expr = A.CallExpression(callee, [v.expr for v in operands], meta=meta)
        elif base in JS_BINARY and len(operands) == 2:
            expr = A.BinaryExpression(JS_BINARY[base], operands[0].expr, operands[1].expr, meta=meta)
        else:
            raise AbstractionError(f"unsupported instruction {op}")
        self.temp(expr, rtype)

    # -- whole function ------------------------------------------------------------------

    def run(self, body) -> tuple[list, A.Node | None]:
        """Abstract a full function body; returns (statements, result expression)."""
        frame = Frame("func", None, None, 0)
        self.frames.append(frame)
        self.out = []
        for ins in body:
            if self.unreachable:
                break
            self.instruction(ins)
        if not self.unreachable and self.results:
            self.final_value = self.pop()
        if not self.unreachable and len(self.stack) != 0:
            raise AbstractionError("stack height mismatch at end of function")
        self.frames.pop()
        stmts = self.out
        decls = [const_decl(self.local_names[i], zero(self.local_types[i]), "let")
                 for i in range(self.nparams, len(self.local_types))]
        result: A.Node | None = None
        if frame.label is not None:
            if frame.result_var is not None:
                decls.append(const_decl(frame.result_var, zero(self.results[0]), "let"))
                if self.final_value is not None:
                    stmts.append(assign(frame.result_var, self.final_value.expr))
                result = A.Identifier(frame.result_var)
            stmts.append(A.BreakStatement(frame.label))
            stmts = [A.LabeledStatement(frame.label, A.ForStatement(None, None, None, A.BlockStatement(stmts)))]
        elif self.results:
            result = self.final_value.expr if self.final_value is not None else zero(self.results[0])
        return decls + stmts, result


def abstract_instruction(state: AbstractStack, instr, ctx: Context):
    """Apply one abstraction rule. Returns the new stack and the statements emitted."""
    ctx.stack = state
    saved, ctx.out = ctx.out, []
    if not ctx.frames:
        ctx.frames.append(Frame("func", None, None, 0))
    try:
        ctx.instruction(instr)
        return ctx.stack, ctx.out
    finally:
        ctx.out = saved


# -- module level -------------------------------------------------------------------------

class ModuleAbstraction:
    """Shared names and per-function fragments for one instantiated module.

    ``bindings`` maps imported function indices to the JS callee path bound at
    the instantiation site (``None`` when no path could be recovered).
    """

    def __init__(self, module: WasmModule, bindings=None, names: NameGenerator | None = None):
        self.module = module
        self.names = names or NameGenerator()
        self.bindings = normalize_bindings(module, bindings)
        self.mem_name = self.names.fixed("MEM", namespaced=True)
        self.global_names: dict[int, str] = {}
        self.func_names: dict[int, str] = {}
        self.import_names: dict[int, str] = {}
        self.indirect_names: dict[tuple, str] = {}
        self.fragments: dict[int, JsFragment] = {}
        self.diagnostics: list[str] = []
        self._slots: dict[int, dict] = {}
        for idx in range(len(module.global_imports) + len(module.globals)):
            self.global_name(idx)

    def global_name(self, idx: int) -> str:
        if idx not in self.global_names:
            self.global_names[idx] = self.names.fixed(f"glob{idx}", namespaced=True)
        return self.global_names[idx]

    def func_name(self, idx: int) -> str:
        if idx not in self.func_names:
            self.func_names[idx] = self.names.fixed(f"F_{idx}", namespaced=True)
        return self.func_names[idx]

    def import_callee(self, idx: int, ctx: Context | None = None):
        path = self.bindings.get(idx)
        imp = self.module.func_imports[idx]
        if path is None:
            if idx not in self.import_names:
                self.import_names[idx] = self.names.fixed(f"IMPORT_{idx}", namespaced=True)
                msg = f"unbound import {idx} ({imp.module}.{imp.field}) emitted as {self.import_names[idx]}"
                self.diagnostics.append(msg)
                log.info(msg)
            path = self.import_names[idx]
            node = A.Identifier(path)
        else:
            node = path_expression(path)
        if ctx is not None:
            ctx.imports_used.add(idx)
        return node, {"import": idx, "path": path}

    def indirect_name(self, type_idx: int, table_idx: int) -> str:
        key = (type_idx, table_idx)
        if key not in self.indirect_names:
            self.indirect_names[key] = self.names.fresh("INDIRECT", namespaced=True)
        return self.indirect_names[key]

    def table_slots(self, table_idx: int) -> dict[int, int]:
        """Statically known table contents from active element segments."""
        if table_idx not in self._slots:
            slots: dict[int, int] = {}
            for seg in self.module.elements:
                if seg.mode == "active" and seg.table_idx == table_idx and seg.offset is not None:
                    for i, func in enumerate(seg.func_indices):
                        slots[seg.offset + i] = func
            self._slots[table_idx] = slots
        return self._slots[table_idx]

    def function(self, idx: int) -> JsFragment:
        if idx not in self.fragments:
            self.fragments[idx] = self._abstract(idx)
        return self.fragments[idx]

    def _abstract(self, idx: int) -> JsFragment:
        module = self.module
        ftype = module.func_type(idx)
        fragment = JsFragment(func_index=idx, result_type=ftype.results[0] if ftype.results else None)
        names = self.names.child()
        fragment.params = [names.fixed(f"p{i}") for i in range(len(ftype.params))]
        func = module.function(idx)
        if func is None or func.body is None:
            fragment.error = func.error if func is not None else "imported function"
            fragment.diagnostics.append(f"function {idx}: {fragment.error}")
            return fragment
        if len(ftype.results) > 1:
            fragment.error = "multi-value results unsupported"
            fragment.diagnostics.append(f"function {idx}: {fragment.error}")
            return fragment
        ctx = Context(ftype.params, func.locals, ftype.results, names, self, idx)
        try:
            fragment.statements, fragment.result_expr = ctx.run(func.body)
        except AbstractionError as exc:
            fragment.error = f"abstraction-failed: {exc}"
            fragment.diagnostics.append(f"function {idx}: {fragment.error}")
            log.info("function %d skipped: %s", idx, exc)
            return fragment
        fragment.helpers_used = ctx.helpers_used
        fragment.calls = ctx.calls
        fragment.indirect_types = ctx.indirect_types
        fragment.imports_used = ctx.imports_used
        fragment.assigned_params = ctx.assigned_params
        fragment.declared = set(names.issued)
        return fragment

    def closure(self, roots) -> list[int]:
        """Internal functions reachable by calls from ``roots`` (roots excluded unless reached)."""
        seen: set[int] = set()
        order: list[int] = []
        work = list(roots)
        nimp = self.module.num_imported_funcs
        while work:
            idx = work.pop(0)
            frag = self.function(idx)
            callees = sorted(frag.calls)
            for type_idx, table_idx in sorted(frag.indirect_types):
                callees.extend(f for f in self.table_slots(table_idx).values() if f >= nimp)
            for callee in callees:
                if callee not in seen:
                    seen.add(callee)
                    order.append(callee)
                    work.append(callee)
        return order

    def state_statements(self, roots) -> tuple[list, set]:
        """Declarations the inlined fragments of ``roots`` rely on, plus helpers they use."""
        stmts: list = [A.VariableDeclaration("var", [A.VariableDeclarator(
            A.Identifier(self.mem_name), A.ArrayExpression([]))], meta={"memory": True})]
        helpers: set = set()
        for idx, name in sorted(self.global_names.items()):
            init = self.global_init(idx)
            if init.meta and needs_i64(init.meta["op"][:3], init.meta.get("value", 0)):
                helpers.add("i64")
                init.callee.name = self.names.helper("i64")
            stmts.append(A.VariableDeclaration("var", [A.VariableDeclarator(
                A.Identifier(name), init)], meta={"global": idx}))
        callees = self.closure(roots)
        frags = [self.function(i) for i in list(roots) + callees]
        for idx in callees:
            frag = self.function(idx)
            stmts.append(frag.as_function(self.func_name(idx)))
        indirect = set()
        for frag in frags:
            helpers |= frag.helpers_used
            indirect |= frag.indirect_types
        for type_idx, table_idx in sorted(indirect):
            stmts.append(self.indirect_stub(type_idx, table_idx))
        return stmts, helpers

    def global_init(self, idx: int) -> A.Node:
        nimp = len(self.module.global_imports)
        vtype = self.module.global_type(idx)[0]
        if idx < nimp:
            return zero(vtype)
        init = self.module.globals[idx - nimp].init
        if init and init[0].op.endswith(".const"):
            return number_literal(vtype, init[0].imm[0])
        if init and init[0].op == "global.get":
            return A.Identifier(self.global_name(init[0].imm[0]))
        return zero(vtype)

    def indirect_stub(self, type_idx: int, table_idx: int) -> A.FunctionDeclaration:
        name = self.indirect_name(type_idx, table_idx)
        want = self.module.types[type_idx]
        nimp = self.module.num_imported_funcs
        body = []
        for slot, func in sorted(self.table_slots(table_idx).items()):
            if self.module.func_type(func) != want:
                result = A.ThrowStatement(A.Literal("indirect-call-type-mismatch"),
                                          meta={"trap": "indirect-call-type-mismatch"})
            elif func < nimp:
                callee, meta = self.import_callee(func)
                result = A.ReturnStatement(callee, meta=meta)
            else:
                result = A.ReturnStatement(A.Identifier(self.func_name(func)), meta={"func": func})
            test = A.BinaryExpression("===", A.Identifier("i"), number_literal("i32", slot), meta={"op": "i32.eq"})
            body.append(A.IfStatement(test, A.BlockStatement([result]), None))
        body.append(A.ThrowStatement(A.Literal("undefined-element"), meta={"trap": "undefined-element"}))
        return A.FunctionDeclaration(A.Identifier(name), [A.Identifier("i")], A.BlockStatement(body),
                                     meta={"indirect": type_idx, "table": table_idx})


def normalize_bindings(module: WasmModule, bindings) -> dict[int, str | None]:
    """Accept ``{index: path}``, ``{(module, field): path}`` or ``{(module, field): ImportBinding}``."""
    out: dict[int, str | None] = {}
    if not bindings:
        return out
    imports = module.func_imports
    for key, value in bindings.items():
        path = getattr(value, "path", value)
        if isinstance(key, int):
            out[key] = path
            continue
        for i, imp in enumerate(imports):
            if (imp.module, imp.field) == tuple(key):
                out[i] = path
    return out


def abstract_function(module: WasmModule, func_index: int, bindings=None,
                      namegen: NameGenerator | None = None) -> JsFragment:
    """Code abstraction of one defined function."""
    return ModuleAbstraction(module, bindings, namegen).function(func_index)


def is_printable(data: bytes, threshold: float = 0.9) -> bool:
    if not data:
        return True
    return sum(b in PRINTABLE for b in data) / len(data) >= threshold


def abstract_data(module: WasmModule, namegen: NameGenerator | None = None) -> JsFragment:
    """One ``const DATA_n`` (plus ``DATA_n_OFFSET``) per data segment, in section order."""
    names = namegen or NameGenerator()
    fragment = JsFragment()
    for seg in module.data_segments:
        name = names.fresh("DATA", namespaced=True)
        if is_printable(seg.bytes):
            init: A.Node = A.Literal(seg.bytes.decode("latin-1"))
        else:
            init = A.ArrayExpression([A.Literal(b) for b in seg.bytes])
        init.meta = {"data": bytes(seg.bytes)}
        offset_name = names.fixed(f"{name}_OFFSET")
        if seg.passive:
            offset: A.Node = A.Literal("passive")
        elif seg.offset is None:
            offset = A.Literal("dynamic")
        else:
            offset = A.Literal(seg.offset)
        fragment.statements.append(const_decl(name, init))
        fragment.statements.append(const_decl(offset_name, offset))
        fragment.declared.update((name, offset_name))
    return fragment
