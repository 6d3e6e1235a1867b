"""Evaluator for the statement grammar emitted by the abstraction.

Not a JavaScript engine: it understands exactly the forms the abstraction
produces (const/let/assign, labeled ``for (;;)``, labeled ``if``, break and
continue, calls, ``MEM[...]`` reads and writes, return, throw). Arithmetic is
driven by the ``meta["op"]`` tag each emitted node carries, so i32 results
wrap exactly as in Wasm even though the text uses plain JS operators.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

from ..js import ast as A
from ..js.printer import print_js
from ..wasm.opcodes import operand_types
from . import numeric as N
from .interp import DEFAULT_FUEL, MAX_CALL_DEPTH, HostTrace, OutOfFuel, call_host
from .numeric import Trap

log = logging.getLogger(__name__)


class EvalError(Exception):
    """The fragment uses a form outside the evaluated grammar."""


@dataclass(frozen=True)
class FuncRef:
    name: str


@dataclass(frozen=True)
class HostRef:
    path: str


class _Signal(Exception):
    pass


class _Break(_Signal):
    def __init__(self, label):
        self.label = label


class _Continue(_Signal):
    def __init__(self, label):
        self.label = label


class _Return(_Signal):
    def __init__(self, value):
        self.value = value


class Scope:
    __slots__ = ("vars", "parent")

    def __init__(self, parent: "Scope | None" = None):
        self.vars: dict = {}
        self.parent = parent

    def find(self, name: str) -> "Scope | None":
        scope = self
        while scope is not None:
            if name in scope.vars:
                return scope
            scope = scope.parent
        return None


class FragmentEvaluator:
    def __init__(self, memory: bytearray | None = None, host: dict | None = None,
                 max_pages: int | None = None, fuel: int = DEFAULT_FUEL):
        self.memory = memory if memory is not None else bytearray()
        self.host = host or {}
        self.max_pages = max_pages
        self.globals = Scope()
        self.functions: dict[str, A.FunctionDeclaration] = {}
        self.memory_names: set[str] = set()
        self.trace = HostTrace()
        self.fuel = fuel
        self.depth = 0

    # -- setup ------------------------------------------------------------------------

    def load_state(self, statements) -> None:
        """Execute module-state declarations (memory, globals, functions, stubs)."""
        self.hoist(statements)
        for stmt in statements:
            if isinstance(stmt, A.FunctionDeclaration):
                continue
            if stmt.meta and stmt.meta.get("memory"):
                for decl in stmt.declarations:
                    self.memory_names.add(decl.id.name)
                continue
            self.exec(stmt, self.globals)

    def hoist(self, statements) -> None:
        for stmt in statements:
            if isinstance(stmt, A.FunctionDeclaration):
                self.functions[stmt.id.name] = stmt

    def tick(self) -> None:
        self.fuel -= 1
        if self.fuel < 0:
            raise OutOfFuel()

    # -- statements -------------------------------------------------------------------

    def exec_list(self, statements, scope: Scope) -> None:
        for stmt in statements:
            self.exec(stmt, scope)

    def exec(self, node, scope: Scope) -> None:
        kind = type(node)
        if kind is A.VariableDeclaration:
            for decl in node.declarations:
                scope.vars[decl.id.name] = self.eval(decl.init, scope) if decl.init is not None else None
        elif kind is A.AssignStatement:
            if node.op != "=":
                raise EvalError(f"compound assignment {node.op}")
            value = self.eval(node.value, scope)
            target = node.target
            if isinstance(target, A.Identifier):
                owner = scope.find(target.name) or self.globals
                owner.vars[target.name] = value
            elif isinstance(target, A.MemberExpression) and target.meta and "op" in target.meta:
                addr = self.address(target, scope)
                N.store(target.meta["op"], self.memory, addr, target.meta.get("offset", 0), value)
            else:
                raise EvalError(f"unsupported assignment target {target.type}")
        elif kind is A.ExpressionStatement:
            self.eval(node.expression, scope)
        elif kind is A.LabeledStatement:
            self.labeled(node, scope)
        elif kind is A.IfStatement:
            if self.truthy(self.eval(node.test, scope)):
                self.exec(node.consequent, scope)
            elif node.alternate is not None:
                self.exec(node.alternate, scope)
        elif kind is A.BlockStatement:
            self.exec_list(node.body, Scope(scope))
        elif kind is A.BreakStatement:
            raise _Break(node.label)
        elif kind is A.ContinueStatement:
            raise _Continue(node.label)
        elif kind is A.ReturnStatement:
            raise _Return(self.eval(node.argument, scope) if node.argument is not None else None)
        elif kind is A.ThrowStatement:
            arg = node.argument
            raise Trap(arg.value if isinstance(arg, A.Literal) else "unreachable")
        elif kind is A.FunctionDeclaration:
            self.functions[node.id.name] = node
        elif kind is A.ForStatement and node.init is None and node.test is None and node.update is None:
            self.loop(None, node, scope)
        elif kind is A.EmptyStatement:
            pass
        else:
            raise EvalError(f"unsupported statement {node.type}")

    def labeled(self, node: A.LabeledStatement, scope: Scope) -> None:
        body = node.body
        if isinstance(body, A.ForStatement):
            self.loop(node.label, body, scope)
            return
        try:
            self.exec(body, scope)
        except _Break as brk:
            if brk.label != node.label:
                raise

    def loop(self, label, node: A.ForStatement, scope: Scope) -> None:
        while True:
            self.tick()
            try:
                self.exec(node.body, scope)
            except _Break as brk:
                if brk.label is None or brk.label == label:
                    return
                raise
            except _Continue as cont:
                if cont.label is None or cont.label == label:
                    continue
                raise

    # -- expressions ------------------------------------------------------------------

    @staticmethod
    def truthy(value) -> bool:
        if isinstance(value, (FuncRef, HostRef)):
            return True
        return bool(value)

    def address(self, member: A.MemberExpression, scope: Scope) -> int:
        prop = member.property
        if prop.meta and prop.meta.get("op") == "ea":
            prop = prop.left
        return self.eval(prop, scope)

    def operands(self, node) -> list:
        if isinstance(node, A.BinaryExpression):
            return [node.left, node.right]
        if isinstance(node, A.UnaryExpression):
            return [node.argument]
        if isinstance(node, A.CallExpression):
            return list(node.arguments)
        raise EvalError(f"operator node {node.type} has no operands")

    def eval(self, node, scope: Scope):
        meta = node.meta
        if meta:
            op = meta.get("op")
            if op is not None:
                return self.eval_op(op, node, scope)
        kind = type(node)
        if kind is A.Identifier:
            return self.lookup(node.name, scope)
        if kind is A.Literal:
            return node.value
        if kind is A.CallExpression:
            return self.call(node, scope)
        if kind is A.MemberExpression and not node.computed:
            return HostRef(print_js(node))
        if kind is A.ConditionalExpression:
            branch = node.consequent if self.truthy(self.eval(node.test, scope)) else node.alternate
            return self.eval(branch, scope)
        raise EvalError(f"unsupported expression {node.type}")

    def eval_op(self, op: str, node, scope: Scope):
        if op.endswith(".const"):
            return N.canonical(op[:3], node.meta["value"])
        if op == "select":
            c = self.eval(node.test, scope)
            a = self.eval(node.consequent, scope)
            b = self.eval(node.alternate, scope)
            return a if c != 0 else b
        if ".load" in op:
            return N.load(op, self.memory, self.address(node, scope), node.meta.get("offset", 0))
        if op == "memory.size":
            return len(self.memory) // N.PAGE_SIZE
        if op == "memory.grow":
            return N.memory_grow(self.memory, self.eval(node.arguments[0], scope), self.max_pages)
        args = [self.eval(x, scope) for x in self.operands(node)[:len(operand_types(op))]]
        return N.apply(op, args)

    def lookup(self, name: str, scope: Scope):
        owner = scope.find(name)
        if owner is not None:
            return owner.vars[name]
        if name in self.globals.vars:
            return self.globals.vars[name]
        if name in self.functions:
            return FuncRef(name)
        if name in self.host or "IMPORT_" in name:
            return HostRef(name)
        raise EvalError(f"unbound identifier {name}")

    def call(self, node: A.CallExpression, scope: Scope):
        meta = node.meta or {}
        callee = self.eval(node.callee, scope)
        args = [self.eval(a, scope) for a in node.arguments]
        if "import" in meta and not isinstance(callee, FuncRef):
            callee = HostRef(meta["path"])
        return self.apply(callee, args, meta.get("result"))

    def apply(self, callee, args: list, result: str | None = None):
        if isinstance(callee, HostRef):
            return call_host(self.host.get(callee.path), callee.path, self.memory, args, result, self.trace)
        if isinstance(callee, FuncRef):
            return self.invoke(self.functions[callee.name], args)
        raise EvalError(f"call of non-function value {callee!r}")

    def invoke(self, fn: A.FunctionDeclaration, args: list):
        if self.depth >= MAX_CALL_DEPTH:
            raise Trap("call-stack-exhausted")
        self.depth += 1
        scope = Scope(self.globals)
        for param, arg in zip(fn.params, args):
            scope.vars[param.name] = arg
        try:
            self.exec_list(fn.body.body, scope)
        except _Return as ret:
            return ret.value
        finally:
            self.depth -= 1
        return None

    def run_fragment(self, fragment, args: list):
        """Bind parameters, execute the fragment body and evaluate its result expression."""
        scope = Scope(self.globals)
        for name, arg in zip(fragment.params, args):
            scope.vars[name] = arg
        self.hoist(fragment.statements)
        try:
            self.exec_list(fragment.statements, scope)
        except (_Break, _Continue) as sig:
            raise EvalError(f"unmatched {type(sig).__name__} {sig.label}") from None
        if fragment.result_expr is None:
            return None
        return self.eval(fragment.result_expr, scope)


def eval_fragment(fragment, args: list, host: dict | None = None, state=(), memory: bytearray | None = None,
                  max_pages: int | None = None, fuel: int = DEFAULT_FUEL):
    """Evaluate an abstracted function; returns ``(result, trace)``. Traps propagate."""
    ev = FragmentEvaluator(memory, host, max_pages, fuel)
    ev.load_state(list(state))
    result = ev.run_fragment(fragment, list(args))
    return result, ev.trace
