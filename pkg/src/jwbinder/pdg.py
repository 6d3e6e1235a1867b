"""Program dependence graph over the JavaScript AST.

The graph keeps three kinds of information:

* control edges ``(from, to, label)`` with ``label`` in ``True``/``False``/``Uncond``;
* def-use data edges ``(def, use, name)`` built from a lexical scope analysis
  (``var`` and function declarations hoisted to the function scope,
  ``let``/``const`` block scoped, flow-insensitive inside a scope);
* value-flow edges that extend def-use chains through expressions: operands
  into the expression that consumes them, right-hand sides into the defined
  name, actual arguments into parameters, returns into call sites and promise
  receivers into ``.then`` callbacks.

``flows_from``/``flows_to`` are reachability queries over value-flow edges.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field

from .js import ast as js

log = logging.getLogger(__name__)

TRUE = "True"
FALSE = "False"
UNCOND = "Uncond"

# value-flow edge kinds
COPY = "copy"            # the value moves unchanged (def->use, rhs->def, arg->param, branch->conditional)
MEMBER = "member"        # object -> member expression reading a property of it
CALLEE = "callee"        # callee -> call / new expression
ARG = "arg"              # argument -> call / new expression (over-approximation)
OPERAND = "operand"      # operand -> arithmetic / unary / template / literal container
THEN = "then"            # promise receiver -> first parameter of a .then callback
RESOLVE = "resolve"      # callback return value -> the .then call (re-wrapped in a promise)
MEMBER_WRITE = "member-write"  # value stored into obj.p -> target member -> base object

# array / typed-array methods that store their arguments into the receiver
MUTATORS = frozenset({"push", "unshift", "splice", "set", "fill"})


@dataclass(eq=False)
class Binding:
    name: str
    kind: str                 # var | let | const | function | param | catch | implicit
    scope: "Scope"
    decls: list = field(default_factory=list)
    defs: list = field(default_factory=list)     # Identifier nodes that (re)define the name
    uses: list = field(default_factory=list)     # Identifier nodes that read the name
    functions: list = field(default_factory=list)  # function nodes syntactically assigned to the name

    def __repr__(self) -> str:
        return f"Binding({self.name!r}, {self.kind}, defs={len(self.defs)}, uses={len(self.uses)})"


@dataclass(eq=False)
class Scope:
    kind: str                 # global | function | block
    node: js.Node
    parent: "Scope | None" = None
    bindings: dict = field(default_factory=dict)
    children: list = field(default_factory=list)

    def lookup(self, name: str) -> Binding | None:
        scope: Scope | None = self
        while scope is not None:
            if name in scope.bindings:
                return scope.bindings[name]
            scope = scope.parent
        return None

    def function_scope(self) -> "Scope":
        scope = self
        while scope.kind == "block" and scope.parent is not None:
            scope = scope.parent
        return scope


class ReturnHub:
    """Stand-in node collecting the values a function returns."""

    __slots__ = ("function",)

    def __init__(self, function: js.Node):
        self.function = function

    def __repr__(self) -> str:
        return f"ReturnHub({self.function.type})"


class Pdg:
    def __init__(self, ast: js.Program):
        self.ast = ast
        self.control_edges: list[tuple[js.Node, js.Node, str]] = []
        self.scope: Scope | None = None
        self.bindings: list[Binding] = []
        self.unresolved: set[str] = set()
        self.symbols: set[str] = set()
        self._binding_of: dict[js.Node, Binding] = {}
        self._parent: dict[js.Node, js.Node] = {}
        self._order: dict[js.Node, int] = {}
        self._succ: dict[object, list[tuple[object, str]]] = {}
        self._pred: dict[object, list[tuple[object, str]]] = {}
        self._edge_set: set[tuple[int, int, str]] = set()
        self._data_edges: list[tuple[js.Node, js.Node, str]] | None = None
        self.call_targets: dict[js.Node, list[js.Node]] = {}
        self.return_hubs: dict[js.Node, ReturnHub] = {}

    # -- construction helpers ---------------------------------------------------

    def add_flow(self, src: object, dst: object, kind: str = COPY) -> None:
        if src is dst:
            return
        key = (id(src), id(dst), kind)
        if key in self._edge_set:
            return
        self._edge_set.add(key)
        self._succ.setdefault(src, []).append((dst, kind))
        self._pred.setdefault(dst, []).append((src, kind))

    # -- queries ----------------------------------------------------------------

    @property
    def data_edges(self) -> list[tuple[js.Node, js.Node, str]]:
        """Every (def, use, name) triple; all defs of a binding reach all of its uses."""
        if self._data_edges is None:
            edges = []
            for b in self.bindings:
                for d in b.defs:
                    for u in b.uses:
                        if d is not u:
                            edges.append((d, u, b.name))
            self._data_edges = edges
        return self._data_edges

    def binding(self, ident: js.Node) -> Binding | None:
        return self._binding_of.get(ident)

    def parent(self, node: js.Node) -> js.Node | None:
        return self._parent.get(node)

    def order(self, node: js.Node) -> int:
        return self._order.get(node, -1)

    def successors(self, node: object) -> list[tuple[object, str]]:
        return self._succ.get(node, [])

    def predecessors(self, node: object) -> list[tuple[object, str]]:
        return self._pred.get(node, [])

    def flows_from(self, node: js.Node) -> set[js.Node]:
        return self._reach(node, self._succ)

    def flows_to(self, node: js.Node) -> set[js.Node]:
        return self._reach(node, self._pred)

    def _reach(self, start: object, graph: dict) -> set[js.Node]:
        seen = {id(start)}
        out: set[js.Node] = set()
        queue = deque([start])
        while queue:
            current = queue.popleft()
            for nxt, _ in graph.get(current, ()):
                if isinstance(nxt, js.Node):
                    out.add(nxt)
                if id(nxt) not in seen:
                    seen.add(id(nxt))
                    queue.append(nxt)
        return out

    def dump_dot(self) -> str:
        """Graphviz text, one edge per line."""

        def label(node: js.Node) -> str:
            return f"n{self.order(node)}"

        lines = ["digraph pdg {"]
        for node, idx in sorted(self._order.items(), key=lambda kv: kv[1]):
            text = node.type
            if isinstance(node, js.Identifier):
                text += f" {node.name}"
            lines.append(f'  n{idx} [label="{text}"];')
        data = sorted(self.data_edges, key=lambda e: (self.order(e[0]), self.order(e[1]), e[2]))
        for d, u, name in data:
            lines.append(f'  {label(d)} -> {label(u)} [label="DEF->USE var={name}"];')
        control = sorted(self.control_edges, key=lambda e: (self.order(e[0]), self.order(e[1])))
        for a, b, lab in control:
            lines.append(f'  {label(a)} -> {label(b)} [label="CTL label={lab}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def flows_from(pdg: Pdg, node: js.Node) -> set[js.Node]:
    return pdg.flows_from(node)


def flows_to(pdg: Pdg, node: js.Node) -> set[js.Node]:
    return pdg.flows_to(node)


def _functions_in(expr: js.Node | None) -> list[js.Node]:
    if isinstance(expr, (js.FunctionExpression, js.ArrowFunction)):
        return [expr]
    return []


class _Builder:
    def __init__(self, program: js.Program):
        self.pdg = Pdg(program)
        self.pending_calls: list[tuple[js.CallExpression, Scope]] = []
        self.fn_stack: list[js.Node] = []

    def build(self) -> Pdg:
        program = self.pdg.ast
        for i, node in enumerate(js.walk(program)):
            self.pdg._order[node] = i
            for child in js.iter_child_nodes(node):
                self.pdg._parent[child] = node
            if isinstance(node, js.Identifier):
                self.pdg.symbols.add(node.name)
            elif isinstance(node, js.LabeledStatement):
                self.pdg.symbols.add(node.label)
        root = Scope("global", program)
        self.pdg.scope = root
        self._hoist(program.body, root)
        self._declare_lexical(program.body, root)
        for stmt in program.body:
            self.pdg.control_edges.append((program, stmt, UNCOND))
            self.stmt(stmt, root)
        self._resolve_calls()
        return self.pdg

    # -- declarations -----------------------------------------------------------

    def declare(self, scope: Scope, name: str, kind: str, decl: js.Node | None) -> Binding:
        binding = scope.bindings.get(name)
        if binding is None:
            binding = Binding(name, kind, scope)
            scope.bindings[name] = binding
            self.pdg.bindings.append(binding)
        if decl is not None:
            binding.decls.append(decl)
        return binding

    def _hoist(self, body: list[js.Node], fscope: Scope) -> None:
        """Declare ``var`` names and function declarations of a function body (not nested functions)."""
        stack = list(reversed(body))
        while stack:
            node = stack.pop()
            if isinstance(node, js.VariableDeclaration):
                if node.kind == "var":
                    for d in node.declarations:
                        self.declare(fscope, d.id.name, "var", d.id)
                continue
            if isinstance(node, js.FunctionDeclaration):
                self.declare(fscope, node.id.name, "function", node.id)
                continue
            if not js.is_statement(node) and not isinstance(node, js.SwitchCase):
                continue
            children = [c for c in js.iter_child_nodes(node)
                        if js.is_statement(c) or isinstance(c, js.SwitchCase)]
            stack.extend(reversed(children))

    def _declare_lexical(self, statements: list[js.Node], scope: Scope) -> None:
        for stmt in statements:
            if isinstance(stmt, js.VariableDeclaration) and stmt.kind != "var":
                for d in stmt.declarations:
                    self.declare(scope, d.id.name, stmt.kind, d.id)

    def _new_scope(self, kind: str, node: js.Node, parent: Scope) -> Scope:
        scope = Scope(kind, node, parent)
        parent.children.append(scope)
        return scope

    # -- identifiers ------------------------------------------------------------

    def _resolve(self, ident: js.Identifier, scope: Scope, assigning: bool = False) -> Binding:
        binding = scope.lookup(ident.name)
        if binding is None:
            root = self.pdg.scope
            binding = self.declare(root, ident.name, "implicit", None)
            self.pdg.unresolved.add(ident.name)
        self.pdg._binding_of[ident] = binding
        return binding

    def use(self, ident: js.Identifier, scope: Scope) -> None:
        binding = self._resolve(ident, scope)
        binding.uses.append(ident)
        self.pdg.add_flow(binding, ident)

    def define(self, ident: js.Identifier, scope: Scope, value: js.Node | None = None) -> Binding:
        binding = self._resolve(ident, scope, assigning=True)
        binding.defs.append(ident)
        self.pdg.add_flow(ident, binding)
        if value is not None:
            self.pdg.add_flow(value, ident)
            binding.functions.extend(_functions_in(value))
        return binding

    # -- statements ---------------------------------------------------------------

    def block(self, owner: js.Node, statements: list[js.Node], scope: Scope, label: str = UNCOND) -> None:
        self._declare_lexical(statements, scope)
        for stmt in statements:
            self.pdg.control_edges.append((owner, stmt, label))
            self.stmt(stmt, scope)

    def branch(self, owner: js.Node, body: js.Node | None, scope: Scope, label: str) -> None:
        if body is None:
            return
        if isinstance(body, js.BlockStatement):
            self.block(owner, body.body, self._new_scope("block", body, scope), label)
        else:
            self.pdg.control_edges.append((owner, body, label))
            self.stmt(body, scope)

    def stmt(self, node: js.Node, scope: Scope) -> None:
        kind = type(node)
        if kind is js.ExpressionStatement:
            self.expr(node.expression, scope)
        elif kind is js.VariableDeclaration:
            self.declaration(node, scope)
        elif kind is js.AssignStatement:
            self.assignment(node, scope)
        elif kind is js.FunctionDeclaration:
            self.define(node.id, scope, node)
            self.function(node, scope)
        elif kind is js.IfStatement:
            self.expr(node.test, scope)
            self.branch(node, node.consequent, scope, TRUE)
            self.branch(node, node.alternate, scope, FALSE)
        elif kind is js.ForStatement:
            inner = self._new_scope("block", node, scope)
            if isinstance(node.init, js.VariableDeclaration):
                if node.init.kind != "var":
                    self._declare_lexical([node.init], inner)
                self.declaration(node.init, inner)
            elif node.init is not None:
                self.expr(node.init, inner)
            if node.test is not None:
                self.expr(node.test, inner)
            if node.update is not None:
                self.expr(node.update, inner)
            self.branch(node, node.body, inner, TRUE)
        elif kind is js.ForInStatement:
            inner = self._new_scope("block", node, scope)
            self.expr(node.right, scope)
            left = node.left
            if isinstance(left, js.VariableDeclaration):
                if left.kind != "var":
                    self._declare_lexical([left], inner)
                self.define(left.declarations[0].id, inner, node.right)
            else:
                self.store(left, node.right, inner)
            self.branch(node, node.body, inner, TRUE)
        elif kind is js.WhileStatement:
            self.expr(node.test, scope)
            self.branch(node, node.body, scope, TRUE)
        elif kind is js.DoWhileStatement:
            self.branch(node, node.body, scope, UNCOND)
            self.expr(node.test, scope)
        elif kind is js.LabeledStatement:
            self.pdg.control_edges.append((node, node.body, UNCOND))
            self.stmt(node.body, scope)
        elif kind is js.BlockStatement:
            self.block(node, node.body, self._new_scope("block", node, scope))
        elif kind in (js.ReturnStatement, js.ThrowStatement):
            if node.argument is not None:
                self.expr(node.argument, scope)
                if kind is js.ReturnStatement and self.fn_stack:
                    self.pdg.add_flow(node.argument, self._return_hub(self.fn_stack[-1]))
        elif kind is js.TryStatement:
            self.branch(node, node.block, scope, UNCOND)
            if node.handler is not None:
                catch_scope = self._new_scope("block", node.handler, scope)
                if node.param is not None:
                    self.declare(catch_scope, node.param.name, "catch", node.param)
                    self.define(node.param, catch_scope)
                self.block(node, node.handler.body, catch_scope)
            if node.finalizer is not None:
                self.branch(node, node.finalizer, scope, UNCOND)
        elif kind is js.SwitchStatement:
            self.expr(node.discriminant, scope)
            inner = self._new_scope("block", node, scope)
            self._declare_lexical([s for case in node.cases for s in case.consequent], inner)
            for case in node.cases:
                if case.test is not None:
                    self.expr(case.test, inner)
                for s in case.consequent:
                    self.pdg.control_edges.append((node, s, UNCOND))
                    self.stmt(s, inner)
        # Break/Continue/Empty carry no dependencies

    def declaration(self, node: js.VariableDeclaration, scope: Scope) -> None:
        for d in node.declarations:
            if d.init is not None:
                self.expr(d.init, scope)
                self.define(d.id, scope, d.init)
            else:
                self._resolve(d.id, scope)

    def assignment(self, node: js.Node, scope: Scope) -> None:
        self.expr(node.value, scope)
        if node.op != "=":
            self.expr_target_read(node.target, scope)
        self.store(node.target, node.value, scope)
        if isinstance(node, js.AssignmentExpression):
            self.pdg.add_flow(node.value, node)

    def expr_target_read(self, target: js.Node, scope: Scope) -> None:
        if isinstance(target, js.Identifier):
            binding = self._resolve(target, scope)
            binding.uses.append(target)
            self.pdg.add_flow(binding, target)

    def store(self, target: js.Node, value: js.Node | None, scope: Scope) -> None:
        if isinstance(target, js.Identifier):
            self.define(target, scope, value)
        elif isinstance(target, js.MemberExpression):
            # obj.p = v reads obj and weakly redefines it
            self.expr(target, scope)
            if value is not None:
                self.pdg.add_flow(value, target, MEMBER_WRITE)
            base = target.object
            while isinstance(base, js.MemberExpression):
                base = base.object
            if isinstance(base, js.Identifier):
                binding = self.pdg.binding(base)
                if binding is not None:
                    binding.defs.append(base)
                    self.pdg.add_flow(base, binding)
                    self.pdg.add_flow(target, base, MEMBER_WRITE)
        else:
            self.expr(target, scope)

    def _mutator_call(self, call: js.CallExpression) -> None:
        """``a.push(v)`` and friends store their arguments into ``a``."""
        callee = call.callee
        if not (isinstance(callee, js.MemberExpression) and not callee.computed
                and callee.property.name in MUTATORS and call.arguments):
            return
        base = callee.object
        while isinstance(base, js.MemberExpression):
            base = base.object
        if not isinstance(base, js.Identifier):
            return
        binding = self.pdg.binding(base)
        if binding is None:
            return
        binding.defs.append(base)
        self.pdg.add_flow(base, binding)
        for arg in call.arguments:
            self.pdg.add_flow(arg, callee, MEMBER_WRITE)
        self.pdg.add_flow(callee, base, MEMBER_WRITE)

    # -- functions ----------------------------------------------------------------

    def _return_hub(self, fn: js.Node) -> ReturnHub:
        hub = self.pdg.return_hubs.get(fn)
        if hub is None:
            hub = self.pdg.return_hubs[fn] = ReturnHub(fn)
        return hub

    def function(self, fn: js.Node, scope: Scope) -> None:
        fscope = self._new_scope("function", fn, scope)
        if isinstance(fn, js.FunctionExpression) and fn.id is not None:
            self.declare(fscope, fn.id.name, "function", fn.id)
            self.define(fn.id, fscope, fn)
        for p in fn.params:
            self.declare(fscope, p.name, "param", p)
            self.define(p, fscope)
        self.fn_stack.append(fn)
        if isinstance(fn, js.ArrowFunction) and fn.expression:
            self.expr(fn.body, fscope)
            self.pdg.add_flow(fn.body, self._return_hub(fn))
        else:
            body = fn.body.body
            self._hoist(body, fscope)
            self._declare_lexical(body, fscope)
            for stmt in body:
                self.pdg.control_edges.append((fn, stmt, UNCOND))
                self.stmt(stmt, fscope)
        self.fn_stack.pop()

    # -- expressions --------------------------------------------------------------

    def expr(self, node: js.Node | None, scope: Scope) -> None:
        if node is None:
            return
        kind = type(node)
        flow = self.pdg.add_flow
        if kind is js.Identifier:
            self.use(node, scope)
        elif kind is js.Literal or kind is js.ThisExpression:
            pass
        elif kind is js.MemberExpression:
            self.expr(node.object, scope)
            if node.computed:
                self.expr(node.property, scope)
            flow(node.object, node, MEMBER)
        elif kind is js.CallExpression or kind is js.NewExpression:
            self.expr(node.callee, scope)
            flow(node.callee, node, CALLEE)
            for arg in node.arguments:
                self.expr(arg, scope)
                flow(arg, node, ARG)
            if kind is js.CallExpression:
                self.pending_calls.append((node, scope))
                self._mutator_call(node)
        elif kind is js.BinaryExpression:
            self.expr(node.left, scope)
            self.expr(node.right, scope)
            if node.op in ("&&", "||", "??"):
                flow(node.left, node, COPY)
                flow(node.right, node, COPY)
            else:
                flow(node.left, node, OPERAND)
                flow(node.right, node, OPERAND)
        elif kind is js.UnaryExpression:
            self.expr(node.argument, scope)
            flow(node.argument, node, OPERAND)
        elif kind is js.UpdateExpression:
            arg = node.argument
            if isinstance(arg, js.Identifier):
                self.expr_target_read(arg, scope)
                binding = self.pdg.binding(arg)
                binding.defs.append(arg)
                flow(arg, binding)
            else:
                self.expr(arg, scope)
            flow(arg, node, OPERAND)
        elif kind is js.ConditionalExpression:
            self.expr(node.test, scope)
            self.expr(node.consequent, scope)
            self.expr(node.alternate, scope)
            self.pdg.control_edges.append((node, node.consequent, TRUE))
            self.pdg.control_edges.append((node, node.alternate, FALSE))
            flow(node.consequent, node, COPY)
            flow(node.alternate, node, COPY)
        elif kind is js.AssignmentExpression:
            self.assignment(node, scope)
        elif kind is js.SequenceExpression:
            for e in node.expressions:
                self.expr(e, scope)
            flow(node.expressions[-1], node, COPY)
        elif kind is js.ArrayExpression:
            for e in node.elements:
                if e is not None:
                    self.expr(e, scope)
                    flow(e, node, OPERAND)
        elif kind is js.ObjectExpression:
            for prop in node.properties:
                if prop.computed:
                    self.expr(prop.key, scope)
                self.expr(prop.value, scope)
                flow(prop.value, node, OPERAND)
        elif kind is js.TemplateString:
            for e in node.expressions:
                self.expr(e, scope)
                flow(e, node, OPERAND)
        elif kind is js.FunctionExpression or kind is js.ArrowFunction:
            self.function(node, scope)
        else:
            for child in js.iter_child_nodes(node):
                self.expr(child, scope)

    # -- interprocedural edges ----------------------------------------------------

    def _callee_functions(self, callee: js.Node) -> list[js.Node]:
        if isinstance(callee, (js.FunctionExpression, js.ArrowFunction)):
            return [callee]
        if isinstance(callee, js.Identifier):
            binding = self.pdg.binding(callee)
            if binding is None:
                return []
            out = list(binding.functions)
            for decl in binding.decls:
                parent = self.pdg.parent(decl)
                if isinstance(parent, js.FunctionDeclaration) and parent.id is decl and parent not in out:
                    out.append(parent)
            return out
        return []

    def _resolve_calls(self) -> None:
        for call, _scope in self.pending_calls:
            callee = call.callee
            targets = self._callee_functions(callee)
            if targets:
                self.pdg.call_targets[call] = targets
            for fn in targets:
                for arg, param in zip(call.arguments, fn.params):
                    self.pdg.add_flow(arg, param, COPY)
                self.pdg.add_flow(self._return_hub(fn), call, COPY)
            if (isinstance(callee, js.MemberExpression) and not callee.computed
                    and callee.property.name == "then" and call.arguments):
                for cb in self._callee_functions(call.arguments[0]):
                    if cb.params:
                        self.pdg.add_flow(callee.object, cb.params[0], THEN)
                    self.pdg.add_flow(self._return_hub(cb), call, RESOLVE)


def build_pdg(ast: js.Program) -> Pdg:
    """Scope analysis plus control/data/value-flow edges for a parsed program."""
    pdg = _Builder(ast).build()
    log.debug("pdg: %d bindings, %d control edges, %d unresolved names",
              len(pdg.bindings), len(pdg.control_edges), len(pdg.unresolved))
    return pdg
