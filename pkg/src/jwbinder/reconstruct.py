"""Splice Wasm abstractions into a copy of the JavaScript AST and print it.

Three splice kinds are applied to a private clone of the program:

* invocation replacement (code/all): an export call becomes the callee's
  fragment, arguments bound through fresh ``const p<i>_<n>`` declarations;
* instantiation insertion: data constants (data/all) and the module state the
  inlined code refers to (code/all) go right before the instantiation site;
* helper prelude: helper definitions at program top, once.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from . import js
from .interop import InteropMap
from .js import ast as A
from .pdg import Pdg
from .ssr.abstraction import JsFragment, ModuleAbstraction, abstract_data
from .ssr.helpers import prelude
from .ssr.names import NameGenerator
from .wasm import WasmModule

log = logging.getLogger(__name__)

MODES = ("code", "data", "all")
_BODY_SLOTS = {"consequent", "alternate", "body"}


class UnresolvedFragment(Exception):
    def __init__(self, site, reason: str):
        self.site = site
        self.reason = reason
        super().__init__(f"site {site}: {reason}")


@dataclass
class SiteUnit:
    """A decoded module bound to one instantiation site."""
    site: object
    module: WasmModule
    code: ModuleAbstraction
    data: JsFragment


@dataclass
class Splice:
    position: A.Node
    kind: str                     # invocation-replacement | instantiation-insertion | helper-prelude
    fragment: object = None


@dataclass
class Ipdg:
    ast: A.Program
    mode: str
    splices: list = field(default_factory=list)
    failures: list = field(default_factory=list)    # (site index or export name, reason)
    helpers: set = field(default_factory=set)


def prepare_units(pdg: Pdg, interops: InteropMap, modules: dict,
                  names: NameGenerator | None = None) -> dict[int, SiteUnit]:
    """Abstractions for every instantiation site whose module was decoded.

    ``modules`` maps instantiation-site index to :class:`WasmModule`. The first
    site uses bare names (``MEM``, ``DATA_0``); later ones get a ``W<k>_`` prefix.
    """
    root = names or NameGenerator(pdg.symbols)
    units: dict[int, SiteUnit] = {}
    for k, site in enumerate(s for s in interops.instantiation_sites if s.index in modules):
        module = modules[site.index]
        gen = root.site("" if k == 0 else f"W{k}_")
        code = ModuleAbstraction(module, site.bindings, gen)
        units[site.index] = SiteUnit(site, module, code, abstract_data(module, gen))
    return units


# -- tree surgery ---------------------------------------------------------------------

class _Tree:
    """Cloned program plus a parent map kept current across edits."""

    def __init__(self, program: A.Program):
        self.origin: dict[int, A.Node] = {}
        self.root = self._clone(program)
        self.parent: dict[int, tuple[A.Node, str]] = {}
        for node in A.walk(self.root):
            self._adopt(node)

    def _clone(self, node):
        if isinstance(node, list):
            return [self._clone(x) for x in node]
        if not isinstance(node, A.Node):
            return node
        copy = type(node).__new__(type(node))
        for name in node._fields:
            setattr(copy, name, self._clone(getattr(node, name)))
        copy.start, copy.end, copy.meta = node.start, node.end, node.meta
        self.origin[id(node)] = copy
        return copy

    def _adopt(self, node: A.Node) -> None:
        for name in node._fields:
            value = getattr(node, name)
            if isinstance(value, A.Node):
                self.parent[id(value)] = (node, name)
            elif isinstance(value, list):
                for item in value:
                    if isinstance(item, A.Node):
                        self.parent[id(item)] = (node, name)

    def adopt_all(self, nodes) -> None:
        for top in nodes:
            for node in A.walk(top):
                self._adopt(node)

    def copy_of(self, node: A.Node) -> A.Node | None:
        return self.origin.get(id(node))

    def anchor(self, node: A.Node) -> A.Node:
        """Nearest enclosing statement that sits in a statement list or body slot.

        An expression-bodied arrow on the way up is converted to a block body so
        hoisted statements stay inside the arrow's scope.
        """
        current = node
        while True:
            entry = self.parent.get(id(current))
            if entry is None:
                return current
            parent, slot = entry
            if isinstance(parent, A.ArrowFunction) and slot == "body" and parent.expression:
                ret = A.ReturnStatement(current)
                parent.body = A.BlockStatement([ret])
                parent.expression = False
                self.parent[id(current)] = (ret, "argument")
                self.parent[id(ret)] = (parent.body, "body")
                self.parent[id(parent.body)] = (parent, "body")
                return ret
            if A.is_statement(current) and (isinstance(getattr(parent, slot), list) or slot in _BODY_SLOTS):
                if not isinstance(parent, (A.LabeledStatement,)):
                    return current
            current = parent

    def _statement_list(self, stmt: A.Node) -> tuple[list, int]:
        parent, slot = self.parent[id(stmt)]
        container = getattr(parent, slot)
        if isinstance(container, list):
            return container, next(i for i, x in enumerate(container) if x is stmt)
        block = A.BlockStatement([stmt])
        setattr(parent, slot, block)
        self.parent[id(block)] = (parent, slot)
        self.parent[id(stmt)] = (block, "body")
        return block.body, 0

    def insert_before(self, stmt: A.Node, new: list) -> None:
        if not new:
            return
        if id(stmt) not in self.parent:        # the program itself
            stmt.body[0:0] = new
            owner = stmt
        else:
            container, i = self._statement_list(stmt)
            container[i:i] = new
            owner = self.parent[id(stmt)][0]
        for node in new:
            self.parent[id(node)] = (owner, "body")
        self.adopt_all(new)

    def replace_statement(self, stmt: A.Node, new: list) -> None:
        container, i = self._statement_list(stmt)
        container[i:i + 1] = new
        owner = self.parent[id(stmt)][0]
        for node in new:
            self.parent[id(node)] = (owner, "body")
        self.adopt_all(new)

    def replace_expression(self, old: A.Node, new: A.Node) -> None:
        parent, slot = self.parent[id(old)]
        value = getattr(parent, slot)
        if isinstance(value, list):
            value[next(i for i, x in enumerate(value) if x is old)] = new
        else:
            setattr(parent, slot, new)
        self.parent[id(new)] = (parent, slot)
        self.adopt_all([new])


# -- fragment copies ------------------------------------------------------------------

class _Renamer:
    """Suffixes fragment-local names so every inlined copy is disjoint."""

    def __init__(self, reserved: set):
        self.reserved = reserved
        self.counter = 0

    def mapping(self, fragment: JsFragment) -> dict[str, str]:
        local = set(fragment.declared) | set(fragment.params)
        while True:
            n = self.counter
            self.counter += 1
            mapping = {name: f"{name}_{n}" for name in local}
            if not any(v in self.reserved for v in mapping.values()):
                self.reserved.update(mapping.values())
                return mapping


def rename(node, mapping: dict[str, str]):
    """Clone of ``node`` with identifiers and labels renamed."""
    copy = A.clone(node)
    for item in A.walk(copy):
        if isinstance(item, A.Identifier) and item.name in mapping:
            item.name = mapping[item.name]
        elif isinstance(item, (A.LabeledStatement, A.BreakStatement, A.ContinueStatement)):
            if item.label in mapping:
                item.label = mapping[item.label]
    return copy


def _parsed(text: str) -> list:
    return js.parse_js(text).body if text else []


# -- integration ----------------------------------------------------------------------

def integrate(pdg: Pdg, interops: InteropMap, code_fragments: dict, data_fragments: dict, mode: str,
              reserved: set | None = None) -> Ipdg:
    """Build the spliced program for one mode.

    ``code_fragments`` maps instantiation-site index to :class:`ModuleAbstraction`,
    ``data_fragments`` maps it to the data :class:`JsFragment`.
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    tree = _Tree(pdg.ast)
    ipdg = Ipdg(tree.root, mode)
    renamer = _Renamer(set(reserved if reserved is not None else pdg.symbols))
    roots: dict[int, list[int]] = {}

    if mode in ("code", "all"):
        for inv in interops.export_invocations:
            code = code_fragments.get(inv.site.index)
            if code is None:
                ipdg.failures.append((inv.export_name, "no abstraction for site"))
                continue
            func_idx = code.module.exported_func(inv.export_name)
            if func_idx is None:
                ipdg.failures.append((inv.export_name, "export not found"))
                continue
            if func_idx < code.module.num_imported_funcs:
                ipdg.failures.append((inv.export_name, "re-exported import"))
                continue
            fragment = code.function(func_idx)
            if fragment.failed:
                ipdg.failures.append((inv.export_name, fragment.error))
                continue
            call = tree.copy_of(inv.node)
            if call is None or id(call) not in tree.parent:
                continue
            _replace_invocation(tree, call, fragment, renamer)
            ipdg.splices.append(Splice(call, "invocation-replacement", fragment))
            roots.setdefault(inv.site.index, []).append(func_idx)
            ipdg.helpers |= fragment.helpers_used

    for site in interops.instantiation_sites:
        insert: list = []
        if mode in ("data", "all") and site.index in data_fragments:
            insert += A.clone(data_fragments[site.index].statements)
        if mode in ("code", "all") and site.index in roots:
            code = code_fragments[site.index]
            state, helpers = code.state_statements(sorted(set(roots[site.index])))
            insert += _import_declarations(code, site) + state
            ipdg.helpers |= helpers
        if not insert:
            continue
        node = tree.copy_of(site.node)
        if node is None:
            continue
        anchor = tree.anchor(node)
        tree.insert_before(anchor, insert)
        ipdg.splices.append(Splice(anchor, "instantiation-insertion", site.index))

    if ipdg.helpers:
        aliases = next(iter(code_fragments.values())).names.aliases if code_fragments else {}
        tree.insert_before(tree.root, _parsed(prelude(ipdg.helpers, aliases)))
        ipdg.splices.append(Splice(tree.root, "helper-prelude", sorted(ipdg.helpers)))
    return ipdg


def _import_declarations(code: ModuleAbstraction, site) -> list:
    """``var IMPORT_k = <expr>;`` for imports bound to something other than a callee path."""
    out = []
    imports = code.module.func_imports
    for idx, name in sorted(code.import_names.items()):
        imp = imports[idx]
        binding = site.bindings.get((imp.module, imp.field))
        if binding is not None:
            out.append(A.VariableDeclaration("var", [A.VariableDeclarator(
                A.Identifier(name), A.clone(binding.node))]))
    return out


def _replace_invocation(tree: _Tree, call: A.CallExpression, fragment: JsFragment, renamer: _Renamer) -> None:
    mapping = renamer.mapping(fragment)
    bind = []
    for i, param in enumerate(fragment.params):
        arg = call.arguments[i] if i < len(call.arguments) else A.Literal(0)
        kind = "let" if param in fragment.assigned_params else "const"
        bind.append(A.VariableDeclaration(kind, [A.VariableDeclarator(A.Identifier(mapping[param]), arg)]))
    body = bind + [rename(stmt, mapping) for stmt in fragment.statements]
    result = rename(fragment.result_expr, mapping) if fragment.result_expr is not None else A.Identifier("undefined")
    entry = tree.parent.get(id(call))
    parent, slot = entry
    if isinstance(parent, A.ExpressionStatement) and slot == "expression":
        tree.replace_statement(parent, body)
    else:
        anchor = tree.anchor(call)
        tree.insert_before(anchor, body)
        tree.replace_expression(call, result)


def reconstruct(ipdg: Ipdg) -> str:
    """Print the spliced program."""
    return js.print_js(ipdg.ast)


def reconstruct_modes(pdg: Pdg, interops: InteropMap, modules: dict, modes=MODES) -> dict:
    """``{mode: (text, Ipdg)}`` for each requested mode, sharing one set of abstractions."""
    names = NameGenerator(pdg.symbols)
    units = prepare_units(pdg, interops, modules, names)
    code = {i: u.code for i, u in units.items()}
    data = {i: u.data for i, u in units.items()}
    out = {}
    for mode in modes:
        ipdg = integrate(pdg, interops, code, data, mode, reserved=names.reserved | pdg.symbols)
        out[mode] = (reconstruct(ipdg), ipdg)
    return out
