"""Identification of JavaScript <-> WebAssembly interoperation on the PDG.

``find_interops`` locates modularization and instantiation calls, reads the
import object handed to each instantiation, and pushes abstract values
(module, instance, exports object, export function, promise of ...) forward
along value-flow edges to find the calls that invoke exported functions.

``recover_binary`` walks value-flow edges backward from a site's module
argument until it reaches a constant byte source it knows how to decode.
"""

from __future__ import annotations

import base64
import binascii
import logging
import os
import re
from collections import deque
from dataclasses import dataclass, field
from importlib import resources

from . import pdg as flow
from .js import ast as js
from .js.printer import print_js
from .pdg import Pdg

log = logging.getLogger(__name__)

WASM_MAGIC = b"\x00asm"
DEFAULT_MAX_DEPTH = 64

_GLOBAL_PREFIXES = ("window.", "self.", "globalThis.", "global.")
_FETCH_APIS = {"fetch", "fs.readFileSync", "readFileSync", "require.resolve"}


# -- key API table -------------------------------------------------------------

def load_key_apis(path: str | None = None) -> dict[str, str]:
    """Read the key-API table: ``path role`` per line, ``#`` starts a comment."""
    if path is None:
        text = resources.files("jwbinder").joinpath("key_apis.txt").read_text(encoding="utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    table: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) > 2:
            raise ValueError(f"key API table line {lineno}: expected 'path [role]'")
        table[parts[0]] = parts[1] if len(parts) == 2 else "runtime"
    return table


# -- result types ----------------------------------------------------------------

@dataclass(eq=False)
class Site:
    index: int
    node: js.Node                 # the call / new expression
    api: str                      # key API path, e.g. "WebAssembly.instantiate"
    role: str                     # instantiate | modularize | runtime
    module_arg: js.Node | None = None
    import_arg: js.Node | None = None
    bindings: dict = field(default_factory=dict)   # (module, field) -> ImportBinding

    @property
    def line(self) -> int:
        return self.node.start

    def __repr__(self) -> str:
        return f"Site({self.index}, {self.api})"


@dataclass(eq=False)
class ImportBinding:
    module: str
    field: str
    node: js.Node                 # the JS expression supplied in the import object
    path: str | None              # callee path after unwrapping forwarding wrappers, e.g. "document.write"

    @property
    def callee_text(self) -> str | None:
        return self.path


@dataclass(eq=False)
class Invocation:
    node: js.CallExpression
    export_name: str
    site: Site


@dataclass(eq=False)
class BinaryOrigin:
    kind: str                     # inline-typed-array | base64-string | hex-string | asset-file | unresolved
    bytes: bytes | None = None
    provenance: list = field(default_factory=list)
    reason: str | None = None     # for unresolved: network-only | dynamic-construction | depth-exceeded
    detail: str | None = None

    @property
    def resolved(self) -> bool:
        return self.kind != "unresolved"


@dataclass
class InteropMap:
    instantiation_sites: list[Site] = field(default_factory=list)
    modularization_sites: list[Site] = field(default_factory=list)
    runtime_sites: list[Site] = field(default_factory=list)
    import_bindings: dict = field(default_factory=dict)       # (module, field) -> ImportBinding
    export_invocations: list[Invocation] = field(default_factory=list)
    binaries: dict = field(default_factory=dict)              # site index -> BinaryOrigin
    module_of: dict = field(default_factory=dict)             # instantiation index -> modularization site
    marked: list = field(default_factory=list)                # interoperation positions
    abstract_values: dict = field(default_factory=dict, repr=False)  # node -> set of abstract values

    @property
    def empty(self) -> bool:
        return not (self.instantiation_sites or self.modularization_sites or self.export_invocations)

    def summary(self) -> dict:
        """Span-independent description, used to compare analyses of reformatted sources."""
        return {
            "instantiation": [s.api for s in self.instantiation_sites],
            "modularization": [s.api for s in self.modularization_sites],
            "runtime": [s.api for s in self.runtime_sites],
            "imports": {f"{m}.{f}": b.path for (m, f), b in sorted(self.import_bindings.items())},
            "invocations": [(inv.export_name, inv.site.index) for inv in self.export_invocations],
        }


# -- syntactic helpers ---------------------------------------------------------

def member_path(node: js.Node | None) -> str | None:
    """Dotted path of an identifier / static member chain, or None."""
    parts: list[str] = []
    while isinstance(node, js.MemberExpression):
        prop = node.property
        if not node.computed:
            parts.append(prop.name)
        elif isinstance(prop, js.Literal) and isinstance(prop.value, str):
            parts.append(prop.value)
        else:
            return None
        node = node.object
    if isinstance(node, js.Identifier):
        parts.append(node.name)
    elif isinstance(node, js.ThisExpression):
        parts.append("this")
    else:
        return None
    return ".".join(reversed(parts))


def _strip_global(path: str) -> str:
    changed = True
    while changed:
        changed = False
        for prefix in _GLOBAL_PREFIXES:
            if path.startswith(prefix):
                path = path[len(prefix):]
                changed = True
    return path


def _property_name(prop: js.Property) -> str | None:
    key = prop.key
    if isinstance(key, js.Identifier) and not prop.computed:
        return key.name
    if isinstance(key, js.Literal) and isinstance(key.value, (str, int, float)) and not isinstance(key.value, bool):
        return str(key.value)
    return None


def _member_name(node: js.MemberExpression) -> str | None:
    if not node.computed:
        return node.property.name
    prop = node.property
    if isinstance(prop, js.Literal) and isinstance(prop.value, str):
        return prop.value
    return None


class _Analysis:
    def __init__(self, pdg: Pdg, key_apis: dict[str, str]):
        self.pdg = pdg
        self.key_apis = key_apis
        self.result = InteropMap()

    # -- value sources ------------------------------------------------------------

    def copy_sources(self, node: object, limit: int = 64) -> list[js.Node]:
        """Expressions whose value reaches ``node`` through copies only.

        Identifiers are looked through; an identifier bound to nothing (a global)
        is itself the source.
        """
        out: list[js.Node] = []
        seen = {id(node)}
        queue = deque([(node, None, 0)])
        while queue:
            current, via, depth = queue.popleft()
            preds = [p for p, k in self.pdg.predecessors(current) if k == flow.COPY]
            if not preds:
                if isinstance(current, js.Node) and not isinstance(current, js.Identifier):
                    out.append(current)
                elif isinstance(current, flow.Binding) and isinstance(via, js.Identifier):
                    out.append(via)
                continue
            if isinstance(current, js.Node) and not isinstance(current, js.Identifier) and current is not node:
                out.append(current)  # e.g. a conditional expression with copy-in branches
            if depth >= limit:
                continue
            for pred in preds:
                if id(pred) not in seen:
                    seen.add(id(pred))
                    queue.append((pred, current, depth + 1))
        return out

    def resolve_path(self, node: js.Node, depth: int = 0) -> str | None:
        """Callee path with local aliases (``var W = WebAssembly``) substituted."""
        path = member_path(node)
        if path is None:
            return None
        root = node
        while isinstance(root, js.MemberExpression):
            root = root.object
        if isinstance(root, js.Identifier) and depth < 8:
            binding = self.pdg.binding(root)
            if binding is not None and binding.kind != "implicit" and binding.kind != "param":
                sources = [s for s in self.copy_sources(root) if member_path(s) is not None]
                if len(sources) == 1:
                    alias = self.resolve_path(sources[0], depth + 1)
                    if alias is not None:
                        path = alias + path[len(root.name):]
        return _strip_global(path)

    # -- sites ----------------------------------------------------------------------

    def find_sites(self) -> None:
        for node in js.walk(self.pdg.ast):
            if isinstance(node, (js.CallExpression, js.NewExpression)):
                path = self.resolve_path(node.callee)
                if path is None or path not in self.key_apis:
                    continue
                role = self.key_apis[path]
                if role == "property":
                    continue
                args = node.arguments
                site = Site(0, node, path, role,
                            module_arg=args[0] if args else None,
                            import_arg=args[1] if len(args) > 1 and role == "instantiate" else None)
                bucket = {"instantiate": self.result.instantiation_sites,
                          "modularize": self.result.modularization_sites}.get(role, self.result.runtime_sites)
                site.index = len(bucket)
                bucket.append(site)
                self.result.marked.append(node)

    # -- import objects -------------------------------------------------------------

    def object_properties(self, node: js.Node | None) -> dict[str, js.Node]:
        """Properties of the object literal(s) an expression evaluates to (one level deep)."""
        props: dict[str, js.Node] = {}
        if node is None:
            return props
        candidates = [node] if isinstance(node, js.ObjectExpression) else self.copy_sources(node)
        for cand in candidates:
            if isinstance(cand, js.ObjectExpression):
                for prop in cand.properties:
                    name = _property_name(prop)
                    if name is not None:
                        props.setdefault(name, prop.value)
        # obj.p = v assignments after the literal
        if isinstance(node, js.Identifier):
            binding = self.pdg.binding(node)
            if binding is not None:
                for d in binding.defs:
                    for pred, kind in self.pdg.predecessors(d):
                        if kind == flow.MEMBER_WRITE and isinstance(pred, js.MemberExpression) and pred.object is d:
                            name = _member_name(pred)
                            values = [v for v, k in self.pdg.predecessors(pred) if k == flow.MEMBER_WRITE]
                            if name is not None and values:
                                props.setdefault(name, values[0])
        return props

    def _function_of(self, node: js.Node) -> js.Node | None:
        if isinstance(node, (js.FunctionExpression, js.ArrowFunction)):
            return node
        if isinstance(node, js.Identifier):
            binding = self.pdg.binding(node)
            if binding is not None:
                for decl in binding.decls:
                    parent = self.pdg.parent(decl)
                    if isinstance(parent, js.FunctionDeclaration):
                        return parent
                if len(binding.functions) == 1:
                    return binding.functions[0]
        return None

    def _forwarded_callee(self, fn: js.Node) -> str | None:
        """Callee path of a wrapper whose body is a single forwarding call."""
        if isinstance(fn, js.ArrowFunction) and fn.expression:
            call = fn.body
        else:
            body = fn.body.body
            if len(body) != 1:
                return None
            stmt = body[0]
            if isinstance(stmt, js.ExpressionStatement):
                call = stmt.expression
            elif isinstance(stmt, js.ReturnStatement):
                call = stmt.argument
            else:
                return None
        if isinstance(call, js.CallExpression):
            return self.resolve_path(call.callee)
        return None

    def binding_path(self, value: js.Node) -> str | None:
        fn = self._function_of(value)
        if fn is not None:
            forwarded = self._forwarded_callee(fn)
            if forwarded is not None:
                return forwarded
            if isinstance(value, js.Identifier):
                return value.name
            return None
        return self.resolve_path(value)

    def collect_imports(self) -> None:
        for site in self.result.instantiation_sites:
            for module_name, module_value in self.object_properties(site.import_arg).items():
                for field_name, value in self.object_properties(module_value).items():
                    binding = ImportBinding(module_name, field_name, value, self.binding_path(value))
                    site.bindings[(module_name, field_name)] = binding
                    self.result.import_bindings.setdefault((module_name, field_name), binding)

    # -- forward propagation of abstract values ---------------------------------------

    def propagate(self) -> dict:
        values: dict[int, set] = {}
        objects: dict[int, object] = {}
        queue: deque = deque()

        def add(node: object, value: tuple) -> None:
            key = id(node)
            bucket = values.setdefault(key, set())
            if value not in bucket:
                bucket.add(value)
                objects[key] = node
                queue.append((node, value))

        for site in self.result.modularization_sites:
            module = ("module", site.index)
            add(site.node, module if site.api == "WebAssembly.Module" else ("promise", module))
        for site in self.result.instantiation_sites:
            instance = ("instance", site.index)
            if site.api == "WebAssembly.Instance":
                add(site.node, instance)
            else:
                add(site.node, ("promise", ("result", site.index)))
                if site.api == "WebAssembly.instantiate":
                    add(site.node, ("promise", instance))

        invocations: dict[int, Invocation] = {}
        steps = 0
        while queue:
            steps += 1
            node, value = queue.popleft()
            for succ, kind in self.pdg.successors(node):
                if kind == flow.COPY:
                    add(succ, value)
                elif kind == flow.MEMBER:
                    name = _member_name(succ)
                    tag = value[0]
                    if tag == "instance" and name == "exports":
                        add(succ, ("exports", value[1]))
                        self.result.marked.append(succ)
                    elif tag == "result" and name == "instance":
                        add(succ, ("instance", value[1]))
                    elif tag == "exports" and name is not None:
                        add(succ, ("fn", value[1], name))
                elif kind == flow.CALLEE:
                    if value[0] == "fn" and isinstance(succ, js.CallExpression) and id(succ) not in invocations:
                        site = self.result.instantiation_sites[value[1]]
                        invocations[id(succ)] = Invocation(succ, value[2], site)
                elif kind == flow.THEN:
                    if value[0] == "promise":
                        add(succ, value[1])
                elif kind == flow.RESOLVE:
                    add(succ, value if value[0] == "promise" else ("promise", value))
        order = self.pdg.order
        self.result.export_invocations = sorted(invocations.values(), key=lambda inv: order(inv.node))
        self.result.marked.extend(inv.node for inv in self.result.export_invocations)
        log.debug("interop propagation: %d steps", steps)
        return {objects[k]: v for k, v in values.items()}


def find_interops(pdg: Pdg, key_apis: dict[str, str] | None = None) -> InteropMap:
    """Locate sites, import bindings and export invocations (binaries are recovered separately)."""
    analysis = _Analysis(pdg, key_apis or load_key_apis())
    analysis.find_sites()
    if not (analysis.result.instantiation_sites or analysis.result.modularization_sites):
        return analysis.result
    analysis.collect_imports()
    abstract = analysis.propagate()
    result = analysis.result
    # link instantiations fed by a compiled module to their modularization site
    for site in result.instantiation_sites:
        if site.module_arg is None:
            continue
        modules = set()
        for node in [site.module_arg, *pdg.flows_to(site.module_arg)]:
            for value in abstract.get(node, ()):
                if value[0] == "module":
                    modules.add(value[1])
                elif value[0] == "promise" and value[1][0] == "module":
                    modules.add(value[1][1])
            if modules:
                break
        if modules:
            result.module_of[site.index] = result.modularization_sites[min(modules)]
    result.abstract_values = abstract
    return result


# -- binary recovery -----------------------------------------------------------------

def _const_string(pdg: Pdg, node: js.Node | None, depth: int = 0) -> str | None:
    if node is None or depth > 32:
        return None
    if isinstance(node, js.Literal) and isinstance(node.value, str):
        return node.value
    if isinstance(node, js.BinaryExpression) and node.op == "+":
        left = _const_string(pdg, node.left, depth + 1)
        right = _const_string(pdg, node.right, depth + 1)
        if left is not None and right is not None:
            return left + right
        return None
    if isinstance(node, js.TemplateString):
        parts = [node.quasis[0]]
        for expr, quasi in zip(node.expressions, node.quasis[1:]):
            text = _const_string(pdg, expr, depth + 1)
            if text is None:
                return None
            parts.extend([text, quasi])
        return "".join(parts)
    if isinstance(node, js.Identifier):
        binding = pdg.binding(node)
        if binding is None or binding.kind == "implicit" or len(binding.defs) != 1:
            return None
        values = [p for p, k in pdg.predecessors(binding.defs[0]) if k == flow.COPY]
        return _const_string(pdg, values[0], depth + 1) if len(values) == 1 else None
    if isinstance(node, js.CallExpression) and isinstance(node.callee, js.MemberExpression):
        # ["ab", "cd"].join("")
        if _member_name(node.callee) == "join":
            array = node.callee.object
            if isinstance(array, js.Identifier):
                binding = pdg.binding(array)
                if binding is not None and len(binding.defs) == 1:
                    values = [p for p, k in pdg.predecessors(binding.defs[0]) if k == flow.COPY]
                    array = values[0] if len(values) == 1 else None
            if isinstance(array, js.ArrayExpression):
                pieces = [_const_string(pdg, e, depth + 1) for e in array.elements]
                sep = _const_string(pdg, node.arguments[0], depth + 1) if node.arguments else ","
                if sep is not None and all(p is not None for p in pieces):
                    return sep.join(pieces)
    return None


def _const_bytes(node: js.Node) -> bytes | None:
    if not isinstance(node, js.ArrayExpression) or not node.elements:
        return None
    out = bytearray()
    for e in node.elements:
        if not (isinstance(e, js.Literal) and isinstance(e.value, int) and not isinstance(e.value, bool)):
            return None
        out.append(e.value & 0xFF)
    return bytes(out)


_HEX_RE = re.compile(r"^(?:[0-9a-fA-F]{2})+$")
_B64_RE = re.compile(r"^[A-Za-z0-9+/\s]+={0,2}$")


def _decode_base64(text: str) -> bytes | None:
    if not _B64_RE.match(text):
        return None
    try:
        return base64.b64decode("".join(text.split()), validate=True)
    except (binascii.Error, ValueError):
        return None


def _decode_hex(text: str) -> bytes | None:
    cleaned = text.replace(" ", "").replace("\\x", "")
    if cleaned.lower().startswith("0x"):
        cleaned = cleaned[2:]
    if not _HEX_RE.match(cleaned):
        return None
    return bytes.fromhex(cleaned)


def _asset_lookup(assets_dir: str | None, url: str) -> bytes | None:
    if not assets_dir:
        return None
    name = os.path.basename(url.split("?", 1)[0].split("#", 1)[0])
    if not name:
        return None
    candidate = os.path.join(assets_dir, name)
    if os.path.isfile(candidate):
        with open(candidate, "rb") as fh:
            return fh.read()
    return None


def recover_binary(pdg: Pdg, site: Site, assets_dir: str | None = None,
                   interops: InteropMap | None = None, max_depth: int = DEFAULT_MAX_DEPTH) -> BinaryOrigin:
    """Trace a site's module argument back to constant bytes."""
    if interops is not None and site.role == "instantiate" and site.index in interops.module_of:
        mod_site = interops.module_of[site.index]
        origin = recover_binary(pdg, mod_site, assets_dir, interops, max_depth)
        return BinaryOrigin(origin.kind, origin.bytes, [site.node, *origin.provenance], origin.reason, origin.detail)
    if site.module_arg is None:
        return BinaryOrigin("unresolved", reason="dynamic-construction", detail="no module argument")
    analysis = _Analysis(pdg, {})
    start = site.module_arg
    parents: dict[int, object] = {id(start): None}
    objects: dict[int, object] = {id(start): start}
    queue = deque([(start, 0)])
    network_url: str | None = None
    hit_depth_cap = False

    def chain(node: object) -> list:
        out = []
        key: int | None = id(node)
        while key is not None:
            obj = objects[key]
            if isinstance(obj, js.Node):
                out.append(obj)
            parent = parents[key]
            key = id(parent) if parent is not None else None
        return [site.node, *reversed(out)]

    def origin(kind: str, data: bytes, node: object, detail: str | None = None) -> BinaryOrigin:
        return BinaryOrigin(kind, data, chain(node), detail=detail)

    while queue:
        node, depth = queue.popleft()
        if isinstance(node, js.Node):
            data = _const_bytes(node)
            if data is not None:
                return origin("inline-typed-array", data, node)
            if isinstance(node, js.CallExpression):
                path = analysis.resolve_path(node.callee)
                args = node.arguments
                if path == "atob" and args:
                    text = _const_string(pdg, args[0])
                    if text is not None:
                        data = _decode_base64(text)
                        if data is not None:
                            return origin("base64-string", data, node)
                if path in ("Buffer.from", "Buffer") and len(args) >= 2:
                    text = _const_string(pdg, args[0])
                    enc = _const_string(pdg, args[1])
                    if text is not None and enc in ("base64", "hex"):
                        data = _decode_base64(text) if enc == "base64" else _decode_hex(text)
                        if data is not None:
                            return origin(f"{enc}-string" if enc == "hex" else "base64-string", data, node)
                if path is not None and (path in _FETCH_APIS or path.endswith(".readFileSync")) and args:
                    url = _const_string(pdg, args[0])
                    if url is not None:
                        data = _asset_lookup(assets_dir, url)
                        if data is not None:
                            return origin("asset-file", data, node, detail=url)
                        network_url = network_url or url
                        continue
            if isinstance(node, js.Literal) and isinstance(node.value, str):
                data = _decode_hex(node.value)
                if data is not None and data.startswith(WASM_MAGIC):
                    return origin("hex-string", data, node)
                data = _decode_base64(node.value)
                if data is not None and data.startswith(WASM_MAGIC):
                    return origin("base64-string", data, node)
            if isinstance(node, (js.NewExpression, js.CallExpression)) and interops is not None:
                for mod_site in interops.modularization_sites:
                    if mod_site.node is node:
                        inner = recover_binary(pdg, mod_site, assets_dir, interops, max_depth - depth)
                        if inner.resolved:
                            return BinaryOrigin(inner.kind, inner.bytes, chain(node) + inner.provenance[1:],
                                                detail=inner.detail)
        if depth >= max_depth:
            hit_depth_cap = True
            continue
        for pred, _kind in pdg.predecessors(node):
            if id(pred) not in parents:
                parents[id(pred)] = node
                objects[id(pred)] = pred
                queue.append((pred, depth + 1))
    if network_url is not None:
        return BinaryOrigin("unresolved", reason="network-only", detail=network_url, provenance=[site.node])
    if hit_depth_cap:
        return BinaryOrigin("unresolved", reason="depth-exceeded", provenance=[site.node])
    return BinaryOrigin("unresolved", reason="dynamic-construction", provenance=[site.node])


def recover_all(pdg: Pdg, interops: InteropMap, assets_dir: str | None = None,
                max_depth: int = DEFAULT_MAX_DEPTH) -> dict[int, BinaryOrigin]:
    """Recover the binary behind every instantiation site (stored in ``interops.binaries``)."""
    for site in interops.instantiation_sites:
        interops.binaries[site.index] = recover_binary(pdg, site, assets_dir, interops, max_depth)
    return interops.binaries


def describe(node: js.Node) -> str:
    """Short human-readable rendering of an expression for reports."""
    text = print_js(node)
    return text if len(text) <= 80 else text[:77] + "..."
