"""Syntax tree for the supported JavaScript subset.

Nodes follow the ESTree vocabulary where it exists. Each node class lists its
attributes in ``_fields``; attributes holding a ``Node`` or a list of nodes are
children. ``start``/``end`` are byte offsets into the UTF-8 source (``-1`` for
synthesized nodes) and ``meta`` is a free-form dict that never takes part in
structural comparison.
"""

from __future__ import annotations

import math
from typing import Any, Iterator


class Node:
    _fields: tuple[str, ...] = ()
    __slots__ = ("start", "end", "meta", "__dict__")

    def __init__(self, *args: Any, start: int = -1, end: int = -1, meta: dict | None = None, **kwargs: Any):
        if len(args) > len(self._fields):
            raise TypeError(f"{type(self).__name__} takes at most {len(self._fields)} fields")
        for name, value in zip(self._fields, args):
            setattr(self, name, value)
        for name in self._fields[len(args):]:
            setattr(self, name, kwargs.pop(name, None))
        if kwargs:
            raise TypeError(f"unknown fields for {type(self).__name__}: {sorted(kwargs)}")
        self.start = start
        self.end = end
        self.meta = meta

    @property
    def type(self) -> str:
        return type(self).__name__

    def __repr__(self) -> str:
        parts = ", ".join(f"{f}={getattr(self, f)!r}" for f in self._fields)
        return f"{self.type}({parts})"


# -- statements --------------------------------------------------------------

class Program(Node):
    _fields = ("body",)


class VariableDeclaration(Node):
    _fields = ("kind", "declarations")  # kind: var | let | const


class VariableDeclarator(Node):
    _fields = ("id", "init")


class AssignStatement(Node):
    """``target op value;`` where op is ``=`` or a compound assignment."""
    _fields = ("op", "target", "value")


class FunctionDeclaration(Node):
    _fields = ("id", "params", "body")


class IfStatement(Node):
    _fields = ("test", "consequent", "alternate")


class ForStatement(Node):
    _fields = ("init", "test", "update", "body")


class ForInStatement(Node):
    _fields = ("of", "left", "right", "body")  # of: False for for-in, True for for-of


class WhileStatement(Node):
    _fields = ("test", "body")


class DoWhileStatement(Node):
    _fields = ("body", "test")


class LabeledStatement(Node):
    _fields = ("label", "body")


class BreakStatement(Node):
    _fields = ("label",)


class ContinueStatement(Node):
    _fields = ("label",)


class ReturnStatement(Node):
    _fields = ("argument",)


class ThrowStatement(Node):
    _fields = ("argument",)


class TryStatement(Node):
    _fields = ("block", "param", "handler", "finalizer")


class SwitchStatement(Node):
    _fields = ("discriminant", "cases")


class SwitchCase(Node):
    _fields = ("test", "consequent")


class BlockStatement(Node):
    _fields = ("body",)


class ExpressionStatement(Node):
    _fields = ("expression",)


class EmptyStatement(Node):
    _fields = ()


# -- expressions -------------------------------------------------------------

class Identifier(Node):
    _fields = ("name",)


class Literal(Node):
    """Number, string, boolean or null (``value is None``)."""
    _fields = ("value",)


class TemplateString(Node):
    _fields = ("quasis", "expressions")  # quasis: list[str], len(expressions) + 1


class ArrayExpression(Node):
    _fields = ("elements",)  # None entries are holes


class ObjectExpression(Node):
    _fields = ("properties",)


class Property(Node):
    _fields = ("key", "value", "computed", "shorthand")


class FunctionExpression(Node):
    _fields = ("id", "params", "body")


class ArrowFunction(Node):
    _fields = ("params", "body", "expression")  # expression: body is an expression


class CallExpression(Node):
    _fields = ("callee", "arguments")


class NewExpression(Node):
    _fields = ("callee", "arguments")


class MemberExpression(Node):
    _fields = ("object", "property", "computed")


class BinaryExpression(Node):
    """Arithmetic, comparison and logical (``&&``, ``||``, ``??``) operators."""
    _fields = ("op", "left", "right")


class UnaryExpression(Node):
    _fields = ("op", "argument")


class UpdateExpression(Node):
    _fields = ("op", "prefix", "argument")


class ConditionalExpression(Node):
    _fields = ("test", "consequent", "alternate")


class AssignmentExpression(Node):
    _fields = ("op", "target", "value")


class SequenceExpression(Node):
    _fields = ("expressions",)


class ThisExpression(Node):
    _fields = ()


STATEMENT_TYPES = frozenset({
    "VariableDeclaration", "AssignStatement", "FunctionDeclaration", "IfStatement",
    "ForStatement", "ForInStatement", "WhileStatement", "DoWhileStatement",
    "LabeledStatement", "BreakStatement", "ContinueStatement", "ReturnStatement",
    "ThrowStatement", "TryStatement", "SwitchStatement", "BlockStatement",
    "ExpressionStatement", "EmptyStatement",
})

FUNCTION_TYPES = frozenset({"FunctionDeclaration", "FunctionExpression", "ArrowFunction"})


def is_statement(node: Node) -> bool:
    return node.type in STATEMENT_TYPES


def iter_child_nodes(node: Node) -> Iterator[Node]:
    for name in node._fields:
        value = getattr(node, name)
        if isinstance(value, Node):
            yield value
        elif isinstance(value, list):
            for item in value:
                if isinstance(item, Node):
                    yield item


def walk(node: Node) -> Iterator[Node]:
    """Pre-order traversal."""
    stack = [node]
    while stack:
        current = stack.pop()
        yield current
        children = list(iter_child_nodes(current))
        stack.extend(reversed(children))


def parent_map(root: Node) -> dict[int, Node]:
    """Map ``id(child)`` to its parent for every node under ``root``."""
    parents: dict[int, Node] = {}
    for node in walk(root):
        for child in iter_child_nodes(node):
            parents[id(child)] = node
    return parents


def _same_value(a: Any, b: Any) -> bool:
    if isinstance(a, bool) or isinstance(b, bool):
        return type(a) is type(b) and a == b
    if isinstance(a, (int, float)) and isinstance(b, (int, float)):
        if a != a and b != b:  # both NaN
            return True
        if a == 0 and b == 0:
            return math.copysign(1.0, a) == math.copysign(1.0, b)
        return a == b
    return type(a) is type(b) and a == b


def structurally_equal(a: Any, b: Any) -> bool:
    """Compare two trees ignoring spans and meta."""
    if isinstance(a, Node) or isinstance(b, Node):
        if not (isinstance(a, Node) and isinstance(b, Node)) or type(a) is not type(b):
            return False
        return all(structurally_equal(getattr(a, f), getattr(b, f)) for f in a._fields)
    if isinstance(a, list) or isinstance(b, list):
        if not (isinstance(a, list) and isinstance(b, list)) or len(a) != len(b):
            return False
        return all(structurally_equal(x, y) for x, y in zip(a, b))
    return _same_value(a, b)


def clone(node: Any, keep_spans: bool = False) -> Any:
    """Deep copy of a tree. ``meta`` dicts are shared (they are never mutated in place)."""
    if isinstance(node, list):
        return [clone(item, keep_spans) for item in node]
    if not isinstance(node, Node):
        return node
    copy = type(node).__new__(type(node))
    for name in node._fields:
        setattr(copy, name, clone(getattr(node, name), keep_spans))
    copy.start = node.start if keep_spans else -1
    copy.end = node.end if keep_spans else -1
    copy.meta = node.meta
    return copy


def dump(node: Any) -> Any:
    """Plain-data view of a tree (spans and meta dropped); handy for debugging and tests."""
    if isinstance(node, list):
        return [dump(item) for item in node]
    if isinstance(node, Node):
        return {"type": node.type, **{f: dump(getattr(node, f)) for f in node._fields}}
    return node
