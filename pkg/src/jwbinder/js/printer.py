"""Deterministic code generation from :mod:`jwbinder.js.ast` trees.

Two-space indentation, one statement per line, semicolons everywhere and
double-quoted strings. Parentheses are inserted from operator precedence so
that printing and re-parsing yields a structurally equal tree.
"""

from __future__ import annotations

import math

from . import ast as js

INDENT = "  "

_PREC_SEQUENCE = 0
_PREC_ASSIGN = 1
_PREC_CONDITIONAL = 2
_PREC_UNARY = 15
_PREC_UPDATE = 16
_PREC_NEW_NOARGS = 17
_PREC_CALL = 18
_PREC_PRIMARY = 19

BINARY_PRECEDENCE = {
    "??": 3, "||": 4, "&&": 5, "|": 6, "^": 7, "&": 8,
    "==": 9, "!=": 9, "===": 9, "!==": 9,
    "<": 10, ">": 10, "<=": 10, ">=": 10, "instanceof": 10, "in": 10,
    "<<": 11, ">>": 11, ">>>": 11,
    "+": 12, "-": 12,
    "*": 13, "/": 13, "%": 13,
    "**": 14,
}

_STRING_ESCAPES = {
    "\\": "\\\\", '"': '\\"', "\n": "\\n", "\r": "\\r", "\t": "\\t",
    "\b": "\\b", "\f": "\\f", "\v": "\\v", "\u2028": "\\u2028", "\u2029": "\\u2029",
}


def quote_string(value: str) -> str:
    out = ['"']
    for ch in value:
        esc = _STRING_ESCAPES.get(ch)
        if esc is not None:
            out.append(esc)
        elif ord(ch) < 0x20 or ord(ch) == 0x7F:
            out.append(f"\\x{ord(ch):02x}")
        elif 0xD800 <= ord(ch) <= 0xDFFF:
            out.append(f"\\u{ord(ch):04x}")
        else:
            out.append(ch)
    out.append('"')
    return "".join(out)


def _template_text(value: str) -> str:
    out = []
    i = 0
    while i < len(value):
        ch = value[i]
        if ch in "`\\":
            out.append("\\" + ch)
        elif ch == "$" and value.startswith("${", i):
            out.append("\\$")
        elif ch == "\r":
            out.append("\\r")
        elif 0xD800 <= ord(ch) <= 0xDFFF:
            out.append(f"\\u{ord(ch):04x}")
        else:
            out.append(ch)
        i += 1
    return "".join(out)


def format_number(value: int | float) -> str:
    """Shortest round-trip decimal text for a non-negative number."""
    if isinstance(value, int):
        if abs(value) < 10 ** 21:
            return str(value)
        value = float(value)
    if math.isnan(value):
        return "NaN"
    if math.isinf(value):
        return "Infinity" if value > 0 else "-Infinity"
    if value.is_integer() and abs(value) < 1e21:
        text = str(int(value))
        return "-0" if value == 0 and math.copysign(1.0, value) < 0 else text
    text = repr(value)
    if "e" in text:
        mantissa, exp = text.split("e")
        sign = "-" if exp.startswith("-") else "+"
        text = f"{mantissa}e{sign}{int(exp.lstrip('+-'))}"
    return text


class Printer:
    def __init__(self) -> None:
        self.lines: list[str] = []
        self.depth = 0

    # -- statements ---------------------------------------------------------------

    def emit(self, text: str) -> None:
        self.lines.append(INDENT * self.depth + text)

    def program(self, node: js.Program) -> str:
        for stmt in node.body:
            self.statement(stmt)
        return "\n".join(self.lines) + ("\n" if self.lines else "")

    def block_body(self, statements: list[js.Node]) -> None:
        self.depth += 1
        for stmt in statements:
            self.statement(stmt)
        self.depth -= 1

    def _open_block(self, head: str, block: js.BlockStatement) -> None:
        if not block.body:
            self.emit(head + "{}")
            return
        self.emit(head + "{")
        self.block_body(block.body)
        self.emit("}")

    def substatement(self, head: str, body: js.Node) -> None:
        """Print ``head`` followed by a statement body; non-block bodies are indented."""
        if isinstance(body, js.BlockStatement):
            self._open_block(head + " ", body)
        elif isinstance(body, js.EmptyStatement):
            self.emit(head + ";")
        else:
            self.emit(head)
            self.depth += 1
            self.statement(body)
            self.depth -= 1

    def _expression_statement_text(self, text: str) -> str:
        if text.startswith(("{", "function", "let [")):
            return f"({text})"
        return text

    def statement(self, node: js.Node) -> None:
        kind = type(node)
        if kind is js.ExpressionStatement:
            text = self._expression_statement_text(self.expr(node.expression, _PREC_SEQUENCE))
            self.emit(text + ";")
        elif kind is js.AssignStatement:
            text = f"{self.expr(node.target, _PREC_NEW_NOARGS)} {node.op} {self.expr(node.value, _PREC_ASSIGN)}"
            self.emit(self._expression_statement_text(text) + ";")
        elif kind is js.VariableDeclaration:
            self.emit(self.declaration(node) + ";")
        elif kind is js.FunctionDeclaration:
            self.function_like("function " + node.id.name, node.params, node.body)
        elif kind is js.BlockStatement:
            self._open_block("", node)
        elif kind is js.IfStatement:
            self.if_statement(node)
        elif kind is js.ForStatement:
            init = ""
            if node.init is not None:
                if isinstance(node.init, js.VariableDeclaration):
                    init = self.declaration(node.init, no_in=True)
                else:
                    init = self.expr(node.init, _PREC_SEQUENCE, no_in=True)
            test = "" if node.test is None else " " + self.expr(node.test, _PREC_SEQUENCE)
            update = "" if node.update is None else " " + self.expr(node.update, _PREC_SEQUENCE)
            self.substatement(f"for ({init};{test};{update})", node.body)
        elif kind is js.ForInStatement:
            if isinstance(node.left, js.VariableDeclaration):
                left = self.declaration(node.left, no_in=True)
            else:
                left = self.expr(node.left, _PREC_NEW_NOARGS)
            keyword = "of" if node.of else "in"
            right = self.expr(node.right, _PREC_ASSIGN if node.of else _PREC_SEQUENCE)
            self.substatement(f"for ({left} {keyword} {right})", node.body)
        elif kind is js.WhileStatement:
            self.substatement(f"while ({self.expr(node.test, _PREC_SEQUENCE)})", node.body)
        elif kind is js.DoWhileStatement:
            test = self.expr(node.test, _PREC_SEQUENCE)
            if isinstance(node.body, js.BlockStatement):
                self.emit("do {")
                self.block_body(node.body.body)
                self.emit(f"}} while ({test});")
            else:
                self.emit("do")
                self.depth += 1
                self.statement(node.body)
                self.depth -= 1
                self.emit(f"while ({test});")
        elif kind is js.LabeledStatement:
            body = node.body
            if isinstance(body, (js.ForStatement, js.WhileStatement, js.ForInStatement, js.DoWhileStatement,
                                 js.IfStatement, js.BlockStatement, js.SwitchStatement, js.TryStatement)):
                # label shares the line with the statement it names
                mark = len(self.lines)
                self.statement(body)
                self.lines[mark] = INDENT * self.depth + f"{node.label}: " + self.lines[mark].lstrip(" ")
            else:
                self.emit(f"{node.label}:")
                self.depth += 1
                self.statement(body)
                self.depth -= 1
        elif kind is js.BreakStatement:
            self.emit("break;" if node.label is None else f"break {node.label};")
        elif kind is js.ContinueStatement:
            self.emit("continue;" if node.label is None else f"continue {node.label};")
        elif kind is js.ReturnStatement:
            self.emit("return;" if node.argument is None else f"return {self.expr(node.argument, _PREC_SEQUENCE)};")
        elif kind is js.ThrowStatement:
            self.emit(f"throw {self.expr(node.argument, _PREC_SEQUENCE)};")
        elif kind is js.TryStatement:
            self._open_block("try ", node.block)
            if node.handler is not None:
                head = "catch " if node.param is None else f"catch ({node.param.name}) "
                self._attach_block(head, node.handler)
            if node.finalizer is not None:
                self._attach_block("finally ", node.finalizer)
        elif kind is js.SwitchStatement:
            self.emit(f"switch ({self.expr(node.discriminant, _PREC_SEQUENCE)}) {{")
            self.depth += 1
            for case in node.cases:
                if case.test is None:
                    self.emit("default:")
                else:
                    self.emit(f"case {self.expr(case.test, _PREC_SEQUENCE)}:")
                self.block_body(case.consequent)
            self.depth -= 1
            self.emit("}")
        elif kind is js.EmptyStatement:
            self.emit(";")
        else:
            raise TypeError(f"cannot print statement {node.type}")

    def _attach_block(self, head: str, block: js.BlockStatement) -> None:
        """Continue the previous line's closing brace: ``} else {`` style."""
        last = self.lines.pop()
        closing = last.rstrip()
        prefix = closing[:-1] if closing.endswith("}") else closing
        if not block.body:
            self.lines.append(prefix + "} " + head + "{}")
            return
        if closing.endswith("{}"):
            prefix = closing[:-2]
            self.lines.append(prefix + "{} " + head + "{")
        else:
            self.lines.append(prefix + "} " + head + "{")
        self.block_body(block.body)
        self.emit("}")

    def if_statement(self, node: js.IfStatement) -> None:
        head = f"if ({self.expr(node.test, _PREC_SEQUENCE)})"
        consequent, alternate = node.consequent, node.alternate
        if alternate is None:
            self.substatement(head, consequent)
            return
        if not isinstance(consequent, js.BlockStatement):
            self.substatement(head, consequent)
            self._else_line(alternate)
            return
        self._open_block(head + " ", consequent)
        if isinstance(alternate, js.IfStatement):
            last = self.lines.pop()
            mark = len(self.lines)
            self.if_statement(alternate)
            self.lines[mark] = last.rstrip() + " else " + self.lines[mark].lstrip(" ")
        elif isinstance(alternate, js.BlockStatement):
            self._attach_block("else ", alternate)
        elif isinstance(alternate, js.EmptyStatement):
            self.lines[-1] += " else;"
        else:
            self.lines[-1] += " else"
            self.depth += 1
            self.statement(alternate)
            self.depth -= 1

    def _else_line(self, alternate: js.Node) -> None:
        if isinstance(alternate, js.IfStatement):
            mark = len(self.lines)
            self.if_statement(alternate)
            self.lines[mark] = INDENT * self.depth + "else " + self.lines[mark].lstrip(" ")
        else:
            self.substatement("else", alternate)

    def declaration(self, node: js.VariableDeclaration, no_in: bool = False) -> str:
        parts = []
        for decl in node.declarations:
            if decl.init is None:
                parts.append(decl.id.name)
            else:
                parts.append(f"{decl.id.name} = {self.expr(decl.init, _PREC_ASSIGN, no_in=no_in)}")
        return f"{node.kind} " + ", ".join(parts)

    def function_like(self, head: str, params: list[js.Identifier], body: js.BlockStatement) -> None:
        self._open_block(f"{head}({_param_list(params)}) ", body)

    # -- expressions --------------------------------------------------------------

    def nested(self, head: str, body: js.BlockStatement) -> str:
        """Render ``head { body }`` inline inside an expression."""
        if not body.body:
            return head + "{}"
        inner = Printer()
        inner.depth = self.depth + 1
        for stmt in body.body:
            inner.statement(stmt)
        return head + "{\n" + "\n".join(inner.lines) + "\n" + INDENT * self.depth + "}"

    def expr(self, node: js.Node, min_prec: int, no_in: bool = False) -> str:
        text, prec = self._expr(node, no_in)
        if prec < min_prec or (no_in and isinstance(node, js.BinaryExpression) and node.op == "in"):
            return f"({self._expr(node, False)[0]})"
        return text

    def _expr(self, node: js.Node, no_in: bool) -> tuple[str, int]:
        kind = type(node)
        if kind is js.Identifier:
            return node.name, _PREC_PRIMARY
        if kind is js.Literal:
            value = node.value
            if value is None:
                return "null", _PREC_PRIMARY
            if value is True:
                return "true", _PREC_PRIMARY
            if value is False:
                return "false", _PREC_PRIMARY
            if isinstance(value, str):
                return quote_string(value), _PREC_PRIMARY
            text = format_number(value)
            return text, (_PREC_UNARY if text.startswith("-") else _PREC_PRIMARY)
        if kind is js.MemberExpression:
            obj = node.object
            obj_text = self.expr(obj, _PREC_CALL, no_in)
            if isinstance(obj, js.Literal) and isinstance(obj.value, (int, float)) and not isinstance(obj.value, bool) \
                    and not obj_text.startswith("("):
                obj_text = f"({obj_text})"
            if node.computed:
                return f"{obj_text}[{self.expr(node.property, _PREC_SEQUENCE)}]", _PREC_CALL
            return f"{obj_text}.{node.property.name}", _PREC_CALL
        if kind is js.CallExpression:
            callee = self.expr(node.callee, _PREC_CALL, no_in)
            return f"{callee}({self.arguments(node.arguments)})", _PREC_CALL
        if kind is js.NewExpression:
            callee_text = self.expr(node.callee, _PREC_NEW_NOARGS)
            if _contains_call(node.callee) and not callee_text.startswith("("):
                callee_text = f"({callee_text})"
            return f"new {callee_text}({self.arguments(node.arguments)})", _PREC_CALL
        if kind is js.BinaryExpression:
            op = node.op
            prec = BINARY_PRECEDENCE[op]
            if op == "**":
                left = self.expr(node.left, _PREC_UPDATE, no_in)
                right = self.expr(node.right, prec, no_in)
            else:
                left = self.expr(node.left, prec, no_in)
                right = self.expr(node.right, prec + 1, no_in)
                if op == "??" or op in ("||", "&&"):
                    left = self._mixed_coalesce(node.left, left, op)
                    right = self._mixed_coalesce(node.right, right, op)
            return f"{left} {op} {right}", prec
        if kind is js.UnaryExpression:
            arg = self.expr(node.argument, _PREC_UNARY)
            if node.op in ("typeof", "void", "delete"):
                return f"{node.op} {arg}", _PREC_UNARY
            if node.op in "+-" and arg.startswith(node.op):
                return f"{node.op} {arg}", _PREC_UNARY
            return f"{node.op}{arg}", _PREC_UNARY
        if kind is js.UpdateExpression:
            if node.prefix:
                arg = self.expr(node.argument, _PREC_UNARY)
                return f"{node.op}{arg}", _PREC_UNARY
            return f"{self.expr(node.argument, _PREC_NEW_NOARGS)}{node.op}", _PREC_UPDATE
        if kind is js.ConditionalExpression:
            test = self.expr(node.test, _PREC_CONDITIONAL + 1, no_in)
            cons = self.expr(node.consequent, _PREC_ASSIGN)
            alt = self.expr(node.alternate, _PREC_ASSIGN, no_in)
            return f"{test} ? {cons} : {alt}", _PREC_CONDITIONAL
        if kind is js.AssignmentExpression:
            target = self.expr(node.target, _PREC_NEW_NOARGS)
            return f"{target} {node.op} {self.expr(node.value, _PREC_ASSIGN, no_in)}", _PREC_ASSIGN
        if kind is js.SequenceExpression:
            return ", ".join(self.expr(e, _PREC_ASSIGN, no_in) for e in node.expressions), _PREC_SEQUENCE
        if kind is js.ArrayExpression:
            parts = ["" if e is None else self.expr(e, _PREC_ASSIGN) for e in node.elements]
            if node.elements and node.elements[-1] is None:
                parts.append("")
            return f"[{', '.join(parts)}]", _PREC_PRIMARY
        if kind is js.ObjectExpression:
            return self.object(node), _PREC_PRIMARY
        if kind is js.FunctionExpression:
            name = "function " + node.id.name if node.id is not None else "function "
            return self.nested(f"{name}({_param_list(node.params)}) ", node.body), _PREC_PRIMARY
        if kind is js.ArrowFunction:
            params = node.params
            head = params[0].name if len(params) == 1 else f"({', '.join(p.name for p in params)})"
            if node.expression:
                body = self.expr(node.body, _PREC_ASSIGN)
                if body.startswith("{"):
                    body = f"({body})"
                return f"{head} => {body}", _PREC_ASSIGN
            return self.nested(f"{head} => ", node.body), _PREC_ASSIGN
        if kind is js.TemplateString:
            out = ["`", _template_text(node.quasis[0])]
            for expr, quasi in zip(node.expressions, node.quasis[1:]):
                out.append("${" + self.expr(expr, _PREC_SEQUENCE) + "}")
                out.append(_template_text(quasi))
            out.append("`")
            return "".join(out), _PREC_PRIMARY
        if kind is js.ThisExpression:
            return "this", _PREC_PRIMARY
        raise TypeError(f"cannot print expression {node.type}")

    def _mixed_coalesce(self, child: js.Node, text: str, op: str) -> str:
        if not isinstance(child, js.BinaryExpression) or text.startswith("("):
            return text
        if (op == "??") != (child.op == "??") and child.op in ("??", "||", "&&"):
            return f"({text})"
        return text

    def arguments(self, args: list[js.Node]) -> str:
        return ", ".join(self.expr(a, _PREC_ASSIGN) for a in args)

    def object(self, node: js.ObjectExpression) -> str:
        if not node.properties:
            return "{}"
        inner = Printer()
        inner.depth = self.depth + 1
        entries = []
        for prop in node.properties:
            if prop.shorthand:
                entries.append(prop.key.name)
                continue
            if prop.computed:
                key = f"[{inner.expr(prop.key, _PREC_ASSIGN)}]"
            elif isinstance(prop.key, js.Identifier):
                key = prop.key.name
            elif isinstance(prop.key.value, str):
                key = quote_string(prop.key.value)
            else:
                key = format_number(prop.key.value)
            entries.append(f"{key}: {inner.expr(prop.value, _PREC_ASSIGN)}")
        pad = INDENT * (self.depth + 1)
        return "{\n" + ",\n".join(pad + e for e in entries) + "\n" + INDENT * self.depth + "}"


def _param_list(params: list[js.Identifier]) -> str:
    return ", ".join(p.name for p in params)


def _contains_call(node: js.Node) -> bool:
    while True:
        if isinstance(node, js.CallExpression):
            return True
        if isinstance(node, js.MemberExpression):
            node = node.object
        else:
            return False


def print_js(node: js.Node) -> str:
    """Render a Program (or a single statement) as source text."""
    printer = Printer()
    if isinstance(node, js.Program):
        return printer.program(node)
    if js.is_statement(node):
        printer.statement(node)
        return "\n".join(printer.lines) + "\n"
    return printer.expr(node, _PREC_SEQUENCE)
