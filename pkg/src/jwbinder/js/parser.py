"""Recursive-descent parser producing :mod:`jwbinder.js.ast` trees."""

from __future__ import annotations

from . import ast as js
from .lexer import JsSyntaxError, Lexer, Token

_BINARY_PRECEDENCE = {
    "??": 1, "||": 2, "&&": 3, "|": 4, "^": 5, "&": 6,
    "==": 7, "!=": 7, "===": 7, "!==": 7,
    "<": 8, ">": 8, "<=": 8, ">=": 8, "instanceof": 8, "in": 8,
    "<<": 9, ">>": 9, ">>>": 9,
    "+": 10, "-": 10,
    "*": 11, "/": 11, "%": 11,
    "**": 12,
}

ASSIGN_OPS = frozenset({"=", "+=", "-=", "*=", "/=", "%=", "**=", "<<=", ">>=", ">>>=",
                        "&=", "|=", "^=", "&&=", "||=", "??="})

_UNSUPPORTED_KEYWORDS = {
    "class": "classes", "import": "ES modules", "export": "ES modules",
    "yield": "generators", "super": "classes", "with": "with statements",
    "debugger": "debugger statements",
}

RESERVED = frozenset({
    "break", "case", "catch", "class", "const", "continue", "debugger", "default", "delete",
    "do", "else", "export", "extends", "finally", "for", "function", "if", "import", "in",
    "instanceof", "new", "return", "super", "switch", "this", "throw", "try", "typeof", "var",
    "void", "while", "with", "null", "true", "false", "let", "yield",
})


class Parser:
    def __init__(self, source: str):
        self.source = source
        self.lexer = Lexer(source)
        self._byte_offsets: list[int] | None = None
        if not source.isascii():
            offsets = [0] * (len(source) + 1)
            total = 0
            for i, ch in enumerate(source):
                offsets[i] = total
                total += len(ch.encode("utf-8", "surrogatepass"))
            offsets[len(source)] = total
            self._byte_offsets = offsets
        self.tok: Token = self.lexer.next_token()
        self.prev_end = 0
        self._function_depth = 0

    # -- token plumbing ---------------------------------------------------------

    def _b(self, offset: int) -> int:
        return offset if self._byte_offsets is None else self._byte_offsets[offset]

    def _finish(self, node: js.Node, start: int) -> js.Node:
        node.start = self._b(start)
        node.end = self._b(self.prev_end)
        return node

    def advance(self) -> Token:
        tok = self.tok
        self.prev_end = tok.end
        self.tok = self.lexer.next_token()
        return tok

    def error(self, message: str, tok: Token | None = None, expected: str | None = None) -> JsSyntaxError:
        tok = tok or self.tok
        return self.lexer.error(message, tok.start, expected)

    def at(self, value: str) -> bool:
        return self.tok.kind in ("punct", "name") and self.tok.value == value

    def eat(self, value: str) -> bool:
        if self.at(value):
            self.advance()
            return True
        return False

    def expect(self, value: str) -> Token:
        if not self.at(value):
            found = "end of input" if self.tok.kind == "eof" else repr(self.tok.value)
            raise self.error(f"unexpected {found}", expected=repr(value))
        return self.advance()

    def consume_semicolon(self) -> None:
        if self.eat(";"):
            return
        if self.at("}") or self.tok.kind == "eof" or self.tok.nl_before:
            return
        raise self.error(f"unexpected {self.tok.value!r}", expected="';'")

    def identifier_name(self) -> js.Identifier:
        """Any name token, reserved words included (property names, labels)."""
        if self.tok.kind != "name":
            raise self.error("unexpected token", expected="identifier")
        tok = self.advance()
        return self._finish(js.Identifier(tok.value), tok.start)

    def binding_identifier(self) -> js.Identifier:
        if self.tok.kind != "name" or self.tok.value in RESERVED:
            if self.tok.kind == "punct" and self.tok.value in ("{", "["):
                raise self.error("destructuring patterns are not supported")
            found = "end of input" if self.tok.kind == "eof" else repr(self.tok.value)
            raise self.error(f"unexpected {found}", expected="identifier")
        tok = self.advance()
        return self._finish(js.Identifier(tok.value), tok.start)

    def _reject_unsupported(self) -> None:
        if self.tok.kind == "name" and self.tok.value in _UNSUPPORTED_KEYWORDS:
            raise self.error(f"{_UNSUPPORTED_KEYWORDS[self.tok.value]} are not supported")

    # -- program & statements ---------------------------------------------------

    def parse_program(self) -> js.Program:
        body = []
        while self.tok.kind != "eof":
            body.append(self.parse_statement())
        program = js.Program(body)
        program.start = 0
        program.end = self._b(len(self.source))
        return program

    def parse_statement(self) -> js.Node:
        tok = self.tok
        start = tok.start
        self._reject_unsupported()
        if tok.kind == "punct":
            if tok.value == "{":
                return self.parse_block()
            if tok.value == ";":
                self.advance()
                return self._finish(js.EmptyStatement(), start)
        elif tok.kind == "name":
            word = tok.value
            if word in ("var", "let", "const"):
                decl = self.parse_variable_declaration()
                self.consume_semicolon()
                return self._finish(decl, start)
            if word == "function":
                return self.parse_function(declaration=True)
            if word == "async" and self._peek_is("function"):
                raise self.error("async functions are not supported")
            if word == "if":
                return self.parse_if()
            if word == "for":
                return self.parse_for()
            if word == "while":
                self.advance()
                self.expect("(")
                test = self.parse_expression()
                self.expect(")")
                body = self.parse_statement()
                return self._finish(js.WhileStatement(test, body), start)
            if word == "do":
                self.advance()
                body = self.parse_statement()
                self.expect("while")
                self.expect("(")
                test = self.parse_expression()
                self.expect(")")
                self.eat(";")
                return self._finish(js.DoWhileStatement(body, test), start)
            if word in ("break", "continue"):
                self.advance()
                label = None
                if self.tok.kind == "name" and not self.tok.nl_before and self.tok.value not in RESERVED:
                    label = self.identifier_name().name
                self.consume_semicolon()
                cls = js.BreakStatement if word == "break" else js.ContinueStatement
                return self._finish(cls(label), start)
            if word == "return":
                if self._function_depth == 0:
                    raise self.error("return outside of function")
                self.advance()
                argument = None
                if not (self.at(";") or self.at("}") or self.tok.kind == "eof" or self.tok.nl_before):
                    argument = self.parse_expression()
                self.consume_semicolon()
                return self._finish(js.ReturnStatement(argument), start)
            if word == "throw":
                self.advance()
                if self.tok.nl_before:
                    raise self.error("line break after throw")
                argument = self.parse_expression()
                self.consume_semicolon()
                return self._finish(js.ThrowStatement(argument), start)
            if word == "try":
                return self.parse_try()
            if word == "switch":
                return self.parse_switch()
            if word not in RESERVED and self._peek_is(":"):
                label = self.identifier_name().name
                self.expect(":")
                if self.at("function"):
                    raise self.error("labeled function declarations are not supported")
                body = self.parse_statement()
                return self._finish(js.LabeledStatement(label, body), start)
        expr = self.parse_expression()
        self.consume_semicolon()
        if isinstance(expr, js.AssignmentExpression):
            return self._finish(js.AssignStatement(expr.op, expr.target, expr.value), start)
        return self._finish(js.ExpressionStatement(expr), start)

    def _peek_is(self, value: str) -> bool:
        saved = self.lexer.pos
        try:
            nxt = self.lexer.next_token()
        except JsSyntaxError:
            return False
        finally:
            self.lexer.pos = saved
        return nxt.kind in ("punct", "name") and nxt.value == value

    def parse_block(self) -> js.BlockStatement:
        start = self.expect("{").start
        body = []
        while not self.at("}"):
            if self.tok.kind == "eof":
                raise self.error("unexpected end of input", expected="'}'")
            body.append(self.parse_statement())
        self.advance()
        return self._finish(js.BlockStatement(body), start)

    def parse_variable_declaration(self, no_in: bool = False) -> js.VariableDeclaration:
        start = self.tok.start
        kind = self.advance().value
        declarations = []
        while True:
            dstart = self.tok.start
            ident = self.binding_identifier()
            init = None
            if self.eat("="):
                init = self.parse_assignment(no_in)
            declarations.append(self._finish(js.VariableDeclarator(ident, init), dstart))
            if not self.eat(","):
                break
        return self._finish(js.VariableDeclaration(kind, declarations), start)

    def parse_if(self) -> js.IfStatement:
        start = self.advance().start
        self.expect("(")
        test = self.parse_expression()
        self.expect(")")
        consequent = self.parse_statement()
        alternate = None
        if self.eat("else"):
            alternate = self.parse_statement()
        return self._finish(js.IfStatement(test, consequent, alternate), start)

    def parse_for(self) -> js.Node:
        start = self.advance().start
        if self.at("await"):
            raise self.error("for-await is not supported")
        self.expect("(")
        init = None
        if self.at(";"):
            pass
        elif self.tok.kind == "name" and self.tok.value in ("var", "let", "const"):
            init = self.parse_variable_declaration(no_in=True)
            if self.at("in") or self.at("of"):
                if len(init.declarations) != 1 or init.declarations[0].init is not None:
                    raise self.error("invalid for-in/of left-hand side")
                return self._finish_for_in(start, init)
        else:
            init = self.parse_expression(no_in=True)
            if self.at("in") or self.at("of"):
                if not isinstance(init, (js.Identifier, js.MemberExpression)):
                    raise self.error("invalid for-in/of left-hand side")
                return self._finish_for_in(start, init)
        self.expect(";")
        test = None if self.at(";") else self.parse_expression()
        self.expect(";")
        update = None if self.at(")") else self.parse_expression()
        self.expect(")")
        body = self.parse_statement()
        return self._finish(js.ForStatement(init, test, update, body), start)

    def _finish_for_in(self, start: int, left: js.Node) -> js.ForInStatement:
        of = self.advance().value == "of"
        right = self.parse_assignment() if of else self.parse_expression()
        self.expect(")")
        body = self.parse_statement()
        return self._finish(js.ForInStatement(of, left, right, body), start)

    def parse_try(self) -> js.TryStatement:
        start = self.advance().start
        block = self.parse_block()
        param = handler = finalizer = None
        if self.eat("catch"):
            if self.eat("("):
                param = self.binding_identifier()
                self.expect(")")
            handler = self.parse_block()
        if self.eat("finally"):
            finalizer = self.parse_block()
        if handler is None and finalizer is None:
            raise self.error("missing catch or finally after try", expected="'catch'")
        return self._finish(js.TryStatement(block, param, handler, finalizer), start)

    def parse_switch(self) -> js.SwitchStatement:
        start = self.advance().start
        self.expect("(")
        discriminant = self.parse_expression()
        self.expect(")")
        self.expect("{")
        cases = []
        while not self.eat("}"):
            cstart = self.tok.start
            if self.eat("case"):
                test = self.parse_expression()
            elif self.eat("default"):
                test = None
            else:
                raise self.error("unexpected token in switch", expected="'case'")
            self.expect(":")
            consequent = []
            while not (self.at("case") or self.at("default") or self.at("}")):
                if self.tok.kind == "eof":
                    raise self.error("unexpected end of input", expected="'}'")
                consequent.append(self.parse_statement())
            cases.append(self._finish(js.SwitchCase(test, consequent), cstart))
        return self._finish(js.SwitchStatement(discriminant, cases), start)

    def parse_function(self, declaration: bool) -> js.Node:
        start = self.expect("function").start
        if self.at("*"):
            raise self.error("generators are not supported")
        ident = None
        if declaration or self.tok.kind == "name":
            ident = self.binding_identifier()
        params = self.parse_params()
        body = self.parse_function_body()
        cls = js.FunctionDeclaration if declaration else js.FunctionExpression
        return self._finish(cls(ident, params, body), start)

    def parse_params(self) -> list[js.Identifier]:
        self.expect("(")
        params = []
        while not self.at(")"):
            if self.at("..."):
                raise self.error("rest parameters are not supported")
            params.append(self.binding_identifier())
            if self.at("="):
                raise self.error("default parameters are not supported")
            if not self.eat(","):
                break
        self.expect(")")
        return params

    def parse_function_body(self) -> js.BlockStatement:
        self._function_depth += 1
        try:
            return self.parse_block()
        finally:
            self._function_depth -= 1

    # -- expressions -------------------------------------------------------------

    def parse_expression(self, no_in: bool = False) -> js.Node:
        start = self.tok.start
        expr = self.parse_assignment(no_in)
        if self.at(","):
            expressions = [expr]
            while self.eat(","):
                expressions.append(self.parse_assignment(no_in))
            return self._finish(js.SequenceExpression(expressions), start)
        return expr

    def parse_assignment(self, no_in: bool = False) -> js.Node:
        start = self.tok.start
        arrow = self._try_arrow()
        if arrow is not None:
            return arrow
        if self.at("async") and self._peek_is("("):
            saved = (self.lexer.pos, self.tok, self.prev_end)
            self.advance()
            if self._try_arrow() is not None:
                raise self.error("async functions are not supported")
            self.lexer.pos, self.tok, self.prev_end = saved
        left = self.parse_conditional(no_in)
        if self.tok.kind == "punct" and self.tok.value in ASSIGN_OPS:
            if not isinstance(left, (js.Identifier, js.MemberExpression)):
                if isinstance(left, (js.ObjectExpression, js.ArrayExpression)):
                    raise self.error("destructuring assignment is not supported")
                raise self.error("invalid assignment target")
            op = self.advance().value
            value = self.parse_assignment(no_in)
            return self._finish(js.AssignmentExpression(op, left, value), start)
        return left

    def _try_arrow(self) -> js.Node | None:
        tok = self.tok
        if tok.kind == "name" and tok.value not in RESERVED:
            if not self._peek_is("=>"):
                return None
            param = self.binding_identifier()
            params = [param]
        elif tok.kind == "punct" and tok.value == "(":
            saved = (self.lexer.pos, self.tok, self.prev_end)
            params = self._scan_arrow_params()
            if params is None:
                self.lexer.pos, self.tok, self.prev_end = saved
                return None
        else:
            return None
        if self.tok.nl_before:
            raise self.error("line break before '=>'")
        self.expect("=>")
        self._function_depth += 1
        try:
            if self.at("{"):
                body = self.parse_block()
                expression = False
            else:
                body = self.parse_assignment()
                expression = True
        finally:
            self._function_depth -= 1
        return self._finish(js.ArrowFunction(params, body, expression), tok.start)

    def _scan_arrow_params(self) -> list[js.Identifier] | None:
        """Speculatively read ``(a, b) =>``; None when the parenthesis is not an arrow head."""
        try:
            self.advance()
            params = []
            while not self.at(")"):
                if self.tok.kind != "name" or self.tok.value in RESERVED:
                    return None
                params.append(self.binding_identifier())
                if not self.eat(","):
                    break
            if not self.eat(")"):
                return None
            if not self.at("=>"):
                return None
            return params
        except JsSyntaxError:
            return None

    def parse_conditional(self, no_in: bool = False) -> js.Node:
        start = self.tok.start
        test = self.parse_binary(0, no_in)
        if not self.eat("?"):
            return test
        consequent = self.parse_assignment()
        self.expect(":")
        alternate = self.parse_assignment(no_in)
        return self._finish(js.ConditionalExpression(test, consequent, alternate), start)

    def _binary_op(self, no_in: bool) -> str | None:
        tok = self.tok
        if tok.kind == "punct" and tok.value in _BINARY_PRECEDENCE:
            return tok.value
        if tok.kind == "name" and tok.value in ("instanceof", "in"):
            if tok.value == "in" and no_in:
                return None
            return tok.value
        return None

    def parse_binary(self, min_prec: int, no_in: bool = False) -> js.Node:
        start = self.tok.start
        left = self.parse_unary()
        while True:
            op = self._binary_op(no_in)
            if op is None:
                return left
            prec = _BINARY_PRECEDENCE[op]
            if prec <= min_prec:
                return left
            if op == "**" and isinstance(left, js.UnaryExpression) and left.start == self._b(start):
                raise self.error("unparenthesized unary operand of '**'")
            self.advance()
            # ``**`` is right-associative
            right = self.parse_binary(prec - 1 if op == "**" else prec, no_in)
            left = self._finish(js.BinaryExpression(op, left, right), start)

    def parse_unary(self) -> js.Node:
        tok = self.tok
        start = tok.start
        if tok.kind == "punct" and tok.value in ("!", "~", "+", "-"):
            self.advance()
            argument = self.parse_unary()
            return self._finish(js.UnaryExpression(tok.value, argument), start)
        if tok.kind == "name" and tok.value in ("typeof", "void", "delete"):
            self.advance()
            argument = self.parse_unary()
            return self._finish(js.UnaryExpression(tok.value, argument), start)
        if tok.kind == "punct" and tok.value in ("++", "--"):
            self.advance()
            argument = self.parse_unary()
            if not isinstance(argument, (js.Identifier, js.MemberExpression)):
                raise self.error("invalid update target", tok)
            return self._finish(js.UpdateExpression(tok.value, True, argument), start)
        expr = self.parse_postfix()
        return expr

    def parse_postfix(self) -> js.Node:
        start = self.tok.start
        expr = self.parse_lhs()
        if self.tok.kind == "punct" and self.tok.value in ("++", "--") and not self.tok.nl_before:
            if not isinstance(expr, (js.Identifier, js.MemberExpression)):
                raise self.error("invalid update target")
            op = self.advance().value
            return self._finish(js.UpdateExpression(op, False, expr), start)
        return expr

    def parse_arguments(self) -> list[js.Node]:
        self.expect("(")
        args = []
        while not self.at(")"):
            if self.at("..."):
                raise self.error("spread arguments are not supported")
            args.append(self.parse_assignment())
            if not self.eat(","):
                break
        self.expect(")")
        return args

    def parse_lhs(self) -> js.Node:
        start = self.tok.start
        if self.at("new"):
            self.advance()
            if self.at("."):
                raise self.error("new.target is not supported")
            callee_start = self.tok.start
            callee = self._parse_member_chain(self.parse_lhs_new_callee(), callee_start, allow_call=False)
            args = self.parse_arguments() if self.at("(") else []
            expr = self._finish(js.NewExpression(callee, args), start)
        else:
            expr = self.parse_primary()
        return self._parse_member_chain(expr, start, allow_call=True)

    def parse_lhs_new_callee(self) -> js.Node:
        if self.at("new"):
            start = self.tok.start
            self.advance()
            callee_start = self.tok.start
            callee = self._parse_member_chain(self.parse_lhs_new_callee(), callee_start, allow_call=False)
            args = self.parse_arguments() if self.at("(") else []
            return self._finish(js.NewExpression(callee, args), start)
        return self.parse_primary()

    def _parse_member_chain(self, expr: js.Node, start: int, allow_call: bool) -> js.Node:
        while True:
            tok = self.tok
            if tok.kind == "punct" and tok.value == ".":
                self.advance()
                if self.tok.kind == "punct" and self.tok.value == "#":
                    raise self.error("private names are not supported")
                prop = self.identifier_name()
                expr = self._finish(js.MemberExpression(expr, prop, False), start)
            elif tok.kind == "punct" and tok.value == "?.":
                raise self.error("optional chaining is not supported")
            elif tok.kind == "punct" and tok.value == "[":
                self.advance()
                prop = self.parse_expression()
                self.expect("]")
                expr = self._finish(js.MemberExpression(expr, prop, True), start)
            elif allow_call and tok.kind == "punct" and tok.value == "(":
                args = self.parse_arguments()
                expr = self._finish(js.CallExpression(expr, args), start)
            elif tok.kind == "template":
                raise self.error("tagged templates are not supported")
            else:
                return expr

    def parse_primary(self) -> js.Node:
        tok = self.tok
        start = tok.start
        kind = tok.kind
        if kind == "name":
            word = tok.value
            self._reject_unsupported()
            if word == "function":
                return self.parse_function(declaration=False)
            if word == "this":
                self.advance()
                return self._finish(js.ThisExpression(), start)
            if word in ("true", "false"):
                self.advance()
                return self._finish(js.Literal(word == "true"), start)
            if word == "null":
                self.advance()
                return self._finish(js.Literal(None), start)
            if word in RESERVED:
                raise self.error(f"unexpected keyword {word!r}", expected="expression")
            self.advance()
            return self._finish(js.Identifier(word), start)
        if kind == "num" or kind == "str":
            self.advance()
            return self._finish(js.Literal(tok.value), start)
        if kind == "template":
            return self.parse_template()
        if kind == "punct":
            value = tok.value
            if value == "(":
                self.advance()
                expr = self.parse_expression()
                self.expect(")")
                return expr
            if value == "[":
                return self.parse_array()
            if value == "{":
                return self.parse_object()
            if value in ("/", "/="):
                raise self.error("regular expression literals are not supported")
        if kind == "eof":
            raise self.error("unexpected end of input", expected="expression")
        raise self.error(f"unexpected {tok.value!r}", expected="expression")

    def parse_template(self) -> js.TemplateString:
        start = self.tok.start
        quasis = [self.tok.value]
        expressions = []
        tail = self.tok.tail
        while not tail:
            # the lexer is positioned right after ``${``
            self.tok = self.lexer.next_token()
            expressions.append(self.parse_expression())
            if not self.at("}"):
                raise self.error("unterminated template substitution", expected="'}'")
            self.lexer.pos = self.tok.end
            chunk = self.lexer.template_chunk(self.tok.start)
            quasis.append(chunk.value)
            tail = chunk.tail
            self.tok = chunk
        self.advance()
        return self._finish(js.TemplateString(quasis, expressions), start)

    def parse_array(self) -> js.ArrayExpression:
        start = self.expect("[").start
        elements: list[js.Node | None] = []
        while not self.at("]"):
            if self.at(","):
                self.advance()
                elements.append(None)
                continue
            if self.at("..."):
                raise self.error("spread elements are not supported")
            elements.append(self.parse_assignment())
            if not self.at("]"):
                self.expect(",")
        self.advance()
        return self._finish(js.ArrayExpression(elements), start)

    def parse_object(self) -> js.ObjectExpression:
        start = self.expect("{").start
        properties = []
        while not self.at("}"):
            pstart = self.tok.start
            computed = False
            tok = self.tok
            if tok.kind == "punct" and tok.value == "[":
                self.advance()
                key = self.parse_assignment()
                self.expect("]")
                computed = True
            elif tok.kind == "name":
                if tok.value in ("get", "set", "async") and not (self._peek_is(":") or self._peek_is("(")
                                                                 or self._peek_is(",") or self._peek_is("}")):
                    raise self.error("accessor and async methods are not supported")
                key = self.identifier_name()
            elif tok.kind in ("str", "num"):
                self.advance()
                key = self._finish(js.Literal(tok.value), tok.start)
            elif tok.kind == "punct" and tok.value == "...":
                raise self.error("object spread is not supported")
            else:
                raise self.error(f"unexpected {tok.value!r}", expected="property name")
            if self.eat(":"):
                value = self.parse_assignment()
                prop = js.Property(key, value, computed, False)
            elif self.at("("):
                fstart = self.tok.start
                params = self.parse_params()
                body = self.parse_function_body()
                value = self._finish(js.FunctionExpression(None, params, body), fstart)
                prop = js.Property(key, value, computed, False)
            else:
                if computed or not isinstance(key, js.Identifier) or key.name in RESERVED:
                    raise self.error("unexpected token", expected="':'")
                # zero-width span keeps sibling spans disjoint
                value = js.Identifier(key.name, start=key.end, end=key.end)
                prop = js.Property(key, value, False, True)
            properties.append(self._finish(prop, pstart))
            if not self.at("}"):
                self.expect(",")
        self.advance()
        return self._finish(js.ObjectExpression(properties), start)


def parse_js(source: str) -> js.Program:
    """Parse ``source``; raises :class:`JsSyntaxError` with line/column on failure."""
    return Parser(source).parse_program()
