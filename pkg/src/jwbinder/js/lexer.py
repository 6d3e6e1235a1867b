"""On-demand tokenizer for the supported JavaScript subset.

The parser pulls one token at a time and can rewind to a saved position,
which is what template literals and arrow-function lookahead need.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass

PUNCTUATORS = sorted([
    ">>>=", "...", "===", "!==", "**=", "<<=", ">>=", ">>>", "&&=", "||=", "??=",
    "=>", "==", "!=", "<=", ">=", "&&", "||", "??", "?.", "++", "--", "+=", "-=",
    "*=", "/=", "%=", "&=", "|=", "^=", "**", "<<", ">>",
    "{", "}", "(", ")", "[", "]", ";", ",", "<", ">", "+", "-", "*", "/", "%",
    "&", "|", "^", "!", "~", "?", ":", "=", ".", "@", "#",
], key=len, reverse=True)

_PUNCT_BY_FIRST: dict[str, list[str]] = {}
for _p in PUNCTUATORS:
    _PUNCT_BY_FIRST.setdefault(_p[0], []).append(_p)

LINE_TERMINATORS = "\n\r\u2028\u2029"
_WHITESPACE = " \t\v\f\u00a0\ufeff"

_DIGITS = "0123456789"
_DIGITS_SET = frozenset(_DIGITS)

_SIMPLE_ESCAPES = {"n": "\n", "t": "\t", "r": "\r", "b": "\b", "f": "\f", "v": "\v"}


class JsSyntaxError(Exception):
    """Input is malformed or uses a construct outside the supported subset."""

    def __init__(self, message: str, line: int, col: int, expected: str | None = None, offset: int = 0):
        self.message = message
        self.line = line
        self.col = col
        self.expected = expected
        self.offset = offset
        detail = f" (expected {expected})" if expected else ""
        super().__init__(f"{message}{detail} at line {line}, column {col}")


@dataclass
class Token:
    kind: str  # name | num | str | punct | template | eof
    value: object
    start: int
    end: int
    nl_before: bool = False
    tail: bool = True  # template chunks only: True when closed by a backtick


def _is_id_start(ch: str) -> bool:
    return ch.isalpha() or ch in "$_" or (ord(ch) > 127 and ch.isidentifier())


def _is_id_part(ch: str) -> bool:
    return ch.isalnum() or ch in "$_\u200c\u200d" or (ord(ch) > 127 and ("a" + ch).isidentifier())


class Lexer:
    def __init__(self, source: str):
        self.src = source
        self.pos = 0
        self._line_starts = [0]
        for i, ch in enumerate(source):
            if ch == "\n" or (ch == "\r" and source[i + 1:i + 2] != "\n") or ch in "\u2028\u2029":
                self._line_starts.append(i + 1)

    def location(self, offset: int) -> tuple[int, int]:
        line = bisect.bisect_right(self._line_starts, offset)
        return line, offset - self._line_starts[line - 1] + 1

    def error(self, message: str, offset: int, expected: str | None = None) -> JsSyntaxError:
        offset = max(0, min(offset, len(self.src)))
        line, col = self.location(offset)
        return JsSyntaxError(message, line, col, expected, offset)

    # -- trivia ---------------------------------------------------------------

    def _skip_trivia(self) -> bool:
        src, n = self.src, len(self.src)
        newline = False
        while self.pos < n:
            ch = src[self.pos]
            if ch in _WHITESPACE:
                self.pos += 1
            elif ch in LINE_TERMINATORS:
                newline = True
                self.pos += 1
            elif ch == "/" and src.startswith("//", self.pos):
                while self.pos < n and src[self.pos] not in LINE_TERMINATORS:
                    self.pos += 1
            elif ch == "/" and src.startswith("/*", self.pos):
                close = src.find("*/", self.pos + 2)
                if close < 0:
                    raise self.error("unterminated comment", self.pos, "*/")
                if any(c in LINE_TERMINATORS for c in src[self.pos:close]):
                    newline = True
                self.pos = close + 2
            elif ch == "<" and src.startswith("<!--", self.pos):
                # HTML-like comment, still seen in legacy malware droppers
                while self.pos < n and src[self.pos] not in LINE_TERMINATORS:
                    self.pos += 1
            elif ch.isspace():
                self.pos += 1
            else:
                break
        return newline

    # -- tokens ---------------------------------------------------------------

    def next_token(self) -> Token:
        nl = self._skip_trivia()
        src = self.src
        start = self.pos
        if start >= len(src):
            return Token("eof", None, start, start, nl)
        ch = src[start]
        if _is_id_start(ch):
            end = start + 1
            while end < len(src) and _is_id_part(src[end]):
                end += 1
            self.pos = end
            return Token("name", src[start:end], start, end, nl)
        if ch == "\\":
            raise self.error("unicode escapes in identifiers are not supported", start)
        if ch in _DIGITS or (ch == "." and src[start + 1:start + 2] in _DIGITS_SET):
            return self._number(start, nl)
        if ch in "'\"":
            return self._string(start, nl)
        if ch == "`":
            self.pos = start + 1
            return self.template_chunk(start, nl)
        for p in _PUNCT_BY_FIRST.get(ch, ()):
            if src.startswith(p, start):
                if p == "?." and src[start + 2:start + 3] in _DIGITS_SET:
                    continue
                self.pos = start + len(p)
                return Token("punct", p, start, self.pos, nl)
        raise self.error(f"unexpected character {ch!r}", start)

    def _number(self, start: int, nl: bool) -> Token:
        src = self.src
        pos = start
        value: int | float
        prefix = src[start:start + 2].lower()
        if prefix in ("0x", "0o", "0b"):
            base = {"0x": 16, "0o": 8, "0b": 2}[prefix]
            pos += 2
            digits_start = pos
            while pos < len(src) and src[pos].isalnum():
                pos += 1
            try:
                value = int(src[digits_start:pos], base)
            except ValueError:
                raise self.error("malformed numeric literal", start) from None
        else:
            while pos < len(src) and src[pos] in _DIGITS:
                pos += 1
            text = src[start:pos]
            legacy_octal = len(text) > 1 and text[0] == "0" and all(c in "01234567" for c in text)
            if legacy_octal:
                value = int(text, 8)
            else:
                if pos < len(src) and src[pos] == ".":
                    pos += 1
                    while pos < len(src) and src[pos] in _DIGITS:
                        pos += 1
                if pos < len(src) and src[pos] in "eE":
                    exp = pos + 1
                    if exp < len(src) and src[exp] in "+-":
                        exp += 1
                    if exp < len(src) and src[exp] in _DIGITS:
                        pos = exp
                        while pos < len(src) and src[pos] in _DIGITS:
                            pos += 1
                    else:
                        raise self.error("malformed exponent", pos)
                value = float(src[start:pos])
            if pos < len(src) and (_is_id_start(src[pos]) or src[pos] in _DIGITS):
                if src[pos] == "n":
                    raise self.error("BigInt literals are not supported", pos)
                raise self.error("identifier directly after number", pos)
        self.pos = pos
        return Token("num", normalize_number(value), start, pos, nl)

    def _escape(self, pos: int) -> tuple[str, int]:
        """Decode the escape whose backslash is at ``pos - 1``; return (text, next position)."""
        src = self.src
        if pos >= len(src):
            raise self.error("unterminated escape", pos)
        ch = src[pos]
        if ch in _SIMPLE_ESCAPES:
            return _SIMPLE_ESCAPES[ch], pos + 1
        if ch == "x":
            hexd = src[pos + 1:pos + 3]
            if len(hexd) != 2 or not all(c in "0123456789abcdefABCDEF" for c in hexd):
                raise self.error("malformed \\x escape", pos)
            return chr(int(hexd, 16)), pos + 3
        if ch == "u":
            if src.startswith("{", pos + 1):
                close = src.find("}", pos + 2)
                body = src[pos + 2:close] if close > 0 else ""
                try:
                    return chr(int(body, 16)), close + 1
                except ValueError:
                    raise self.error("malformed \\u{} escape", pos) from None
            hexd = src[pos + 1:pos + 5]
            if len(hexd) != 4 or not all(c in "0123456789abcdefABCDEF" for c in hexd):
                raise self.error("malformed \\u escape", pos)
            return chr(int(hexd, 16)), pos + 5
        if ch == "\r":
            return "", pos + (2 if src.startswith("\n", pos + 1) else 1)
        if ch in LINE_TERMINATORS:
            return "", pos + 1
        if ch in "01234567":
            end = pos + 1
            limit = pos + (3 if ch in "0123" else 2)
            while end < min(limit, len(src)) and src[end] in "01234567":
                end += 1
            return chr(int(src[pos:end], 8)), end
        return ch, pos + 1

    def _string(self, start: int, nl: bool) -> Token:
        src = self.src
        quote = src[start]
        pos = start + 1
        parts: list[str] = []
        while True:
            if pos >= len(src):
                raise self.error("unterminated string literal", start, quote)
            ch = src[pos]
            if ch == quote:
                pos += 1
                break
            if ch == "\\":
                text, pos = self._escape(pos + 1)
                parts.append(text)
            elif ch in "\n\r":
                raise self.error("line break inside string literal", pos, quote)
            else:
                run = pos
                while pos < len(src) and src[pos] not in (quote, "\\", "\n", "\r"):
                    pos += 1
                parts.append(src[run:pos])
        self.pos = pos
        return Token("str", "".join(parts), start, pos, nl)

    def template_chunk(self, start: int, nl: bool = False) -> Token:
        """Scan template text from ``self.pos`` up to a backtick or ``${``."""
        src = self.src
        pos = self.pos
        parts: list[str] = []
        while True:
            if pos >= len(src):
                raise self.error("unterminated template literal", start, "`")
            ch = src[pos]
            if ch == "`":
                self.pos = pos + 1
                return Token("template", "".join(parts), start, self.pos, nl, tail=True)
            if ch == "$" and src.startswith("${", pos):
                self.pos = pos + 2
                return Token("template", "".join(parts), start, self.pos, nl, tail=False)
            if ch == "\\":
                text, pos = self._escape(pos + 1)
                parts.append(text)
            elif ch == "\r":
                parts.append("\n")
                pos += 2 if src.startswith("\n", pos + 1) else 1
            else:
                parts.append(ch)
                pos += 1


def normalize_number(value: int | float) -> int | float:
    """Integral values within the exactly-representable range become ints."""
    if isinstance(value, int):
        return value if abs(value) <= 2 ** 53 else float(value)
    if value == value and value not in (float("inf"), float("-inf")) and value.is_integer() and abs(value) <= 2 ** 53:
        return int(value)
    return value
