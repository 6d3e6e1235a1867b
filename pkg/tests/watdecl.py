"""What a WAT text declares: a tiny S-expression reader used as the conformance oracle.

Independent of the decoder: it never looks at binary bytes, only at the text
handed to the assembler.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

TOKEN = re.compile(r'''\s+|;;[^\n]*|\(;.*?;\)|(?P<open>\()|(?P<close>\))|(?P<str>"(?:[^"\\]|\\.)*")|(?P<atom>[^\s()";]+)''',
                   re.S)


@dataclass
class Declarations:
    types: int = 0
    imports: list = field(default_factory=list)      # (module, field, kind)
    functions: int = 0
    tables: int = 0
    memories: int = 0
    globals: int = 0
    exports: list = field(default_factory=list)      # names, in text order
    elements: int = 0
    data: list = field(default_factory=list)         # (offset or None, bytes)


class Str(str):
    """A decoded string literal (keeps it distinct from atoms)."""

    def __new__(cls, value: str, raw: bytes):
        obj = super().__new__(cls, value)
        obj.raw = raw
        return obj


def unescape(body: str) -> bytes:
    out = bytearray()
    i = 0
    while i < len(body):
        ch = body[i]
        if ch != "\\":
            out += ch.encode("utf-8")
            i += 1
            continue
        nxt = body[i + 1]
        if nxt in "0123456789abcdefABCDEF" and i + 2 < len(body) and body[i + 2] in "0123456789abcdefABCDEF":
            out.append(int(body[i + 1:i + 3], 16))
            i += 3
        elif nxt == "u":
            end = body.index("}", i)
            out += chr(int(body[i + 3:end], 16)).encode("utf-8")
            i = end + 1
        else:
            out += {"n": b"\n", "t": b"\t", "r": b"\r", "\\": b"\\", '"': b'"', "'": b"'"}[nxt]
            i += 2
    return bytes(out)


def read_sexpr(text: str):
    stack: list = [[]]
    for m in TOKEN.finditer(text):
        if m["open"]:
            stack.append([])
        elif m["close"]:
            done = stack.pop()
            stack[-1].append(done)
        elif m["str"]:
            raw = unescape(m["str"][1:-1])
            stack[-1].append(Str(raw.decode("latin-1"), raw))
        elif m["atom"]:
            stack[-1].append(m["atom"])
    assert len(stack) == 1, "unbalanced parentheses"
    return stack[0]


def declarations(text: str) -> Declarations:
    forms = read_sexpr(text)
    module = next(f for f in forms if isinstance(f, list) and f and f[0] == "module")
    decl = Declarations()
    for item in module[1:]:
        if not isinstance(item, list) or not item:
            continue
        head = item[0]
        if head == "type":
            decl.types += 1
        elif head == "import":
            kind = next(x[0] for x in item[3:] if isinstance(x, list))
            decl.imports.append((str(item[1]), str(item[2]), kind))
        elif head in ("func", "table", "memory", "global"):
            attr = {"func": "functions", "table": "tables", "memory": "memories", "global": "globals"}[head]
            setattr(decl, attr, getattr(decl, attr) + 1)
            for sub in item[1:]:
                if isinstance(sub, list) and sub and sub[0] == "export":
                    decl.exports.append(str(sub[1]))
        elif head == "export":
            decl.exports.append(str(item[1]))
        elif head == "elem":
            decl.elements += 1
        elif head == "data":
            offset = None
            payload = b""
            for sub in item[1:]:
                if isinstance(sub, list) and sub and sub[0] == "i32.const":
                    offset = int(sub[1], 0)
                elif isinstance(sub, Str):
                    payload += sub.raw
            decl.data.append((offset, payload))
    return decl
