"""Deterministic, collision-free identifier generation for abstracted code."""

from __future__ import annotations

from collections import defaultdict

JS_RESERVED = frozenset("""
break case catch class const continue debugger default delete do else enum export extends
false finally for function if import in instanceof new null return super switch this throw
true try typeof var void while with yield let static implements interface package private
protected public await arguments eval undefined NaN Infinity Math Object BigInt Number String
""".split())


class NameGenerator:
    """Counter-based names (``C_0``, ``T_3``, ``L_1`` ...) that avoid a reserved set.

    ``prefix`` namespaces module-level names of one instantiation site (``W1_MEM``).
    """

    def __init__(self, reserved=(), prefix: str = ""):
        self.reserved = set(reserved) | JS_RESERVED
        self.prefix = prefix
        self.counters: dict[str, int] = defaultdict(int)
        self.issued: set[str] = set()
        self.aliases: dict[str, str] = {}   # helper name -> emitted name, shared by all derived generators

    def _take(self, name: str) -> bool:
        if name in self.reserved or name in self.issued:
            return False
        self.issued.add(name)
        return True

    def fresh(self, kind: str, namespaced: bool = False) -> str:
        """Next unused ``<kind>_<n>``; with ``namespaced`` the site prefix is prepended."""
        prefix = self.prefix if namespaced else ""
        while True:
            n = self.counters[kind]
            self.counters[kind] += 1
            name = f"{prefix}{kind}_{n}"
            if self._take(name):
                return name

    def fixed(self, base: str, namespaced: bool = False) -> str:
        """A stable name such as ``loc3`` or ``MEM``; suffixed only on collision."""
        name = (self.prefix if namespaced else "") + base
        if name in self.issued:
            return name
        candidate, k = name, 0
        while candidate in self.reserved:
            k += 1
            candidate = f"{name}_{k}"
        self.issued.add(candidate)
        return candidate

    def helper(self, name: str) -> str:
        """Global (unprefixed) name for a helper function; stable across all sites."""
        if name not in self.aliases:
            candidate, k = name, 0
            while candidate in self.reserved:
                k += 1
                candidate = f"{name}_{k}"
            self.aliases[name] = candidate
            self.reserved.add(candidate)
        return self.aliases[name]

    def reserve(self, names) -> None:
        self.reserved.update(names)

    def child(self) -> "NameGenerator":
        """Generator with fresh per-function counters but the same reserved set and prefix."""
        return self.site(self.prefix)

    def site(self, prefix: str) -> "NameGenerator":
        """Generator for another namespace sharing the reserved set and helper aliases."""
        gen = NameGenerator((), prefix)
        gen.reserved = self.reserved
        gen.aliases = self.aliases
        return gen
