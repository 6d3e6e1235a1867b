"""Literal-string signature scanner (a desk-scale stand-in for AV engines).

A signatures file is a JSON list of ``{"id": ..., "strings": [...]}``. A rule
matches when every one of its strings occurs in the scanned text.
"""

from __future__ import annotations

import json
import pathlib
from dataclasses import dataclass, field


class ConfigError(Exception):
    """Invalid configuration or input file; maps to exit code 2."""


@dataclass(frozen=True)
class Rule:
    id: str
    strings: tuple[str, ...]

    def matches(self, text: str) -> bool:
        return all(s in text for s in self.strings)


@dataclass
class Verdict:
    detected: bool
    rules: list[str] = field(default_factory=list)


def parse_signatures(data) -> list[Rule]:
    if not isinstance(data, list):
        raise ConfigError("signatures: top level must be a list of rules")
    rules, seen = [], set()
    for i, item in enumerate(data):
        if not isinstance(item, dict) or "id" not in item or "strings" not in item:
            raise ConfigError(f"signatures: rule {i} needs 'id' and 'strings'")
        strings = item["strings"]
        if (not isinstance(strings, list) or not strings
                or not all(isinstance(s, str) and s for s in strings)):
            raise ConfigError(f"signatures: rule {item['id']!r} needs a non-empty list of non-empty strings")
        rule_id = str(item["id"])
        if rule_id in seen:
            raise ConfigError(f"signatures: duplicate rule id {rule_id!r}")
        seen.add(rule_id)
        rules.append(Rule(rule_id, tuple(strings)))
    return rules


def load_signatures(path) -> list[Rule]:
    try:
        data = json.loads(pathlib.Path(path).read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read signatures {path}: {exc}") from exc
    return parse_signatures(data)


def scan_signatures(text: str, rules) -> Verdict:
    matched = [r.id for r in rules if r.matches(text)]
    return Verdict(bool(matched), matched)
