"""Flat ``key = value`` text files with ``[section]`` headers.

Every value remembers its line and column so that conversion errors can point
at the offending text.  Comments start with ``#`` or ``;`` at line start.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

__all__ = ["ConfigParseError", "Entry", "read_sections"]

_SECTION = re.compile(r"^\[\s*([A-Za-z_][\w.-]*)\s*\]\s*$")
_KEY = re.compile(r"^([A-Za-z_][\w.-]*)\s*=")


class ConfigParseError(ValueError):
    def __init__(self, message: str, line: int, column: int, source: str = "<config>"):
        self.line = line
        self.column = column
        self.source = source
        super().__init__(f"{source}:{line}:{column}: {message}")


@dataclass(frozen=True)
class Entry:
    value: str
    line: int
    column: int
    key_column: int = 1

    def error(self, message: str, source: str = "<config>") -> ConfigParseError:
        return ConfigParseError(message, self.line, self.column, source)

    def key_error(self, message: str, source: str = "<config>") -> ConfigParseError:
        return ConfigParseError(message, self.line, self.key_column, source)


def read_sections(text: str, source: str = "<config>") -> dict[str, dict[str, Entry]]:
    sections: dict[str, dict[str, Entry]] = {}
    current: dict[str, Entry] | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped or stripped[0] in "#;":
            continue
        indent = len(raw) - len(raw.lstrip())
        m = _SECTION.match(stripped)
        if m:
            name = m.group(1).lower()
            if name in sections:
                raise ConfigParseError(f"duplicate section [{name}]", lineno, indent + 1, source)
            current = sections[name] = {}
            continue
        if stripped.startswith("["):
            raise ConfigParseError("malformed section header", lineno, indent + 1, source)
        m = _KEY.match(stripped)
        if not m:
            raise ConfigParseError("expected 'key = value'", lineno, indent + 1, source)
        if current is None:
            raise ConfigParseError("key outside of any [section]", lineno, indent + 1, source)
        key = m.group(1).lower()
        if key in current:
            raise ConfigParseError(f"duplicate key {key!r}", lineno, indent + 1, source)
        rest = stripped[m.end():]
        value = rest.strip()
        col = indent + m.end() + (len(rest) - len(rest.lstrip())) + 1
        current[key] = Entry(value, lineno, col, indent + 1)
    return sections
