"""Flat ``key = value`` config files.

One entry per line, ``#`` starts a comment, blank lines are ignored. Values are
kept as strings; callers coerce them against their own field types.
"""

from __future__ import annotations

import dataclasses
import os
from typing import Any, Mapping

from lolfusion.errors import ConfigError, ParseError


def parse_kv(text: str) -> dict[str, str]:
    entries: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"expected 'key = value', got {raw!r}", line=lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ParseError("empty key", line=lineno)
        if key in entries:
            raise ParseError(f"duplicate key {key!r}", line=lineno)
        entries[key] = value
    return entries


def read_kv(path: str | os.PathLike) -> dict[str, str]:
    with open(path, encoding="utf-8") as fh:
        return parse_kv(fh.read())


def format_kv(values: Mapping[str, Any], header: str | None = None) -> str:
    lines = []
    if header:
        lines.extend(f"# {h}" for h in header.splitlines())
    for key, value in values.items():
        if isinstance(value, float):
            value = repr(value)
        elif isinstance(value, bool):
            value = "true" if value else "false"
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"


def coerce(value: str, target: Any, key: str) -> Any:
    """Convert a raw string to the type of ``target`` (a default value or type)."""
    if target is None:
        # optional numeric override
        if value.lower() in ("", "none", "auto"):
            return None
        target = float
    kind = target if isinstance(target, type) else type(target)
    try:
        if kind is bool:
            lowered = value.lower()
            if lowered in ("1", "true", "yes", "on"):
                return True
            if lowered in ("0", "false", "no", "off"):
                return False
            raise ValueError(value)
        if kind is int:
            return int(value)
        if kind is float:
            return float(value)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {value!r} as {kind.__name__}") from None
    return value


def dataclass_from_kv(cls, values: Mapping[str, str], *, strict: bool = True, **extra):
    """Build dataclass ``cls`` from raw strings, using field defaults for types.

    Unknown keys raise ``ConfigError`` when ``strict`` is set.
    """
    fields = {f.name: f for f in dataclasses.fields(cls)}
    unknown = set(values) - set(fields)
    if strict and unknown:
        raise ConfigError(f"unknown {cls.__name__} keys: {', '.join(sorted(unknown))}")
    kwargs = dict(extra)
    for name, field in fields.items():
        if name not in values:
            continue
        if field.default is not dataclasses.MISSING:
            proto = field.default
        else:
            proto = field.type if isinstance(field.type, type) else str
        kwargs[name] = coerce(values[name], proto, name)
    return cls(**kwargs)
