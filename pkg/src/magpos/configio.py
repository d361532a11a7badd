"""Flat key = value configuration files.

All configurable file formats in this package (scenario descriptions, canvas
calibration) use the same trivial grammar: one `key = value` pair per line,
`#` starts a comment, later keys override earlier ones. Values are kept as
strings; callers coerce.
"""

from __future__ import annotations

from .core import ConfigError


def parse_kv_text(text: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = line.split("=", 1)
        key = key.strip()
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        out[key] = value.strip()
    return out


def parse_kv_file(path: str) -> dict[str, str]:
    with open(path, encoding="utf-8") as fh:
        return parse_kv_text(fh.read())


def format_kv(pairs: dict[str, str]) -> str:
    return "\n".join(f"{k} = {v}" for k, v in pairs.items()) + "\n"


def get_float(kv: dict[str, str], key: str, default: float | None = None) -> float:
    if key not in kv:
        if default is None:
            raise ConfigError(f"missing required key {key!r}")
        return default
    try:
        return float(kv[key])
    except ValueError as exc:
        raise ConfigError(f"key {key!r}: expected a number, got {kv[key]!r}") from exc


def get_int(kv: dict[str, str], key: str, default: int | None = None) -> int:
    if key not in kv:
        if default is None:
            raise ConfigError(f"missing required key {key!r}")
        return default
    try:
        return int(kv[key])
    except ValueError as exc:
        raise ConfigError(f"key {key!r}: expected an integer, got {kv[key]!r}") from exc
