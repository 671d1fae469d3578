"""Flat key = value configuration files with [section] headers.

Values are auto-typed (int, float, comma list, string). The raw text is
kept so outputs can echo the exact configuration they ran under.
"""

from __future__ import annotations

from dataclasses import dataclass


def _convert(text):
    text = text.strip()
    for caster in (int, float):
        try:
            return caster(text)
        except ValueError:
            pass
    if "," in text:
        return [_convert(part) for part in text.split(",")]
    return text


@dataclass
class Config:
    values: dict
    raw: str

    def get(self, key, default=None):
        return self.values.get(key, default)

    def require(self, key):
        if key not in self.values:
            raise KeyError(f"missing config key: {key}")
        return self.values[key]

    def list(self, key, default=()):
        value = self.values.get(key)
        if value is None:
            return list(default)
        return value if isinstance(value, list) else [value]

    def override(self, key, value):
        self.values[key] = value


def parse_config(text):
    values = {}
    section = ""
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            continue
        if "=" not in line:
            raise ValueError(f"malformed config line: {line!r}")
        key, _, value = line.partition("=")
        full = f"{section}.{key.strip()}" if section else key.strip()
        values[full] = _convert(value)
    return Config(values, text)


def load_config(path):
    with open(path) as fh:
        return parse_config(fh.read())
