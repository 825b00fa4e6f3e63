"""Reader for the ``key = value`` configuration files.

One parameter per line, ``#`` starts a comment.  Values stay strings until a
consumer asks for a typed view; every lookup error carries the line number of
the offending entry so the CLI can point at it.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .errors import ConfigError

DEFAULT_CONFIG_NAME = "default.cfg"


@dataclass
class Config:
    values: dict[str, str] = field(default_factory=dict)
    lines: dict[str, int] = field(default_factory=dict)
    source: str = "<memory>"

    def __contains__(self, key: str) -> bool:
        return key in self.values

    def where(self, key: str) -> str:
        line = self.lines.get(key)
        return f"{self.source}:{line}" if line is not None else self.source

    def get_str(self, key: str, default: str | None = None) -> str:
        if key in self.values:
            return self.values[key]
        if default is None:
            raise ConfigError(f"{self.source}: missing required key '{key}'")
        return default

    def get_float(self, key: str, default: float | None = None) -> float:
        if key not in self.values:
            if default is None:
                raise ConfigError(f"{self.source}: missing required key '{key}'")
            return float(default)
        try:
            return float(self.values[key])
        except ValueError:
            raise ConfigError(
                f"{self.where(key)}: '{key}' expects a number, got {self.values[key]!r}"
            ) from None

    def get_floats(self, key: str, n: int | None = None,
                   default: tuple[float, ...] | None = None) -> tuple[float, ...]:
        if key not in self.values:
            if default is None:
                raise ConfigError(f"{self.source}: missing required key '{key}'")
            return tuple(default)
        try:
            out = tuple(float(v) for v in self.values[key].split(","))
        except ValueError:
            raise ConfigError(
                f"{self.where(key)}: '{key}' expects comma-separated numbers"
            ) from None
        if n is not None and len(out) != n:
            raise ConfigError(
                f"{self.where(key)}: '{key}' expects {n} values, got {len(out)}"
            )
        return out

    def get_bool(self, key: str, default: bool = False) -> bool:
        if key not in self.values:
            return default
        raw = self.values[key].strip().lower()
        if raw in ("1", "true", "yes", "on"):
            return True
        if raw in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"{self.where(key)}: '{key}' expects on/off, got {raw!r}")

    def get_pairs(self, key: str) -> tuple[tuple[float, float], ...]:
        """Parse ``a:b, c:d, ...`` into float pairs."""
        raw = self.get_str(key)
        pairs = []
        for item in raw.split(","):
            try:
                a, b = item.split(":")
                pairs.append((float(a), float(b)))
            except ValueError:
                raise ConfigError(
                    f"{self.where(key)}: bad pair {item.strip()!r} in '{key}'"
                ) from None
        return tuple(pairs)

    def updated(self, **overrides: str) -> "Config":
        """Copy with string overrides; dotted keys may be given with '__'."""
        values = dict(self.values)
        for k, v in overrides.items():
            values[k.replace("__", ".")] = str(v)
        return Config(values, dict(self.lines), self.source)


def parse_config(text: str, source: str = "<memory>") -> Config:
    values: dict[str, str] = {}
    lines: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"{source}:{lineno}: empty key")
        if key in values:
            raise ConfigError(f"{source}:{lineno}: duplicate key '{key}' "
                              f"(first set on line {lines[key]})")
        values[key] = value
        lines[key] = lineno
    return Config(values, lines, source)


def default_config_text() -> str:
    return resources.files("rotvlab.data").joinpath(DEFAULT_CONFIG_NAME).read_text("utf-8")


def load_config(path: str | os.PathLike | None = None) -> Config:
    """Load a config file layered over the shipped defaults.

    With no path, ``ROTVLAB_CONFIG`` is consulted; with neither, the defaults
    are returned unchanged.
    """
    base = parse_config(default_config_text(), source=DEFAULT_CONFIG_NAME)
    if path is None:
        path = os.environ.get("ROTVLAB_CONFIG")
    if not path:
        return base
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    user = parse_config(p.read_text(encoding="utf-8"), source=str(p))
    merged = Config(dict(base.values), dict(base.lines), str(p))
    merged.values.update(user.values)
    merged.lines.update(user.lines)
    return merged
