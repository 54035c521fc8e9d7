# src/minctx/adapters/config_file.py
from __future__ import annotations

from typing import Dict

from ..core.value_object import ConfigError
from .fs_text import iter_lines


def read_config(path: str) -> Dict[str, str]:
    """
    Parse a line-oriented key=value file.

    '#' starts a comment, blank lines are skipped, keys are normalized
    to underscores ("k-min" and "k_min" are the same key).
    """
    values: Dict[str, str] = {}
    try:
        for lineno, raw in iter_lines(path):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            key = key.strip().replace("-", "_")
            if not sep or not key:
                raise ConfigError(f"{path}:line {lineno}: expected key=value")
            values[key] = value.strip()
    except OSError as e:
        raise ConfigError(f"cannot read config file {path}: {e.strerror}") from e
    return values
