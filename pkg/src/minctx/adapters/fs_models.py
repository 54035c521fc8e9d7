# src/minctx/adapters/fs_models.py
from __future__ import annotations

import os
from typing import Dict, Tuple

import numpy as np

from ..core.clf import LABEL_MAP, LinearModel
from ..core.ports import ModelRepoPort
from ..core.value_object import AnimacyLabel, ConfigError, FormatError
from .fs_text import atomic_writer, iter_lines, read_text

LABEL_LINE = " ".join(f"{sign:+d}:{label.value}" for sign, label in LABEL_MAP.items())


def meta_path(path: str) -> str:
    return path + ".repr"


def save_model(model: LinearModel, path: str) -> None:
    """Line 1 "dim bias", line 2 the weights, line 3 the label map."""
    with atomic_writer(path) as f:
        f.write(f"{model.dim} {format(model.bias, '.17g')}\n")
        f.write(" ".join(format(float(x), ".17g") for x in model.weights) + "\n")
        f.write(LABEL_LINE + "\n")


def load_model(path: str) -> LinearModel:
    lines = read_text(path).split("\n")
    if len(lines) < 3:
        raise FormatError("model file needs 3 lines", line=len(lines), path=path)
    head = lines[0].split()
    if len(head) != 2:
        raise FormatError("expected 'dim bias'", line=1, path=path)
    try:
        dim, bias = int(head[0]), float(head[1])
    except ValueError:
        raise FormatError("expected 'dim bias'", line=1, path=path) from None
    fields = lines[1].split()
    if len(fields) != dim:
        raise FormatError(f"expected {dim} weights, got {len(fields)}", line=2, path=path)
    try:
        weights = np.asarray([float(x) for x in fields], dtype=np.float64)
    except ValueError:
        raise FormatError("non-numeric weight", line=2, path=path) from None
    mapping = {}
    for item in lines[2].split():
        sign, _, name = item.partition(":")
        try:
            mapping[int(sign)] = AnimacyLabel.from_spec(name)
        except (ValueError, ConfigError):
            raise FormatError(f"malformed label map entry {item!r}", line=3, path=path) from None
    if mapping != LABEL_MAP:
        raise FormatError(f"unsupported label map {lines[2]!r}", line=3, path=path)
    return LinearModel(weights, bias)


def save_meta(meta: Dict[str, str], path: str) -> None:
    for key, value in meta.items():
        if "=" in key or "\n" in key or "\n" in value:
            raise ConfigError(f"cannot store model metadata {key!r}={value!r}")
    with atomic_writer(path) as f:
        for key in sorted(meta):
            f.write(f"{key}={meta[key]}\n")


def load_meta(path: str) -> Dict[str, str]:
    """key=value per line; everything after the first '=' is the value, verbatim."""
    meta: Dict[str, str] = {}
    for lineno, line in iter_lines(path):
        line = line.rstrip("\n")
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep or not key:
            raise FormatError("expected key=value", line=lineno, path=path)
        meta[key] = value
    return meta


class TextModelRepo(ModelRepoPort):
    """Model file plus a "<model>.repr" key=value sidecar."""

    def save(self, model: LinearModel, path: str, meta: Dict[str, str]) -> None:
        save_model(model, path)
        save_meta(meta, meta_path(path))

    def load(self, path: str) -> Tuple[LinearModel, Dict[str, str]]:
        model = load_model(path)
        meta = load_meta(meta_path(path)) if os.path.exists(meta_path(path)) else {}
        return model, meta
