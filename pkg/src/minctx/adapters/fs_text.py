# src/minctx/adapters/fs_text.py
from __future__ import annotations

import os
import tempfile
from contextlib import contextmanager
from typing import IO, Iterator, Tuple

from ..core.value_object import FormatError


def _decode(raw: bytes, lineno: int, path: str) -> str:
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as e:
        raise FormatError(f"invalid UTF-8 at byte {e.start}", line=lineno, path=path) from None
    if text.endswith("\r\n"):
        text = text[:-2] + "\n"
    return text


def iter_lines(path: str) -> Iterator[Tuple[int, str]]:
    """(1-based line number, decoded line) pairs; undecodable bytes raise FormatError."""
    with open(path, "rb") as f:
        for lineno, raw in enumerate(f, start=1):
            yield lineno, _decode(raw, lineno, path)


def read_text(path: str) -> str:
    with open(path, "rb") as f:
        data = f.read()
    try:
        return data.decode("utf-8").replace("\r\n", "\n")
    except UnicodeDecodeError as e:
        lineno = data.count(b"\n", 0, e.start) + 1
        raise FormatError(f"invalid UTF-8 at byte {e.start}", line=lineno, path=path) from None


def _ensure_parent(path: str) -> None:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)


def _umask() -> int:
    mask = os.umask(0)
    os.umask(mask)
    return mask


@contextmanager
def atomic_writer(path: str) -> Iterator[IO[str]]:
    """
    Text handle on a temp file next to `path`, renamed over it on success.

    On any error the temp file is removed and `path` is left untouched.
    """
    _ensure_parent(path)
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=os.path.dirname(os.path.abspath(path)))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as f:
            yield f
        os.chmod(tmp, 0o666 & ~_umask())
        os.replace(tmp, path)
    except BaseException:
        try:
            os.remove(tmp)
        except FileNotFoundError:
            pass
        raise
