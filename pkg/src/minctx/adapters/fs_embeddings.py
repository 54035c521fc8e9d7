# src/minctx/adapters/fs_embeddings.py
from __future__ import annotations

from typing import List, Tuple

import numpy as np

from ..core.corpus import Vocabulary, is_mc_token
from ..core.embed import EmbeddingStore
from ..core.ports import EmbeddingRepoPort
from ..core.value_object import FormatError
from .fs_text import atomic_writer, iter_lines


def _fmt(x: float) -> str:
    # 17 significant digits round-trip any float64 exactly
    return format(float(x), ".17g")


def save_embeddings(store: EmbeddingStore, path: str, mc_only: bool = False) -> int:
    """
    Text format: header "N D", then N rows "token f1 ... fD".

    mc_only keeps only rows whose token is an encoded MC, dropping the word
    rows learned alongside them.
    """
    if mc_only:
        store = store.subset(is_mc_token)
    n, d = store.input_vectors.shape
    with atomic_writer(path) as f:
        f.write(f"{n} {d}\n")
        for token, row in zip(store.vocab.tokens, store.input_vectors):
            f.write(token + " " + " ".join(_fmt(x) for x in row) + "\n")
    return n


def _parse_header(header: str, path: str) -> Tuple[int, int]:
    parts = header.split()
    if len(parts) != 2:
        raise FormatError("malformed header, expected 'N D'", line=1, path=path)
    try:
        n, d = int(parts[0]), int(parts[1])
    except ValueError:
        raise FormatError(f"malformed header {header.strip()!r}", line=1, path=path) from None
    if n < 0 or d < 1:
        raise FormatError(f"malformed header {header.strip()!r}", line=1, path=path)
    return n, d


def load_embeddings(path: str) -> EmbeddingStore:
    """Inverse of save_embeddings; also reads externally published files in the same layout."""
    lines = iter_lines(path)
    first = next(lines, None)
    n, d = _parse_header(first[1] if first else "", path)

    tokens: List[str] = []
    seen = {}
    matrix = np.empty((n, d), dtype=np.float64)
    lineno = 1
    for lineno, line in lines:
        fields = line.split()
        if not fields:
            continue
        if len(tokens) >= n:
            raise FormatError(f"expected {n} rows, found more", line=lineno, path=path)
        if len(fields) != d + 1:
            raise FormatError(f"expected {d + 1} fields, got {len(fields)}", line=lineno, path=path)
        token = fields[0]
        if token in seen:
            raise FormatError(
                f"duplicate token {token!r} (first at line {seen[token]})", line=lineno, path=path
            )
        try:
            matrix[len(tokens)] = [float(x) for x in fields[1:]]
        except ValueError:
            raise FormatError("non-numeric field", line=lineno, path=path) from None
        seen[token] = lineno
        tokens.append(token)
    if len(tokens) != n:
        raise FormatError(f"expected {n} rows, found {len(tokens)}", line=lineno + 1, path=path)
    vocab = Vocabulary([(t, 0) for t in tokens])
    return EmbeddingStore(vocab, matrix)


def save_vocab(vocab: Vocabulary, path: str) -> None:
    with atomic_writer(path) as f:
        for token, count in vocab.entries:
            f.write(f"{token} {count}\n")


def load_vocab(path: str) -> Vocabulary:
    entries: List[Tuple[str, int]] = []
    seen = set()
    for lineno, line in iter_lines(path):
        fields = line.split()
        if not fields:
            continue
        if len(fields) != 2:
            raise FormatError(f"expected 'token count', got {len(fields)} fields", line=lineno, path=path)
        if fields[0] in seen:
            raise FormatError(f"duplicate token {fields[0]!r}", line=lineno, path=path)
        try:
            count = int(fields[1])
        except ValueError:
            raise FormatError("non-numeric count", line=lineno, path=path) from None
        seen.add(fields[0])
        entries.append((fields[0], count))
    return Vocabulary(entries)


class TextEmbeddingRepo(EmbeddingRepoPort):
    def save(self, store: EmbeddingStore, path: str, mc_only: bool = False) -> int:
        return save_embeddings(store, path, mc_only)

    def load(self, path: str) -> EmbeddingStore:
        return load_embeddings(path)

    def save_vocab(self, vocab: Vocabulary, path: str) -> None:
        save_vocab(vocab, path)

    def load_vocab(self, path: str) -> Vocabulary:
        return load_vocab(path)
