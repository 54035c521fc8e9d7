# src/minctx/adapters/fs_corpus.py
from __future__ import annotations

from typing import Iterable, Iterator, List, Tuple

from ..core.corpus import MinimalContext, format_pair_line, parse_pair_line, tokenize_line
from ..core.ports import CorpusSourcePort, PairCorpusPort
from ..core.value_object import FormatError
from .fs_text import atomic_writer, iter_lines


class LineCorpus:
    """
    Memory-friendly, re-iterable stream of whitespace-tokenized lines.

    Empty lines yield empty sentences; they contribute nothing downstream.
    """

    def __init__(self, path: str):
        self.path = path

    def __iter__(self) -> Iterator[List[str]]:
        for _, line in iter_lines(self.path):
            yield tokenize_line(line)


class PairCorpus(LineCorpus):
    """Re-iterable pair corpus; every line must be "ENCODED_MC INNER_WORD"."""

    def __iter__(self) -> Iterator[List[str]]:
        for lineno, line in iter_lines(self.path):
            try:
                mc, inner = parse_pair_line(line, lineno)
            except FormatError as e:
                raise FormatError(str(e), path=self.path) from e
            yield [mc.encode(), inner]


class FilesystemCorpusSource(CorpusSourcePort):
    def sentences(self, path: str) -> Iterable[List[str]]:
        return LineCorpus(path)


class FilesystemPairCorpus(PairCorpusPort):
    def write_pairs(self, path: str, pairs: Iterable[Tuple[MinimalContext, str]]) -> int:
        count = 0
        with atomic_writer(path) as f:
            for mc, inner in pairs:
                f.write(format_pair_line(mc, inner))
                count += 1
        return count

    def read_pairs(self, path: str) -> Iterable[List[str]]:
        return PairCorpus(path)
