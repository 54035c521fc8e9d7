# src/minctx/core/ports.py
from __future__ import annotations

import abc
from typing import Dict, Iterable, List, Sequence, Tuple

from minctx.core.clf import LinearModel
from minctx.core.corpus import MinimalContext, Vocabulary
from minctx.core.coref import CorefDocument, MarkableExample
from minctx.core.embed import EmbeddingStore


class CorpusSourcePort(abc.ABC):
    """
    Read access to a plain-text corpus, one sentence per line.

    The returned iterable must be re-iterable: the trainer walks it once to
    count tokens and once per epoch.
    """

    @abc.abstractmethod
    def sentences(self, path: str) -> Iterable[List[str]]:
        raise NotImplementedError


class PairCorpusPort(abc.ABC):
    """
    The reformatted corpus: one "ENCODED_MC INNER_WORD" sentence per line.
    """

    @abc.abstractmethod
    def write_pairs(self, path: str, pairs: Iterable[Tuple[MinimalContext, str]]) -> int:
        """Write all pairs and return how many were written."""
        raise NotImplementedError

    @abc.abstractmethod
    def read_pairs(self, path: str) -> Iterable[List[str]]:
        """Re-iterable two-token sentences [encoded MC, inner word]."""
        raise NotImplementedError


class EmbeddingRepoPort(abc.ABC):
    """Persistence of input vectors plus vocabulary order."""

    @abc.abstractmethod
    def save(self, store: EmbeddingStore, path: str, mc_only: bool = False) -> int:
        """Write the store (optionally MC rows only); return rows written."""
        raise NotImplementedError

    @abc.abstractmethod
    def load(self, path: str) -> EmbeddingStore:
        raise NotImplementedError

    @abc.abstractmethod
    def save_vocab(self, vocab: Vocabulary, path: str) -> None:
        raise NotImplementedError

    @abc.abstractmethod
    def load_vocab(self, path: str) -> Vocabulary:
        raise NotImplementedError


class ModelRepoPort(abc.ABC):
    """Linear models plus the key=value description of how they featurize."""

    @abc.abstractmethod
    def save(self, model: LinearModel, path: str, meta: Dict[str, str]) -> None:
        raise NotImplementedError

    @abc.abstractmethod
    def load(self, path: str) -> Tuple[LinearModel, Dict[str, str]]:
        raise NotImplementedError


class MarkableRepoPort(abc.ABC):
    """Markables TSV: label, left, right, encoded MC, surface."""

    @abc.abstractmethod
    def write(self, path: str, examples: Sequence[MarkableExample]) -> int:
        raise NotImplementedError

    @abc.abstractmethod
    def read(self, path: str) -> List[MarkableExample]:
        raise NotImplementedError


class CorefSourcePort(abc.ABC):
    """Coreference-annotated documents from a file or a directory of files."""

    @abc.abstractmethod
    def documents(self, path: str, word_column: int, coref_column: int) -> List[CorefDocument]:
        raise NotImplementedError


class ReportWriterPort(abc.ABC):
    """Sink for human-readable and TSV reports."""

    @abc.abstractmethod
    def write_text(self, path: str, text: str) -> None:
        raise NotImplementedError
