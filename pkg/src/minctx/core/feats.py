# src/minctx/core/feats.py
from __future__ import annotations

import abc
import enum
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np
import scipy.sparse as sp

from minctx.core.corpus import Vocabulary, build_vocab
from minctx.core.coref import MarkableExample
from minctx.core.embed import EmbeddingStore
from minctx.core.value_object import ConfigError, DimensionError, MissingEmbeddingError

FeatureMatrix = Union[np.ndarray, sp.csr_matrix]


@dataclass(frozen=True)
class FeatureVector:
    """
    Dense (values set) or sparse (indices/data set, indices strictly increasing).
    """
    dim: int
    values: Optional[np.ndarray] = None
    indices: Optional[np.ndarray] = None
    data: Optional[np.ndarray] = None

    @staticmethod
    def dense(values: np.ndarray) -> "FeatureVector":
        values = np.asarray(values, dtype=np.float64)
        return FeatureVector(dim=int(values.shape[0]), values=values)

    @staticmethod
    def sparse(dim: int, indices: Sequence[int], data: Sequence[float]) -> "FeatureVector":
        idx = np.asarray(indices, dtype=np.int64)
        if idx.size and (np.any(np.diff(idx) <= 0) or idx[0] < 0 or idx[-1] >= dim):
            raise DimensionError(f"sparse indices must be strictly increasing and < {dim}")
        return FeatureVector(dim=dim, indices=idx, data=np.asarray(data, dtype=np.float64))

    @property
    def is_sparse(self) -> bool:
        return self.values is None

    def to_dense(self) -> np.ndarray:
        if not self.is_sparse:
            return self.values
        out = np.zeros(self.dim, dtype=np.float64)
        out[self.indices] = self.data
        return out

    def nonzeros(self) -> dict:
        if self.is_sparse:
            return {int(i): float(v) for i, v in zip(self.indices, self.data) if v != 0}
        return {int(i): float(self.values[i]) for i in np.flatnonzero(self.values)}


def stack(vectors: Sequence[FeatureVector]) -> FeatureMatrix:
    """Rows as one matrix: CSR if any vector is sparse, dense otherwise."""
    if not vectors:
        raise DimensionError("no feature vectors to stack")
    dims = {v.dim for v in vectors}
    if len(dims) != 1:
        raise DimensionError(f"inconsistent feature dims: {sorted(dims)}")
    dim = dims.pop()
    if not any(v.is_sparse for v in vectors):
        return np.vstack([v.values for v in vectors])
    indptr = [0]
    indices = []
    data = []
    for v in vectors:
        if v.is_sparse:
            indices.append(v.indices)
            data.append(v.data)
        else:
            nz = np.flatnonzero(v.values)
            indices.append(nz)
            data.append(v.values[nz])
        indptr.append(indptr[-1] + len(indices[-1]))
    return sp.csr_matrix(
        (np.concatenate(data), np.concatenate(indices), np.asarray(indptr)),
        shape=(len(vectors), dim),
    )


class OovPolicy(enum.Enum):
    ZERO = "zero"
    STRICT = "strict"


def mc_feature(ex: MarkableExample, mc_store: EmbeddingStore) -> FeatureVector:
    token = ex.encoded_mc
    if token not in mc_store:
        raise MissingEmbeddingError(f"MC not in embedding vocabulary: {token!r}")
    return FeatureVector.dense(mc_store.vector(token))


def concat_feature(ex: MarkableExample, word_store: EmbeddingStore, oov: OovPolicy = OovPolicy.ZERO) -> FeatureVector:
    halves = []
    for word in (ex.left, ex.right):
        if word in word_store:
            halves.append(word_store.vector(word))
        elif oov is OovPolicy.STRICT:
            raise MissingEmbeddingError(f"word not in embedding vocabulary: {word!r}")
        else:
            halves.append(np.zeros(word_store.dim, dtype=np.float64))
    return FeatureVector.dense(np.concatenate(halves))


def bow_feature(ex: MarkableExample, word_vocab: Vocabulary) -> FeatureVector:
    """Two one-hot blocks of size V: left word, then right word."""
    v = len(word_vocab)
    idx = []
    left = word_vocab.get(ex.left)
    right = word_vocab.get(ex.right)
    if left >= 0:
        idx.append(left)
    if right >= 0:
        idx.append(v + right)
    return FeatureVector.sparse(2 * v, idx, [1.0] * len(idx))


def bow_vocabulary(examples: Sequence[MarkableExample]) -> Vocabulary:
    """Vocabulary of enclosing words seen in the given (training) examples."""
    return build_vocab((w for ex in examples for w in (ex.left, ex.right)), min_count=1)


class Representation(abc.ABC):
    """
    Strategy interface mapping a markable example to a feature vector.
    """

    name: str = ""

    @property
    @abc.abstractmethod
    def dim(self) -> int:
        raise NotImplementedError

    @abc.abstractmethod
    def feature(self, ex: MarkableExample) -> FeatureVector:
        raise NotImplementedError

    def matrix(self, examples: Sequence[MarkableExample]) -> FeatureMatrix:
        return stack([self.feature(ex) for ex in examples])


class MCRepresentation(Representation):
    name = "mc"

    def __init__(self, mc_store: EmbeddingStore):
        self.store = mc_store

    @property
    def dim(self) -> int:
        return self.store.dim

    def feature(self, ex: MarkableExample) -> FeatureVector:
        return mc_feature(ex, self.store)


class ConcatRepresentation(Representation):
    name = "concat"

    def __init__(self, word_store: EmbeddingStore, oov: OovPolicy = OovPolicy.ZERO):
        self.store = word_store
        self.oov = oov

    @property
    def dim(self) -> int:
        return 2 * self.store.dim

    def feature(self, ex: MarkableExample) -> FeatureVector:
        return concat_feature(ex, self.store, self.oov)


class BowRepresentation(Representation):
    name = "bow"

    def __init__(self, vocab: Vocabulary):
        self.vocab = vocab

    @property
    def dim(self) -> int:
        return 2 * len(self.vocab)

    def feature(self, ex: MarkableExample) -> FeatureVector:
        return bow_feature(ex, self.vocab)


REPRESENTATIONS = ("mc", "concat", "bow")


def check_repr(name: str) -> str:
    if name not in REPRESENTATIONS:
        raise ConfigError(f"unknown representation {name!r}; choose from {', '.join(REPRESENTATIONS)}")
    return name


__all__ = [
    "FeatureVector",
    "FeatureMatrix",
    "OovPolicy",
    "Representation",
    "MCRepresentation",
    "ConcatRepresentation",
    "BowRepresentation",
    "REPRESENTATIONS",
    "check_repr",
    "stack",
    "mc_feature",
    "concat_feature",
    "bow_feature",
    "bow_vocabulary",
]
