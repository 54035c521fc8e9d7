# src/minctx/core/embed.py
"""
Skip-gram with negative sampling (SGNS).

The same trainer serves both corpora: the reformatted (MC, inner word)
corpus, where every sentence has two tokens, and the original corpus for
the baseline word embeddings. The published embedding of a token is its
input (center) vector.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import expit

from minctx.core.corpus import Vocabulary, build_vocab, skipgram_pairs
from minctx.core.value_object import (
    ConfigError,
    DimensionError,
    EmptyVocabularyError,
    MinctxError,
    MissingEmbeddingError,
    TrainConfig,
)

logger = logging.getLogger(__name__)


@dataclass
class EmbeddingStore:
    """
    Input and output parameter matrices over one vocabulary.

    Stores loaded from disk carry input vectors only (output_vectors is None).
    """
    vocab: Vocabulary
    input_vectors: np.ndarray
    output_vectors: Optional[np.ndarray] = None
    epoch_losses: List[float] = field(default_factory=list)

    def __post_init__(self) -> None:
        n = len(self.vocab)
        if self.input_vectors.ndim != 2 or self.input_vectors.shape[0] != n:
            raise DimensionError(
                f"input matrix shape {self.input_vectors.shape} does not match vocabulary size {n}"
            )
        if self.output_vectors is not None and self.output_vectors.shape != self.input_vectors.shape:
            raise DimensionError(
                f"output matrix shape {self.output_vectors.shape} != input matrix shape {self.input_vectors.shape}"
            )

    @property
    def dim(self) -> int:
        return int(self.input_vectors.shape[1])

    def __len__(self) -> int:
        return len(self.vocab)

    def __contains__(self, token: object) -> bool:
        return token in self.vocab

    def vector(self, token: str) -> np.ndarray:
        idx = self.vocab.get(token)
        if idx < 0:
            raise MissingEmbeddingError(f"{token!r} not in embedding vocabulary")
        return self.input_vectors[idx]

    def subset(self, keep: Callable[[str], bool]) -> "EmbeddingStore":
        """New store restricted to tokens satisfying keep(), vocabulary order preserved."""
        rows = [i for i, t in enumerate(self.vocab.tokens) if keep(t)]
        vocab = Vocabulary([self.vocab.entries[i] for i in rows])
        out = None if self.output_vectors is None else self.output_vectors[rows].copy()
        return EmbeddingStore(vocab, self.input_vectors[rows].copy(), out, list(self.epoch_losses))


def init_store(vocab: Vocabulary, dim: int, seed: int) -> EmbeddingStore:
    """Input vectors uniform in [-0.5/dim, 0.5/dim), output vectors zero."""
    if len(vocab) == 0:
        raise EmptyVocabularyError("empty vocabulary")
    if dim < 1:
        raise ConfigError(f"dim must be >= 1, got {dim}.")
    rng = np.random.default_rng(seed)
    n = len(vocab)
    inputs = (rng.random((n, dim)) - 0.5) / dim
    outputs = np.zeros((n, dim), dtype=np.float64)
    return EmbeddingStore(vocab, inputs, outputs)


class NegativeTable:
    """
    Unigram^power sampling table: token i fills a contiguous run of slots
    proportional to count_i ** power.
    """

    def __init__(self, slots: np.ndarray):
        self.slots = slots

    def __len__(self) -> int:
        return int(self.slots.shape[0])

    def slot_counts(self, n_tokens: int) -> np.ndarray:
        return np.bincount(self.slots, minlength=n_tokens)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return self.slots[rng.integers(0, len(self.slots), size=size)]


def build_negative_table(vocab: Vocabulary, power: float = 0.75, table_size: int = 10_000_000) -> NegativeTable:
    """
    Cumulative-threshold fill: slot a belongs to the first id whose
    cumulative probability mass exceeds a / table_size.
    """
    n = len(vocab)
    if n == 0:
        raise EmptyVocabularyError("empty vocabulary")
    if power <= 0:
        raise ConfigError(f"power must be > 0, got {power}.")
    if table_size < n:
        raise ConfigError(f"table_size ({table_size}) must be >= vocabulary size ({n}).")

    weights = np.asarray(vocab.counts, dtype=np.float64) ** power
    probs = weights / weights.sum()
    cumulative = np.cumsum(probs)
    positions = np.arange(table_size, dtype=np.float64) / table_size
    slots = np.searchsorted(cumulative, positions, side="right")
    np.minimum(slots, n - 1, out=slots)

    # tokens whose share rounds to nothing still get one slot
    counts = np.bincount(slots, minlength=n)
    starved = np.flatnonzero((counts == 0) & (weights > 0))
    if starved.size:
        share = probs * table_size
        for idx in starved:
            surplus = counts - share
            surplus[counts <= 1] = -np.inf
            donor = int(np.argmax(surplus))
            counts[donor] -= 1
            counts[idx] += 1
        slots = np.repeat(np.arange(n), counts)
    return NegativeTable(slots.astype(np.int64))


def _check_ids(n: int, ids: Sequence[int]) -> None:
    for idx in ids:
        if not (0 <= int(idx) < n):
            raise MinctxError(f"token id {idx} out of range [0, {n})")


def _sgns_step(
    inputs: np.ndarray,
    outputs: np.ndarray,
    center: int,
    targets: np.ndarray,
    labels: np.ndarray,
    lr: float,
) -> float:
    # gradients come from pre-update vectors; center is updated last
    v = inputs[center]
    u = outputs[targets]
    scores = u @ v
    coeff = (labels - expit(scores)) * lr
    signed = np.where(labels > 0, -scores, scores)
    loss = float(np.logaddexp(0.0, signed).sum())
    center_grad = coeff @ u
    np.add.at(outputs, targets, np.outer(coeff, v))
    inputs[center] += center_grad
    return loss


def sgns_loss(store: EmbeddingStore, center: int, context: int, negatives: Sequence[int]) -> float:
    """Negative log-likelihood of one (center, context, negatives) sample."""
    v = store.input_vectors[center]
    pos = float(store.output_vectors[context] @ v)
    loss = float(np.logaddexp(0.0, -pos))
    for neg in negatives:
        loss += float(np.logaddexp(0.0, store.output_vectors[neg] @ v))
    return loss


def sgns_update(
    store: EmbeddingStore,
    center: int,
    context: int,
    negatives: Sequence[int],
    lr: float,
) -> float:
    """
    One SGD step on log sig(u_o.v_c) + sum_n log sig(-u_n.v_c).

    Returns the sample's negative log-likelihood before the update.
    """
    if store.output_vectors is None:
        raise MinctxError("store has no output vectors (loaded stores cannot be trained)")
    if lr <= 0:
        raise ConfigError(f"lr must be > 0, got {lr}.")
    n = len(store.vocab)
    _check_ids(n, [center, context, *negatives])
    targets = np.asarray([context, *negatives], dtype=np.intp)
    labels = np.zeros(targets.shape[0], dtype=np.float64)
    labels[0] = 1.0
    return _sgns_step(store.input_vectors, store.output_vectors, int(center), targets, labels, lr)


class SkipGramTrainer:
    """
    Runs epochs of SGNS over a re-iterable corpus of token sequences.

    With one worker the run is fully determined by config.seed. With more
    workers, shards update the shared matrices without locks.
    """

    def __init__(self, vocab: Vocabulary, config: TrainConfig):
        self.vocab = vocab
        self.config = config
        self.store = init_store(vocab, config.dim, config.seed)
        self.table = build_negative_table(vocab, config.unigram_power, max(config.table_size, len(vocab)))
        self.labels = np.zeros(config.negatives + 1, dtype=np.float64)
        self.labels[0] = 1.0
        self.keep_prob = self._keep_probabilities()
        self.total_updates = 0
        self.done = 0

    def _keep_probabilities(self) -> Optional[np.ndarray]:
        if self.config.sample <= 0:
            return None
        counts = np.asarray(self.vocab.counts, dtype=np.float64)
        threshold = self.config.sample * counts.sum()
        return np.minimum(1.0, (np.sqrt(counts / threshold) + 1.0) * threshold / counts)

    def _to_ids(self, sentence: Sequence[str]) -> np.ndarray:
        get = self.vocab.get
        ids = [get(t) for t in sentence]
        return np.asarray([i for i in ids if i >= 0], dtype=np.intp)

    def _lr(self) -> float:
        cfg = self.config
        frac = min(1.0, self.done / max(1, self.total_updates))
        return max(cfg.min_lr, cfg.initial_lr - (cfg.initial_lr - cfg.min_lr) * frac)

    def _negatives(self, rng: np.random.Generator, context: int) -> np.ndarray:
        negs = self.table.sample(rng, self.config.negatives)
        if len(self.vocab) == 1:
            return negs
        clash = negs == context
        while clash.any():
            negs[clash] = self.table.sample(rng, int(clash.sum()))
            clash = negs == context
        return negs

    def _run(self, id_sentences: Iterable[np.ndarray], rng: np.random.Generator) -> Tuple[float, int]:
        inputs = self.store.input_vectors
        outputs = self.store.output_vectors
        window = self.config.window
        targets = np.empty(self.config.negatives + 1, dtype=np.intp)
        loss_sum = 0.0
        samples = 0
        for ids in id_sentences:
            if self.keep_prob is not None and ids.size:
                ids = ids[self.keep_prob[ids] >= rng.random(ids.size)]
            for center, context in skipgram_pairs(ids, window):
                targets[0] = context
                targets[1:] = self._negatives(rng, context)
                loss_sum += _sgns_step(inputs, outputs, int(center), targets, self.labels, self._lr())
                samples += 1
                self.done += 1
        return loss_sum, samples

    def count_updates(self, corpus: Iterable[Sequence[str]]) -> int:
        per_epoch = 0
        for sentence in corpus:
            n = len(self._to_ids(sentence))
            w = self.config.window
            per_epoch += sum(min(n - 1, i + w) - max(0, i - w) for i in range(n))
        return per_epoch

    def fit(self, corpus: Iterable[Sequence[str]]) -> EmbeddingStore:
        cfg = self.config
        per_epoch = self.count_updates(corpus)
        if per_epoch == 0:
            raise EmptyVocabularyError("empty training set after vocabulary filtering")
        self.total_updates = per_epoch * cfg.epochs
        logger.info(
            "training %d-dim SGNS on %d tokens, %d updates/epoch, %d epoch(s), %d worker(s)",
            cfg.dim, len(self.vocab), per_epoch, cfg.epochs, cfg.workers,
        )
        seeds = np.random.SeedSequence(cfg.seed).spawn(cfg.workers)
        rngs = [np.random.default_rng(s) for s in seeds]

        shards: Optional[List[List[np.ndarray]]] = None
        if cfg.workers > 1:
            id_sentences = [self._to_ids(s) for s in corpus]
            shards = [id_sentences[w::cfg.workers] for w in range(cfg.workers)]

        for epoch in range(cfg.epochs):
            if shards is None:
                loss_sum, samples = self._run((self._to_ids(s) for s in corpus), rngs[0])
            else:
                loss_sum, samples = self._run_parallel(shards, rngs)
            mean = loss_sum / max(1, samples)
            self.store.epoch_losses.append(mean)
            logger.info("epoch %d/%d: mean loss %.6f, lr %.6f", epoch + 1, cfg.epochs, mean, self._lr())

        if not (np.isfinite(self.store.input_vectors).all() and np.isfinite(self.store.output_vectors).all()):
            raise MinctxError("training diverged: non-finite parameters")
        return self.store

    def _run_parallel(self, shards: List[List[np.ndarray]], rngs: List[np.random.Generator]) -> Tuple[float, int]:
        with ThreadPoolExecutor(max_workers=len(shards)) as pool:
            totals = list(pool.map(lambda w: self._run(shards[w], rngs[w]), range(len(shards))))
        return sum(t[0] for t in totals), sum(t[1] for t in totals)


def train(
    corpus: Iterable[Sequence[str]],
    config: TrainConfig,
    vocab: Optional[Vocabulary] = None,
) -> EmbeddingStore:
    """
    Train SGNS embeddings over a re-iterable corpus of token sequences.

    For the reformatted corpus every sentence is [encoded MC, inner word],
    which yields exactly two directed updates per sentence and epoch.
    """
    if vocab is None:
        vocab = build_vocab((t for sentence in corpus for t in sentence), config.min_count)
    if len(vocab) == 0:
        raise EmptyVocabularyError("empty vocabulary")
    return SkipGramTrainer(vocab, config).fit(corpus)


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionError(f"dimension mismatch: {a.shape} vs {b.shape}")
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        raise MinctxError("cosine of a zero vector is undefined")
    return max(-1.0, min(1.0, float(a @ b) / (na * nb)))


def nearest(store: EmbeddingStore, token: str, topn: int = 10) -> List[Tuple[str, float]]:
    """Top-n tokens by cosine similarity to token, excluding itself."""
    query = store.vector(token)
    norms = np.linalg.norm(store.input_vectors, axis=1)
    qn = float(np.linalg.norm(query))
    if qn == 0.0:
        raise MinctxError(f"{token!r} has a zero vector")
    with np.errstate(divide="ignore", invalid="ignore"):
        sims = (store.input_vectors @ query) / (norms * qn)
    sims = np.where(norms > 0, sims, -np.inf)
    sims[store.vocab.id_of(token)] = -np.inf
    order = np.argsort(-sims, kind="stable")[:topn]
    return [(store.vocab.token(int(i)), float(sims[i])) for i in order if math.isfinite(sims[i])]


__all__ = [
    "EmbeddingStore",
    "NegativeTable",
    "SkipGramTrainer",
    "init_store",
    "build_negative_table",
    "sgns_loss",
    "sgns_update",
    "train",
    "cosine",
    "nearest",
]
