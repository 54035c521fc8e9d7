# src/minctx/core/synthetic.py
"""
Synthetic animacy benchmark.

Each MC type "l<t> ... r<t>" selects animate nouns, inanimate nouns, or
neither (neutral). Sentences are "l<t> noun r<t>"; with probability `noise`
a selective type encloses a noun from the other pool. Classifier-test MC
types are disjoint from classifier-train types, but every type occurs in the
embedding corpus, so only a representation that generalizes over MC
distributions can label the test markables.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from minctx.core.coref import MarkableExample
from minctx.core.value_object import AnimacyLabel, DatasetError, SynthConfig

logger = logging.getLogger(__name__)


@dataclass
class SyntheticBenchmark:
    corpus: List[str]
    train: List[MarkableExample]
    test: List[MarkableExample]
    type_labels: List[Optional[AnimacyLabel]]


def noun(label: AnimacyLabel, idx: int) -> str:
    return f"{label.value}{idx:03d}"


def left_word(t: int) -> str:
    return f"l{t:04d}"


def right_word(t: int) -> str:
    return f"r{t:04d}"


def _split_types(types: List[int], n_test: int, rng: np.random.Generator, label: AnimacyLabel):
    if n_test > len(types):
        raise DatasetError(
            f"infeasible config: {n_test} test type(s) requested but only {len(types)} {label.value} MC type(s)"
        )
    order = rng.permutation(len(types))
    test = sorted(types[int(i)] for i in order[:n_test])
    train = sorted(types[int(i)] for i in order[n_test:])
    return train, test


def gen_synthetic(cfg: SynthConfig) -> SyntheticBenchmark:
    if cfg.n_types == 0:
        raise DatasetError("infeasible config: no MC types")
    if cfg.sentences < cfg.n_types:
        raise DatasetError(
            f"infeasible config: {cfg.sentences} sentence(s) cannot cover {cfg.n_types} MC types"
        )
    rng = np.random.default_rng(cfg.seed)

    type_labels: List[Optional[AnimacyLabel]] = (
        [AnimacyLabel.ANIMATE] * cfg.n_animate_mcs
        + [AnimacyLabel.INANIMATE] * cfg.n_inanimate_mcs
        + [None] * cfg.n_neutral_mcs
    )
    animate_types = [t for t, lab in enumerate(type_labels) if lab is AnimacyLabel.ANIMATE]
    inanimate_types = [t for t, lab in enumerate(type_labels) if lab is AnimacyLabel.INANIMATE]
    _, test_a = _split_types(animate_types, cfg.test_types_per_class, rng, AnimacyLabel.ANIMATE)
    _, test_i = _split_types(inanimate_types, cfg.test_types_per_class, rng, AnimacyLabel.INANIMATE)
    test_types = set(test_a) | set(test_i)

    # every type at least once, the rest uniform
    seq = np.concatenate([np.arange(cfg.n_types), rng.integers(0, cfg.n_types, cfg.sentences - cfg.n_types)])
    seq = seq[rng.permutation(cfg.sentences)]
    flips = rng.random(cfg.sentences)
    noun_ids = rng.integers(0, cfg.nouns_per_class, cfg.sentences)

    corpus: List[str] = []
    train: List[MarkableExample] = []
    test: List[MarkableExample] = []
    emitted = np.zeros(cfg.n_types, dtype=np.int64)
    for s in range(cfg.sentences):
        t = int(seq[s])
        label = type_labels[t]
        if label is None:
            pool = AnimacyLabel.ANIMATE if flips[s] < 0.5 else AnimacyLabel.INANIMATE
        elif flips[s] < cfg.noise:
            pool = AnimacyLabel.INANIMATE if label is AnimacyLabel.ANIMATE else AnimacyLabel.ANIMATE
        else:
            pool = label
        word = noun(pool, int(noun_ids[s]))
        corpus.append(f"{left_word(t)} {word} {right_word(t)}")
        if label is not None and emitted[t] < cfg.examples_per_mc:
            emitted[t] += 1
            ex = MarkableExample(label=label, left=left_word(t), right=right_word(t), surface=word)
            (test if t in test_types else train).append(ex)

    logger.info(
        "synthetic benchmark: %d sentence(s), %d MC type(s); %d train / %d test example(s)",
        len(corpus), cfg.n_types, len(train), len(test),
    )
    return SyntheticBenchmark(corpus, train, test, type_labels)


__all__ = ["SyntheticBenchmark", "gen_synthetic", "noun", "left_word", "right_word"]
