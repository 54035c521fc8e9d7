# src/minctx/core/coref.py
"""
Coreference chains from CoNLL-2012 style column files, pronoun-triggered
animacy labels, and the markable examples built from them.

Coreference column convention: "-" for no tag, otherwise "|"-joined tags of
the forms "(id", "id)" and "(id)". Spans are matched per chain id with a
LIFO stack, so nesting works within one id and crossing works across ids.
"""
from __future__ import annotations

import logging
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from minctx.core.corpus import MinimalContext, Vocabulary, encode_mc
from minctx.core.value_object import (
    AnimacyLabel,
    ChainLabel,
    CorefParseError,
    DatasetError,
    FormatError,
    SplitConfig,
)

logger = logging.getLogger(__name__)

ANIMATE_TRIGGERS = frozenset({"she", "her", "he", "him", "his"})
INANIMATE_TRIGGERS = frozenset({"it", "its"})


@dataclass(frozen=True)
class Mention:
    doc_id: str
    sentence_index: int
    start: int
    end: int  # inclusive
    surface: Tuple[str, ...]

    @property
    def text(self) -> str:
        return " ".join(self.surface)


@dataclass
class Chain:
    chain_id: str
    mentions: List[Mention] = field(default_factory=list)


@dataclass
class CorefDocument:
    doc_id: str
    sentences: List[List[str]] = field(default_factory=list)
    chains: List[Chain] = field(default_factory=list)


@dataclass(frozen=True)
class MarkableExample:
    label: AnimacyLabel
    left: str
    right: str
    surface: str

    @property
    def mc(self) -> MinimalContext:
        return MinimalContext(self.left, self.right)

    @property
    def encoded_mc(self) -> str:
        return encode_mc(self.mc)


class _DocumentBuilder:
    def __init__(self, doc_id: str, word_column: int, coref_column: int, path: Optional[str]):
        self.doc = CorefDocument(doc_id)
        self.word_column = word_column
        self.coref_column = coref_column
        self.path = path
        self.current: List[str] = []
        self.stacks: Dict[str, List[Tuple[int, int, int]]] = defaultdict(list)
        self.chains: Dict[str, Chain] = {}

    def _chain(self, cid: str) -> Chain:
        if cid not in self.chains:
            self.chains[cid] = Chain(f"{self.doc.doc_id}/{cid}")
        return self.chains[cid]

    def _add(self, cid: str, sent: int, start: int, end: int, lineno: int) -> None:
        if sent != len(self.doc.sentences):
            raise CorefParseError(f"mention of chain {cid} crosses a sentence boundary", line=lineno, path=self.path)
        surface = tuple(self.current[start:end + 1])
        self._chain(cid).mentions.append(Mention(self.doc.doc_id, sent, start, end, surface))

    def row(self, cols: List[str], lineno: int) -> None:
        try:
            word = cols[self.word_column]
            tag = cols[self.coref_column]
        except IndexError:
            raise FormatError(f"row has {len(cols)} columns", line=lineno, path=self.path) from None
        sent = len(self.doc.sentences)
        tok = len(self.current)
        self.current.append(word)
        if tag == "-":
            return
        for part in tag.split("|"):
            opens = part.startswith("(")
            closes = part.endswith(")")
            cid = part.strip("()")
            if not cid:
                raise CorefParseError(f"malformed coreference tag {part!r}", line=lineno, path=self.path)
            if opens and closes:
                self._chain(cid)
                self._add(cid, sent, tok, tok, lineno)
            elif opens:
                self._chain(cid)
                self.stacks[cid].append((sent, tok, lineno))
            elif closes:
                if not self.stacks[cid]:
                    raise CorefParseError(f"closing tag {part!r} without an open mention", line=lineno, path=self.path)
                start_sent, start, _ = self.stacks[cid].pop()
                self._add(cid, start_sent, start, tok, lineno)
            else:
                raise CorefParseError(f"malformed coreference tag {part!r}", line=lineno, path=self.path)

    def end_sentence(self) -> None:
        if self.current:
            self.doc.sentences.append(self.current)
            self.current = []

    def finish(self, lineno: int) -> CorefDocument:
        self.end_sentence()
        for cid, stack in self.stacks.items():
            if stack:
                raise CorefParseError(
                    f"unmatched '({cid}' opened at line {stack[-1][2]}", line=lineno, path=self.path
                )
        self.doc.chains = [c for c in self.chains.values() if c.mentions]
        return self.doc


def parse_coref_documents(
    lines: Iterable[str],
    word_column: int = 3,
    coref_column: int = -1,
    path: Optional[str] = None,
) -> List[CorefDocument]:
    """
    Parse "#begin document" ... "#end document" blocks into sentences and chains.

    Rows outside any document block are collected into an implicit document.
    """
    docs: List[CorefDocument] = []
    builder: Optional[_DocumentBuilder] = None
    lineno = 0
    for lineno, raw in enumerate(lines, start=1):
        line = raw.rstrip("\n")
        stripped = line.strip()
        if stripped.startswith("#begin document"):
            if builder is not None:
                docs.append(builder.finish(lineno))
            doc_id = stripped[len("#begin document"):].strip() or f"doc{len(docs)}"
            builder = _DocumentBuilder(doc_id, word_column, coref_column, path)
            continue
        if stripped.startswith("#end document"):
            if builder is not None:
                docs.append(builder.finish(lineno))
                builder = None
            continue
        if stripped.startswith("#"):
            continue
        if not stripped:
            if builder is not None:
                builder.end_sentence()
            continue
        if builder is None:
            builder = _DocumentBuilder(f"doc{len(docs)}", word_column, coref_column, path)
        builder.row(stripped.split(), lineno)
    if builder is not None:
        docs.append(builder.finish(lineno + 1))
    return docs


def to_bracket_tags(sentences: Sequence[Sequence[str]], chains: Iterable[Chain]) -> List[List[str]]:
    """
    Serialize mentions back to one coreference cell per token.

    Per token: closing tags (inner first), singletons, then opening tags
    (outer first), which the LIFO parser reads back into the same spans.
    """
    closes: Dict[Tuple[int, int], List[Tuple[int, str, str]]] = defaultdict(list)
    opens: Dict[Tuple[int, int], List[Tuple[int, str, str]]] = defaultdict(list)
    singles: Dict[Tuple[int, int], List[Tuple[str, str]]] = defaultdict(list)
    for chain in chains:
        cid = chain.chain_id.rsplit("/", 1)[-1]
        for m in chain.mentions:
            if m.start == m.end:
                singles[(m.sentence_index, m.start)].append((cid, f"({cid})"))
            else:
                opens[(m.sentence_index, m.start)].append((-m.end, cid, f"({cid}"))
                closes[(m.sentence_index, m.end)].append((-m.start, cid, f"{cid})"))
    cells: List[List[str]] = []
    for s, sentence in enumerate(sentences):
        row = []
        for t in range(len(sentence)):
            parts = [tag for _, _, tag in sorted(closes.get((s, t), []))]
            parts += [tag for _, tag in sorted(singles.get((s, t), []))]
            parts += [tag for _, _, tag in sorted(opens.get((s, t), []))]
            row.append("|".join(parts) if parts else "-")
        cells.append(row)
    return cells


def label_chain(chain: Chain) -> ChainLabel:
    """Animate on she/her/he/him/his, inanimate on it/its, case-insensitive."""
    surfaces = {m.text.lower() for m in chain.mentions}
    animate = bool(surfaces & ANIMATE_TRIGGERS)
    inanimate = bool(surfaces & INANIMATE_TRIGGERS)
    if animate and inanimate:
        return ChainLabel.CONFLICTED
    if animate:
        return ChainLabel.ANIMATE
    if inanimate:
        return ChainLabel.INANIMATE
    return ChainLabel.UNLABELED


def extract_examples(sentences: Sequence[Sequence[str]], chains: Iterable[Chain]) -> List[MarkableExample]:
    """
    One example per mention of a labeled chain that has a word directly left
    and directly right of its full span in the same sentence.
    """
    out: List[MarkableExample] = []
    for chain in chains:
        label = label_chain(chain).animacy
        if label is None:
            continue
        for m in chain.mentions:
            sentence = sentences[m.sentence_index]
            if m.start == 0 or m.end + 1 >= len(sentence):
                continue
            out.append(
                MarkableExample(
                    label=label,
                    left=sentence[m.start - 1],
                    right=sentence[m.end + 1],
                    surface="_".join(m.surface),
                )
            )
    return out


def extract_from_documents(docs: Iterable[CorefDocument]) -> List[MarkableExample]:
    examples: List[MarkableExample] = []
    stats: Dict[ChainLabel, int] = defaultdict(int)
    n_docs = 0
    for doc in docs:
        n_docs += 1
        for chain in doc.chains:
            stats[label_chain(chain)] += 1
        examples.extend(extract_examples(doc.sentences, doc.chains))
    logger.info(
        "%d document(s), %d chain(s): %d animate, %d inanimate, %d conflicted, %d unlabeled; %d markable(s)",
        n_docs, sum(stats.values()), stats[ChainLabel.ANIMATE], stats[ChainLabel.INANIMATE],
        stats[ChainLabel.CONFLICTED], stats[ChainLabel.UNLABELED], len(examples),
    )
    return examples


def build_dataset(
    examples: Sequence[MarkableExample],
    mc_vocab: Vocabulary,
    split: SplitConfig,
) -> Tuple[List[MarkableExample], List[MarkableExample]]:
    """
    Keep examples whose encoded MC has an embedding, shuffle by seed and
    reserve test_per_class examples of each class as a balanced test set.
    """
    filtered = [e for e in examples if e.encoded_mc in mc_vocab]
    per_class = {label: sum(1 for e in filtered if e.label is label) for label in AnimacyLabel}
    short = {l.value: n for l, n in per_class.items() if n < split.test_per_class}
    if short:
        detail = ", ".join(f"{name}: {n} < {split.test_per_class}" for name, n in sorted(short.items()))
        raise DatasetError(f"not enough examples for a balanced test set ({detail})")

    rng = np.random.default_rng(split.seed)
    order = rng.permutation(len(filtered))
    taken = {label: 0 for label in AnimacyLabel}
    train: List[MarkableExample] = []
    test: List[MarkableExample] = []
    for idx in order:
        ex = filtered[int(idx)]
        if taken[ex.label] < split.test_per_class:
            taken[ex.label] += 1
            test.append(ex)
        else:
            train.append(ex)
    logger.info(
        "%d of %d example(s) have an MC embedding; train %d, test %d",
        len(filtered), len(examples), len(train), len(test),
    )
    return train, test


__all__ = [
    "ANIMATE_TRIGGERS",
    "INANIMATE_TRIGGERS",
    "Mention",
    "Chain",
    "CorefDocument",
    "MarkableExample",
    "parse_coref_documents",
    "to_bracket_tags",
    "label_chain",
    "extract_examples",
    "extract_from_documents",
    "build_dataset",
]
