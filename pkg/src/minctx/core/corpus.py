# src/minctx/core/corpus.py
"""
Tokenization, vocabularies and the reformatting of a corpus into
(minimal context, inner word) sentences.

A minimal context (MC) is the ordered pair of words enclosing a gap. In the
reformatted corpus it is written as one token "left*right", followed by one
word found inside the gap, so every output sentence has exactly two tokens.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Dict, Iterable, Iterator, List, Sequence, Tuple

from minctx.core.value_object import ConfigError, FormatError, GapConfig

SEPARATOR = "*"
ESCAPE = "\\"


def tokenize_line(text: str) -> List[str]:
    """Split on Unicode whitespace; nothing else is normalized."""
    return text.split()


@dataclass(frozen=True)
class MinimalContext:
    left: str
    right: str

    def encode(self) -> str:
        return encode_mc(self)


def _escape(word: str) -> str:
    return word.replace(ESCAPE, ESCAPE + ESCAPE).replace(SEPARATOR, ESCAPE + SEPARATOR)


def encode_mc(mc: MinimalContext) -> str:
    """
    Encode an MC as the single token "L*R".

    Literal "\\" and "*" inside the words are backslash-escaped, so the
    separator is always the first unescaped star.
    """
    return f"{_escape(mc.left)}{SEPARATOR}{_escape(mc.right)}"


def _split_escaped(token: str) -> Tuple[str, str]:
    left: List[str] = []
    right: List[str] = []
    current = left
    seen_separator = False
    i = 0
    while i < len(token):
        ch = token[i]
        if ch == ESCAPE:
            if i + 1 >= len(token) or token[i + 1] not in (ESCAPE, SEPARATOR):
                raise FormatError(f"invalid escape in MC token {token!r}")
            current.append(token[i + 1])
            i += 2
            continue
        if ch == SEPARATOR and not seen_separator:
            seen_separator = True
            current = right
        elif ch == SEPARATOR:
            raise FormatError(f"unescaped second separator in MC token {token!r}")
        else:
            current.append(ch)
        i += 1
    if not seen_separator:
        raise FormatError(f"not an MC token: {token!r}")
    return "".join(left), "".join(right)


def decode_mc(token: str) -> MinimalContext:
    """Exact inverse of encode_mc."""
    left, right = _split_escaped(token)
    if not left or not right:
        raise FormatError(f"MC token with an empty side: {token!r}")
    return MinimalContext(left, right)


def is_mc_token(token: str) -> bool:
    try:
        decode_mc(token)
    except FormatError:
        return False
    return True


def emit_gap_pairs(sentence: Sequence[str], gap: GapConfig) -> List[Tuple[MinimalContext, str]]:
    """
    Return every (MC, inner word) pair of one sentence.

    Order: increasing left position i, then increasing distance k, then
    increasing inner position m. Pairs never cross the sentence boundary.
    """
    n = len(sentence)
    out: List[Tuple[MinimalContext, str]] = []
    for i in range(n):
        for k in range(gap.k_min, gap.k_max + 1):
            j = i + k
            if j >= n:
                break
            mc = MinimalContext(sentence[i], sentence[j])
            for m in range(i + 1, j):
                out.append((mc, sentence[m]))
    return out


def expected_pair_count(n: int, gap: GapConfig) -> int:
    return sum(max(0, n - k) * (k - 1) for k in range(gap.k_min, gap.k_max + 1))


def format_pair_line(mc: MinimalContext, inner: str) -> str:
    return f"{encode_mc(mc)} {inner}\n"


def parse_pair_line(line: str, lineno: int = 0) -> Tuple[MinimalContext, str]:
    tokens = tokenize_line(line)
    if len(tokens) != 2:
        raise FormatError(f"expected 2 tokens, got {len(tokens)}", line=lineno or None)
    try:
        mc = decode_mc(tokens[0])
    except FormatError as e:
        raise FormatError(str(e), line=lineno or None) from e
    return mc, tokens[1]


def reformat_sentences(sentences: Iterable[Sequence[str]], gap: GapConfig) -> Iterator[Tuple[MinimalContext, str]]:
    for sentence in sentences:
        yield from emit_gap_pairs(sentence, gap)


class Vocabulary:
    """
    Frozen token <-> dense id map with frequency counts.

    IDs follow decreasing count, ties broken lexicographically.
    """

    def __init__(self, entries: Sequence[Tuple[str, int]]):
        self._tokens: List[str] = [t for t, _ in entries]
        self._counts: List[int] = [int(c) for _, c in entries]
        self._ids: Dict[str, int] = {}
        for i, token in enumerate(self._tokens):
            if token in self._ids:
                raise FormatError(f"duplicate token {token!r}")
            self._ids[token] = i

    @staticmethod
    def from_counts(counts: Counter, min_count: int = 1) -> "Vocabulary":
        kept = [(t, c) for t, c in counts.items() if c >= min_count]
        kept.sort(key=lambda tc: (-tc[1], tc[0]))
        return Vocabulary(kept)

    @property
    def entries(self) -> List[Tuple[str, int]]:
        return list(zip(self._tokens, self._counts))

    @property
    def tokens(self) -> List[str]:
        return list(self._tokens)

    @property
    def counts(self) -> List[int]:
        return list(self._counts)

    def id_of(self, token: str) -> int:
        return self._ids[token]

    def get(self, token: str, default: int = -1) -> int:
        return self._ids.get(token, default)

    def token(self, idx: int) -> str:
        return self._tokens[idx]

    def count(self, idx: int) -> int:
        return self._counts[idx]

    def __len__(self) -> int:
        return len(self._tokens)

    def __contains__(self, token: object) -> bool:
        return token in self._ids

    def __iter__(self) -> Iterator[str]:
        return iter(self._tokens)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Vocabulary):
            return NotImplemented
        return self._tokens == other._tokens and self._counts == other._counts

    def __repr__(self) -> str:  # pragma: no cover
        return f"Vocabulary(size={len(self)})"


def count_tokens(tokens: Iterable[str]) -> Counter:
    return Counter(tokens)


def build_vocab(tokens: Iterable[str], min_count: int = 5) -> Vocabulary:
    """Count, prune below min_count, assign ids by (-count, token)."""
    if min_count < 1:
        raise ConfigError(f"min_count must be >= 1, got {min_count}.")
    return Vocabulary.from_counts(count_tokens(tokens), min_count)


def build_vocab_sharded(shards: Iterable[Iterable[str]], min_count: int = 5) -> Vocabulary:
    """Merge per-shard counts; equals build_vocab over the concatenated stream."""
    if min_count < 1:
        raise ConfigError(f"min_count must be >= 1, got {min_count}.")
    total: Counter = Counter()
    for shard in shards:
        total.update(count_tokens(shard))
    return Vocabulary.from_counts(total, min_count)


def skipgram_pairs(sentence: Sequence[str], window: int) -> Iterator[Tuple[str, str]]:
    """Every (center, context) pair with 0 < |offset| <= window, in position order."""
    n = len(sentence)
    for i in range(n):
        lo = max(0, i - window)
        hi = min(n, i + window + 1)
        for j in range(lo, hi):
            if j != i:
                yield sentence[i], sentence[j]


__all__ = [
    "MinimalContext",
    "Vocabulary",
    "tokenize_line",
    "encode_mc",
    "decode_mc",
    "is_mc_token",
    "emit_gap_pairs",
    "expected_pair_count",
    "format_pair_line",
    "parse_pair_line",
    "reformat_sentences",
    "count_tokens",
    "build_vocab",
    "build_vocab_sharded",
    "skipgram_pairs",
]
