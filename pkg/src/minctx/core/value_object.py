# src/minctx/core/value_object.py
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional


class MinctxError(Exception):
    """Base class for every domain failure surfaced to the CLI."""


class ConfigError(MinctxError):
    """Raised when a parameter or a config file entry is invalid."""


class FormatError(MinctxError):
    """
    Raised when an input file does not follow its declared format.

    The message always names the 1-based line number (and the path when known).
    """

    def __init__(self, message: str, line: Optional[int] = None, path: Optional[str] = None):
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"line {line}: "
        elif where:
            where += " "
        super().__init__(f"{where}{message}")
        self.line = line
        self.path = path


class CorefParseError(FormatError):
    """Raised on unbalanced coreference brackets."""


class EmptyVocabularyError(MinctxError):
    """Raised when a vocabulary (or the training set built on it) is empty."""


class DimensionError(MinctxError):
    """Raised when vector or feature dimensions disagree."""


class MissingEmbeddingError(MinctxError):
    """Raised when a required token has no row in an embedding store."""


class DatasetError(MinctxError):
    """Raised when a dataset cannot be built or fitted as requested."""


class AnimacyLabel(enum.Enum):
    ANIMATE = "animate"
    INANIMATE = "inanimate"

    @staticmethod
    def from_spec(spec: str) -> "AnimacyLabel":
        try:
            return AnimacyLabel(spec.strip().lower())
        except ValueError as e:
            raise ConfigError(f"Unknown animacy label: {spec!r}") from e

    @property
    def sign(self) -> int:
        """+1 for animate, -1 for inanimate (the classifier's label map)."""
        return 1 if self is AnimacyLabel.ANIMATE else -1

    @staticmethod
    def from_sign(sign: float) -> "AnimacyLabel":
        # exact zero is a tie and goes to the majority class
        return AnimacyLabel.INANIMATE if sign < 0 else AnimacyLabel.ANIMATE


class ChainLabel(enum.Enum):
    ANIMATE = "animate"
    INANIMATE = "inanimate"
    UNLABELED = "unlabeled"
    CONFLICTED = "conflicted"

    @property
    def animacy(self) -> Optional[AnimacyLabel]:
        if self is ChainLabel.ANIMATE:
            return AnimacyLabel.ANIMATE
        if self is ChainLabel.INANIMATE:
            return AnimacyLabel.INANIMATE
        return None


@dataclass(frozen=True)
class GapConfig:
    """
    Range of distances k between the two enclosing words of a minimal context.

    k is the positional difference, so k=2 encloses exactly one inner word.
    """
    k_min: int = 2
    k_max: int = 2

    def __post_init__(self) -> None:
        if self.k_min < 2:
            raise ConfigError(f"k_min must be >= 2, got {self.k_min}.")
        if self.k_max < self.k_min:
            raise ConfigError(f"k_max must be >= k_min ({self.k_min}), got {self.k_max}.")


@dataclass(frozen=True)
class TrainConfig:
    """
    Hyperparameters of the skip-gram negative-sampling trainer.

    Only dim=200 comes from the experimental setup; the rest are the
    conventional word2vec defaults.
    """
    dim: int = 200
    epochs: int = 5
    negatives: int = 5
    initial_lr: float = 0.025
    min_lr: float = 0.025 * 1e-4
    seed: int = 1
    unigram_power: float = 0.75
    table_size: int = 10_000_000
    window: int = 1
    workers: int = 1
    min_count: int = 5
    sample: float = 0.0

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise ConfigError(f"dim must be >= 1, got {self.dim}.")
        if self.epochs < 1:
            raise ConfigError(f"epochs must be >= 1, got {self.epochs}.")
        if self.negatives < 1:
            raise ConfigError(f"negatives must be >= 1, got {self.negatives}.")
        if not (0.0 < self.min_lr < self.initial_lr):
            raise ConfigError(
                f"need 0 < min_lr < initial_lr, got min_lr={self.min_lr}, initial_lr={self.initial_lr}."
            )
        if self.unigram_power <= 0:
            raise ConfigError(f"unigram_power must be > 0, got {self.unigram_power}.")
        if self.table_size < 1:
            raise ConfigError(f"table_size must be >= 1, got {self.table_size}.")
        if self.window < 1:
            raise ConfigError(f"window must be >= 1, got {self.window}.")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}.")
        if self.min_count < 1:
            raise ConfigError(f"min_count must be >= 1, got {self.min_count}.")
        if self.sample < 0:
            raise ConfigError(f"sample must be >= 0, got {self.sample}.")


@dataclass(frozen=True)
class SplitConfig:
    test_per_class: int = 2018
    seed: int = 1

    def __post_init__(self) -> None:
        if self.test_per_class < 1:
            raise ConfigError(f"test_per_class must be >= 1, got {self.test_per_class}.")


@dataclass(frozen=True)
class ClassWeights:
    """
    Per-class penalty factors multiplying C in the hinge loss.

    Defaults (3 for inanimate, 1 for animate) offset the animate-heavy training data.
    """
    c_inanimate: float = 3.0
    c_animate: float = 1.0

    def __post_init__(self) -> None:
        if self.c_inanimate <= 0 or self.c_animate <= 0:
            raise ConfigError(
                f"class weights must be > 0, got inanimate={self.c_inanimate}, animate={self.c_animate}."
            )

    def of(self, label: AnimacyLabel) -> float:
        return self.c_animate if label is AnimacyLabel.ANIMATE else self.c_inanimate


@dataclass(frozen=True)
class SynthConfig:
    """
    Shape of the synthetic animacy benchmark.

    Every MC type gets its own left and right word, so enclosing words of
    classifier-test types never occur in classifier training.
    """
    n_animate_mcs: int = 40
    n_inanimate_mcs: int = 40
    n_neutral_mcs: int = 20
    nouns_per_class: int = 30
    sentences: int = 200_000
    noise: float = 0.1
    seed: int = 42
    examples_per_mc: int = 20
    test_types_per_class: int = 20

    def __post_init__(self) -> None:
        for name in ("n_animate_mcs", "n_inanimate_mcs", "n_neutral_mcs"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0, got {getattr(self, name)}.")
        if self.nouns_per_class < 1:
            raise ConfigError(f"nouns_per_class must be >= 1, got {self.nouns_per_class}.")
        if self.sentences < 1:
            raise ConfigError(f"sentences must be >= 1, got {self.sentences}.")
        if not (0.0 <= self.noise < 0.5):
            raise ConfigError(f"noise must be in [0, 0.5), got {self.noise}.")
        if self.examples_per_mc < 1:
            raise ConfigError(f"examples_per_mc must be >= 1, got {self.examples_per_mc}.")
        if self.test_types_per_class < 0:
            raise ConfigError(f"test_types_per_class must be >= 0, got {self.test_types_per_class}.")

    @property
    def n_types(self) -> int:
        return self.n_animate_mcs + self.n_inanimate_mcs + self.n_neutral_mcs


__all__ = [
    "MinctxError",
    "ConfigError",
    "FormatError",
    "CorefParseError",
    "EmptyVocabularyError",
    "DimensionError",
    "MissingEmbeddingError",
    "DatasetError",
    "AnimacyLabel",
    "ChainLabel",
    "GapConfig",
    "TrainConfig",
    "SplitConfig",
    "ClassWeights",
    "SynthConfig",
]
