# src/minctx/core/service.py
from __future__ import annotations

import logging
import os
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from minctx.core.clf import FitResult, LinearModel, fit_matrix
from minctx.core.corpus import reformat_sentences
from minctx.core.coref import MarkableExample, build_dataset, extract_from_documents
from minctx.core.embed import EmbeddingStore, nearest, train
from minctx.core.evaluation import SystemResult, accuracy, compare_systems, format_table, format_tsv
from minctx.core.feats import (
    BowRepresentation,
    ConcatRepresentation,
    MCRepresentation,
    OovPolicy,
    Representation,
    bow_vocabulary,
    check_repr,
)
from minctx.core.ports import (
    CorefSourcePort,
    CorpusSourcePort,
    EmbeddingRepoPort,
    MarkableRepoPort,
    ModelRepoPort,
    PairCorpusPort,
    ReportWriterPort,
)
from minctx.core.synthetic import SyntheticBenchmark, gen_synthetic
from minctx.core.value_object import (
    AnimacyLabel,
    ClassWeights,
    ConfigError,
    GapConfig,
    SplitConfig,
    SynthConfig,
    TrainConfig,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FitOptions:
    """How `fit` turns markables into features and trains the classifier."""
    representation: str = "mc"
    oov: OovPolicy = OovPolicy.ZERO
    bow_vocab: str = "train"
    weights: ClassWeights = ClassWeights()
    reg: float = 1.0
    tol: float = 1e-4
    max_epochs: int = 1000
    seed: int = 1

    def __post_init__(self) -> None:
        check_repr(self.representation)
        if self.bow_vocab not in ("train", "embeddings"):
            raise ConfigError(f"bow_vocab must be 'train' or 'embeddings', got {self.bow_vocab!r}")
        if self.reg <= 0:
            raise ConfigError(f"C must be > 0, got {self.reg}.")
        if self.tol <= 0:
            raise ConfigError(f"tol must be > 0, got {self.tol}.")
        if self.max_epochs < 1:
            raise ConfigError(f"max_epochs must be >= 1, got {self.max_epochs}.")


@dataclass
class EvalOutcome:
    results: List[SystemResult]
    table: str
    tsv: str


def _relative_to(model_path: str, path: str) -> str:
    """`path` as seen from the directory of `model_path`, so the sidecar survives a change of cwd."""
    base = os.path.dirname(os.path.abspath(model_path))
    try:
        return os.path.relpath(os.path.abspath(path), base)
    except ValueError:
        # different drive on Windows
        return os.path.abspath(path)


def _resolve(model_path: str, path: Optional[str]) -> Optional[str]:
    if not path or os.path.isabs(path):
        return path
    return os.path.join(os.path.dirname(model_path), path)


def _require(path: Optional[str], what: str) -> str:
    if not path:
        raise ConfigError(f"missing {what} path")
    if not os.path.exists(path):
        raise ConfigError(f"{what} not found: {path}")
    return path


class PipelineService:
    """
    Orchestrates the stages; every stage reads and writes files through ports
    so each one can be re-run on its own.
    """

    def __init__(
        self,
        corpus: CorpusSourcePort,
        pairs: PairCorpusPort,
        embeddings: EmbeddingRepoPort,
        models: ModelRepoPort,
        markables: MarkableRepoPort,
        coref: CorefSourcePort,
        reports: ReportWriterPort,
    ):
        self.corpus = corpus
        self.pairs = pairs
        self.embeddings = embeddings
        self.models = models
        self.markables = markables
        self.coref = coref
        self.reports = reports
        self._store_cache: Dict[str, EmbeddingStore] = {}

    # ------------------------------
    # Embedding stages
    # ------------------------------

    def reformat(self, corpus_in: str, pairs_out: str, gap: GapConfig) -> int:
        sentences = self.corpus.sentences(_require(corpus_in, "corpus"))
        count = self.pairs.write_pairs(pairs_out, reformat_sentences(sentences, gap))
        logger.info("wrote %d pair(s) with %d <= k <= %d to %s", count, gap.k_min, gap.k_max, pairs_out)
        return count

    def train_mc(self, pairs_in: str, out: str, cfg: TrainConfig, mc_only: bool = True) -> Tuple[EmbeddingStore, int]:
        store = train(self.pairs.read_pairs(_require(pairs_in, "pair corpus")), cfg)
        rows = self.embeddings.save(store, out, mc_only=mc_only)
        logger.info("saved %d of %d row(s) to %s", rows, len(store), out)
        return store, rows

    def train_words(self, corpus_in: str, out: str, cfg: TrainConfig) -> Tuple[EmbeddingStore, int]:
        store = train(self.corpus.sentences(_require(corpus_in, "corpus")), cfg)
        rows = self.embeddings.save(store, out)
        logger.info("saved %d row(s) to %s", rows, out)
        return store, rows

    def neighbors(self, embeddings_in: str, token: str, topn: int) -> List[Tuple[str, float]]:
        return nearest(self._store(embeddings_in), token, topn)

    # ------------------------------
    # Markable stages
    # ------------------------------

    def extract(self, conll_in: str, out: str, word_column: int = 3, coref_column: int = -1) -> int:
        docs = self.coref.documents(_require(conll_in, "CoNLL input"), word_column, coref_column)
        return self.markables.write(out, extract_from_documents(docs))

    def dataset(
        self, markables_in: str, mc_embeddings: str, train_out: str, test_out: str, split: SplitConfig
    ) -> Tuple[int, int]:
        examples = self.markables.read(_require(markables_in, "markables"))
        store = self._store(mc_embeddings)
        train_set, test_set = build_dataset(examples, store.vocab, split)
        return self.markables.write(train_out, train_set), self.markables.write(test_out, test_set)

    def synth(self, cfg: SynthConfig, out_dir: str) -> SyntheticBenchmark:
        bench = gen_synthetic(cfg)
        self.reports.write_text(os.path.join(out_dir, "corpus.txt"), "".join(line + "\n" for line in bench.corpus))
        self.markables.write(os.path.join(out_dir, "train.tsv"), bench.train)
        self.markables.write(os.path.join(out_dir, "test.tsv"), bench.test)
        return bench

    # ------------------------------
    # Classification stages
    # ------------------------------

    def fit(
        self,
        train_in: str,
        model_out: str,
        opts: FitOptions,
        mc_embeddings: Optional[str] = None,
        word_embeddings: Optional[str] = None,
    ) -> FitResult:
        examples = self.markables.read(_require(train_in, "training markables"))
        meta = {"repr": opts.representation}
        if opts.representation == "mc":
            rep: Representation = MCRepresentation(self._store(mc_embeddings, "MC embeddings"))
            meta["embeddings"] = _relative_to(model_out, _require(mc_embeddings, "MC embeddings"))
        elif opts.representation == "concat":
            rep = ConcatRepresentation(self._store(word_embeddings, "word embeddings"), opts.oov)
            meta["embeddings"] = _relative_to(model_out, _require(word_embeddings, "word embeddings"))
            meta["oov"] = opts.oov.value
        else:
            if opts.bow_vocab == "embeddings":
                vocab = self._store(word_embeddings, "word embeddings").vocab
            else:
                vocab = bow_vocabulary(examples)
            rep = BowRepresentation(vocab)
            self.embeddings.save_vocab(vocab, model_out + ".vocab")
            meta["vocab"] = _relative_to(model_out, model_out + ".vocab")

        X = rep.matrix(examples)
        result = fit_matrix(
            X, [ex.label for ex in examples], opts.weights, opts.reg, opts.tol, opts.max_epochs, opts.seed
        )
        self.models.save(result.model, model_out, meta)
        return result

    def representation_for(self, meta: Dict[str, str], model_path: str = "") -> Representation:
        """Rebuild the featurizer recorded in a model sidecar; relative paths are taken from the model's directory."""
        kind = check_repr(meta.get("repr", ""))
        if kind == "mc":
            return MCRepresentation(self._store(_resolve(model_path, meta.get("embeddings")), "MC embeddings"))
        if kind == "concat":
            oov = meta.get("oov", OovPolicy.ZERO.value)
            try:
                policy = OovPolicy(oov)
            except ValueError:
                raise ConfigError(f"invalid oov policy {oov!r} in model metadata") from None
            store = self._store(_resolve(model_path, meta.get("embeddings")), "word embeddings")
            return ConcatRepresentation(store, policy)
        vocab_path = _require(_resolve(model_path, meta.get("vocab")), "BOW vocabulary")
        return BowRepresentation(self.embeddings.load_vocab(vocab_path))

    def predict(self, model: LinearModel, rep: Representation, examples: Sequence[MarkableExample]):
        return model.predict_matrix(rep.matrix(examples))

    def evaluate(
        self,
        test_in: str,
        systems: Sequence[Tuple[str, str]],
        compare: Sequence[str] = (),
        alpha: float = 0.05,
        report_out: Optional[str] = None,
        tsv_out: Optional[str] = None,
    ) -> EvalOutcome:
        if not systems:
            raise ConfigError("no systems to evaluate")
        names = [name for name, _ in systems]
        if len(set(names)) != len(names):
            raise ConfigError("system names must be unique")
        examples = self.markables.read(_require(test_in, "test markables"))
        golds = [ex.label for ex in examples]
        results: List[SystemResult] = []
        for name, model_path in systems:
            model, meta = self.models.load(_require(model_path, f"model for {name}"))
            preds = self.predict(model, self.representation_for(meta, model_path), examples)
            results.append(SystemResult(name, accuracy(preds, golds), preds))
            report = results[-1].report
            logger.info(
                "%s: accuracy %.4f on %d example(s), recall animate %.4f inanimate %.4f",
                name, report.accuracy, report.n,
                report.recall(AnimacyLabel.ANIMATE), report.recall(AnimacyLabel.INANIMATE),
            )
        compare_systems(results, golds, list(compare), alpha)
        outcome = EvalOutcome(results, format_table(results, list(compare), alpha), format_tsv(results))
        if report_out:
            self.reports.write_text(report_out, outcome.table)
        if tsv_out:
            self.reports.write_text(tsv_out, outcome.tsv)
        return outcome

    def _store(self, path: Optional[str], what: str = "embeddings") -> EmbeddingStore:
        path = _require(path, what)
        if path not in self._store_cache:
            self._store_cache[path] = self.embeddings.load(path)
        return self._store_cache[path]


__all__ = ["FitOptions", "PipelineService", "EvalOutcome"]
