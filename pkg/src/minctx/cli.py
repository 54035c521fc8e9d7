from __future__ import annotations

import argparse
import logging
import sys
from typing import Dict, List, Optional, Sequence, Tuple

from minctx.core.value_object import (
    ClassWeights,
    ConfigError,
    GapConfig,
    MinctxError,
    SplitConfig,
    SynthConfig,
    TrainConfig,
)
from minctx.core.feats import REPRESENTATIONS, OovPolicy
from minctx.core.service import FitOptions, PipelineService

from minctx.adapters.config_file import read_config
from minctx.adapters.fs_conll import ConllCorefSource
from minctx.adapters.fs_corpus import FilesystemCorpusSource, FilesystemPairCorpus
from minctx.adapters.fs_embeddings import TextEmbeddingRepo
from minctx.adapters.fs_markables import TsvMarkableRepo
from minctx.adapters.fs_models import TextModelRepo
from minctx.adapters.fs_reports import FilesystemReportWriter

LOG_FORMAT = "%(asctime)s : %(levelname)s : %(message)s"


def _common_parent() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", default=None, help="Optional key=value file; flags override it")
    p.add_argument("-v", "--verbose", action="count", default=0, help="-v for progress, -vv for debug output")
    return p


def _train_parent() -> argparse.ArgumentParser:
    d = TrainConfig()
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--dim", type=int, default=d.dim, help=f"Embedding size (default: {d.dim})")
    p.add_argument("--epochs", type=int, default=d.epochs)
    p.add_argument("--negatives", type=int, default=d.negatives)
    p.add_argument("--lr", type=float, default=d.initial_lr, help="Initial learning rate")
    p.add_argument("--min-lr", type=float, default=d.min_lr, help="Final learning rate")
    p.add_argument("--seed", type=int, default=d.seed)
    p.add_argument("--power", type=float, default=d.unigram_power, help="Unigram table exponent")
    p.add_argument("--table-size", type=int, default=d.table_size)
    p.add_argument("--window", type=int, default=d.window)
    p.add_argument("--workers", type=int, default=d.workers, help="More than 1 is fast but not reproducible")
    p.add_argument("--min-count", type=int, default=d.min_count)
    p.add_argument("--sample", type=float, default=d.sample, help="Subsampling threshold, 0 disables")
    return p


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="minctx",
        description="Minimal-context embeddings and animacy classification of markables."
    )
    sub = p.add_subparsers(dest="cmd", required=True)
    common = _common_parent()
    training = _train_parent()

    # reformat
    p_ref = sub.add_parser("reformat", parents=[common], help="Rewrite a corpus as (MC, inner word) sentences")
    p_ref.add_argument("--corpus", required=True, help="UTF-8 text, one sentence per line")
    p_ref.add_argument("--out", required=True, help="Pair corpus to write")
    p_ref.add_argument("--k-min", type=int, default=2)
    p_ref.add_argument("--k-max", type=int, default=2)
    p_ref.set_defaults(handler=_handle_reformat)

    # train-mc
    p_mc = sub.add_parser("train-mc", parents=[common, training], help="Train MC embeddings on a pair corpus")
    p_mc.add_argument("--pairs", required=True)
    p_mc.add_argument("--out", required=True)
    p_mc.add_argument("--keep-words", action="store_true", help="Also save the word rows trained alongside the MCs")
    p_mc.set_defaults(handler=_handle_train_mc)

    # train-words
    p_w = sub.add_parser("train-words", parents=[common, training], help="Train word embeddings on the original corpus")
    p_w.add_argument("--corpus", required=True)
    p_w.add_argument("--out", required=True)
    p_w.set_defaults(handler=_handle_train_words)

    # extract
    p_ex = sub.add_parser("extract", parents=[common], help="Markables and MCs from CoNLL-2012 style files")
    p_ex.add_argument("--conll", required=True, help="A file or a directory of *_conll files")
    p_ex.add_argument("--out", required=True, help="Markables TSV to write")
    p_ex.add_argument("--word-column", type=int, default=3)
    p_ex.add_argument("--coref-column", type=int, default=-1)
    p_ex.set_defaults(handler=_handle_extract)

    # dataset
    p_ds = sub.add_parser("dataset", parents=[common], help="Embedding-filtered train / balanced test split")
    p_ds.add_argument("--markables", required=True)
    p_ds.add_argument("--mc-embeddings", required=True)
    p_ds.add_argument("--train-out", required=True)
    p_ds.add_argument("--test-out", required=True)
    p_ds.add_argument("--test-per-class", type=int, default=SplitConfig().test_per_class)
    p_ds.add_argument("--seed", type=int, default=SplitConfig().seed)
    p_ds.set_defaults(handler=_handle_dataset)

    # fit
    cw = ClassWeights()
    p_fit = sub.add_parser("fit", parents=[common], help="Train a weighted linear classifier")
    p_fit.add_argument("--repr", choices=REPRESENTATIONS, default="mc")
    p_fit.add_argument("--train", required=True)
    p_fit.add_argument("--model-out", required=True)
    p_fit.add_argument("--mc-embeddings", default=None)
    p_fit.add_argument("--word-embeddings", default=None)
    p_fit.add_argument("--oov", choices=[o.value for o in OovPolicy], default=OovPolicy.ZERO.value)
    p_fit.add_argument("--bow-vocab", choices=["train", "embeddings"], default="train")
    p_fit.add_argument("--c-inanimate", type=float, default=cw.c_inanimate)
    p_fit.add_argument("--c-animate", type=float, default=cw.c_animate)
    p_fit.add_argument("--C", dest="reg", type=float, default=1.0)
    p_fit.add_argument("--tol", type=float, default=1e-4)
    p_fit.add_argument("--max-epochs", type=int, default=1000)
    p_fit.add_argument("--seed", type=int, default=1)
    p_fit.set_defaults(handler=_handle_fit)

    # eval
    p_ev = sub.add_parser("eval", parents=[common], help="Accuracy table with McNemar significance marks")
    p_ev.add_argument("--test", required=True)
    p_ev.add_argument("--system", action="append", required=True, help="NAME=MODEL_PATH, repeatable")
    p_ev.add_argument("--compare", action="append", default=None, help="Reference system NAME, repeatable")
    p_ev.add_argument("--alpha", type=float, default=0.05)
    p_ev.add_argument("--report-out", default=None)
    p_ev.add_argument("--tsv-out", default=None)
    p_ev.set_defaults(handler=_handle_eval)

    # synth
    sc = SynthConfig()
    p_syn = sub.add_parser("synth", parents=[common], help="Write the synthetic benchmark")
    p_syn.add_argument("--out-dir", required=True)
    p_syn.add_argument("--n-animate-mcs", type=int, default=sc.n_animate_mcs)
    p_syn.add_argument("--n-inanimate-mcs", type=int, default=sc.n_inanimate_mcs)
    p_syn.add_argument("--n-neutral-mcs", type=int, default=sc.n_neutral_mcs)
    p_syn.add_argument("--nouns-per-class", type=int, default=sc.nouns_per_class)
    p_syn.add_argument("--sentences", type=int, default=sc.sentences)
    p_syn.add_argument("--noise", type=float, default=sc.noise)
    p_syn.add_argument("--examples-per-mc", type=int, default=sc.examples_per_mc)
    p_syn.add_argument("--test-types-per-class", type=int, default=sc.test_types_per_class)
    p_syn.add_argument("--seed", type=int, default=sc.seed)
    p_syn.set_defaults(handler=_handle_synth)

    # neighbors
    p_nb = sub.add_parser("neighbors", parents=[common], help="Nearest tokens by cosine similarity")
    p_nb.add_argument("--embeddings", required=True)
    p_nb.add_argument("--token", required=True)
    p_nb.add_argument("--topn", type=int, default=10)
    p_nb.set_defaults(handler=_handle_neighbors)

    return p


def _wire_service() -> PipelineService:
    # Instantiate filesystem adapters
    return PipelineService(
        corpus=FilesystemCorpusSource(),
        pairs=FilesystemPairCorpus(),
        embeddings=TextEmbeddingRepo(),
        models=TextModelRepo(),
        markables=TsvMarkableRepo(),
        coref=ConllCorefSource(),
        reports=FilesystemReportWriter(),
    )


def _train_config(args: argparse.Namespace) -> TrainConfig:
    return TrainConfig(
        dim=args.dim,
        epochs=args.epochs,
        negatives=args.negatives,
        initial_lr=args.lr,
        min_lr=args.min_lr,
        seed=args.seed,
        unigram_power=args.power,
        table_size=args.table_size,
        window=args.window,
        workers=args.workers,
        min_count=args.min_count,
        sample=args.sample,
    )


def _parse_systems(specs: Sequence[str]) -> List[Tuple[str, str]]:
    systems = []
    for spec in specs:
        name, sep, path = spec.partition("=")
        if not sep or not name or not path:
            raise ConfigError(f"--system expects NAME=MODEL_PATH, got {spec!r}")
        systems.append((name, path))
    return systems


def _handle_reformat(args: argparse.Namespace) -> None:
    svc = _wire_service()
    count = svc.reformat(args.corpus, args.out, GapConfig(args.k_min, args.k_max))
    print(f"wrote {count} pairs to {args.out}")


def _handle_train_mc(args: argparse.Namespace) -> None:
    svc = _wire_service()
    store, rows = svc.train_mc(args.pairs, args.out, _train_config(args), mc_only=not args.keep_words)
    print(f"saved {rows} of {len(store)} vectors (dim {store.dim}) to {args.out}")


def _handle_train_words(args: argparse.Namespace) -> None:
    svc = _wire_service()
    store, rows = svc.train_words(args.corpus, args.out, _train_config(args))
    print(f"saved {rows} vectors (dim {store.dim}) to {args.out}")


def _handle_extract(args: argparse.Namespace) -> None:
    svc = _wire_service()
    count = svc.extract(args.conll, args.out, args.word_column, args.coref_column)
    print(f"wrote {count} markables to {args.out}")


def _handle_dataset(args: argparse.Namespace) -> None:
    svc = _wire_service()
    n_train, n_test = svc.dataset(
        args.markables, args.mc_embeddings, args.train_out, args.test_out,
        SplitConfig(test_per_class=args.test_per_class, seed=args.seed),
    )
    print(f"train {n_train}, test {n_test}")


def _handle_fit(args: argparse.Namespace) -> None:
    svc = _wire_service()
    opts = FitOptions(
        representation=args.repr,
        oov=OovPolicy(args.oov),
        bow_vocab=args.bow_vocab,
        weights=ClassWeights(c_inanimate=args.c_inanimate, c_animate=args.c_animate),
        reg=args.reg,
        tol=args.tol,
        max_epochs=args.max_epochs,
        seed=args.seed,
    )
    result = svc.fit(args.train, args.model_out, opts, args.mc_embeddings, args.word_embeddings)
    state = "converged" if result.converged else "epoch cap reached"
    print(f"fitted {args.repr} model (dim {result.model.dim}, {result.epochs} sweeps, {state}) to {args.model_out}")


def _handle_eval(args: argparse.Namespace) -> None:
    svc = _wire_service()
    outcome = svc.evaluate(
        args.test, _parse_systems(args.system), args.compare or [], args.alpha, args.report_out, args.tsv_out
    )
    sys.stdout.write(outcome.table)


def _handle_synth(args: argparse.Namespace) -> None:
    svc = _wire_service()
    cfg = SynthConfig(
        n_animate_mcs=args.n_animate_mcs,
        n_inanimate_mcs=args.n_inanimate_mcs,
        n_neutral_mcs=args.n_neutral_mcs,
        nouns_per_class=args.nouns_per_class,
        sentences=args.sentences,
        noise=args.noise,
        seed=args.seed,
        examples_per_mc=args.examples_per_mc,
        test_types_per_class=args.test_types_per_class,
    )
    bench = svc.synth(cfg, args.out_dir)
    print(f"wrote {len(bench.corpus)} sentences, {len(bench.train)} train and {len(bench.test)} test markables to {args.out_dir}")


def _handle_neighbors(args: argparse.Namespace) -> None:
    svc = _wire_service()
    for token, sim in svc.neighbors(args.embeddings, args.token, args.topn):
        print(f"{token}\t{sim:.6f}")


def _subcommand_parser(parser: argparse.ArgumentParser) -> argparse._SubParsersAction:
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return action
    raise RuntimeError("parser has no subcommands")


def _on_command_line(action: argparse.Action, argv: Sequence[str]) -> bool:
    return any(arg == opt or arg.startswith(opt + "=") for arg in argv for opt in action.option_strings)


def _apply_config(parser: argparse.ArgumentParser, cmd: str, values: Dict[str, str], argv: Sequence[str] = ()) -> None:
    """Turn config-file entries into subcommand defaults, so explicit flags still win."""
    sub = _subcommand_parser(parser).choices[cmd]
    actions = {a.dest: a for a in sub._actions}
    for flag in list(values):
        if flag in ("c", "C"):
            values["reg"] = values.pop(flag)
    defaults = {}
    for key, raw in values.items():
        action = actions.get(key)
        if action is None or key in ("config", "help", "handler"):
            raise ConfigError(f"unknown config key {key!r} for '{cmd}'")
        if action.choices is not None and raw not in action.choices:
            raise ConfigError(f"invalid value {raw!r} for config key {key!r}")
        if isinstance(action, argparse._StoreTrueAction):
            defaults[key] = raw.lower() in ("1", "true", "yes", "on")
        elif isinstance(action, argparse._AppendAction):
            # repeated flags replace the config list instead of extending it
            if _on_command_line(action, argv):
                continue
            defaults[key] = [v.strip() for v in raw.split(",") if v.strip()]
        else:
            convert = int if isinstance(action, argparse._CountAction) else action.type
            try:
                defaults[key] = convert(raw) if convert is not None else raw
            except (TypeError, ValueError):
                raise ConfigError(f"invalid value {raw!r} for config key {key!r}") from None
        action.required = False
    sub.set_defaults(**defaults)


def _fail(e: Exception) -> None:
    message = " ".join(str(e).split())
    print(f"minctx: error: {message}", file=sys.stderr)
    sys.exit(1)


def main(argv: Optional[Sequence[str]] = None) -> None:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)

    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config", default=None)
    known, _ = pre.parse_known_args(argv)
    if known.config and argv and argv[0] in _subcommand_parser(parser).choices:
        try:
            _apply_config(parser, argv[0], read_config(known.config), argv[1:])
        except (MinctxError, OSError) as e:
            _fail(e)

    args = parser.parse_args(argv)
    level = logging.WARNING if args.verbose == 0 else logging.INFO if args.verbose == 1 else logging.DEBUG
    logging.basicConfig(stream=sys.stderr, format=LOG_FORMAT, level=level)
    logging.getLogger("minctx").setLevel(level)
    try:
        args.handler(args)
    except (MinctxError, OSError) as e:
        _fail(e)


if __name__ == "__main__":
    main()
