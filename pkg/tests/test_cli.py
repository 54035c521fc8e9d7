import os

import pytest

from minctx.cli import main


def run(*argv):
    main([str(a) for a in argv])


def conll_lines(doc, sentences):
    """sentences: list of [(word, tag), ...]."""
    lines = [f"#begin document ({doc}); part 000"]
    for sentence in sentences:
        for i, (word, tag) in enumerate(sentence):
            lines.append(f"{doc}\t0\t{i}\t{word}\tNN\t{tag}")
        lines.append("")
    lines.append("#end document")
    return "\n".join(lines) + "\n"


def test_reformat_trigrams(tmp_path, capsys):
    corpus = tmp_path / "corpus.txt"
    corpus.write_text("a b c\nd e f\ng h i\n", encoding="utf-8")
    out = tmp_path / "pairs.txt"
    run("reformat", "--corpus", corpus, "--out", out)
    assert out.read_text(encoding="utf-8") == "a*c b\nd*f e\ng*i h\n"
    assert "wrote 3 pairs" in capsys.readouterr().out


def test_reformat_empty_file(tmp_path, capsys):
    corpus = tmp_path / "empty.txt"
    corpus.write_text("", encoding="utf-8")
    out = tmp_path / "pairs.txt"
    run("reformat", "--corpus", corpus, "--out", out)
    assert out.read_text(encoding="utf-8") == ""
    assert "wrote 0 pairs" in capsys.readouterr().out


def test_reformat_wider_gaps(tmp_path):
    corpus = tmp_path / "corpus.txt"
    corpus.write_text("a b c d\n", encoding="utf-8")
    out = tmp_path / "pairs.txt"
    run("reformat", "--corpus", corpus, "--out", out, "--k-min", 2, "--k-max", 3)
    assert out.read_text(encoding="utf-8").splitlines() == ["a*c b", "a*d b", "a*d c", "b*d c"]


def test_config_file_sets_defaults_and_flags_win(tmp_path):
    corpus = tmp_path / "corpus.txt"
    corpus.write_text("a b c d\n", encoding="utf-8")
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# wider gaps\nk-max = 3\n", encoding="utf-8")
    out = tmp_path / "pairs.txt"
    run("reformat", "--config", cfg, "--corpus", corpus, "--out", out)
    assert len(out.read_text(encoding="utf-8").splitlines()) == 4
    run("reformat", "--config", cfg, "--corpus", corpus, "--out", out, "--k-max", 2)
    assert len(out.read_text(encoding="utf-8").splitlines()) == 2


def test_config_file_can_supply_required_paths(tmp_path):
    corpus = tmp_path / "corpus.txt"
    corpus.write_text("a b c\n", encoding="utf-8")
    out = tmp_path / "pairs.txt"
    cfg = tmp_path / "run.cfg"
    cfg.write_text(f"corpus = {corpus}\nout = {out}\n", encoding="utf-8")
    run("reformat", "--config", cfg)
    assert out.read_text(encoding="utf-8") == "a*c b\n"


def test_unknown_config_key(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("colour = blue\n", encoding="utf-8")
    with pytest.raises(SystemExit) as info:
        run("reformat", "--config", cfg, "--corpus", "x", "--out", "y")
    assert info.value.code == 1
    assert "unknown config key" in capsys.readouterr().err


def test_missing_input_is_a_single_line_error(tmp_path, capsys):
    with pytest.raises(SystemExit) as info:
        run("train-mc", "--pairs", tmp_path / "nope.txt", "--out", tmp_path / "mc.txt")
    assert info.value.code == 1
    err = capsys.readouterr().err
    assert err.startswith("minctx: error:")
    assert err.count("\n") == 1
    assert "not found" in err


def test_malformed_pair_corpus(tmp_path, capsys):
    pairs = tmp_path / "pairs.txt"
    pairs.write_text("a*c b\nbroken\n", encoding="utf-8")
    with pytest.raises(SystemExit) as info:
        run("train-mc", "--pairs", pairs, "--out", tmp_path / "mc.txt", "--min-count", 1, "--table-size", 100)
    assert info.value.code == 1
    assert "line 2" in capsys.readouterr().err


def test_unknown_representation_is_a_usage_error(tmp_path):
    with pytest.raises(SystemExit) as info:
        run("fit", "--repr", "tfidf", "--train", "t.tsv", "--model-out", "m.txt")
    assert info.value.code == 2


def _single_line_error(capsys, info):
    assert info.value.code == 1
    err = capsys.readouterr().err
    assert err.startswith("minctx: error:")
    assert err.count("\n") == 1
    return err


def test_invalid_utf8_corpus_leaves_no_partial_output(tmp_path, capsys):
    corpus = tmp_path / "bad.txt"
    corpus.write_bytes(b"a b c\n\xff\xfe d e\n")
    out = tmp_path / "pairs.txt"
    with pytest.raises(SystemExit) as info:
        run("reformat", "--corpus", corpus, "--out", out)
    err = _single_line_error(capsys, info)
    assert "line 2" in err and "UTF-8" in err
    assert not out.exists()
    assert os.listdir(tmp_path) == ["bad.txt"]


def test_failed_write_keeps_the_previous_output(tmp_path, capsys):
    corpus = tmp_path / "bad.txt"
    corpus.write_bytes(b"a b c\nd \xc3\x28 f\n")
    out = tmp_path / "pairs.txt"
    out.write_text("x*z y\n", encoding="utf-8")
    with pytest.raises(SystemExit) as info:
        run("reformat", "--corpus", corpus, "--out", out)
    _single_line_error(capsys, info)
    assert out.read_text(encoding="utf-8") == "x*z y\n"


def test_invalid_utf8_markables(tmp_path, capsys):
    tsv = tmp_path / "m.tsv"
    tsv.write_bytes(b"animate\ta\tb\ta*b\tx\n\xe9\ta\tb\ta*b\tx\n")
    with pytest.raises(SystemExit) as info:
        run("fit", "--repr", "bow", "--train", tsv, "--model-out", tmp_path / "m.model")
    assert "line 2" in _single_line_error(capsys, info)


@pytest.mark.parametrize("entry", ["k-max = three", "verbose = lots", "k-min = 2.5"])
def test_config_value_of_the_wrong_type(tmp_path, capsys, entry):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(entry + "\n", encoding="utf-8")
    with pytest.raises(SystemExit) as info:
        run("reformat", "--config", cfg, "--corpus", "x", "--out", "y")
    assert "invalid value" in _single_line_error(capsys, info)


def _toy_markables(path):
    path.write_text("animate\ta\tb\ta*b\tshe\ninanimate\tc\td\tc*d\tit\n", encoding="utf-8")


def _toy_bow_model(tmp_path, name):
    train = tmp_path / "train.tsv"
    _toy_markables(train)
    model = tmp_path / f"{name}.model"
    run("fit", "--repr", "bow", "--train", train, "--model-out", model)
    return train, model


def test_bad_oov_policy_in_model_metadata(tmp_path, capsys):
    train, model = _toy_bow_model(tmp_path, "m")
    (tmp_path / "m.model.repr").write_text("embeddings=w.txt\noov=maybe\nrepr=concat\n", encoding="utf-8")
    capsys.readouterr()
    with pytest.raises(SystemExit) as info:
        run("eval", "--test", train, "--system", f"m={model}")
    assert "oov" in _single_line_error(capsys, info)


def test_system_flags_replace_the_config_list(tmp_path, capsys):
    train, model = _toy_bow_model(tmp_path, "bow")
    cfg = tmp_path / "eval.cfg"
    cfg.write_text(f"test = {train}\nsystem = stale={tmp_path / 'gone.model'}\n", encoding="utf-8")
    capsys.readouterr()
    run("eval", "--config", cfg, "--system", f"bow={model}")
    out = capsys.readouterr().out
    assert "bow" in out and "stale" not in out


def test_config_system_list_applies_without_flags(tmp_path, capsys):
    train, model = _toy_bow_model(tmp_path, "bow")
    cfg = tmp_path / "eval.cfg"
    cfg.write_text(f"test = {train}\nsystem = bow={model}\n", encoding="utf-8")
    capsys.readouterr()
    run("eval", "--config", cfg)
    assert "bow" in capsys.readouterr().out


def test_eval_logs_per_class_recall(tmp_path, caplog):
    train, model = _toy_bow_model(tmp_path, "bow")
    with caplog.at_level("INFO", logger="minctx"):
        run("eval", "-v", "--test", train, "--system", f"bow={model}")
    assert "bow: accuracy 1.0000 on 2 example(s), recall animate 1.0000 inanimate 1.0000" in caplog.text


def test_sidecar_paths_with_hash_survive_a_change_of_directory(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    (tmp_path / "emb#1").mkdir()
    (tmp_path / "emb#1" / "words.txt").write_text("4 2\na 1 0\nb 0 1\nc -1 0\nd 0 -1\n", encoding="utf-8")
    _toy_markables(tmp_path / "train.tsv")
    run("fit", "--repr", "concat", "--train", "train.tsv", "--word-embeddings", "emb#1/words.txt",
        "--model-out", "models/concat.model")
    with open("models/concat.model.repr", encoding="utf-8") as f:
        assert f.read() == "embeddings=../emb#1/words.txt\noov=zero\nrepr=concat\n"

    elsewhere = tmp_path / "elsewhere"
    elsewhere.mkdir()
    monkeypatch.chdir(elsewhere)
    capsys.readouterr()
    run("eval", "--test", tmp_path / "train.tsv", "--system", f"concat={tmp_path / 'models' / 'concat.model'}",
        "--tsv-out", "r.tsv")
    assert _read_tsv("r.tsv")["concat"]["accuracy"] == "1.000000"


# ------------------------------
# extract
# ------------------------------

def _write_toy_documents(root):
    root.mkdir()
    (root / "a_conll").write_text(conll_lines("a", [
        [("Yesterday", "-"), ("she", "(1)"), ("helped", "-"), ("Xiulan", "(2)"), ("to", "-"), ("move", "-"), (".", "-")],
        [("He", "(2)"), ("thanked", "-"), ("her", "(1)"), ("warmly", "-"), (".", "-")],
    ]), encoding="utf-8")
    (root / "b_conll").write_text(conll_lines("b", [
        [("The", "(3"), ("old", "-"), ("car", "3)"), ("broke", "-"), (".", "-")],
        [("Then", "-"), ("it", "(3)"), ("stopped", "-"), (".", "-")],
    ]), encoding="utf-8")


def test_extract_toy_documents(tmp_path, capsys):
    root = tmp_path / "conll"
    _write_toy_documents(root)
    out = tmp_path / "markables.tsv"
    run("extract", "--conll", root, "--out", out)
    assert out.read_text(encoding="utf-8").splitlines() == [
        "animate\tYesterday\thelped\tYesterday*helped\tshe",
        "animate\tthanked\twarmly\tthanked*warmly\ther",
        "animate\thelped\tto\thelped*to\tXiulan",
        "inanimate\tThen\tstopped\tThen*stopped\tit",
    ]
    assert "wrote 4 markables" in capsys.readouterr().out


def test_extract_conflicted_chain(tmp_path):
    path = tmp_path / "c_conll"
    path.write_text(conll_lines("c", [
        [("So", "-"), ("he", "(0)"), ("said", "-"), ("it", "(0)"), ("was", "-"), ("fine", "-")],
    ]), encoding="utf-8")
    out = tmp_path / "markables.tsv"
    run("extract", "--conll", path, "--out", out)
    assert out.read_text(encoding="utf-8") == ""


def test_extract_boundary_markables(tmp_path):
    path = tmp_path / "d_conll"
    path.write_text(conll_lines("d", [
        [("She", "(0)"), ("saw", "-"), ("her", "(0)")],
    ]), encoding="utf-8")
    out = tmp_path / "markables.tsv"
    run("extract", "--conll", path, "--out", out)
    assert out.read_text(encoding="utf-8") == ""


def test_extract_reports_unbalanced_brackets(tmp_path, capsys):
    path = tmp_path / "e_conll"
    path.write_text(conll_lines("e", [[("a", "(0"), ("b", "-")]]), encoding="utf-8")
    with pytest.raises(SystemExit) as info:
        run("extract", "--conll", path, "--out", tmp_path / "m.tsv")
    assert info.value.code == 1
    err = capsys.readouterr().err
    assert "e_conll" in err and "line" in err


# ------------------------------
# Whole pipeline on a small synthetic benchmark
# ------------------------------

SYNTH_FLAGS = [
    "--n-animate-mcs", 10, "--n-inanimate-mcs", 10, "--n-neutral-mcs", 4,
    "--nouns-per-class", 10, "--examples-per-mc", 10, "--test-types-per-class", 5,
]
TRAIN_FLAGS = ["--epochs", 5, "--table-size", 100_000, "--min-count", 1, "--workers", 1]


def _pipeline(sentences, dim):
    run("synth", "--out-dir", "bench", "--sentences", sentences, "--seed", 42, *SYNTH_FLAGS)
    run("reformat", "--corpus", "bench/corpus.txt", "--out", "bench/pairs.txt")
    run("train-mc", "--pairs", "bench/pairs.txt", "--out", "bench/mc.txt", "--dim", dim, "--seed", 7, *TRAIN_FLAGS)
    run("train-words", "--corpus", "bench/corpus.txt", "--out", "bench/words.txt", "--dim", dim, "--seed", 7,
        *TRAIN_FLAGS)
    run("fit", "--repr", "mc", "--train", "bench/train.tsv", "--mc-embeddings", "bench/mc.txt",
        "--model-out", "bench/mc.model")
    run("fit", "--repr", "concat", "--train", "bench/train.tsv", "--word-embeddings", "bench/words.txt",
        "--model-out", "bench/concat.model")
    run("fit", "--repr", "bow", "--train", "bench/train.tsv", "--model-out", "bench/bow.model")
    run("eval", "--test", "bench/test.tsv", "--system", "mc=bench/mc.model", "--system", "concat=bench/concat.model",
        "--system", "bow=bench/bow.model", "--compare", "mc",
        "--report-out", "bench/report.txt", "--tsv-out", "bench/report.tsv")


def _read_tsv(path):
    rows = {}
    with open(path, encoding="utf-8") as f:
        header = f.readline().rstrip("\n").split("\t")
        for line in f:
            cols = line.rstrip("\n").split("\t")
            rows[cols[0]] = dict(zip(header, cols))
    return rows


def test_pipeline_mc_beats_bow(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    _pipeline(sentences=20_000, dim=50)
    rows = _read_tsv("bench/report.tsv")
    assert float(rows["mc"]["accuracy"]) >= 0.8
    # unseen enclosing words leave BOW with its bias only
    assert float(rows["bow"]["accuracy"]) == pytest.approx(0.5)
    assert rows["bow"]["marks"] == "*"
    assert "significantly lower than mc" in capsys.readouterr().out

    with open("bench/mc.txt", encoding="utf-8") as f:
        header = f.readline().split()
        assert header == ["24", "50"]
    with open("bench/mc.model.repr", encoding="utf-8") as f:
        assert f.read() == "embeddings=mc.txt\nrepr=mc\n"
    with open("bench/bow.model.repr", encoding="utf-8") as f:
        assert f.read() == "repr=bow\nvocab=bow.model.vocab\n"

    # sidecar paths resolve against the model file, not the working directory
    monkeypatch.chdir(tmp_path / "bench")
    run("eval", "--test", "test.tsv", "--system", "mc=mc.model", "--system", "bow=bow.model", "--tsv-out", "again.tsv")
    again = _read_tsv("again.tsv")
    assert again["mc"]["accuracy"] == rows["mc"]["accuracy"]
    assert again["bow"]["accuracy"] == rows["bow"]["accuracy"]


def test_pipeline_is_byte_identical_across_runs(tmp_path, monkeypatch):
    outputs = []
    for name in ("first", "second"):
        work = tmp_path / name
        work.mkdir()
        monkeypatch.chdir(work)
        _pipeline(sentences=3000, dim=10)
        files = {}
        for root, _, names in os.walk("bench"):
            for n in names:
                with open(os.path.join(root, n), "rb") as f:
                    files[os.path.join(root, n)] = f.read()
        outputs.append(files)
    assert outputs[0].keys() == outputs[1].keys()
    assert outputs[0] == outputs[1]


def test_dataset_and_neighbors(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    run("synth", "--out-dir", "bench", "--sentences", 3000, *SYNTH_FLAGS)
    run("reformat", "--corpus", "bench/corpus.txt", "--out", "bench/pairs.txt")
    run("train-mc", "--pairs", "bench/pairs.txt", "--out", "bench/mc.txt", "--dim", 10, *TRAIN_FLAGS)
    capsys.readouterr()

    run("dataset", "--markables", "bench/train.tsv", "--mc-embeddings", "bench/mc.txt",
        "--train-out", "split/train.tsv", "--test-out", "split/test.tsv", "--test-per-class", 5)
    assert capsys.readouterr().out.strip() == "train 90, test 10"

    run("neighbors", "--embeddings", "bench/mc.txt", "--token", "l0000*r0000", "--topn", 3)
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 3
    assert all("*" in line.split("\t")[0] for line in lines)


def test_synth_infeasible_config(tmp_path, capsys):
    with pytest.raises(SystemExit) as info:
        run("synth", "--out-dir", tmp_path / "b", "--n-animate-mcs", 2, "--test-types-per-class", 3)
    assert info.value.code == 1
    assert "infeasible" in capsys.readouterr().err


@pytest.mark.slow
def test_default_benchmark_separates_mc_from_bow(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    run("synth", "--out-dir", "bench")
    run("reformat", "--corpus", "bench/corpus.txt", "--out", "bench/pairs.txt")
    run("train-mc", "--pairs", "bench/pairs.txt", "--out", "bench/mc.txt", "--min-count", 1, "--table-size", 1_000_000)
    run("fit", "--repr", "mc", "--train", "bench/train.tsv", "--mc-embeddings", "bench/mc.txt",
        "--model-out", "bench/mc.model")
    run("fit", "--repr", "bow", "--train", "bench/train.tsv", "--model-out", "bench/bow.model")
    run("eval", "--test", "bench/test.tsv", "--system", "mc=bench/mc.model", "--system", "bow=bench/bow.model",
        "--compare", "mc", "--tsv-out", "bench/report.tsv")
    rows = _read_tsv("bench/report.tsv")
    mc, bow = float(rows["mc"]["accuracy"]), float(rows["bow"]["accuracy"])
    assert mc >= 0.85
    assert mc - bow >= 0.20
    assert rows["bow"]["marks"] == "*"
