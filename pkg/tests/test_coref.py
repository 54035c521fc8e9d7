import random

import pytest

from minctx.core.corpus import build_vocab
from minctx.core.coref import (
    Chain,
    MarkableExample,
    Mention,
    build_dataset,
    extract_examples,
    extract_from_documents,
    label_chain,
    parse_coref_documents,
    to_bracket_tags,
)
from minctx.core.value_object import (
    AnimacyLabel,
    ChainLabel,
    CorefParseError,
    DatasetError,
    FormatError,
    SplitConfig,
)

A = AnimacyLabel.ANIMATE
I = AnimacyLabel.INANIMATE


def conll(sentences, tags, doc="test"):
    """CoNLL-style lines: doc part index word pos coref."""
    lines = [f"#begin document ({doc}); part 000"]
    for words, cells in zip(sentences, tags):
        for i, (w, t) in enumerate(zip(words, cells)):
            lines.append(f"{doc} 0 {i} {w} NN {t}")
        lines.append("")
    lines.append("#end document")
    return [line + "\n" for line in lines]


def spans(doc):
    return {c.chain_id.rsplit("/", 1)[-1]: sorted((m.sentence_index, m.start, m.end) for m in c.mentions)
            for c in doc.chains}


def _chain(*texts):
    return Chain("d/0", [Mention("d", 0, i, i, tuple(t.split())) for i, t in enumerate(texts)])


# ------------------------------
# Parsing
# ------------------------------

def test_parse_multi_token_span():
    [doc] = parse_coref_documents(conll([["the", "old", "man"]], [["(0", "-", "0)"]]))
    assert doc.sentences == [["the", "old", "man"]]
    assert spans(doc) == {"0": [(0, 0, 2)]}
    assert doc.chains[0].mentions[0].surface == ("the", "old", "man")


def test_parse_singleton():
    [doc] = parse_coref_documents(conll([["it", "rained"]], [["(3)", "-"]]))
    assert spans(doc) == {"3": [(0, 0, 0)]}


def test_parse_nested_same_id():
    [doc] = parse_coref_documents(conll([["a", "b", "c"]], [["(0", "(0)", "0)"]]))
    assert spans(doc) == {"0": [(0, 0, 2), (0, 1, 1)]}
    # mentions are recorded as they close
    assert [(m.start, m.end) for m in doc.chains[0].mentions] == [(1, 1), (0, 2)]


def test_parse_crossing_ids_and_multiple_tags():
    [doc] = parse_coref_documents(conll([["a", "b", "c", "d"]], [["(1", "(2", "1)", "2)|(5)"]]))
    assert spans(doc) == {"1": [(0, 0, 2)], "2": [(0, 1, 3)], "5": [(0, 3, 3)]}


def test_parse_several_documents():
    lines = conll([["x", "y"]], [["(0)", "-"]], doc="one") + conll([["p", "q"]], [["-", "(0)"]], doc="two")
    docs = parse_coref_documents(lines)
    assert [d.doc_id for d in docs] == ["(one); part 000", "(two); part 000"]
    assert docs[0].chains[0].chain_id != docs[1].chains[0].chain_id


def test_unmatched_open_at_document_end():
    with pytest.raises(CorefParseError, match="line") as info:
        parse_coref_documents(conll([["a", "b"]], [["(0", "-"]]))
    assert "(0" in str(info.value)


def test_close_without_open():
    with pytest.raises(CorefParseError, match="line 3"):
        parse_coref_documents(conll([["a", "b"]], [["-", "4)"]]))


def test_mention_across_sentences_is_rejected():
    with pytest.raises(CorefParseError):
        parse_coref_documents(conll([["a", "b"], ["c"]], [["(0", "-"], ["0)"]]))


def test_short_row():
    with pytest.raises(FormatError, match="columns"):
        parse_coref_documents(["#begin document x\n", "only two\n", "#end document\n"], word_column=3)


# ------------------------------
# Round trip
# ------------------------------

def _laminar(spans_so_far, start, end):
    for s, e in spans_so_far:
        if (s, e) == (start, end):
            return False
        disjoint = e < start or end < s
        nested = (s <= start and end <= e) or (start <= s and e <= end)
        if not (disjoint or nested):
            return False
    return True


def _random_fixture(rng):
    sentences = [[f"w{s}_{t}" for t in range(rng.randint(1, 8))] for s in range(rng.randint(1, 3))]
    per_id = {}
    for _ in range(rng.randint(0, 12)):
        cid = str(rng.randint(0, 3))
        s = rng.randrange(len(sentences))
        n = len(sentences[s])
        start = rng.randrange(n)
        end = rng.randrange(start, n)
        taken = [(a, b) for (sent, a, b) in per_id.get(cid, []) if sent == s]
        if _laminar(taken, start, end):
            per_id.setdefault(cid, []).append((s, start, end))
    chains = [
        Chain(f"doc/{cid}", [Mention("doc", s, a, b, tuple(sentences[s][a:b + 1])) for s, a, b in items])
        for cid, items in sorted(per_id.items())
    ]
    return sentences, chains


def test_brackets_round_trip_on_random_nested_spans():
    rng = random.Random(1234)
    for _ in range(1000):
        sentences, chains = _random_fixture(rng)
        tags = to_bracket_tags(sentences, chains)
        [doc] = parse_coref_documents(conll(sentences, tags, doc="doc"))
        expected = {c.chain_id.rsplit("/", 1)[-1]: sorted((m.sentence_index, m.start, m.end) for m in c.mentions)
                    for c in chains}
        assert spans(doc) == expected
        assert to_bracket_tags(doc.sentences, doc.chains) == tags


# ------------------------------
# Labels and examples
# ------------------------------

@pytest.mark.parametrize(
    "texts, expected",
    [
        (["she", "the doctor"], ChainLabel.ANIMATE),
        (["it"], ChainLabel.INANIMATE),
        (["the car", "this"], ChainLabel.UNLABELED),
        (["he", "it"], ChainLabel.CONFLICTED),
        (["His", "the man"], ChainLabel.ANIMATE),
        (["Its"], ChainLabel.INANIMATE),
    ],
)
def test_label_chain(texts, expected):
    assert label_chain(_chain(*texts)) == expected


def test_extract_xiulan():
    sentence = ["he", "helped", "Xiulan", "to", "find", "a", "flat"]
    chain = Chain("d/0", [Mention("d", 0, 2, 2, ("Xiulan",)), Mention("d", 0, 0, 0, ("he",))])
    examples = extract_examples([sentence], [chain])
    assert examples == [MarkableExample(A, "helped", "to", "Xiulan")]
    assert examples[0].encoded_mc == "helped*to"


def test_extract_skips_sentence_boundaries():
    sentence = ["it", "broke", "down"]
    chain = Chain("d/0", [Mention("d", 0, 0, 0, ("it",)), Mention("d", 0, 2, 2, ("down",))])
    assert extract_examples([sentence], [chain]) == []


def test_extract_uses_words_around_full_span():
    sentence = ["a", "b", "c", "d", "e"]
    chain = Chain("d/0", [Mention("d", 0, 1, 3, ("b", "c", "d")), Mention("d", 0, 0, 0, ("it",))])
    [ex] = extract_examples([sentence], [chain])
    assert (ex.label, ex.left, ex.right, ex.surface) == (I, "a", "e", "b_c_d")


def test_conflicted_and_unlabeled_chains_yield_nothing():
    sentence = ["x", "he", "y", "it", "z", "car", "w"]
    conflicted = Chain("d/0", [Mention("d", 0, 1, 1, ("he",)), Mention("d", 0, 3, 3, ("it",))])
    unlabeled = Chain("d/1", [Mention("d", 0, 5, 5, ("car",))])
    assert extract_examples([sentence], [conflicted, unlabeled]) == []


def test_extracted_words_are_adjacent_to_the_span():
    rng = random.Random(77)
    for _ in range(200):
        sentences, chains = _random_fixture(rng)
        # force a label so every chain contributes
        for c in chains:
            c.mentions.append(Mention("doc", 0, 0, 0, ("she",)))
        examples = extract_examples(sentences, chains)
        expected = sorted(
            (sentences[m.sentence_index][m.start - 1], sentences[m.sentence_index][m.end + 1])
            for c in chains
            for m in c.mentions
            if m.start > 0 and m.end + 1 < len(sentences[m.sentence_index])
        )
        assert sorted((e.left, e.right) for e in examples) == expected


def test_extract_from_parsed_documents():
    sentences = [["Then", "she", "helped", "Xiulan", "to", "move", "."]]
    tags = [["-", "(1)", "-", "(2)", "-", "-", "-"]]
    docs = parse_coref_documents(conll(sentences, tags))
    # Xiulan's own chain has no trigger
    assert extract_from_documents(docs) == [MarkableExample(A, "Then", "helped", "she")]
    tags = [["-", "(1)", "-", "(1)", "-", "-", "-"]]
    examples = extract_from_documents(parse_coref_documents(conll(sentences, tags)))
    assert [(e.label, e.encoded_mc, e.surface) for e in examples] == [
        (A, "Then*helped", "she"),
        (A, "helped*to", "Xiulan"),
    ]


# ------------------------------
# Dataset split
# ------------------------------

def _examples(n_animate, n_inanimate):
    out = [MarkableExample(A, f"l{i}", f"r{i}", f"a{i}") for i in range(n_animate)]
    out += [MarkableExample(I, f"l{i}", f"r{i}", f"i{i}") for i in range(n_inanimate)]
    return out


def _mc_vocab(examples):
    return build_vocab((e.encoded_mc for e in examples), min_count=1)


def test_build_dataset_balanced_test_set():
    examples = _examples(10, 10)
    train, test = build_dataset(examples, _mc_vocab(examples), SplitConfig(test_per_class=2, seed=3))
    assert len(test) == 4 and len(train) == 16
    assert sum(e.label is A for e in test) == 2
    assert sorted(map(repr, train + test)) == sorted(map(repr, examples))


def test_build_dataset_is_deterministic():
    examples = _examples(30, 12)
    vocab = _mc_vocab(examples)
    assert build_dataset(examples, vocab, SplitConfig(5, 9)) == build_dataset(examples, vocab, SplitConfig(5, 9))


def test_build_dataset_filters_by_mc_vocabulary():
    examples = _examples(6, 6)
    vocab = _mc_vocab(examples[:4] + examples[6:10])
    train, test = build_dataset(examples, vocab, SplitConfig(test_per_class=2, seed=1))
    assert len(train) + len(test) == 8
    assert all(e.encoded_mc in vocab for e in train + test)


def test_build_dataset_shortfall():
    examples = _examples(10, 1)
    with pytest.raises(DatasetError, match="inanimate: 1 < 2"):
        build_dataset(examples, _mc_vocab(examples), SplitConfig(test_per_class=2))
