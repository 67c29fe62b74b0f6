import random

import pytest
from hypothesis import given, settings, strategies as st

from spandep.corpus import (Lexicon, Treebank, TreebankError, attach_eos, build_lexicon,
                            check_projective, format_sentence, load_predictions, load_treebank,
                            save_treebank, split_corpus)
from spandep.oracle import enumerate_trees
from spandep.symbols import EOS_TAG, EOS_WORD, RESERVED

from conftest import PRICE_HEADS, PRICE_TAGS, PRICE_WORDS, conll


def test_load_remaps_root_to_eos(price_file):
    tb = load_treebank(price_file)
    assert len(tb) == 1
    s = tb[0]
    assert s.heads == (2, 6, 2, 5, 3, 7, 0)
    assert s.words[-1] == EOS_WORD and s.tags[-1] == EOS_TAG
    assert s.kids(7, "L") == [6]


def test_empty_file_gives_empty_treebank(tmp_path):
    path = tmp_path / "empty.conll"
    path.write_text("")
    assert len(load_treebank(path)) == 0


def test_head_out_of_range_names_line(tmp_path):
    rows = list(zip(PRICE_WORDS, PRICE_TAGS, PRICE_HEADS))
    rows[3] = ("the", "DT", 99)
    path = tmp_path / "bad.conll"
    path.write_text(conll([rows]))
    with pytest.raises(TreebankError, match=r"bad.conll:4"):
        load_treebank(path)


def test_duplicate_index(tmp_path):
    path = tmp_path / "dup.conll"
    path.write_text("1\ta\tD\t2\n1\tb\tN\t0\n")
    with pytest.raises(TreebankError, match="duplicate"):
        load_treebank(path)


def test_unreadable_file(tmp_path):
    with pytest.raises(TreebankError, match="cannot read"):
        load_treebank(tmp_path / "missing.conll")


def test_reserved_symbol_rejected(tmp_path):
    path = tmp_path / "res.conll"
    path.write_text(f"1\t{EOS_WORD}\tN\t0\n")
    with pytest.raises(TreebankError, match="reserved"):
        load_treebank(path)


def test_comments_and_conllx(tmp_path):
    path = tmp_path / "x.conll"
    path.write_text("# sent 1\n1\tdogs\tdog\tN\tNNS\t_\t2\tnsubj\t_\t_\n"
                    "2\tbark\tbark\tV\tVBP\t_\t0\troot\t_\t_\n")
    s = load_treebank(path, format="conllx")[0]
    assert s.words == ("dogs", "bark", EOS_WORD)
    assert s.tags == ("N", "V", EOS_TAG)
    assert s.heads == (2, 3, 0)


def test_nonprojective_sentence_skipped_with_log(tmp_path):
    path = tmp_path / "np.conll"
    path.write_text(conll([[("a", "X", 3), ("b", "X", 4), ("c", "X", 0), ("d", "X", 3)],
                           [("e", "X", 0)]]))
    tb = load_treebank(path)
    assert len(tb) == 1 and tb[0].words[0] == "e"
    assert len(tb.log) == 1 and "non-projective" in tb.log[0]


def test_attach_eos_single_word():
    s = attach_eos(["w"], ["N"], [0])
    assert s.heads == (2, 0) and s.n == 1 and s.eos == 2


@pytest.mark.parametrize("heads, message", [
    ((0, 0), "exactly one root"),
    ((2, 1, 0), "cycle"),
    ((1, 0), "own head"),
    ((3, 0), "out of range"),
])
def test_attach_eos_errors(heads, message):
    with pytest.raises(TreebankError, match=message):
        attach_eos(["x"] * len(heads), ["T"] * len(heads), heads)


def test_price_parse_is_projective(price_sentence):
    assert price_sentence.heads[:-1] == (2, 6, 2, 5, 3, 7)
    assert check_projective(price_sentence) == []


def test_crossing_violation_names_pair():
    from spandep.corpus import ParsedSentence
    s = ParsedSentence(("a", "b", "c", "d", EOS_WORD), ("T",) * 5, (3, 4, 5, 3, 0))
    assert ("crossing", (1, 3), (2, 4)) in check_projective(s)


def test_cycle_violation():
    from spandep.corpus import ParsedSentence
    s = ParsedSentence(("a", "b", "c", EOS_WORD), ("T",) * 4, (2, 1, 4, 0))
    kinds = {v[0] for v in check_projective(s)}
    assert "cycle" in kinds


@pytest.mark.parametrize("n", range(2, 6))
def test_enumerated_trees_pass_and_mutations_fail(n):
    rng = random.Random(n)
    for heads in enumerate_trees(n):
        s = attach_eos(["w"] * n, ["T"] * n, heads)
        assert check_projective(s) == []
        # mutate one parent; the result is legal only if it is another enumerated tree
        i = rng.randrange(n)
        new = list(heads)
        new[i] = rng.choice([h for h in range(n + 1) if h not in (heads[i], i + 1)])
        legal = tuple(new) in set(enumerate_trees(n))
        try:
            m = attach_eos(["w"] * n, ["T"] * n, new)
        except TreebankError:
            assert not legal
            continue
        assert (check_projective(m) == []) == legal


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 6).flatmap(lambda n: st.tuples(st.just(n), st.sampled_from(enumerate_trees(n)))),
       st.lists(st.sampled_from(["the", "a", "dog", "ran"]), min_size=6, max_size=6))
def test_save_load_round_trip(tmp_path_factory, tree, vocab):
    n, heads = tree
    s = attach_eos(vocab[:n], ["T"] * n, heads)
    assert attach_eos(*s.strip_eos()) == s
    path = tmp_path_factory.mktemp("rt") / "s.conll"
    save_treebank(Treebank([s, s]), path)
    assert load_treebank(path).sentences == [s, s]


def test_format_writes_logscore_and_unparsed_heads():
    s = attach_eos(["a", "b"], ["D", "N"], None)
    assert format_sentence(s, -1.5) == "# logscore=-1.5\n1\ta\tD\t0\n2\tb\tN\t0\n"


def test_load_predictions_accepts_non_trees(tmp_path):
    path = tmp_path / "p.conll"
    path.write_text(conll([[("a", "D", 2), ("b", "N", 1), ("c", "V", 0)]]))
    s = load_predictions(path)[0]
    assert s.heads == (2, 1, 4, 0)


def test_lexicon_candidates(toy):
    lex = build_lexicon(toy)
    assert lex.candidates("the") == ("D",)
    assert lex.candidates("price") == ("N",)
    assert lex.candidates(EOS_WORD) == (EOS_TAG,)
    # hapax words in the toy corpus are stock/rose/prices/of: tags N, V, P
    assert set(lex.candidates("blorp")) == {"N", "V", "P"}
    assert not set(lex.candidates("blorp")) & RESERVED


def test_lexicon_recount(toy):
    lex = build_lexicon(toy)
    recount = {}
    for s in toy:
        for w, t in zip(s.words[:-1], s.tags[:-1]):
            recount.setdefault(w, {}).setdefault(t, 0)
            recount[w][t] += 1
    assert lex.word_tags == recount


def test_lexicon_candidates_ordered_and_capped():
    lex = Lexicon({"saw": {"V": 3, "N": 1, "A": 1}})
    assert lex.candidates("saw") == ("V", "A", "N")
    assert lex.candidates("saw", cap=2) == ("V", "A")


def test_lexicon_dump_round_trip(toy):
    lex = build_lexicon(toy)
    again = Lexicon.from_dump(lex.dump(), lex.open_class)
    assert again == lex and again.digest() == lex.digest()


def test_open_class_falls_back_to_all_tags():
    tb = Treebank([attach_eos(["a", "a"], ["D", "D"], [2, 0])])
    assert build_lexicon(tb).open_class == ("D",)


def test_split_reproducible():
    tb = Treebank([attach_eos([f"w{i}"], ["T"], [0]) for i in range(10)])
    train, test = split_corpus(tb, 4, seed=7)
    assert (len(train), len(test)) == (6, 4)
    again = split_corpus(tb, 4, seed=7)
    assert again[0].sentences == train.sentences and again[1].sentences == test.sentences
    assert not set(s.words for s in train) & set(s.words for s in test)


def test_split_zero_and_too_large():
    tb = Treebank([attach_eos([f"w{i}"], ["T"], [0]) for i in range(3)])
    train, test = split_corpus(tb, 0, seed=1)
    assert len(train) == 3 and len(test) == 0
    with pytest.raises(ValueError):
        split_corpus(tb, 3, seed=1)
