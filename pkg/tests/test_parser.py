import math
import random

import pytest

from spandep.corpus import Lexicon, Treebank, attach_eos, build_lexicon, check_projective
from spandep.derivation import LEFTWARD, RIGHTWARD, derive
from spandep.estimation import EstimationConfig, fit
from spandep.models import LinkContext, link_factor, seal_factor, tag_chain_factor, tree_logprob_direct
from spandep.oracle import brute_force_best, count_structures, structures
from spandep.parser import (ModelScheme, ParseError, Span, TIE_EPS, chart_stats, count_derivations,
                            covered_concatenate, parse, replay, seed_spans, tag_only)
from spandep.symbols import BOUNDARY, EOS_TAG, LEFT, RIGHT, START

from conftest import PRICE_HEADS, PRICE_TAGS, PRICE_WORDS


def lexicon(**entries):
    return Lexicon({w: {t: 1 for t in ts} for w, ts in entries.items()})


@pytest.fixture
def c_params(toy):
    return fit("C", toy, build_lexicon(toy), EstimationConfig(threshold=1))


def test_single_word_unique_tree(c_params):
    result = parse(["fell"], c_params)
    assert result.sentence.heads == (2, 0)
    assert result.logprob == pytest.approx(tree_logprob_direct(c_params, result.sentence), abs=1e-9)


def test_seeds_before_eos_have_no_leftward_cover(c_params):
    # EOS may never be a child: the seed over (w, EOS) has no link or w -> EOS
    seeds = seed_spans(["fell"], 1, c_params.lexicon, c_params)
    assert sorted(str(sp.back[2]) for sp in seeds) == sorted(["None", RIGHTWARD])
    assert all(sp.minimal for sp in seeds)


def test_seed_count_is_tag_product_times_covers():
    lex = lexicon(a=["X", "Y"], b=["X", "Y", "Z"], c=["X"])
    bank = Treebank([attach_eos(["a", "b", "c"], ["X", "Y", "X"], [2, 3, 0])])
    params = fit("C", bank, lex, EstimationConfig(threshold=1))
    seeds = seed_spans(["a", "b", "c"], 1, lex, params)
    assert len(seeds) == 2 * 3 * 3
    assert len({(sp.sig.first_tag, sp.sig.last_tag) for sp in seeds}) == 6


@pytest.mark.parametrize("order", [2, 3])
def test_seed_scores_model_b_are_chain_factors(toy, order):
    params = fit("B", toy, build_lexicon(toy), EstimationConfig(markov_order=order, threshold=1))
    words = ["the", "price", "fell"]
    for sp in seed_spans(words, 1, params.lexicon, params):
        if sp.back[2] is not None:
            continue
        ti, tj, tk = sp.back[1]
        following = (tj, tk) if order == 3 else (tj,)
        assert sp.score == pytest.approx(tag_chain_factor(params, "the", ti, following), abs=1e-12)


def test_seed_position_out_of_range(c_params):
    with pytest.raises(ParseError):
        seed_spans(["fell"], 2, c_params.lexicon, c_params)


def seed(scheme, i, tags, cover):
    for sig, score, seed_tags, c in scheme.seeds(i):
        if seed_tags[:2] == tags and c == cover:
            return Span(i, i + 1, sig, score, ("seed", seed_tags, c))
    raise AssertionError("seed not found")


def test_concatenation_three_outputs_then_rules(c_params):
    scheme = ModelScheme(["the", "price", "fell"], c_params.lexicon, c_params)
    a = seed(scheme, 1, ("D", "N"), LEFTWARD)      # the -> price: price has its parent in a
    b = seed(scheme, 2, ("N", "V"), None)
    outs = [covered_concatenate(a, b, cover, scheme) for cover in (None, LEFTWARD, RIGHTWARD)]
    assert all(o is not None for o in outs)
    # price would get a second parent from b
    with pytest.raises(ParseError, match="exactly one"):
        covered_concatenate(a, seed(scheme, 2, ("N", "V"), RIGHTWARD), None, scheme)
    # fell already has a parent in b: both covers are rejected, plain concatenation is fine
    b_fell = seed(scheme, 2, ("N", "V"), LEFTWARD)
    assert covered_concatenate(a, b_fell, None, scheme) is not None
    assert covered_concatenate(a, b_fell, LEFTWARD, scheme) is None
    assert covered_concatenate(a, b_fell, RIGHTWARD, scheme) is None


def test_concatenation_errors(c_params):
    scheme = ModelScheme(["the", "price", "fell"], c_params.lexicon, c_params)
    a = seed(scheme, 1, ("D", "N"), LEFTWARD)
    with pytest.raises(ParseError, match="adjacent"):
        covered_concatenate(a, a, None, scheme)
    b = seed(scheme, 2, ("N", "V"), None)
    ab = covered_concatenate(a, b, None, scheme)
    c = seed(scheme, 3, ("V", EOS_TAG), None)
    with pytest.raises(ParseError, match="minimal"):
        covered_concatenate(ab, c, None, scheme)


def test_concatenation_adds_seals_and_link(c_params):
    """Shared word sealed on both sides plus the covering link, as in direct scoring."""
    scheme = ModelScheme(["the", "price", "fell"], c_params.lexicon, c_params)
    a = seed(scheme, 1, ("D", "N"), LEFTWARD)      # price's left child "the"
    b = seed(scheme, 2, ("N", "V"), None)
    out = covered_concatenate(a, b, RIGHTWARD, scheme)  # fell becomes the parent of the
    delta = out.score - a.score - b.score
    want = (seal_factor(c_params, ("N", "price"), LEFT, START)
            + seal_factor(c_params, ("N", "price"), RIGHT, START)
            + link_factor(c_params, LinkContext(("V", "fell"), ("D", "the"), LEFT, START)))
    assert delta == pytest.approx(want, abs=1e-12)


def test_price_corpus_recovers_correct_parse(price_sentence):
    bank = Treebank([price_sentence] * 5)
    for kind in ("A", "B", "C", "Cprime"):
        params = fit(kind, bank, build_lexicon(bank), EstimationConfig(threshold=1))
        result = parse(list(PRICE_WORDS), params)
        assert result.sentence.heads == price_sentence.heads, kind
        assert result.sentence.tags == price_sentence.tags


@pytest.mark.parametrize("kind", ["A", "B", "C", "Cprime"])
@pytest.mark.parametrize("order", [2, 3])
def test_parse_matches_direct_and_oracle(kind, order, toy):
    rng = random.Random(hash((kind, order)) & 0xffff)
    lex = build_lexicon(toy)
    params = fit(kind, toy, lex, EstimationConfig(markov_order=order, threshold=1))
    vocab = sorted(lex.word_tags) + ["blorp"]
    for _ in range(6):
        words = [rng.choice(vocab) for _ in range(rng.randint(1, 4))]
        result = parse(words, params)
        best, score = brute_force_best(words, params)
        assert result.logprob == pytest.approx(score, abs=1e-9)
        assert result.logprob == pytest.approx(tree_logprob_direct(params, result.sentence), abs=1e-9)
        assert (result.sentence.heads, result.sentence.tags) == (best.heads, best.tags)


def test_model_x_tags_only(toy):
    params = fit("X", toy, build_lexicon(toy))
    result = parse(["the", "price", "fell"], params)
    assert result.sentence.heads is None
    assert result.sentence.tags == ("D", "N", "V", EOS_TAG)
    assert tag_only(["the", "price", "fell"], params).logprob == result.logprob


def test_parse_empty_sentence_fails(c_params):
    with pytest.raises(ParseError):
        parse([], c_params)


@pytest.mark.parametrize("words, entries, expected", [
    (["w"], {"w": ["T"]}, 1),
    (["v", "w"], {"v": ["T"], "w": ["T"]}, 2),
    (["v", "w"], {"v": ["T", "U"], "w": ["T", "U"]}, 8),
    (["a", "b", "c"], {"a": ["T"], "b": ["T"], "c": ["T"]}, 7),
])
def test_count_derivations_small(words, entries, expected):
    lex = lexicon(**entries)
    assert count_derivations(words, lex) == expected == count_structures(words, lex)


def test_count_is_exact_integer():
    lex = lexicon(w=["A", "B"])
    got = count_derivations(["w"] * 7, lex)
    assert isinstance(got, int)
    assert got == 3876 * 2 ** 7


@pytest.mark.parametrize("kind", ["A", "B", "C", "Cprime"])
def test_replay_every_structure(kind, toy):
    lex = build_lexicon(toy)
    params = fit(kind, toy, lex, EstimationConfig(markov_order=3, threshold=1))
    for s in structures(["the", "price", "of"], lex):
        got, span = replay(s, params)
        assert got == pytest.approx(tree_logprob_direct(params, s), abs=1e-9)


def test_canonical_derivation_is_complete():
    """Every enumerated tree has a derivation that rebuilds exactly its links."""
    lex = lexicon(w=["T"])
    from spandep.oracle import enumerate_trees
    for n in range(1, 6):
        for heads in enumerate_trees(n):
            s = attach_eos(["w"] * n, ["T"] * n, heads)
            root = derive((None,) + s.heads)
            links = {}
            for node in root.postorder():
                if node.cover == LEFTWARD:
                    links[node.end] = node.start
                elif node.cover == RIGHTWARD:
                    links[node.start] = node.end
            assert links == {i: s.heads[i - 1] for i in range(1, n + 1)}


def test_signature_exchange_property(c_params):
    """Swapping a derivation's sub-span for the chart's stored span with the
    same signature shifts the score by exactly the difference of the two."""
    from spandep.parser import Chart
    words = ["the", "price", "of", "the"]
    scheme = ModelScheme(words, c_params.lexicon, c_params)
    chart = Chart(scheme).build()
    swaps = 0
    for s in structures(words, c_params.lexicon):
        _, top = replay(s, c_params)
        for side in (0, 1):
            old = top.back[side]
            if old.back[0] == "seed":
                continue
            stored = chart.cells[old.start, old.end][old.sig]
            a, b = (stored, top.back[1]) if side == 0 else (top.back[0], stored)
            new = covered_concatenate(a, b, top.back[2], scheme)
            assert new.sig == top.sig
            assert new.score - top.score == pytest.approx(stored.score - old.score, abs=1e-9)
            swaps += 1
    assert swaps > 0


def test_chart_stats_width_one_and_doubling():
    lex = lexicon(**{f"w{i}": ["T"] for i in range(5)})
    bank = Treebank([attach_eos(["w0", "w1"], ["T", "T"], [2, 0])])
    params = fit("C", bank, lex, EstimationConfig(threshold=1))
    words = [f"w{i % 5}" for i in range(16)]
    small = chart_stats(words[:8], params, lex)
    big = chart_stats(words, params, lex)
    # width-1 spans: one per cover for each of the n seeds; the last seed (before EOS) has two
    assert small.max_signatures[1] == 3
    assert big.combinations <= 8 * small.combinations * 1.6
    assert chart_stats(words[:8], params, lex) == small


def test_signatures_bounded_by_field_product():
    lex = lexicon(a=["X", "Y"], b=["X", "Y"])
    bank = Treebank([attach_eos(["a", "b"], ["X", "Y"], [2, 0])])
    params = fit("C", bank, lex, EstimationConfig(threshold=1))
    stats = chart_stats(["a", "b", "a", "b", "a", "b"], params, lex)
    tags, kid_values, flags = 2, 3, 3   # kid tag or START; (lp, rp) minus (True, True)
    bound = tags * tags * flags * 2 * kid_values * kid_values
    assert max(stats.max_signatures.values()) <= bound
