"""The nine acceptance criteria, each at its stated tolerance.

Every test prints one ``PASS``/``FAIL`` line; the lines are repeated in the
pytest terminal summary.
"""

import itertools
import math
import time

import pytest

from spandep.certify import CERTIFIED_KINDS, certify
from spandep.cli import growth_exponent, main
from spandep.corpus import Lexicon, Treebank, attach_eos, build_lexicon, split_corpus
from spandep.estimation import BackoffLadder, CountTable, EstimationConfig, fit
from spandep.evaluation import (CategoryConfig, adjacent_baseline, apply_attacher, apply_tagger,
                                attach_accuracy, mft_baseline, tag_accuracy)
from spandep.models import tree_logprob_direct
from spandep.oracle import count_structures
from spandep.parser import chart_stats, count_derivations, parse
from spandep.symbols import EOS_TAG, EOS_WORD
from spandep.synthetic import (bench_lexicon, bench_params, bench_sentence, completion_mass,
                               grammar_params, pp_grammar, rollouts, sample_treebank, toy_grammar)

RESULTS = []


def report(number, ok, detail):
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'} ({detail})"
    RESULTS.append(line)
    print(line)
    assert ok, line


def test_criterion_1_oracle_optimality():
    t0 = time.perf_counter()
    result = certify(suites=("optimality",), trials=100, max_words=5, tags=3, tags_per_word=3, seed=1)
    elapsed = time.perf_counter() - t0
    trials = min(result.trials.values())
    ok = result.ok and trials >= 100 and elapsed <= 300
    report(1, ok, f"{trials} trials per kind, {len(result.failures)} failures, {elapsed:.1f}s")


def test_criterion_2_derivation_uniqueness():
    # exhaustive: every sentence of 1..5 words over a vocabulary mixing 1- and 2-tag words
    lexicon = Lexicon({"a": {"X": 1}, "b": {"X": 1, "Y": 1}, "c": {"Y": 1, "Z": 1}})
    checked = mismatches = 0
    for n in range(1, 6):
        for words in itertools.product(sorted(lexicon.word_tags), repeat=n):
            checked += 1
            mismatches += count_derivations(list(words), lexicon) != count_structures(list(words), lexicon)
    # and under fitted models, whose signatures split spans more finely
    result = certify(suites=("uniqueness",), trials=100, max_words=5, tags=3, tags_per_word=2, seed=2)
    ok = mismatches == 0 and result.ok
    report(2, ok, f"{checked} exhaustive sentences, {sum(result.trials.values())} model trials, "
                  f"{mismatches + len(result.failures)} mismatches")


def test_criterion_3_incremental_direct_agreement():
    result = certify(suites=("agreement",), trials=40, max_words=4, tags=3, tags_per_word=3, seed=3)
    report(3, result.ok, f"{min(result.trials.values())} sentences per kind, every structure replayed, "
                         f"{len(result.failures)} failures")


def test_criterion_4_model_c_mass():
    grammar = toy_grammar()
    params = grammar_params(grammar)
    worst = 0.0
    for depth in range(1, 6):
        total = math.fsum(math.exp(tree_logprob_direct(params, s)) for s, _ in rollouts(grammar, depth))
        truncated = 1.0 - completion_mass(grammar, EOS_TAG, EOS_WORD, depth)
        if total > 1 + 1e-9:
            worst = math.inf
        worst = max(worst, abs(total - (1.0 - truncated)))
    report(4, worst <= 1e-9, f"depths 1-5, largest gap {worst:.1e}")


def test_criterion_5_complexity():
    lengths = (10, 20, 40, 80)
    lexicon = bench_lexicon(tags_per_word=1)
    params = bench_params("C", lexicon, seed=0)
    stats = [chart_stats(bench_sentence(n, n), params, lexicon) for n in lengths]
    comb = growth_exponent(lengths, [s.combinations for s in stats])
    cells = growth_exponent(lengths, [s.cells for s in stats])
    ok = 2.6 <= comb <= 3.4 and 1.7 <= cells <= 2.3
    report(5, ok, f"combination exponent {comb:.2f}, cell exponent {cells:.2f}")


def test_criterion_6_synthetic_ordering():
    cats = CategoryConfig(punctuation=(), nouns={"N"}, lexical_verbs={"V"})
    lines, ok = [], True
    for seed in range(3):
        bank = sample_treebank(pp_grammar(), 2000, seed)
        train, test = split_corpus(bank, 400, seed)
        lexicon = build_lexicon(train)
        scores = {}
        for kind in ("C", "Cprime"):
            params = fit(kind, train, lexicon, EstimationConfig())
            pred = Treebank([parse(s.words[:-1], params).sentence for s in test])
            scores[kind] = attach_accuracy(test, pred, cats)["all"]
        scores["Baseline"] = attach_accuracy(test, apply_attacher(adjacent_baseline(train), test), cats)["all"]
        ok &= scores["C"] > scores["Cprime"] > scores["Baseline"]
        lines.append(f"seed {seed}: C {scores['C']} > C' {scores['Cprime']} > baseline {scores['Baseline']}")
    report(6, ok, "; ".join(lines))


def determiner_bank(share_following=18, total=20):
    rows = []
    for k in range(total):
        if k < share_following:
            rows.append((["the", "dog", "barked"], ["D", "N", "V"], [2, 3, 0]))
        else:
            rows.append((["dog", "the", "barked"], ["N", "D", "V"], [3, 1, 0]))
    return Treebank([attach_eos(*r) for r in rows])


def test_criterion_7_baselines():
    rules = adjacent_baseline(determiner_bank()).rules
    test = Treebank([attach_eos(["a", "the", "cat", "the", "dog"], ["N", "D", "N", "D", "N"], None)])
    heads = apply_attacher(adjacent_baseline(determiner_bank()), test)[0].heads
    d_follow = rules["D"] == "following" and heads[1] == 3 and heads[3] == 5

    train = Treebank([attach_eos(*r) for r in [
        (["the", "can", "rusts"], ["D", "N", "V"], [2, 3, 0]),
        (["we", "can", "can", "fish"], ["P", "M", "V", "N"], [3, 3, 0, 3]),
        (["fish", "can", "swim"], ["N", "M", "V"], [3, 3, 0]),
        (["the", "fish", "swim"], ["D", "N", "V"], [2, 3, 0]),
    ]])
    gold = Treebank([attach_eos(*r) for r in [
        (["the", "can", "swim"], ["D", "N", "V"], [2, 3, 0]),
        (["we", "fish"], ["P", "V"], [2, 0]),
        (["fish", "can", "swim"], ["N", "M", "V"], [3, 3, 0]),
        (["the", "fish", "can", "rusts"], ["D", "N", "M", "V"], [2, 4, 4, 0]),
        (["we", "can", "can", "the", "fish"], ["P", "M", "V", "D", "N"], [3, 3, 0, 5, 3]),
        (["blorp", "swim", "we"], ["V", "V", "P"], [2, 0, 2]),
    ]])
    hand = 16 / 20 * 100  # misses: "can" twice, "fish" as a verb, the unseen "blorp"
    got = tag_accuracy(gold, apply_tagger(mft_baseline(train), gold),
                       CategoryConfig(punctuation=(), nouns={"N"}, lexical_verbs={"V"}))["all"]
    ok = d_follow and sum(s.n for s in gold) == 20 and abs(got - hand) <= 0.1
    report(7, ok, f"D -> {rules['D']}; most-frequent-tag accuracy {got} vs hand {hand:.1f}")


def ladder_with_fine_total(fine_total, threshold=10):
    fine, coarse = CountTable("fine", 2), CountTable("coarse", 1)
    fine.observe(("p", "q"), "e", 3)
    fine.observe(("p", "q"), "other", fine_total - 3)
    coarse.observe(("p",), "e", 10)
    coarse.observe(("p",), "other", 30)
    return BackoffLadder(((fine, (0, 1)), (coarse, (0,))), threshold, 8)


def test_criterion_8_backoff_threshold():
    below = ladder_with_fine_total(9).resolve(("p", "q"), ("e",))
    at = ladder_with_fine_total(10).resolve(("p", "q"), ("e",))
    ok = below == (1, 0.25) and at == (0, 0.3)
    report(8, ok, f"total 9 -> level {below[0]} p={below[1]}; total 10 -> level {at[0]} p={at[1]}")


def pipeline(root, train, test):
    root.mkdir()
    outputs = []
    for kind in ("C", "X"):
        params, pred = root / f"{kind}.params", root / f"{kind}.pred"
        assert main(["train", "--model", kind, "--treebank", str(train), "--out", str(params)]) == 0
        assert main(["parse", "--params", str(params), "--input", str(test), "--out", str(pred)]) == 0
        outputs += [params, pred]
    base = root / "baseline.pred"
    assert main(["baseline", "--train", str(train), "--test", str(test), "--out", str(base)]) == 0
    rep = root / "report.txt"
    assert main(["eval", "--gold", str(test), "--pred", f"C={root / 'C.pred'}", "--pred",
                 f"X={root / 'X.pred'}", "--pred", f"Baseline={base}", "--out", str(rep)]) == 0
    return [p.read_bytes() for p in outputs + [base, rep]]


def test_criterion_9_determinism(tmp_path):
    from spandep.corpus import save_treebank
    bank = sample_treebank(pp_grammar(), 300, 7)
    train, test = split_corpus(bank, 60, 7)
    save_treebank(train, tmp_path / "train.conll")
    save_treebank(test, tmp_path / "test.conll")
    first = pipeline(tmp_path / "one", tmp_path / "train.conll", tmp_path / "test.conll")
    second = pipeline(tmp_path / "two", tmp_path / "train.conll", tmp_path / "test.conll")
    same = sum(a == b for a, b in zip(first, second))
    report(9, same == len(first), f"{same}/{len(first)} files byte-identical across two runs")
