"""Randomized certification of the parser against the brute-force oracle.

Three suites, each run per model kind on random small problems:

* optimality: ``parse`` finds the oracle's best score;
* uniqueness: the chart's derivation count equals the number of structures;
* agreement: replaying each structure's canonical derivation reproduces the
  whole-tree score.

Failures are shrunk by dropping words while the failure persists.
"""

import random
from dataclasses import dataclass, field

from .corpus import Lexicon, Treebank, attach_eos, build_lexicon
from .estimation import EstimationConfig, fit
from .models import tree_logprob_direct
from .oracle import brute_force_best, count_structures, enumerate_trees, structures
from .parser import count_derivations, parse, replay

SUITES = ("optimality", "uniqueness", "agreement")
CERTIFIED_KINDS = ("A", "B", "C", "Cprime")
TOLERANCE = 1e-9


@dataclass
class Problem:
    """A fitted model plus the lexicon and vocabulary test sentences draw from."""
    kind: str
    params: object
    lexicon: object
    vocab: list


def random_problem(kind, rng, tags=3, tags_per_word=3, vocab_size=5, sentences=40,
                   max_len=6, markov_order=None, threshold=None):
    """Fit ``kind`` on a random treebank over a random ambiguous lexicon."""
    tagset = [f"T{k}" for k in range(tags)]
    entries = {f"w{i}": rng.sample(tagset, rng.randint(1, min(tags_per_word, tags)))
               for i in range(vocab_size)}
    vocab = sorted(entries)
    bank = []
    for _ in range(sentences):
        n = rng.randint(1, max_len)
        words = [rng.choice(vocab) for _ in range(n)]
        bank.append(attach_eos(words, [rng.choice(entries[w]) for w in words],
                               rng.choice(enumerate_trees(n))))
    bank = Treebank(bank)
    # every word lists each of its tags, even ones the sample missed
    seen = build_lexicon(bank)
    lexicon = Lexicon({w: {t: seen.word_tags.get(w, {}).get(t, 0) for t in ts}
                       for w, ts in entries.items()}, seen.open_class)
    config = EstimationConfig(markov_order=markov_order or rng.choice((2, 3)),
                              threshold=threshold or rng.choice((1, 2, 3, 10)))
    return Problem(kind, fit(kind, bank, lexicon, config), lexicon, vocab)


def check_optimality(problem, words, seal_fault=0.0):
    """None on success, else a message."""
    result = parse(words, problem.params, problem.lexicon, seal_fault=seal_fault)
    best, score = brute_force_best(words, problem.params, problem.lexicon)
    if abs(result.logprob - score) > TOLERANCE:
        return f"parse score {result.logprob!r} != oracle best {score!r}"
    direct = tree_logprob_direct(problem.params, result.sentence)
    if abs(direct - score) > TOLERANCE:
        return f"returned structure scores {direct!r} directly, oracle best {score!r}"
    return None


def check_uniqueness(problem, words, seal_fault=0.0):
    want = count_structures(words, problem.lexicon)
    for params in (None, problem.params):
        got = count_derivations(words, problem.lexicon, params)
        if got != want:
            return f"{got} derivations for {want} structures"
    return None


def check_agreement(problem, words, seal_fault=0.0, stride=1):
    for k, s in enumerate(structures(words, problem.lexicon)):
        if k % stride:
            continue
        got, _ = replay(s, problem.params, problem.lexicon, seal_fault=seal_fault)
        want = tree_logprob_direct(problem.params, s)
        if abs(got - want) > TOLERANCE:
            return f"heads {s.heads} tags {s.tags}: incremental {got!r} != direct {want!r}"
    return None


CHECKS = {"optimality": check_optimality, "uniqueness": check_uniqueness,
          "agreement": check_agreement}


def shrink(check, problem, words, **kw):
    """Drop words one at a time while the check still fails."""
    words = list(words)
    message = check(problem, words, **kw)
    improved = True
    while improved and len(words) > 1:
        improved = False
        for k in range(len(words)):
            shorter = words[:k] + words[k + 1:]
            msg = check(problem, shorter, **kw)
            if msg is not None:
                words, message, improved = shorter, msg, True
                break
    return words, message


@dataclass
class Failure:
    suite: str
    kind: str
    words: list
    message: str


@dataclass
class CertifyReport:
    trials: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.failures


def certify(kinds=CERTIFIED_KINDS, suites=SUITES, trials=100, max_words=5, tags=3,
            tags_per_word=3, seed=0, seal_fault=0.0, agreement_max_words=4,
            problems_per_kind=4):
    """Run the suites; each kind gets ``problems_per_kind`` fitted models and
    ``trials`` random sentences spread over them."""
    rng = random.Random(seed)
    report = CertifyReport()
    for kind in kinds:
        problems = [random_problem(kind, rng, tags=tags, tags_per_word=tags_per_word)
                    for _ in range(max(1, problems_per_kind))]
        for suite in suites:
            report.trials[(suite, kind)] = 0
        for t in range(trials):
            problem = problems[t % len(problems)]
            n = rng.randint(1, max_words)
            words = [rng.choice(problem.vocab) for _ in range(n)]
            for suite in suites:
                if suite == "agreement" and n > agreement_max_words:
                    continue
                report.trials[(suite, kind)] += 1
                msg = CHECKS[suite](problem, words, seal_fault=seal_fault)
                if msg is not None:
                    small, msg = shrink(CHECKS[suite], problem, words, seal_fault=seal_fault)
                    report.failures.append(Failure(suite, kind, small, msg))
                    break
    return report
