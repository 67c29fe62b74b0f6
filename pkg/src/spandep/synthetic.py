"""Hand-built head-outward grammars for sampling and mass checks.

A :class:`Grammar` gives, for every (tag, word) parent and direction, a
first-order Markov chain over children: ``chains[(tag, word, dir)][prev_tag]``
is a list of (event, weight) where event is a (tag, word) child or STOP.
Probabilities are weights over their row total.
"""

import math
import random
from collections import defaultdict

from .corpus import Lexicon, Treebank, attach_eos
from .estimation import CountTable, EstimationConfig, fit, params_from_tables
from .oracle import enumerate_trees
from .symbols import EOS_TAG, EOS_WORD, LEFT, RIGHT, START, STOP


class Grammar:
    def __init__(self, chains):
        self.chains = chains
        for key, rows in chains.items():
            for prev, row in rows.items():
                if not row or any(w <= 0 for _, w in row):
                    raise ValueError(f"bad row {key} {prev}")

    def row(self, tag, word, d, prev):
        return self.chains.get((tag, word, d), {}).get(prev, [(STOP, 1)])

    def prob(self, tag, word, d, prev, event):
        row = self.row(tag, word, d, prev)
        total = sum(w for _, w in row)
        return sum(w for e, w in row if e == event) / total

    def twords(self):
        out = {(EOS_TAG, EOS_WORD)}
        for rows in self.chains.values():
            for row in rows.values():
                out.update(e for e, _ in row if e != STOP)
        return sorted(out)


class _Node:
    __slots__ = ("tag", "word", "left", "right")

    def __init__(self, tag, word):
        self.tag, self.word = tag, word
        self.left, self.right = [], []


def _grow(grammar, node, rng, budget):
    for d, kids in ((LEFT, node.left), (RIGHT, node.right)):
        prev = START
        while True:
            row = grammar.row(node.tag, node.word, d, prev)
            events, weights = zip(*row)
            ev = rng.choices(events, weights)[0]
            if ev == STOP:
                break
            budget[0] -= 1
            if budget[0] < 0:
                raise OverflowError
            kid = _Node(*ev)
            kids.append(kid)
            prev = kid.tag
    for kid in node.left + node.right:
        _grow(grammar, kid, rng, budget)


def _linearize(root):
    """Tokens in order as (tag, word, parent node id) and the node ids."""
    order = []

    def walk(node, parent):
        for kid in reversed(node.left):
            walk(kid, node)
        order.append((node, parent))
        for kid in node.right:
            walk(kid, node)

    for kid in reversed(root.left):
        walk(kid, root)
    pos = {id(node): i for i, (node, _) in enumerate(order, 1)}
    words = [node.word for node, _ in order]
    tags = [node.tag for node, _ in order]
    heads = [0 if parent is root else pos[id(parent)] for _, parent in order]
    return words, tags, heads


def sample_sentence(grammar, rng, max_words=12, tries=1000):
    """Sample one sentence from the grammar, rejecting ones above max_words."""
    for _ in range(tries):
        root = _Node(EOS_TAG, EOS_WORD)
        try:
            _grow(grammar, root, rng, [max_words])
        except OverflowError:
            continue
        if root.right or len(root.left) != 1:
            raise ValueError("grammar must give EOS exactly one left child")
        words, tags, heads = _linearize(root)
        return attach_eos(words, tags, heads)
    raise RuntimeError("could not sample a sentence within the length bound")


def sample_treebank(grammar, count, seed, max_words=12):
    rng = random.Random(seed)
    return Treebank([sample_sentence(grammar, rng, max_words) for _ in range(count)])


def grammar_params(grammar, threshold=10, scale=None):
    """Model C params whose finest-level probabilities equal the grammar's.

    Row weights are scaled so every row total reaches the threshold.
    """
    kid_lex = CountTable("kid_lex", 4, 2)
    kid_tag_2 = CountTable("kid_tag_2", 3, 1)
    kid_tag_1 = CountTable("kid_tag_1", 2, 1)
    word_1 = CountTable("word_1", 1, 1)
    word_tags = defaultdict(dict)
    for tag, word in grammar.twords():
        if word != EOS_WORD:
            word_tags[word][tag] = 1
    for (tag, word, d), rows in sorted(grammar.chains.items()):
        for prev, row in sorted(rows.items()):
            total = sum(w for _, w in row)
            k = scale or max(1, math.ceil(threshold / total))
            for ev, w in row:
                event = (STOP, STOP) if ev == STOP else ev
                kid_lex.observe((prev, tag, word, d), event, w * k)
                kid_tag_2.observe((prev, tag, d), event[0], w * k)
                kid_tag_1.observe((prev, d), event[0], w * k)
                if ev != STOP:
                    word_1.observe((ev[0],), ev[1], w * k)
    # chains that are never written down stop immediately
    for tag, word in grammar.twords():
        for d in (LEFT, RIGHT):
            if (tag, word, d) not in grammar.chains:
                k = scale or threshold
                kid_lex.observe((START, tag, word, d), (STOP, STOP), k)
                kid_tag_2.observe((START, tag, d), STOP, k)
                kid_tag_1.observe((START, d), STOP, k)
    tables = {"kid_lex": kid_lex, "kid_tag_2": kid_tag_2, "kid_tag_1": kid_tag_1, "word_1": word_1}
    return params_from_tables("C", tables, Lexicon(word_tags), threshold=threshold)


def rollouts(grammar, max_depth):
    """Every derivation whose nodes all sit at depth <= max_depth (EOS is depth 0).

    Yields (ParsedSentence, probability).  Chains must be acyclic in their
    previous-tag state so each chain is finite.
    """
    root = _Node(EOS_TAG, EOS_WORD)
    for tree, p in _expand(grammar, root, max_depth):
        words, tags, heads = _linearize(tree)
        yield attach_eos(words, tags, heads), p


def _chains(grammar, tag, word, d, prev, depth, seen):
    """(list of child (tag, word), probability) for one chain."""
    if prev in seen:
        raise ValueError("cyclic chain state; rollouts would not terminate")
    for ev, _ in grammar.row(tag, word, d, prev):
        p = grammar.prob(tag, word, d, prev, ev)
        if ev == STOP:
            yield [], p
        elif depth > 0:
            for rest, q in _chains(grammar, tag, word, d, ev[0], depth, seen | {prev}):
                yield [ev] + rest, p * q


def _expand(grammar, node, depth):
    """All completions of node's subtree within ``depth`` more levels."""
    options = []
    for d in (LEFT, RIGHT):
        options.append(list(_chains(grammar, node.tag, node.word, d, START, depth, frozenset())))
    for left, pl in options[0]:
        for right, pr in options[1]:
            kids = [(_Node(*ev), LEFT) for ev in left] + [(_Node(*ev), RIGHT) for ev in right]
            yield from _complete(grammar, node, kids, 0, depth - 1, pl * pr)


def _complete(grammar, node, kids, k, depth, p):
    if k == len(kids):
        out = _Node(node.tag, node.word)
        out.left = [kid for kid, d in kids if d == LEFT]
        out.right = [kid for kid, d in kids if d == RIGHT]
        yield out, p
        return
    kid, d = kids[k]
    for sub, q in _expand(grammar, kid, depth):
        new = list(kids)
        new[k] = (sub, d)
        yield from _complete(grammar, node, new, k + 1, depth, p * q)


def completion_mass(grammar, tag, word, depth):
    """Probability that a subtree rooted at (tag, word) finishes within depth
    further levels, by recursion on the chains (no enumeration)."""
    memo = {}

    def q(t, w, dep):
        key = (t, w, dep)
        if key not in memo:
            total = 1.0
            for d in (LEFT, RIGHT):
                total *= chain_mass(t, w, d, START, dep)
            memo[key] = total
        return memo[key]

    def chain_mass(t, w, d, prev, dep):
        total = 0.0
        for ev, _ in grammar.row(t, w, d, prev):
            p = grammar.prob(t, w, d, prev, ev)
            if ev == STOP:
                total += p
            elif dep > 0:
                total += p * q(ev[0], ev[1], dep - 1) * chain_mass(t, w, d, ev[0], dep)
        return total

    return q(tag, word, depth)


def toy_grammar():
    """Small recursive grammar: nouns take prepositional phrases that contain
    nouns, so derivations are unbounded and depth truncation loses mass."""
    D, N, V, P = "D", "N", "V", "P"
    return Grammar({
        (EOS_TAG, EOS_WORD, LEFT): {START: [((V, "fell"), 3), ((V, "rose"), 1)], V: [(STOP, 1)]},
        (V, "fell", LEFT): {START: [((N, "price"), 2), ((N, "stock"), 1)], N: [(STOP, 1)]},
        (V, "rose", LEFT): {START: [((N, "stock"), 1)], N: [(STOP, 1)]},
        (N, "price", LEFT): {START: [((D, "the"), 3), (STOP, 1)], D: [(STOP, 1)]},
        (N, "price", RIGHT): {START: [((P, "of"), 1), (STOP, 2)], P: [(STOP, 1)]},
        (N, "stock", LEFT): {START: [((D, "the"), 1), (STOP, 1)], D: [(STOP, 1)]},
        (N, "stock", RIGHT): {START: [((P, "of"), 1), (STOP, 3)], P: [(STOP, 1)]},
        (P, "of", RIGHT): {START: [((N, "stock"), 1), ((N, "price"), 1)], N: [(STOP, 1)]},
    })


def pp_grammar():
    """Grammar where prepositional attachment depends on word identity.

    Some verbs ("ate", "put") take a PP themselves, others ("saw", "liked")
    leave it to their object, and some nouns ("man", "pizza") attract PPs
    while others do not.  Tags alone cannot tell these apart.
    """
    D, N, V, P, A = "D", "N", "V", "P", "A"
    subjects = [((N, "man"), 2), ((N, "dog"), 2), ((N, "girl"), 2), ((N, "cat"), 1)]
    objects = [((N, "pizza"), 3), ((N, "man"), 2), ((N, "fork"), 1), ((N, "dog"), 1),
               ((N, "table"), 1), ((N, "hat"), 2)]
    pp_objects = [((N, "fork"), 3), ((N, "table"), 3), ((N, "hat"), 2), ((N, "dog"), 1)]
    chains = {
        (EOS_TAG, EOS_WORD, LEFT): {START: [((V, "ate"), 3), ((V, "saw"), 3), ((V, "put"), 2),
                                           ((V, "liked"), 2), ((V, "slept"), 1)],
                                    V: [(STOP, 1)]},
        # PP-taking verbs
        (V, "ate", LEFT): {START: subjects, N: [(STOP, 1)]},
        (V, "ate", RIGHT): {START: objects, N: [((P, "with"), 8), (STOP, 2)], P: [(STOP, 1)]},
        (V, "put", LEFT): {START: subjects, N: [(STOP, 1)]},
        (V, "put", RIGHT): {START: objects, N: [((P, "on"), 9), (STOP, 1)], P: [(STOP, 1)]},
        # verbs whose objects carry the PP
        (V, "saw", LEFT): {START: subjects, N: [(STOP, 1)]},
        (V, "saw", RIGHT): {START: objects, N: [(STOP, 1)]},
        (V, "liked", LEFT): {START: subjects, N: [(STOP, 1)]},
        (V, "liked", RIGHT): {START: objects, N: [(STOP, 1)]},
        (V, "slept", LEFT): {START: subjects, N: [(STOP, 1)]},
        (V, "slept", RIGHT): {START: [((P, "on"), 1), (STOP, 2)], P: [(STOP, 1)]},
        (P, "with", RIGHT): {START: pp_objects, N: [(STOP, 1)]},
        (P, "on", RIGHT): {START: pp_objects, N: [(STOP, 1)]},
    }
    for noun, pp in (("man", 6), ("pizza", 6), ("girl", 1), ("dog", 1), ("cat", 1),
                     ("fork", 1), ("table", 1), ("hat", 1)):
        chains[(N, noun, LEFT)] = {START: [((D, "the"), 4), ((D, "a"), 2), ((A, "big"), 1)],
                                   D: [(STOP, 1)], A: [((D, "the"), 2), (STOP, 1)]}
        chains[(N, noun, RIGHT)] = {START: [((P, "with"), pp), (STOP, 10 - pp)], P: [(STOP, 1)]}
    return Grammar(chains)


def bench_sentence(n, seed, vocab_size=20):
    """Random word sequence over the bench vocabulary."""
    rng = random.Random(seed)
    return [f"w{rng.randrange(vocab_size)}" for _ in range(n)]


def bench_lexicon(vocab_size=20, tags_per_word=1):
    """Fixed tag set of ``tags_per_word`` tags, every word allowing all of them."""
    tagset = [f"T{k}" for k in range(tags_per_word)]
    return Lexicon({f"w{i}": {t: 1 for t in tagset} for i in range(vocab_size)})


def bench_params(kind, lexicon, seed, sentences=60, max_len=8, threshold=2):
    """Model fitted to random trees over the bench vocabulary."""
    rng = random.Random(seed)
    vocab = sorted(lexicon.word_tags)
    bank = []
    for _ in range(sentences):
        n = rng.randint(1, max_len)
        words = [rng.choice(vocab) for _ in range(n)]
        tags = [rng.choice(lexicon.candidates(w)) for w in words]
        bank.append(attach_eos(words, tags, rng.choice(enumerate_trees(n, max_words=max_len))))
    return fit(kind, Treebank(bank), lexicon, EstimationConfig(threshold=threshold))
