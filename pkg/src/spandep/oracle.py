"""Brute-force ground truth for small sentences.

Enumerates every legal tree and tagging, scores each with the whole-tree
scorer and reports exact maxima and counts.  Caps fail loudly instead of
truncating.
"""

import itertools
import math
from functools import lru_cache

from .corpus import attach_eos
from .models import tree_logprob_direct
from .parser import TIE_EPS, DEFAULT_TAG_CAP, _words_of

MAX_WORDS = 7
MAX_TAGGINGS = 10 ** 6


class CapExceeded(ValueError):
    pass


def _subtrees(i, j, root):
    """All parent maps over tokens i..j forming one projective subtree at root."""
    out = []
    for left in _forests(i, root - 1):
        for right in _forests(root + 1, j):
            heads = {}
            for forest, kids in ((left[0], left[1]), (right[0], right[1])):
                heads.update(forest)
                for k in kids:
                    heads[k] = root
            out.append(heads)
    return out


@lru_cache(maxsize=None)
def _forests_cached(i, j):
    if i > j:
        return (((), ()),)
    out = []
    for k in range(i, j + 1):
        for r in range(i, k + 1):
            for tree in _subtrees(i, k, r):
                for rest, rest_roots in _forests_cached(k + 1, j):
                    out.append((tuple(sorted(tree.items())) + rest, (r,) + rest_roots))
    return tuple(out)


def _forests(i, j):
    return [(dict(f), roots) for f, roots in _forests_cached(i, j)]


def enumerate_trees(n, max_words=MAX_WORDS):
    """Every projective head list over n words (1-based heads, root = 0).

    Each list is in treebank convention; the sentence head has head 0.
    """
    if n > max_words:
        raise CapExceeded(f"{n} words exceeds the enumeration bound {max_words}")
    if n < 1:
        return []
    trees = []
    for root in range(1, n + 1):
        for heads in _subtrees(1, n, root):
            heads[root] = 0
            trees.append(tuple(heads[i] for i in range(1, n + 1)))
    return sorted(trees)


def count_trees(n):
    """Number of projective trees with a single root over n words.

    Counted with an interval recurrence over complete/incomplete half-spans,
    a different route from the constructive enumerator.
    """
    if n < 1:
        return 0
    size = n + 1  # token 0 is the root
    # complete[i][j][d]: headed at i (d=1, rightward) or j (d=0), covering i..j
    complete = [[[0, 0] for _ in range(size)] for _ in range(size)]
    incomplete = [[[0, 0] for _ in range(size)] for _ in range(size)]
    for i in range(size):
        complete[i][i][0] = complete[i][i][1] = 1
    for width in range(1, size):
        for i in range(size - width):
            j = i + width
            inner = sum(complete[i][k][1] * complete[k + 1][j][0] for k in range(i, j))
            incomplete[i][j][0] = inner if i > 0 else 0   # j heads i; the root has no head
            incomplete[i][j][1] = inner
            complete[i][j][0] = sum(complete[i][k][0] * incomplete[k][j][0] for k in range(i, j))
            complete[i][j][1] = sum(incomplete[i][k][1] * complete[k][j][1] for k in range(i + 1, j + 1))
    # the root takes exactly one child: root -> r, r spans everything
    return sum(complete[1][r][0] * complete[r][n][1] for r in range(1, n + 1))


def enumerate_taggings(sentence, lexicon, tag_cap=DEFAULT_TAG_CAP, cap=MAX_TAGGINGS):
    """Cartesian product of candidate tag sets (EOS excluded)."""
    words = _words_of(sentence)
    cands = [lexicon.candidates(w, tag_cap) for w in words]
    if any(not c for c in cands):
        raise ValueError("empty candidate tag set")
    total = math.prod(len(c) for c in cands)
    if total > cap:
        raise CapExceeded(f"{total} taggings exceeds the cap {cap}")
    return list(itertools.product(*cands))


def structures(sentence, lexicon, tag_cap=DEFAULT_TAG_CAP, max_words=MAX_WORDS, cap=MAX_TAGGINGS):
    """Yield every legal (tree, tagging) as an EOS-normalized ParsedSentence."""
    words = _words_of(sentence)
    taggings = enumerate_taggings(words, lexicon, tag_cap, cap)
    for heads in enumerate_trees(len(words), max_words):
        for tags in taggings:
            yield attach_eos(words, tags, heads)


def tie_key(s):
    """Tie-break key shared with the parser: parent array, then tags."""
    return tuple(s.heads), tuple(s.tags)


def brute_force_best(sentence, params, lexicon=None, tag_cap=DEFAULT_TAG_CAP, **caps):
    """(best ParsedSentence, log score) by exhaustive enumeration."""
    lexicon = lexicon or params.lexicon
    best = None
    for s in structures(sentence, lexicon, tag_cap, **caps):
        score = tree_logprob_direct(params, s)
        if best is None or score > best[1] + TIE_EPS or (
                abs(score - best[1]) <= TIE_EPS and tie_key(s) < tie_key(best[0])):
            best = (s, score)
    return best


def count_structures(sentence, lexicon, tag_cap=DEFAULT_TAG_CAP, max_words=MAX_WORDS, cap=MAX_TAGGINGS):
    words = _words_of(sentence)
    return len(enumerate_trees(len(words), max_words)) * len(enumerate_taggings(words, lexicon, tag_cap, cap))
