"""The elementary events each model reads off a tagged tree.

Training counts these events and whole-tree scoring sums their log
probabilities, so both always agree on what a model conditions on.
Positions are 1-based and the EOS token is the last one.
"""

from functools import lru_cache

from .derivation import LEFTWARD, derive
from .symbols import BOUNDARY, LEFT, OUTSIDE, RIGHT, START


def chain_context(tags, i, order):
    """Tags of the ``order - 1`` tokens after position i (chain runs right to left)."""
    n = len(tags)
    return tuple(tags[j - 1] if j <= n else BOUNDARY for j in range(i + 1, i + order))


def chain_events(words, tags, order):
    """(context, tag, word) for every position, EOS included."""
    for i in range(1, len(words) + 1):
        yield chain_context(tags, i, order), tags[i - 1], words[i - 1]


def kid_events(s):
    """Head-outward child generation.

    Yields (parent, direction, previous sibling tag, child) for every child
    closest first, then (parent, direction, last child tag, None) for STOP.
    """
    for i in range(1, s.eos + 1):
        for d in (LEFT, RIGHT):
            prev = START
            for k in s.kids(i, d):
                yield i, d, prev, k
                prev = s.tags[k - 1]
            yield i, d, prev, None


def parent_spec_events(s):
    """(child, side of the parent, parent tag) for every non-EOS token."""
    for i in range(1, s.eos):
        h = s.heads[i - 1]
        yield i, (RIGHT if h > i else LEFT), s.tags[h - 1]


@lru_cache(maxsize=4096)
def _derivation(heads):
    return derive((None,) + heads)


class _TreeView:
    def __init__(self, s):
        self.s = s
        self.tags = s.tags
        self.words = s.words
        self.par = (None,) + tuple(s.heads)
        eos = s.eos
        self.left_kids = [[] for _ in range(eos + 1)]   # closest first
        self.right_kids = [[] for _ in range(eos + 1)]
        for i in range(1, eos + 1):
            self.left_kids[i] = s.kids(i, LEFT)
            self.right_kids[i] = s.kids(i, RIGHT)

    def tword(self, i):
        return self.tags[i - 1], self.words[i - 1]

    def outside(self, i):
        return OUTSIDE, self.words[i - 1]

    def kid_between(self, p, c):
        """Tag of p's farthest child strictly between p and c, or START."""
        if c < p:
            kids = [k for k in self.left_kids[p] if k > c]
        else:
            kids = [k for k in self.right_kids[p] if k < c]
        return self.tags[kids[-1] - 1] if kids else START


def affinity_events(s):
    """Link-presence decisions of the lexical-affinity model.

    Yields (parent repr, child repr, direction, arity tag, linked) where a
    repr is a (tag, word) pair whose tag is OUTSIDE when the word lies outside
    the span at the moment the pair is decided.  Each unordered pair is
    decided once: when it is linked, or when the first of the two becomes
    internal to a span of the canonical derivation.  Both orientations of the
    pair are emitted except those that would make EOS a child.
    """
    v = _TreeView(s)
    eos = s.eos
    root = _derivation(tuple(s.heads))
    for node in root.postorder():
        if not node.is_seed:
            yield from _internalize(v, node.start, node.mid, node.end,
                                    node.left.cover is not None, node.right.cover is not None)
        if node.cover is not None:
            p, c = (node.start, node.end) if node.cover == LEFTWARD else (node.end, node.start)
            yield from _linked_pair(v, p, c, eos)
    if root.cover is None:
        # the two outer endwords never become internal
        yield v.tword(eos), v.tword(1), LEFT, v.kid_between(eos, 1), False


def _linked_pair(v, p, c, eos):
    d = LEFT if c < p else RIGHT
    yield v.tword(p), v.tword(c), d, v.kid_between(p, c), True
    if p != eos:
        yield v.tword(c), v.tword(p), (RIGHT if d == LEFT else LEFT), v.kid_between(c, p), False


def _internalize(v, s, m, t, linked_s, linked_t):
    eos = v.s.eos
    tm = v.tword(m)
    left_arity = v.tags[v.left_kids[m][-1] - 1] if v.left_kids[m] else START
    right_arity = v.tags[v.right_kids[m][-1] - 1] if v.right_kids[m] else START
    if not linked_s:
        yield tm, v.tword(s), LEFT, left_arity, False
        yield v.tword(s), tm, RIGHT, v.kid_between(s, m), False
    if not linked_t:
        if t != eos:
            yield tm, v.tword(t), RIGHT, right_arity, False
        yield v.tword(t), tm, LEFT, v.kid_between(t, m), False
    for x in range(1, s):
        yield tm, v.outside(x), LEFT, left_arity, False
        yield v.outside(x), tm, RIGHT, OUTSIDE, False
    for x in range(t + 1, eos + 1):
        if x != eos:
            yield tm, v.outside(x), RIGHT, right_arity, False
        yield v.outside(x), tm, LEFT, OUTSIDE, False
