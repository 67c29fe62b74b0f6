"""Scoring interface of the five probability models.

All factors are natural-log probabilities.  ``tree_logprob_direct`` scores a
whole tagged tree from its events and is the ground truth the parser's
incremental span scores are checked against.

Kinds:
  A       bigram lexical affinities (tagging chain + link/no-link decisions)
  B       selectional preferences (tagging chain + parent spec + child chains)
  C       recursive head-outward generation of (tag, word) children
  Cprime  C with tag-only parent/child dependencies
  X       tagging chain only, no links
"""

import math
from dataclasses import dataclass

from .corpus import check_projective
from .events import affinity_events, chain_events, kid_events
from .symbols import LEFT, RIGHT, STOP

LINK_KINDS = ("A", "B", "C", "Cprime")
CHAIN_KINDS = ("A", "B", "X")
SEAL_KINDS = ("B", "C", "Cprime")


@dataclass(frozen=True)
class LinkContext:
    parent: tuple       # (tag, word)
    child: tuple        # (tag, word)
    direction: str      # side of the child relative to the parent
    prev_sibling_tag: str


def _require(params, kinds, what):
    if params.kind not in kinds:
        raise ValueError(f"{what} is not defined for model kind {params.kind}")


def tag_chain_factor(params, word, tag, following_tags):
    """log Pr(tag | following tags) + log Pr(word | tag).

    ``following_tags`` holds the tags of the next two positions (BOUNDARY
    past the end); markov order 2 only looks at the first one.
    """
    _require(params, CHAIN_KINDS, "tag_chain_factor")
    ctx = tuple(following_tags[:params.markov_order - 1])
    return math.log(params.prob("tag", ctx, tag)) + math.log(params.prob("word", (tag,), word))


def _kid_prob(params, prev, ptag, pword, direction, ctag, cword):
    """Pr(child event | previous sibling tag, parent, direction); ctag STOP = stop."""
    ctx = (prev, ptag, pword, direction)
    kind = params.kind
    if kind == "C":
        ladder = params.ladders["kid_lex"]
        event = (STOP, STOP) if ctag == STOP else (ctag, cword)
        level, p = ladder.resolve(ctx, event)
        if level == 0:
            return p
    p = params.prob("kid_tag", ctx, ctag)
    if kind != "B" and ctag != STOP:
        p *= params.prob("word", (ctag,), cword)
    return p


def link_factor(params, ctx):
    """Log factor attached to adding the link ``ctx.parent -> ctx.child``."""
    kind = params.kind
    ptag, pword = ctx.parent
    ctag, cword = ctx.child
    d = ctx.direction
    if kind in ("C", "Cprime"):
        return math.log(_kid_prob(params, ctx.prev_sibling_tag, ptag, pword, d, ctag, cword))
    if kind == "B":
        side = RIGHT if d == LEFT else LEFT
        spec = params.prob("pspec", (ctag, cword), (side, ptag))
        kid = _kid_prob(params, ctx.prev_sibling_tag, ptag, pword, d, ctag, cword)
        return math.log(spec) + math.log(kid)
    if kind == "A":
        return affinity_factor(params, ctx.parent, ctx.child, d, ctx.prev_sibling_tag, True)
    raise ValueError(f"link_factor is not defined for model kind {kind}")


def seal_factor(params, tword, direction, farthest_child_tag):
    """Log probability that ``tword`` stops generating children on one side."""
    _require(params, SEAL_KINDS, "seal_factor")
    tag, word = tword
    return math.log(_kid_prob(params, farthest_child_tag, tag, word, direction, STOP, None))


def affinity_factor(params, parent, child, direction, arity, linked):
    """log Pr(L = linked | parent, child, direction, arity) under model A.

    Either side may be a backed-off (OUTSIDE, word) pair.
    """
    _require(params, ("A",), "affinity_factor")
    ctx = (parent[0], parent[1], child[0], child[1], direction, arity)
    return math.log(params.prob("link", ctx, "1" if linked else "0"))


def nonlink_factor(params, potential_parent, potential_child, direction, arity):
    return affinity_factor(params, potential_parent, potential_child, direction, arity, False)


def tree_logprob_direct(params, s):
    """Score a complete tagged tree without the parser."""
    if any(t is None for t in s.tags):
        raise ValueError("every token must be tagged")
    kind = params.kind
    if kind != "X":
        bad = check_projective(s)
        if bad:
            raise ValueError(f"not a legal tree: {bad[0]}")
    words, tags = s.words, s.tags
    total = 0.0
    if kind in CHAIN_KINDS:
        for ctx, tag, word in chain_events(words, tags, params.markov_order):
            total += tag_chain_factor(params, word, tag, ctx)
    if kind in SEAL_KINDS:
        for p, d, prev, k in kid_events(s):
            parent = (tags[p - 1], words[p - 1])
            if k is None:
                total += seal_factor(params, parent, d, prev)
            else:
                total += link_factor(params, LinkContext(parent, (tags[k - 1], words[k - 1]), d, prev))
    elif kind == "A":
        for parent, child, d, arity, linked in affinity_events(s):
            total += affinity_factor(params, parent, child, d, arity, linked)
    return total
