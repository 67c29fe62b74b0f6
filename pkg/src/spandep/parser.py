"""Bottom-up span parser.

A span covers tokens start..end (end > start).  Every word strictly inside
has its parent inside the span; only the two endwords may still be linked to
the rest of the sentence.  Spans combine by *covered concatenation*: two
spans sharing an endword are joined and a link between the new span's
endwords may be added.  Requiring the left piece to be minimal (a width-1
seed or a span whose last step added a covering link) gives every tree a
single derivation.

Spans with equal :class:`Signature` combine identically in the future, so the
chart keeps only the best-scoring span per (start, end, signature).
"""

import logging
from collections import defaultdict
from dataclasses import dataclass
from typing import NamedTuple

from .corpus import ParsedSentence, attach_eos
from .derivation import LEFTWARD, RIGHTWARD, derive
from .models import LinkContext, affinity_factor, link_factor, seal_factor, tag_chain_factor
from .symbols import BOUNDARY, EOS_TAG, EOS_WORD, LEFT, OUTSIDE, RIGHT, START

log = logging.getLogger(__name__)

TIE_EPS = 1e-12
DEFAULT_TAG_CAP = 8
# marks "EOS already has its child" in signatures that do not track kid tags
HAS_KID = "*"


class ParseError(ValueError):
    pass


class Signature(NamedTuple):
    first_tag: str          # tag of the start word
    second_tag: str | None  # tag of start+1 (trigram chains only)
    last_tag: str           # (hypothesized) tag of the end word
    after_tag: str | None   # hypothesized tag of end+1 (trigram chains only)
    left_has_parent: bool
    right_has_parent: bool
    covered: bool           # last step added a link between the endwords
    left_kid: str | None    # tag of start's farthest right child in the span, or START
    right_kid: str | None   # tag of end's farthest left child in the span, or START


class Span:
    __slots__ = ("start", "end", "sig", "score", "back")

    def __init__(self, start, end, sig, score, back):
        self.start = start
        self.end = end
        self.sig = sig
        self.score = score
        # ("seed", tags, cover) or (left span, right span, cover)
        self.back = back

    @property
    def minimal(self):
        return self.sig[6] or self.end == self.start + 1

    def __repr__(self):
        return f"Span({self.start}, {self.end}, {tuple(self.sig)}, {self.score:.6g})"


def _words_of(sentence):
    if isinstance(sentence, ParsedSentence):
        words = list(sentence.words)
    else:
        words = list(sentence)
    if words and words[-1] == EOS_WORD:
        words = words[:-1]
    if not words:
        raise ParseError("cannot parse an empty sentence")
    return words


class StructureScheme:
    """Signatures and (zero) scores for counting legal structures."""

    track_kids = False
    order3 = False

    def __init__(self, words, lexicon, tag_cap=DEFAULT_TAG_CAP):
        self.words = [None] + list(words) + [EOS_WORD]
        self.N = len(self.words) - 1
        self.cands = [None] + [lexicon.candidates(w, tag_cap) for w in self.words[1:]]
        for i in range(1, self.N + 1):
            if not self.cands[i]:
                raise ParseError(f"no candidate tags for {self.words[i]!r}")

    # hooks overridden by model schemes
    def chain(self, i, tags):
        return 0.0

    def link_cost(self, p, ptag, c, ctag, prev_p, prev_c):
        return 0.0

    def internal(self, s, m, t, a, b):
        return 0.0

    def final(self, sig):
        return 0.0

    def _kid(self, tag, pos):
        if self.track_kids:
            return tag
        return HAS_KID if pos == self.N else None

    def _start_kid(self, pos):
        if self.track_kids or pos == self.N:
            return START
        return None

    def seeds(self, i):
        """Yield (signature, score, tags, cover) for the width-1 span (i, i+1)."""
        N = self.N
        after = self.cands[i + 2] if i + 2 <= N else (BOUNDARY,)
        for ti in self.cands[i]:
            for tj in self.cands[i + 1]:
                for tk in (after if self.order3 else (None,)):
                    ts = tj if self.order3 else None
                    base = self.chain(i, (ti, tj, tk))
                    sk, ek = self._start_kid(i), self._start_kid(i + 1)
                    yield (Signature(ti, ts, tj, tk, False, False, False, sk, ek),
                           base, (ti, tj, tk), None)
                    if i + 1 != N:
                        yield (Signature(ti, ts, tj, tk, False, True, True, self._kid(tj, i), ek),
                               base + self.link_cost(i, ti, i + 1, tj, START, START),
                               (ti, tj, tk), LEFTWARD)
                    yield (Signature(ti, ts, tj, tk, True, False, True, sk, self._kid(ti, i + 1)),
                           base + self.link_cost(i + 1, tj, i, ti, START, START),
                           (ti, tj, tk), RIGHTWARD)

    def combine(self, a, b, s, m, t):
        """Covered concatenations of compatible signatures a = [s, m], b = [m, t].

        Returns a list of (cover, signature, added score).
        """
        tf, ts, _, _, lp, _, _, ks, _ = a
        _, _, tl, ta, _, rp, _, _, kt = b
        base = self.internal(s, m, t, a, b)
        out = [(None, Signature(tf, ts, tl, ta, lp, rp, False, ks, kt), base)]
        if not lp and not rp:
            if t != self.N:
                out.append((LEFTWARD, Signature(tf, ts, tl, ta, False, True, True, self._kid(tl, s), kt),
                            base + self.link_cost(s, tf, t, tl, ks, kt)))
            if t != self.N or kt == START:
                out.append((RIGHTWARD, Signature(tf, ts, tl, ta, True, False, True, ks, self._kid(tf, t)),
                            base + self.link_cost(t, tl, s, tf, kt, ks)))
        return out

    def accept(self, sig):
        """Score added when a [1, EOS] span becomes a full parse, or None."""
        if not sig[4] or sig[5]:
            return None
        return self.final(sig)


class ModelScheme(StructureScheme):
    """Span scoring for models A, B, C and Cprime."""

    track_kids = True

    def __init__(self, words, lexicon, params, tag_cap=DEFAULT_TAG_CAP, seal_fault=0.0):
        super().__init__(words, lexicon, tag_cap)
        if params.kind == "X":
            raise ParseError("model X assigns no links; use tag_only")
        self.params = params
        self.kind = params.kind
        self.has_chain = self.kind in ("A", "B")
        self.order3 = self.has_chain and params.markov_order == 3
        self.seal_fault = seal_fault
        self._cache = {}
        self._ext = {}

    def chain(self, i, tags):
        if not self.has_chain:
            return 0.0
        key = ("c", i, tags if self.order3 else tags[:2])
        v = self._cache.get(key)
        if v is None:
            ti, tj, tk = tags
            following = (tj, tk if tk is not None else BOUNDARY)
            v = tag_chain_factor(self.params, self.words[i], ti, following)
            self._cache[key] = v
        return v

    def _tw(self, pos, tag):
        return tag, self.words[pos]

    def _aff(self, parent, child, d, arity, linked):
        key = ("a", parent, child, d, arity, linked)
        v = self._cache.get(key)
        if v is None:
            v = affinity_factor(self.params, parent, child, d, arity, linked)
            self._cache[key] = v
        return v

    def link_cost(self, p, ptag, c, ctag, prev_p, prev_c):
        key = ("l", p, ptag, c, ctag, prev_p, prev_c)
        v = self._cache.get(key)
        if v is None:
            d = LEFT if c < p else RIGHT
            v = link_factor(self.params, LinkContext(self._tw(p, ptag), self._tw(c, ctag), d, prev_p))
            if self.kind == "A" and p != self.N:
                back = RIGHT if d == LEFT else LEFT
                v += self._aff(self._tw(c, ctag), self._tw(p, ptag), back, prev_c, False)
            self._cache[key] = v
        return v

    def seal(self, pos, tag, d, farthest):
        key = ("s", pos, tag, d, farthest)
        v = self._cache.get(key)
        if v is None:
            v = seal_factor(self.params, self._tw(pos, tag), d, farthest) + self.seal_fault
            self._cache[key] = v
        return v

    def _external(self, m, tm, arity, side, bound):
        """Model A no-link factors between m and every word beyond ``bound``.

        side LEFT sums x < bound, side RIGHT sums x > bound.
        """
        key = (m, tm, arity, side)
        sums = self._ext.get(key)
        if sums is None:
            tw = self._tw(m, tm)
            N = self.N
            sums = [0.0] * (N + 2)
            if side == LEFT:
                # sums[b] = total over x < b
                for x in range(1, m):
                    out = (OUTSIDE, self.words[x])
                    sums[x + 1] = sums[x] + self._aff(tw, out, LEFT, arity, False) + \
                        self._aff(out, tw, RIGHT, OUTSIDE, False)
            else:
                # sums[b] = total over x > b
                for x in range(N, m, -1):
                    out = (OUTSIDE, self.words[x])
                    v = self._aff(out, tw, LEFT, OUTSIDE, False)
                    if x != N:
                        v += self._aff(tw, out, RIGHT, arity, False)
                    sums[x - 1] = sums[x] + v
            self._ext[key] = sums
        return sums[bound]

    def internal(self, s, m, t, a, b):
        tm = a[2]
        if self.kind != "A":
            return self.seal(m, tm, LEFT, a[8]) + self.seal(m, tm, RIGHT, b[7])
        key = ("i", s, m, t, a[0], tm, b[2], a[6], b[6], a[7], a[8], b[7], b[8])
        v = self._cache.get(key)
        if v is None:
            tw = self._tw(m, tm)
            v = 0.0
            if not a[6]:
                ws = self._tw(s, a[0])
                v += self._aff(tw, ws, LEFT, a[8], False) + self._aff(ws, tw, RIGHT, a[7], False)
            if not b[6]:
                wt = self._tw(t, b[2])
                if t != self.N:
                    v += self._aff(tw, wt, RIGHT, b[7], False)
                v += self._aff(wt, tw, LEFT, b[8], False)
            v += self._external(m, tm, a[8], LEFT, s) + self._external(m, tm, b[7], RIGHT, t)
            self._cache[key] = v
        return v

    def final(self, sig):
        N = self.N
        v = 0.0
        if self.has_chain:
            v += self.chain(N, (EOS_TAG, BOUNDARY, BOUNDARY))
        if self.kind == "A":
            if not sig.covered:
                v += self._aff(self._tw(N, EOS_TAG), self._tw(1, sig.first_tag), LEFT, sig.right_kid, False)
        else:
            v += self.seal(1, sig.first_tag, LEFT, START) + self.seal(1, sig.first_tag, RIGHT, sig.left_kid)
            v += self.seal(N, EOS_TAG, LEFT, sig.right_kid) + self.seal(N, EOS_TAG, RIGHT, START)
        return v


@dataclass
class ChartStats:
    spans_built: int = 0
    cells: int = 0
    combinations: int = 0
    pairs: int = 0
    max_signatures: dict = None


class Chart:
    """Best span per (start, end, signature), built by increasing width."""

    def __init__(self, scheme, counting=False):
        self.scheme = scheme
        self.counting = counting
        self.N = scheme.N
        self.cells = defaultdict(dict)
        self.stats = ChartStats(max_signatures={})

    def _relax(self, cell, span):
        self.stats.spans_built += 1
        old = cell.get(span.sig)
        if old is None:
            cell[span.sig] = span
        elif self.counting:
            old.score += span.score
        elif span.score > old.score + TIE_EPS or (
                abs(span.score - old.score) <= TIE_EPS and local_key(span) < local_key(old)):
            cell[span.sig] = span

    def build(self):
        scheme = self.scheme
        N = self.N
        cells = self.cells
        counting = self.counting
        stats = self.stats
        for i in range(1, N):
            cell = cells[i, i + 1]
            for sig, score, tags, cover in scheme.seeds(i):
                self._relax(cell, Span(i, i + 1, sig, 1 if counting else score, ("seed", tags, cover)))
        self._index(1)
        for width in range(2, N):
            for s in range(1, N - width + 1):
                t = s + width
                cell = cells[s, t]
                for m in range(s + 1, t):
                    right_index = self._left_index[m, t]
                    for a in self._minimal[s, m]:
                        asig = a.sig
                        partners = right_index.get((asig[2], asig[3], not asig[5]))
                        if not partners:
                            continue
                        for b in partners:
                            stats.pairs += 1
                            for cover, sig, delta in scheme.combine(asig, b.sig, s, m, t):
                                stats.combinations += 1
                                if counting:
                                    score = a.score * b.score
                                else:
                                    score = a.score + b.score + delta
                                self._relax(cell, Span(s, t, sig, score, (a, b, cover)))
            self._index(width)
        stats.cells = sum(len(c) for c in cells.values())
        return self

    def _index(self, width):
        if not hasattr(self, "_minimal"):
            self._minimal = {}
            self._left_index = {}
        for s in range(1, self.N - width + 1):
            t = s + width
            cell = self.cells[s, t]
            self.stats.max_signatures[width] = max(self.stats.max_signatures.get(width, 0), len(cell))
            spans = [cell[k] for k in sorted(cell, key=_sig_order)]
            self._minimal[s, t] = [sp for sp in spans if sp.minimal]
            index = {}
            for sp in spans:
                g = sp.sig
                index.setdefault((g[0], g[1], g[4]), []).append(sp)
            self._left_index[s, t] = index

    def finals(self):
        """(span, total score) for every complete parse signature."""
        out = []
        for sig, span in sorted(self.cells[1, self.N].items(), key=lambda kv: _sig_order(kv[0])):
            extra = self.scheme.accept(sig)
            if extra is None:
                continue
            out.append((span, span.score if self.counting else span.score + extra))
        return out


def _sig_order(sig):
    return tuple("" if x is None else str(x) for x in sig)


def span_analysis(span):
    """Parents and tags fixed by a span: ({pos: parent}, {pos: tag})."""
    parents, tags = {}, {}
    stack = [span]
    while stack:
        sp = stack.pop()
        kind = sp.back
        if kind[0] == "seed":
            ti, tj, _ = kind[1]
            tags[sp.start], tags[sp.end] = ti, tj
            cover = kind[2]
        else:
            stack.append(kind[0])
            stack.append(kind[1])
            cover = kind[2]
        if cover == LEFTWARD:
            parents[sp.end] = sp.start
        elif cover == RIGHTWARD:
            parents[sp.start] = sp.end
    return parents, tags


def local_key(span):
    parents, tags = span_analysis(span)
    rng = range(span.start, span.end + 1)
    return tuple(parents.get(i, 0) for i in rng), tuple(tags[i] for i in rng)


def _analysis_to_sentence(words, span):
    parents, tags = span_analysis(span)
    N = len(words) + 1
    heads = [parents[i] if parents[i] != N else 0 for i in range(1, N)]
    return attach_eos(words, [tags[i] for i in range(1, N)], heads)


@dataclass
class ParseResult:
    sentence: ParsedSentence
    logprob: float


def _scheme_for(words, params, lexicon, tag_cap, seal_fault=0.0):
    return ModelScheme(words, lexicon or params.lexicon, params, tag_cap, seal_fault)


def parse(sentence, params, lexicon=None, tag_cap=DEFAULT_TAG_CAP, seal_fault=0.0):
    """Highest-scoring (tree, tagging) for a sentence.

    Returns a :class:`ParseResult` with the EOS-normalized parse and its log
    score.  Model X is delegated to :func:`tag_only`.
    """
    words = _words_of(sentence)
    if params.kind == "X":
        return tag_only(words, params, lexicon, tag_cap)
    scheme = _scheme_for(words, params, lexicon, tag_cap, seal_fault)
    chart = Chart(scheme).build()
    best = None
    for span, total in chart.finals():
        if best is None or total > best[1] + TIE_EPS or (
                abs(total - best[1]) <= TIE_EPS and local_key(span) < local_key(best[0])):
            best = (span, total)
    if best is None:
        raise ParseError("no legal parse found")
    return ParseResult(_analysis_to_sentence(words, best[0]), best[1])


def tag_only(sentence, params, lexicon=None, tag_cap=DEFAULT_TAG_CAP):
    """Viterbi tagging under the tagging chain alone; heads are left unset."""
    words = _words_of(sentence)
    lexicon = lexicon or params.lexicon
    order = params.markov_order
    seq = words + [EOS_WORD]
    N = len(seq)
    cands = [lexicon.candidates(w, tag_cap) for w in seq]
    # the chain generates right to left, so run the Viterbi pass from the end;
    # state = tags of the next (order - 1) positions
    best = {(BOUNDARY,) * (order - 1): (0.0, ())}
    for i in range(N, 0, -1):
        new = {}
        for state, (score, tags) in sorted(best.items()):
            for tag in cands[i - 1]:
                v = score + tag_chain_factor(params, seq[i - 1], tag, state + (BOUNDARY,))
                nstate = ((tag,) + state)[:order - 1]
                cand_tags = (tag,) + tags
                old = new.get(nstate)
                if old is None or v > old[0] + TIE_EPS or (abs(v - old[0]) <= TIE_EPS and cand_tags < old[1]):
                    new[nstate] = (v, cand_tags)
        best = new
    score, tags = min(best.values(), key=lambda st: (-st[0], st[1]))
    return ParseResult(attach_eos(words, list(tags[:-1]), None), score)


def count_derivations(sentence, lexicon, params=None, tag_cap=DEFAULT_TAG_CAP):
    """Number of derivations the chart admits; equals the number of legal
    (tree, tagging) pairs when derivations are unique.  Exact integers."""
    words = _words_of(sentence)
    if params is None:
        scheme = StructureScheme(words, lexicon, tag_cap)
    else:
        scheme = ModelScheme(words, lexicon, params, tag_cap)
    chart = Chart(scheme, counting=True).build()
    return sum(span.score for span, _ in chart.finals())


def chart_stats(sentence, params=None, lexicon=None, tag_cap=DEFAULT_TAG_CAP):
    words = _words_of(sentence)
    if params is None:
        scheme = StructureScheme(words, lexicon, tag_cap)
    else:
        scheme = _scheme_for(words, params, lexicon, tag_cap)
    return Chart(scheme).build().stats


def seed_spans(sentence, i, lexicon, params, tag_cap=DEFAULT_TAG_CAP):
    words = _words_of(sentence)
    scheme = ModelScheme(words, lexicon, params, tag_cap)
    if not 1 <= i < scheme.N:
        raise ParseError(f"seed position {i} out of range")
    return [Span(i, i + 1, sig, score, ("seed", tags, cover))
            for sig, score, tags, cover in scheme.seeds(i)]


def covered_concatenate(a, b, cover, scheme):
    """Join spans a = [s, m] and b = [m, t]; returns the new span or None if
    the requested cover is illegal.  Raises on malformed input."""
    if a.end != b.start:
        raise ParseError("spans are not adjacent")
    if not a.minimal:
        raise ParseError("left span must be minimal")
    if a.sig[5] == b.sig[4]:
        raise ParseError("shared word must have a parent in exactly one span")
    if (a.sig[2], a.sig[3]) != (b.sig[0], b.sig[1]):
        raise ParseError("tag hypotheses disagree")
    for c, sig, delta in scheme.combine(a.sig, b.sig, a.start, a.end, b.end):
        if c == cover:
            return Span(a.start, b.end, sig, a.score + b.score + delta, (a, b, cover))
    return None


def replay(s, params, lexicon=None, tag_cap=DEFAULT_TAG_CAP, seal_fault=0.0):
    """Score a given tagged tree by running its canonical derivation through
    the parser's seed / covered-concatenation / acceptance steps."""
    words = list(s.words[:-1])
    scheme = _scheme_for(words, params, lexicon, tag_cap, seal_fault)
    tags = (None,) + tuple(s.tags) + (BOUNDARY,)
    root = derive((None,) + tuple(s.heads))

    def build(node):
        if node.is_seed:
            i = node.start
            want = (tags[i], tags[i + 1], tags[i + 2] if scheme.order3 else None)
            for sig, score, seed_tags, cover in scheme.seeds(i):
                if cover == node.cover and seed_tags == want:
                    return Span(i, i + 1, sig, score, ("seed", seed_tags, cover))
            raise ParseError(f"no seed for tokens {i}, {i + 1}; tag outside the candidate set?")
        a, b = build(node.left), build(node.right)
        out = covered_concatenate(a, b, node.cover, scheme)
        if out is None:
            raise ParseError("canonical derivation step rejected")
        return out

    span = build(root)
    extra = scheme.accept(span.sig)
    if extra is None:
        raise ParseError("derivation does not end in a complete parse")
    return span.score + extra, span
