"""Dependency treebanks: reading, writing, validation and the tag lexicon.

On disk a sentence is one token per line, ``INDEX<TAB>WORD<TAB>TAG<TAB>HEAD``,
with HEAD 0 marking the sentence head and a blank line between sentences.
In memory every sentence carries an explicit end-of-sentence token at
position n+1 and the sentence head points at it.
"""

import hashlib
import logging
import random
from collections import Counter, defaultdict
from dataclasses import dataclass, field

from .symbols import EOS_TAG, EOS_WORD, LEFT, RESERVED, RIGHT

log = logging.getLogger(__name__)

# column positions of (index, word, tag, head)
FORMATS = {
    "conll4": (0, 1, 2, 3),
    "conllx": (0, 1, 3, 6),
    "conllu": (0, 1, 3, 6),
}


class TreebankError(ValueError):
    pass


@dataclass(frozen=True)
class Token:
    index: int
    word: str
    tag: str | None


@dataclass(frozen=True)
class ParsedSentence:
    """A tagged sentence with its dependency tree.

    ``words``, ``tags`` and ``heads`` all include the EOS token as their last
    entry.  ``heads[p]`` is the 1-based index of the parent of the token at
    1-based position ``p + 1``; the EOS token has head 0.  Tags may be None
    for sentences that have not been tagged yet, and heads may be None for
    sentences that have not been parsed.
    """

    words: tuple
    tags: tuple
    heads: tuple | None

    @property
    def n(self):
        """Number of real words (EOS excluded)."""
        return len(self.words) - 1

    @property
    def eos(self):
        return len(self.words)

    @property
    def tokens(self):
        return [Token(i + 1, w, t) for i, (w, t) in enumerate(zip(self.words, self.tags))]

    def word(self, i):
        return self.words[i - 1]

    def tag(self, i):
        return self.tags[i - 1]

    def parent(self, i):
        return self.heads[i - 1]

    def parents(self):
        """1-based parent list padded with a dummy at index 0."""
        return [None] + list(self.heads)

    def kids(self, i, direction):
        """Children of token i on one side, closest first."""
        if direction == LEFT:
            return [j for j in range(i - 1, 0, -1) if self.heads[j - 1] == i]
        return [j for j in range(i + 1, self.eos + 1) if self.heads[j - 1] == i]

    def with_analysis(self, tags, heads):
        return ParsedSentence(self.words, tuple(tags), None if heads is None else tuple(heads))

    def strip_eos(self):
        """Inverse of :func:`attach_eos`: (words, tags, heads) with root head 0."""
        eos = self.eos
        heads = None
        if self.heads is not None:
            heads = tuple(0 if h == eos else h for h in self.heads[:-1])
        return self.words[:-1], self.tags[:-1], heads


@dataclass
class Treebank:
    sentences: list
    source: str | None = None
    log: list = field(default_factory=list)

    def __len__(self):
        return len(self.sentences)

    def __iter__(self):
        return iter(self.sentences)

    def __getitem__(self, i):
        return self.sentences[i]


def _check_symbol(value, what, where):
    if not value:
        raise TreebankError(f"{where}: empty {what}")
    if value in RESERVED:
        raise TreebankError(f"{where}: {what} {value!r} is a reserved symbol")
    if any(c in value for c in "\t\n\r"):
        raise TreebankError(f"{where}: {what} {value!r} contains whitespace control characters")


def attach_eos(words, tags, heads):
    """Append the EOS token and repoint the root (head 0) at it.

    ``heads`` uses the treebank convention (1-based, 0 = root) and may be None
    for unparsed input.
    """
    words = tuple(words)
    tags = tuple(tags) if tags is not None else (None,) * len(words)
    if len(tags) != len(words):
        raise TreebankError("tags and words differ in length")
    n = len(words)
    eos = n + 1
    if heads is None:
        return ParsedSentence(words + (EOS_WORD,), tags + (EOS_TAG,), None)
    heads = tuple(heads)
    if len(heads) != n:
        raise TreebankError("heads and words differ in length")
    roots = [i + 1 for i, h in enumerate(heads) if h == 0]
    if len(roots) != 1:
        raise TreebankError(f"expected exactly one root token, found {len(roots)}: {roots}")
    for i, h in enumerate(heads, 1):
        if not 0 <= h <= n:
            raise TreebankError(f"token {i}: head {h} out of range 0..{n}")
        if h == i:
            raise TreebankError(f"token {i} is its own head")
    new_heads = tuple(eos if h == 0 else h for h in heads) + (0,)
    cycle = _find_cycle([None] + list(new_heads), eos)
    if cycle:
        raise TreebankError(f"cycle detected through tokens {cycle}")
    return ParsedSentence(words + (EOS_WORD,), tags + (EOS_TAG,), new_heads)


def _find_cycle(par, eos):
    """Return the tokens of some cycle in a padded parent list, or None."""
    state = {}
    for start in range(1, eos):
        path = []
        i = start
        while i and i != eos and state.get(i) is None:
            state[i] = start
            path.append(i)
            i = par[i]
            if i is None or not 0 < i < len(par):
                break
            if state.get(i) == start:
                return sorted(path[path.index(i):])
        for j in path:
            state[j] = -1
    return None


def check_projective(s):
    """List the violations of the tree constraints (empty list means ok).

    Violations are tuples: ``("crossing", (i, j), (k, l))`` for two links
    given as (left end, right end), ``("cycle", tokens)``, ``("eos", detail)``
    for an EOS token with a parent or without exactly one child, and
    ``("parent", token)`` for a word without a valid parent.
    """
    violations = []
    eos = s.eos
    par = s.parents()
    if par[eos] not in (0, None):
        violations.append(("eos", "EOS has a parent"))
    links = []
    for i in range(1, eos):
        h = par[i]
        if h is None or not 1 <= h <= eos or h == i:
            violations.append(("parent", i))
            continue
        links.append((min(i, h), max(i, h)))
    eos_kids = [i for i in range(1, eos) if par[i] == eos]
    if len(eos_kids) != 1:
        violations.append(("eos", f"EOS has {len(eos_kids)} children"))
    cycle = _find_cycle(par, eos)
    if cycle:
        violations.append(("cycle", tuple(cycle)))
    links.sort()
    for x, (i, j) in enumerate(links):
        for k, l in links[x + 1:]:
            if k >= j:
                break
            if i < k < j < l:
                violations.append(("crossing", (i, j), (k, l)))
    return violations


def _parse_block(lines, cols, require_heads, path, tree=True):
    ci, cw, ct, ch = cols
    words, tags, heads = [], [], []
    for lineno, line in lines:
        fields = line.split("\t")
        where = f"{path}:{lineno}"
        if len(fields) <= max(ci, cw, ct, ch if require_heads else 0):
            raise TreebankError(f"{where}: expected at least {max(cols) + 1} columns, got {len(fields)}")
        index = fields[ci]
        if "-" in index or "." in index:
            continue
        try:
            index = int(index)
        except ValueError:
            raise TreebankError(f"{where}: bad token index {index!r}") from None
        if index != len(words) + 1:
            what = "duplicate" if index <= len(words) else "out-of-sequence"
            raise TreebankError(f"{where}: {what} token index {index}")
        word = fields[cw]
        _check_symbol(word, "word", where)
        tag = fields[ct] if ct < len(fields) else "_"
        if tag == "_":
            tag = None
        else:
            _check_symbol(tag, "tag", where)
        words.append(word)
        tags.append(tag)
        if require_heads:
            try:
                heads.append((int(fields[ch]), where))
            except ValueError:
                raise TreebankError(f"{where}: bad head {fields[ch]!r}") from None
    if not require_heads:
        return attach_eos(words, tags, None)
    n = len(words)
    for h, where in heads:
        if not 0 <= h <= n:
            raise TreebankError(f"{where}: head index {h} out of range 0..{n}")
    if not tree:
        eos = n + 1
        return ParsedSentence(tuple(words) + (EOS_WORD,), tuple(tags) + (EOS_TAG,),
                              tuple(eos if h == 0 else h for h, _ in heads) + (0,))
    try:
        return attach_eos(words, tags, [h for h, _ in heads])
    except TreebankError as e:
        raise TreebankError(f"{path}:{lines[0][0]}: {e}") from None


def read_blocks(path):
    """Yield lists of (line number, line) per sentence; comment lines dropped."""
    try:
        f = open(path, encoding="utf-8")
    except OSError as e:
        raise TreebankError(f"cannot read {path}: {e}") from None
    with f:
        block = []
        for lineno, line in enumerate(f, 1):
            line = line.rstrip("\n").rstrip("\r")
            if not line.strip():
                if block:
                    yield block
                block = []
            elif not line.startswith("#"):
                block.append((lineno, line))
        if block:
            yield block


def load_treebank(path, format="conll4", require_heads=True):
    """Read a treebank file into a :class:`Treebank`.

    Sentences that are not projective are skipped with a logged warning.
    With ``require_heads=False`` the HEAD column is ignored and the sentences
    come back unparsed (input for the parser).
    """
    cols = FORMATS[format] if isinstance(format, str) else tuple(format)
    tb = Treebank([], source=str(path))
    for block in read_blocks(path):
        s = _parse_block(block, cols, require_heads, path)
        if require_heads:
            bad = check_projective(s)
            if bad:
                msg = f"{path}:{block[0][0]}: skipped non-projective sentence: {bad[0]}"
                log.warning(msg)
                tb.log.append(msg)
                continue
        tb.sentences.append(s)
    return tb


def load_predictions(path, format="conll4"):
    """Read predicted analyses without requiring each to be a legal tree.

    Per-token baselines may give several roots or cycles; every head is only
    range-checked.  Head 0 becomes EOS, as in :func:`attach_eos`.
    """
    cols = FORMATS[format] if isinstance(format, str) else tuple(format)
    return Treebank([_parse_block(block, cols, True, path, tree=False) for block in read_blocks(path)],
                    source=str(path))


def format_sentence(s, logscore=None):
    words, tags, heads = s.strip_eos()
    lines = []
    if logscore is not None:
        lines.append(f"# logscore={logscore!r}")
    for i, w in enumerate(words):
        tag = tags[i] if tags[i] is not None else "_"
        head = heads[i] if heads is not None else 0
        lines.append(f"{i + 1}\t{w}\t{tag}\t{head}")
    return "\n".join(lines) + "\n"


def save_treebank(treebank, path, logscores=None):
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for k, s in enumerate(treebank):
            if k:
                f.write("\n")
            f.write(format_sentence(s, None if logscores is None else logscores[k]))


def split_corpus(treebank, test_size, seed):
    """Random train/test partition; deterministic for a given seed."""
    n = len(treebank)
    if not 0 <= test_size < n:
        raise ValueError(f"test_size {test_size} must be in [0, {n})")
    order = list(range(n))
    random.Random(seed).shuffle(order)
    test_ids = sorted(order[:test_size])
    train_ids = sorted(order[test_size:])
    train = Treebank([treebank[i] for i in train_ids], treebank.source)
    test = Treebank([treebank[i] for i in test_ids], treebank.source)
    return train, test


class Lexicon:
    """Per-word tag histograms plus the open-class fallback for unseen words."""

    def __init__(self, word_tags, open_class=None):
        self.word_tags = {w: dict(tc) for w, tc in word_tags.items()}
        totals = Counter()
        for tc in self.word_tags.values():
            totals.update(tc)
        self.tag_totals = dict(totals)
        if open_class is None:
            open_class = sorted(self.tag_totals)
        self.open_class = tuple(sorted(open_class, key=lambda t: (-self.tag_totals.get(t, 0), t)))
        if not self.open_class:
            raise ValueError("lexicon has no tags")

    @property
    def tags(self):
        return sorted(self.tag_totals)

    def known(self, word):
        return word in self.word_tags

    def candidates(self, word, cap=None):
        """Candidate tags, most frequent first (ties by name)."""
        if word == EOS_WORD:
            return (EOS_TAG,)
        tc = self.word_tags.get(word)
        if tc is None:
            tags = self.open_class
        else:
            tags = tuple(sorted(tc, key=lambda t: (-tc[t], t)))
        return tags[:cap] if cap else tags

    def dump(self):
        rows = sorted((w, t, c) for w, tc in self.word_tags.items() for t, c in tc.items())
        return "".join(f"{w}\t{t}\t{c}\n" for w, t, c in rows)

    def digest(self):
        text = self.dump() + "open\t" + "\t".join(sorted(self.open_class)) + "\n"
        return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]

    @classmethod
    def from_dump(cls, text, open_class=None):
        word_tags = defaultdict(dict)
        for line in text.splitlines():
            if not line:
                continue
            w, t, c = line.split("\t")
            word_tags[w][t] = int(c)
        return cls(word_tags, open_class)

    def __eq__(self, other):
        return isinstance(other, Lexicon) and self.word_tags == other.word_tags and \
            self.open_class == other.open_class


def build_lexicon(treebank, rare_count=1, min_rare_types=0):
    """Collect tag histograms; the open class is the set of tags carried by
    more than ``min_rare_types`` word types of frequency <= ``rare_count``.
    Falls back to every tag when no tag qualifies."""
    if not len(treebank):
        raise ValueError("cannot build a lexicon from an empty treebank")
    word_tags = defaultdict(Counter)
    for s in treebank:
        for w, t in zip(s.words[:-1], s.tags[:-1]):
            if t is None:
                raise ValueError(f"untagged token {w!r} in training data")
            word_tags[w][t] += 1
    rare_types = Counter()
    for w, tc in word_tags.items():
        if sum(tc.values()) <= rare_count:
            rare_types.update(tc.keys())
    open_class = [t for t, k in rare_types.items() if k > min_rare_types]
    return Lexicon(word_tags, open_class or None)
