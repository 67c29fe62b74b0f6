"""Accuracy by token category, the two baselines, and report rendering."""

from collections import Counter, defaultdict
from dataclasses import dataclass, field

from .corpus import ParsedSentence, Treebank

PENN_PUNCTUATION = frozenset({".", ",", ":", "``", "''", "-LRB-", "-RRB-", "(", ")", "#", "$"})
PENN_NOUNS = frozenset({"NN", "NNS", "NNP", "NNPS"})
PENN_LEXICAL_VERBS = frozenset({"VB", "VBD", "VBG", "VBN", "VBP", "VBZ"})

CATEGORIES = ("all", "nonpunc", "nouns", "lexverbs")
CATEGORY_LABELS = {"all": "All tokens", "nonpunc": "Non-punc", "nouns": "Nouns", "lexverbs": "Lex verbs"}
MODEL_ORDER = ("A", "B", "C", "Cprime", "X", "Baseline")
COLUMN_LABELS = {"Cprime": "C'"}


class AlignmentError(ValueError):
    pass


@dataclass(frozen=True)
class CategoryConfig:
    """Tag sets for the reported rows; "all tokens" needs no configuration."""

    punctuation: frozenset = PENN_PUNCTUATION
    nouns: frozenset = PENN_NOUNS
    lexical_verbs: frozenset = PENN_LEXICAL_VERBS

    def __post_init__(self):
        for name in ("punctuation", "nouns", "lexical_verbs"):
            object.__setattr__(self, name, frozenset(getattr(self, name)))
        overlap = (self.punctuation & self.nouns) | (self.punctuation & self.lexical_verbs) \
            | (self.nouns & self.lexical_verbs)
        if overlap:
            raise ValueError(f"category tag sets overlap on {sorted(overlap)}")

    def categories(self, tag):
        out = ["all"]
        if tag not in self.punctuation:
            out.append("nonpunc")
        if tag in self.nouns:
            out.append("nouns")
        if tag in self.lexical_verbs:
            out.append("lexverbs")
        return out


def _aligned(gold, pred):
    gold, pred = list(gold), list(pred)
    if len(gold) != len(pred):
        raise AlignmentError(f"{len(gold)} gold sentences but {len(pred)} predicted")
    for k, (g, p) in enumerate(zip(gold, pred), 1):
        if g.words != p.words:
            raise AlignmentError(f"sentence {k}: token sequences differ")
    return zip(gold, pred)


def _tally(gold, pred, cats, field_name):
    correct, total = Counter(), Counter()
    for g, p in _aligned(gold, pred):
        values = getattr(p, field_name)
        if values is None:
            raise AlignmentError(f"predictions carry no {field_name}")
        for i in range(g.n):  # EOS excluded
            ok = values[i] == getattr(g, field_name)[i]
            for c in cats.categories(g.tags[i]):
                total[c] += 1
                correct[c] += ok
    return correct, total


def _percentages(correct, total):
    return {c: (round(100.0 * correct[c] / total[c], 1) if total[c] else None) for c in CATEGORIES}


def tag_accuracy(gold, pred, cats=CategoryConfig()):
    """Percentage of correctly tagged tokens per category (category from the gold tag)."""
    return _percentages(*_tally(gold, pred, cats, "tags"))


def attach_accuracy(gold, pred, cats=CategoryConfig()):
    """Percentage of tokens whose predicted parent equals the gold parent."""
    return _percentages(*_tally(gold, pred, cats, "heads"))


def category_counts(gold, cats=CategoryConfig()):
    counts = Counter()
    for s in gold:
        for i in range(s.n):
            for c in cats.categories(s.tags[i]):
                counts[c] += 1
    return {c: counts[c] for c in CATEGORIES}


@dataclass
class EvalReport:
    model: str
    tagging: dict
    attachment: dict | None
    counts: dict = field(default_factory=dict)
    notes: dict = field(default_factory=dict)


def evaluate(model, gold, pred, cats=CategoryConfig()):
    """Both accuracy tables for one model.  Attachment is skipped when the
    predictions carry no heads (the tag-only model)."""
    pred = list(pred)
    has_heads = all(p.heads is not None for p in pred)
    attachment = attach_accuracy(gold, pred, cats) if has_heads and model != "X" else None
    return EvalReport(model, tag_accuracy(gold, pred, cats), attachment, category_counts(gold, cats))


# ---------------------------------------------------------------- baselines

@dataclass(frozen=True)
class MostFrequentTagger:
    word_tag: dict
    default_tag: str

    def tag(self, word):
        return self.word_tag.get(word, self.default_tag)

    def coverage(self, corpus):
        """(tokens whose word was seen in training, all tokens), EOS excluded."""
        seen = total = 0
        for s in corpus:
            for w in s.words[:-1]:
                total += 1
                seen += w in self.word_tag
        return seen, total


def _argmax(counter):
    return min(counter.items(), key=lambda kv: (-kv[1], kv[0]))[0]


def mft_baseline(train):
    """Most frequent training tag per word; ties go to the lexicographically
    first tag and unseen words get the corpus-wide modal tag."""
    per_word = defaultdict(Counter)
    overall = Counter()
    for s in train:
        for w, t in zip(s.words[:-1], s.tags[:-1]):
            per_word[w][t] += 1
            overall[t] += 1
    if not overall:
        raise ValueError("training corpus has no tokens")
    return MostFrequentTagger({w: _argmax(c) for w, c in sorted(per_word.items())}, _argmax(overall))


def apply_tagger(tagger, corpus):
    out = []
    for s in corpus:
        tags = [tagger.tag(w) for w in s.words[:-1]] + [s.tags[-1] if s.tags[-1] else s.words[-1]]
        out.append(ParsedSentence(s.words, tuple(tags), None))
    return Treebank(out, getattr(corpus, "source", None))


PREVIOUS, FOLLOWING, TO_EOS = "previous", "following", "eos"
CHOICES = (PREVIOUS, FOLLOWING, TO_EOS)


@dataclass(frozen=True)
class AdjacentAttacher:
    rules: dict
    default: str

    def choice(self, tag):
        return self.rules.get(tag, self.default)

    def heads(self, s):
        n, eos = s.n, s.eos
        out = []
        for i in range(1, n + 1):
            rule = self.choice(s.tags[i - 1])
            if rule == PREVIOUS and i == 1:
                rule = FOLLOWING if n > 1 else TO_EOS
            elif rule == FOLLOWING and i == n:
                rule = PREVIOUS if n > 1 else TO_EOS
            out.append({PREVIOUS: i - 1, FOLLOWING: i + 1, TO_EOS: eos}[rule])
        return tuple(out) + (0,)


def _gold_choice(s, i):
    h = s.heads[i - 1]
    if h == s.eos:
        return TO_EOS
    if h == i - 1:
        return PREVIOUS
    if h == i + 1:
        return FOLLOWING
    return None


def adjacent_baseline(train):
    """Per tag, the most common of {previous word, following word, EOS} as parent."""
    per_tag = defaultdict(Counter)
    overall = Counter()
    for s in train:
        for i in range(1, s.n + 1):
            choice = _gold_choice(s, i)
            if choice is not None:
                per_tag[s.tags[i - 1]][choice] += 1
                overall[choice] += 1
    if not overall:
        raise ValueError("training corpus has no adjacent or EOS attachments")
    return AdjacentAttacher({t: _argmax(c) for t, c in sorted(per_tag.items())}, _argmax(overall))


def apply_attacher(attacher, corpus):
    """Attach every token by its tag's rule; the result need not be a tree."""
    return Treebank([ParsedSentence(s.words, s.tags, attacher.heads(s)) for s in corpus],
                    getattr(corpus, "source", None))


# ------------------------------------------------------------------ report

def _ordered(reports):
    rank = {m: k for k, m in enumerate(MODEL_ORDER)}
    return sorted(reports, key=lambda r: rank.get(r.model, len(rank)))


def _cell(value):
    return "-" if value is None else f"{value:.1f}"


def _table_rows(reports, key):
    cols = [r for r in _ordered(reports) if getattr(r, key) is not None]
    header = [COLUMN_LABELS.get(r.model, r.model) for r in cols]
    rows = [(CATEGORY_LABELS[c], [_cell(getattr(r, key).get(c)) for r in cols]) for c in CATEGORIES]
    return header, rows


TITLES = {"tagging": "Tagging accuracy (% of tokens)",
          "attachment": "Attachment accuracy (% of tokens)"}


def render_report(reports, fmt="text"):
    """Both tables, columns in the fixed model order.  ``fmt`` is text or tsv."""
    if fmt not in ("text", "tsv"):
        raise ValueError(f"unknown report format {fmt!r}")
    out = []
    for key in ("tagging", "attachment"):
        header, rows = _table_rows(reports, key)
        if fmt == "tsv":
            out.append("\t".join([key] + header))
            out.extend("\t".join([label] + cells) for label, cells in rows)
        else:
            if out:
                out.append("")
            out.append(TITLES[key])
            out.append(f"{'':<12}" + "".join(f"{h:>9}" for h in header))
            out.extend(f"{label:<12}" + "".join(f"{c:>9}" for c in cells) for label, cells in rows)
    return "\n".join(out) + "\n"
