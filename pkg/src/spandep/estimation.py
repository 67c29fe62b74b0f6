"""Count tables, back-off ladders and model fitting.

Every conditional probability in the models is a relative frequency read from
a :class:`CountTable`.  A :class:`BackoffLadder` lists progressively coarser
views of one conditional distribution; a query is answered at the finest
level whose context total reaches the threshold and where the event was
actually seen, and falls through to a uniform distribution otherwise.
"""

import io
from dataclasses import dataclass, field

from .corpus import Lexicon
from .events import affinity_events, chain_events, kid_events, parent_spec_events
from .symbols import LEFT, RIGHT, STOP, UNKNOWN

FORMAT_VERSION = 1
KINDS = ("A", "B", "C", "Cprime", "X")
HEADER = "#spandep-params"


class CountTable:
    """Counts of (context, event) pairs with per-context totals.

    Contexts and events are tuples of strings of fixed arity.
    """

    def __init__(self, name, context_arity, event_arity=1):
        self.name = name
        self.context_arity = context_arity
        self.event_arity = event_arity
        self.counts = {}
        self.totals = {}

    def observe(self, context, event, weight=1):
        context = tuple(context)
        event = tuple(event) if isinstance(event, tuple) else (event,)
        if len(context) != self.context_arity:
            raise ValueError(f"{self.name}: context arity {len(context)} != {self.context_arity}")
        if len(event) != self.event_arity:
            raise ValueError(f"{self.name}: event arity {len(event)} != {self.event_arity}")
        if weight < 1 or int(weight) != weight:
            raise ValueError(f"{self.name}: weight must be a positive integer")
        row = self.counts.setdefault(context, {})
        row[event] = row.get(event, 0) + weight
        self.totals[context] = self.totals.get(context, 0) + weight
        return self

    def count(self, context, event):
        row = self.counts.get(context)
        return row.get(event, 0) if row else 0

    def total(self, context):
        return self.totals.get(context, 0)

    def events(self):
        return {e for row in self.counts.values() for e in row}

    def rows(self):
        return sorted((c + e, n) for c, row in self.counts.items() for e, n in row.items())

    def __eq__(self, other):
        return isinstance(other, CountTable) and self.name == other.name and \
            self.context_arity == other.context_arity and self.counts == other.counts

    def __repr__(self):
        return f"CountTable({self.name!r}, contexts={len(self.counts)})"


def observe(table, context, event, weight=1):
    return table.observe(context, event, weight)


@dataclass(frozen=True)
class BackoffLadder:
    """Finest-first (table, projection) levels over one full context tuple."""

    levels: tuple
    threshold: int = 10
    alphabet_size: int = 0
    # a ladder without a terminal returns (len(levels), None) when no level
    # qualifies and the caller supplies its own fallback
    terminal: bool = True

    def resolve(self, context, event):
        """Return (level index, probability); level == len(levels) is uniform."""
        for k, (table, proj) in enumerate(self.levels):
            ctx = tuple(context[i] for i in proj)
            tot = table.totals.get(ctx, 0)
            if tot >= self.threshold:
                c = table.count(ctx, event)
                if c > 0:
                    return k, c / tot
        if not self.terminal:
            return len(self.levels), None
        if self.alphabet_size <= 0:
            raise ValueError("empty alphabet")
        return len(self.levels), 1.0 / self.alphabet_size


def backoff_prob(ladder, context, event):
    event = event if isinstance(event, tuple) else (event,)
    return ladder.resolve(tuple(context), event)[1]


# table name -> (context arity, event arity)
TABLE_SHAPES = {
    "tag_2": (2, 1), "tag_1": (1, 1), "tag_0": (0, 1),
    "word_1": (1, 1),
    "kid_lex": (4, 2), "kid_tag_3": (4, 1), "kid_tag_2": (3, 1), "kid_tag_1": (2, 1),
    "pspec_2": (2, 2), "pspec_1": (1, 2),
    "link_6": (6, 1), "link_4": (4, 1), "link_3": (3, 1),
}


def chain_tables(order):
    return ["tag_2", "tag_1", "tag_0"][3 - order:] + ["word_1"]


def kind_tables(kind, order):
    if kind == "X":
        return chain_tables(order)
    if kind == "A":
        return chain_tables(order) + ["link_6", "link_4", "link_3"]
    if kind == "B":
        return chain_tables(order) + ["kid_tag_3", "kid_tag_2", "kid_tag_1", "pspec_2", "pspec_1"]
    if kind == "C":
        return ["kid_lex", "kid_tag_2", "kid_tag_1", "word_1"]
    if kind == "Cprime":
        return ["kid_tag_2", "kid_tag_1", "word_1"]
    raise ValueError(f"unknown model kind {kind!r}")


@dataclass(frozen=True)
class EstimationConfig:
    markov_order: int = 2
    threshold: int = 10

    def __post_init__(self):
        if self.markov_order not in (2, 3):
            raise ValueError("markov_order must be 2 or 3")
        if self.threshold < 1:
            raise ValueError("threshold must be >= 1")


@dataclass(frozen=True, eq=False)
class ModelParams:
    kind: str
    markov_order: int
    threshold: int
    tables: dict
    lexicon: Lexicon
    version: int = FORMAT_VERSION
    ladders: dict = field(default=None, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "ladders", self._build_ladders())

    def _build_ladders(self):
        t = self.tables
        th = self.threshold
        out = {}

        def add(name, levels, alphabet, terminal=True):
            out[name] = BackoffLadder(tuple((t[n], p) for n, p in levels), th, alphabet, terminal)

        if "tag_1" in t:
            tags = len(t["tag_0"].events())
            if self.markov_order == 3:
                add("tag", [("tag_2", (0, 1)), ("tag_1", (0,)), ("tag_0", ())], tags)
            else:
                add("tag", [("tag_1", (0,)), ("tag_0", ())], tags)
        if "word_1" in t:
            words = len({e for e in t["word_1"].events()} | {(UNKNOWN,)})
            add("word", [("word_1", (0,))], words)
        if "kid_tag_1" in t:
            kid_alpha = len(t["kid_tag_1"].events() | {(STOP,)})
            # full context: (prev tag, parent tag, parent word, direction)
            levels = [("kid_tag_2", (0, 1, 3)), ("kid_tag_1", (0, 3))]
            if "kid_tag_3" in t:
                levels.insert(0, ("kid_tag_3", (0, 1, 2, 3)))
            add("kid_tag", levels, kid_alpha)
        if "kid_lex" in t:
            add("kid_lex", [("kid_lex", (0, 1, 2, 3))], 0, terminal=False)
        if "pspec_1" in t:
            add("pspec", [("pspec_2", (0, 1)), ("pspec_1", (0,))],
                len(t["pspec_1"].events()))
        if "link_3" in t:
            # full context: (parent tag, parent word, child tag, child word, direction, arity)
            add("link", [("link_6", (0, 1, 2, 3, 4, 5)), ("link_4", (0, 2, 4, 5)),
                         ("link_3", (0, 2, 4))], 2)
        return out

    def prob(self, family, context, event):
        return backoff_prob(self.ladders[family], context, event)

    def __eq__(self, other):
        return isinstance(other, ModelParams) and self.kind == other.kind and \
            self.markov_order == other.markov_order and self.threshold == other.threshold and \
            self.tables == other.tables and self.lexicon == other.lexicon


def new_tables(kind, order):
    return {name: CountTable(name, *TABLE_SHAPES[name]) for name in kind_tables(kind, order)}


def observe_sentence(kind, tables, s, order, weight=1):
    """Add one tagged, parsed sentence's events to ``tables``."""
    words, tags = s.words, s.tags
    if "word_1" in tables and kind in ("A", "B", "X"):
        for ctx, tag, word in chain_events(words, tags, order):
            for name, k in (("tag_2", 2), ("tag_1", 1), ("tag_0", 0)):
                if name in tables:
                    tables[name].observe(ctx[:k], tag, weight)
            tables["word_1"].observe((tag,), word, weight)
    if kind in ("C", "Cprime"):
        for i in range(1, len(words) + 1):
            tables["word_1"].observe((tags[i - 1],), words[i - 1], weight)
    if kind in ("B", "C", "Cprime"):
        for p, d, prev, k in kid_events(s):
            ptag, pword = tags[p - 1], words[p - 1]
            ktag = STOP if k is None else tags[k - 1]
            if kind == "C":
                ev = (STOP, STOP) if k is None else (ktag, words[k - 1])
                tables["kid_lex"].observe((prev, ptag, pword, d), ev, weight)
            if kind == "B":
                tables["kid_tag_3"].observe((prev, ptag, pword, d), ktag, weight)
            tables["kid_tag_2"].observe((prev, ptag, d), ktag, weight)
            tables["kid_tag_1"].observe((prev, d), ktag, weight)
    if kind == "B":
        for c, side, ptag in parent_spec_events(s):
            ctag, cword = tags[c - 1], words[c - 1]
            tables["pspec_2"].observe((ctag, cword), (side, ptag), weight)
            tables["pspec_1"].observe((ctag,), (side, ptag), weight)
    if kind == "A":
        for (pt, pw), (ct, cw), d, arity, linked in affinity_events(s):
            ev = "1" if linked else "0"
            tables["link_6"].observe((pt, pw, ct, cw, d, arity), ev, weight)
            tables["link_4"].observe((pt, ct, d, arity), ev, weight)
            tables["link_3"].observe((pt, ct, d), ev, weight)


def fit(kind, train, lexicon, config=None):
    """Estimate the count tables of one model kind from a parsed treebank."""
    config = config or EstimationConfig()
    if kind not in KINDS:
        raise ValueError(f"unknown model kind {kind!r}")
    if not len(train):
        raise ValueError("cannot fit on an empty treebank")
    tables = new_tables(kind, config.markov_order)
    for s in train:
        if s.heads is None or any(t is None for t in s.tags):
            raise ValueError("training sentences must be tagged and parsed")
        observe_sentence(kind, tables, s, config.markov_order)
    return ModelParams(kind, config.markov_order, config.threshold, tables, lexicon)


def params_from_tables(kind, tables, lexicon, markov_order=2, threshold=10):
    """Wrap hand-built count tables (missing tables are created empty)."""
    full = new_tables(kind, markov_order)
    full.update(tables)
    return ModelParams(kind, markov_order, threshold, full, lexicon)


def dumps_params(params):
    out = io.StringIO()
    out.write(f"{HEADER}\tv{params.version}\n")
    out.write(f"kind\t{params.kind}\n")
    out.write(f"markov_order\t{params.markov_order}\n")
    out.write(f"threshold\t{params.threshold}\n")
    out.write(f"lexicon_hash\t{params.lexicon.digest()}\n")
    out.write("[open_class]\n")
    for tag in sorted(params.lexicon.open_class):
        out.write(f"{tag}\n")
    out.write("[lexicon]\n")
    out.write(params.lexicon.dump())
    for name in sorted(params.tables):
        t = params.tables[name]
        out.write(f"[table\t{name}\t{t.context_arity}\t{t.event_arity}]\n")
        for fields, n in t.rows():
            out.write("\t".join(fields) + f"\t{n}\n")
    return out.getvalue()


def save_params(params, path):
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(dumps_params(params))


class ParamsFormatError(ValueError):
    pass


def loads_params(text):
    lines = text.split("\n")
    if not lines or not lines[0].startswith(HEADER):
        raise ParamsFormatError("not a params file")
    version = int(lines[0].split("\t")[1].lstrip("v"))
    if version != FORMAT_VERSION:
        raise ParamsFormatError(f"unsupported params version {version}")
    header = {}
    k = 1
    while k < len(lines) and not lines[k].startswith("["):
        key, value = lines[k].split("\t")
        header[key] = value
        k += 1
    open_class, lex_lines, tables = [], [], {}
    section, table = None, None
    for line in lines[k:]:
        if not line:
            continue
        if line.startswith("["):
            parts = line.strip("[]").split("\t")
            section = parts[0]
            if section == "table":
                name, ca, ea = parts[1], int(parts[2]), int(parts[3])
                table = tables[name] = CountTable(name, ca, ea)
            continue
        if section == "open_class":
            open_class.append(line)
        elif section == "lexicon":
            lex_lines.append(line)
        elif section == "table":
            fields = line.split("\t")
            ca = table.context_arity
            table.observe(tuple(fields[:ca]), tuple(fields[ca:-1]), int(fields[-1]))
        else:
            raise ParamsFormatError(f"unexpected line {line!r}")
    lexicon = Lexicon.from_dump("\n".join(lex_lines), open_class)
    if lexicon.digest() != header.get("lexicon_hash"):
        raise ParamsFormatError("lexicon hash mismatch inside params file")
    kind = header["kind"]
    order = int(header["markov_order"])
    expected = set(kind_tables(kind, order))
    if set(tables) != expected:
        raise ParamsFormatError(f"tables {sorted(tables)} do not match kind {kind}")
    return ModelParams(kind, order, int(header["threshold"]), tables, lexicon, version)


def load_params(path):
    with open(path, encoding="utf-8") as f:
        return loads_params(f.read())


__all__ = [
    "CountTable", "BackoffLadder", "ModelParams", "EstimationConfig", "observe",
    "backoff_prob", "fit", "save_params", "load_params", "dumps_params", "loads_params",
    "params_from_tables", "KINDS", "LEFT", "RIGHT",
]
