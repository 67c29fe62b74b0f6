"""Command-line entry point: train, parse, eval, baseline, oracle-check, bench.

Every verb accepts ``--config FILE`` with ``key = value`` lines; keys are flag
names (dashes or underscores) and flags given on the command line win.

Exit codes: 0 success, 1 validation error, 2 internal invariant violation.
"""

import argparse
import logging
import math
import statistics
import sys
import time
from concurrent.futures import ProcessPoolExecutor

from . import certify as certify_mod
from .corpus import (FORMATS, Lexicon, Treebank, TreebankError, build_lexicon, load_predictions,
                     load_treebank, save_treebank)
from .estimation import KINDS, EstimationConfig, ParamsFormatError, fit, load_params, save_params
from .evaluation import (AlignmentError, CategoryConfig, adjacent_baseline,
                         apply_attacher, apply_tagger, evaluate, mft_baseline, render_report)
from .oracle import CapExceeded
from .parser import DEFAULT_TAG_CAP, ParseError, chart_stats, parse
from .synthetic import bench_lexicon, bench_params, bench_sentence

log = logging.getLogger("spandep")

EXIT_OK, EXIT_INVALID, EXIT_INTERNAL = 0, 1, 2


class UsageError(ValueError):
    pass


class InvariantError(RuntimeError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# Defaults live here rather than in argparse so a config file can tell which
# flags were given on the command line.
DEFAULTS = {
    "format": "conll4",
    "markov_order": 2,
    "threshold": 10,
    "tag_cap": DEFAULT_TAG_CAP,
    "jobs": 1,
    "report": "text",
    "seed": 0,
    "trials": 30,
    "max_words": 5,
    "tags_per_word": 2,
    "kinds": "A,B,C,Cprime",
    "lengths": "10,20,40",
    "bench_tags": "1",
    "model": None,
    "seal_fault": 0.0,
    "punctuation": None,
    "nouns": None,
    "lexical_verbs": None,
    "logscores": False,
}


def _csv(text):
    return [x for x in (p.strip() for p in str(text).split(",")) if x]


def _int_list(text):
    try:
        return [int(x) for x in _csv(text)]
    except ValueError:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from None


def _common(p, *names):
    add = {
        "config": lambda: p.add_argument("--config", help="key = value configuration file"),
        "format": lambda: p.add_argument("--format", choices=sorted(FORMATS), default=None),
        "tag_cap": lambda: p.add_argument("--tag-cap", type=int, default=None,
                                          help="candidate tags per word (default 8)"),
        "jobs": lambda: p.add_argument("--jobs", type=int, default=None),
        "seed": lambda: p.add_argument("--seed", type=int, default=None),
        "categories": lambda: [
            p.add_argument("--punctuation", default=None, help="comma-separated punctuation tags"),
            p.add_argument("--nouns", default=None, help="comma-separated noun tags"),
            p.add_argument("--lexical-verbs", default=None, help="comma-separated lexical verb tags")],
    }
    for name in ("config",) + names:
        add[name]()


def build_parser():
    top = _Parser(prog="spandep", description="Joint tagging and dependency parsing with span charts.")
    top.add_argument("-v", "--verbose", action="store_true")
    sub = top.add_subparsers(dest="verb", required=True, parser_class=_Parser)

    p = sub.add_parser("train", help="fit a model to a treebank")
    _common(p, "format")
    p.add_argument("--model", default=None, help="A, B, C, Cprime or X")
    p.add_argument("--treebank", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--markov-order", type=int, default=None)
    p.add_argument("--threshold", type=int, default=None)

    p = sub.add_parser("parse", help="tag and parse sentences with a fitted model")
    _common(p, "format", "tag_cap", "jobs")
    p.add_argument("--params", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--lexicon", help="lexicon dump to check against the params file")
    p.add_argument("--logscores", action="store_true", default=None, help="write log scores as comments")
    p.add_argument("--seal-fault", type=float, default=None, help=argparse.SUPPRESS)

    p = sub.add_parser("eval", help="accuracy tables for prediction files")
    _common(p, "format", "categories")
    p.add_argument("--gold", required=True)
    p.add_argument("--pred", action="append", required=True, metavar="MODEL=PATH")
    p.add_argument("--report", choices=("text", "tsv"), default=None)
    p.add_argument("--out")

    p = sub.add_parser("baseline", help="most-frequent-tag and adjacent-attachment baselines")
    _common(p, "format")
    p.add_argument("--train", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("oracle-check", help="certify the parser against brute force")
    _common(p, "seed")
    p.add_argument("--max-words", type=int, default=None)
    p.add_argument("--tags-per-word", type=int, default=None)
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--kinds", default=None)
    p.add_argument("--seal-fault", type=float, default=None, help=argparse.SUPPRESS)

    p = sub.add_parser("bench", help="chart growth with sentence length")
    _common(p, "seed")
    p.add_argument("--lengths", default=None)
    p.add_argument("--bench-tags", default=None,
                   help="comma-separated tag-set sizes; every word allows every tag (default 1)")
    p.add_argument("--model", default=None)
    return top


def read_config(path):
    values = {}
    try:
        f = open(path, encoding="utf-8")
    except OSError as e:
        raise UsageError(f"cannot read config {path}: {e}") from None
    with f:
        for lineno, line in enumerate(f, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key = value")
            key, value = (x.strip() for x in line.split("=", 1))
            values[key.replace("-", "_")] = value
    return values


def resolve(args):
    """Merge flags, config file and defaults, then validate everything."""
    ns = vars(args)
    if ns.get("config"):
        for key, value in read_config(ns["config"]).items():
            if key not in ns or key in ("config", "verb", "verbose"):
                raise UsageError(f"unknown config key {key!r} for {args.verb}")
            if ns[key] is None:
                ns[key] = value
    for key, value in DEFAULTS.items():
        if key in ns and ns[key] is None:
            ns[key] = value
    for key in ("markov_order", "threshold", "tag_cap", "jobs", "seed", "trials", "max_words",
                "tags_per_word"):
        if key in ns and ns[key] is not None:
            try:
                ns[key] = int(ns[key])
            except (TypeError, ValueError):
                raise UsageError(f"{key} must be an integer, got {ns[key]!r}") from None
    if "seal_fault" in ns:
        ns["seal_fault"] = float(ns["seal_fault"])
    if isinstance(ns.get("logscores"), str):
        ns["logscores"] = ns["logscores"].lower() in ("1", "true", "yes")
    if "format" in ns and ns["format"] not in FORMATS:
        raise UsageError(f"unknown format {ns['format']!r}")
    if args.verb == "train":
        if ns["model"] not in KINDS:
            raise UsageError(f"--model must be one of {', '.join(KINDS)}, got {ns['model']!r}")
        EstimationConfig(ns["markov_order"], ns["threshold"])
    if ns.get("tag_cap") is not None and ns["tag_cap"] < 1:
        raise UsageError("tag_cap must be >= 1")
    if ns.get("jobs") is not None and ns["jobs"] < 1:
        raise UsageError("jobs must be >= 1")
    if args.verb == "oracle-check":
        kinds = _csv(ns["kinds"])
        bad = [k for k in kinds if k not in certify_mod.CERTIFIED_KINDS]
        if bad or not kinds:
            raise UsageError(f"kinds must be drawn from {', '.join(certify_mod.CERTIFIED_KINDS)}")
        ns["kinds"] = kinds
        if ns["trials"] < 0 or ns["max_words"] < 1 or ns["tags_per_word"] < 1:
            raise UsageError("trials must be >= 0; max_words and tags_per_word >= 1")
        if ns["max_words"] > 7:
            raise UsageError("max_words above 7 exceeds the oracle's enumeration bound")
    if args.verb == "bench":
        ns["lengths"] = _int_list(ns["lengths"])
        ns["bench_tags"] = _int_list(ns["bench_tags"])
        ns["model"] = ns["model"] or "C"
        if ns["model"] not in certify_mod.CERTIFIED_KINDS:
            raise UsageError("bench needs a linking model kind")
        if not ns["lengths"] or min(ns["lengths"]) < 1 or min(ns["bench_tags"], default=0) < 1:
            raise UsageError("lengths and tag-set sizes must be positive")
    if args.verb == "eval":
        preds = []
        for item in ns["pred"]:
            if "=" not in item:
                raise UsageError(f"--pred expects MODEL=PATH, got {item!r}")
            preds.append(tuple(item.split("=", 1)))
        ns["pred"] = preds
        defaults = CategoryConfig()
        ns["categories"] = CategoryConfig(
            punctuation=_csv(ns["punctuation"]) if ns["punctuation"] is not None else defaults.punctuation,
            nouns=_csv(ns["nouns"]) if ns["nouns"] is not None else defaults.nouns,
            lexical_verbs=_csv(ns["lexical_verbs"]) if ns["lexical_verbs"] is not None
            else defaults.lexical_verbs)
    return args


# ------------------------------------------------------------------ verbs

def cmd_train(args, out):
    bank = load_treebank(args.treebank, args.format)
    if not len(bank):
        raise UsageError(f"{args.treebank}: no usable sentences")
    lexicon = build_lexicon(bank)
    params = fit(args.model, bank, lexicon, EstimationConfig(args.markov_order, args.threshold))
    save_params(params, args.out)
    tokens = sum(s.n for s in bank)
    print(f"model {args.model}: {len(bank)} sentences, {tokens} tokens, "
          f"{len(lexicon.word_tags)} word types", file=out)
    for name in sorted(params.tables):
        table = params.tables[name]
        print(f"  {name}: {len(table.rows())} counts", file=out)
    return EXIT_OK


_WORKER = {}


def _init_worker(params_path, tag_cap, seal_fault):
    _WORKER["params"] = load_params(params_path)
    _WORKER["tag_cap"] = tag_cap
    _WORKER["seal_fault"] = seal_fault


def _parse_one(words):
    result = parse(list(words), _WORKER["params"], tag_cap=_WORKER["tag_cap"],
                   seal_fault=_WORKER["seal_fault"])
    return result.sentence, result.logprob


def cmd_parse(args, out):
    params = load_params(args.params)
    if args.lexicon:
        with open(args.lexicon, encoding="utf-8") as f:
            other = Lexicon.from_dump(f.read())
        if other.dump() != params.lexicon.dump():
            log.warning("lexicon %s differs from the one stored in %s; using the stored one",
                        args.lexicon, args.params)
    bank = load_treebank(args.input, args.format, require_heads=False)
    sentences = [s.words[:-1] for s in bank]
    init = (args.params, args.tag_cap, args.seal_fault)
    if args.jobs > 1 and len(sentences) > 1:
        with ProcessPoolExecutor(args.jobs, initializer=_init_worker, initargs=init) as pool:
            results = list(pool.map(_parse_one, sentences, chunksize=max(1, len(sentences) // (4 * args.jobs))))
    else:
        _init_worker(*init)
        _WORKER["params"] = params
        results = [_parse_one(s) for s in sentences]
    predicted = Treebank([s for s, _ in results], source=str(args.input))
    save_treebank(predicted, args.out, [lp for _, lp in results] if args.logscores else None)
    if params.kind == "X" and results:
        log.warning("model X assigns tags only; heads are written as 0")
    print(f"parsed {len(results)} sentences with model {params.kind}", file=out)
    return EXIT_OK


def cmd_eval(args, out):
    gold = load_treebank(args.gold, args.format)
    if gold.log:
        raise UsageError(f"{args.gold}: gold file has sentences that are not legal trees")
    reports = []
    for model, path in args.pred:
        pred = load_predictions(path, args.format)
        reports.append(evaluate(model, gold, pred, args.categories))
    text = render_report(reports, args.report)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
    else:
        out.write(text)
    return EXIT_OK


def cmd_baseline(args, out):
    train = load_treebank(args.train, args.format)
    test = load_treebank(args.test, args.format, require_heads=False)
    tagger = mft_baseline(train)
    attacher = adjacent_baseline(train)
    tagged = apply_tagger(tagger, test)
    predicted = apply_attacher(attacher, tagged)
    save_treebank(predicted, args.out)
    seen, total = tagger.coverage(test)
    print(f"tagged {total} tokens; {seen} seen in training, {total - seen} given the modal tag "
          f"{tagger.default_tag}", file=out)
    for tag in sorted(attacher.rules):
        print(f"  {tag} -> {attacher.rules[tag]}", file=out)
    return EXIT_OK


def cmd_oracle_check(args, out):
    if args.trials == 0:
        log.warning("trials=0: nothing was checked")
        print("PASS (vacuous: 0 trials)", file=out)
        return EXIT_OK
    report = certify_mod.certify(kinds=args.kinds, trials=args.trials, max_words=args.max_words,
                                 tags=max(3, args.tags_per_word), tags_per_word=args.tags_per_word,
                                 seed=args.seed, seal_fault=args.seal_fault)
    failed = {(f.suite, f.kind) for f in report.failures}
    for (suite, kind), n in sorted(report.trials.items()):
        status = "FAIL" if (suite, kind) in failed else "PASS"
        print(f"{status} {suite} {kind} ({n} trials)", file=out)
    for f in report.failures:
        print(f"counterexample [{f.suite} {f.kind}] words={' '.join(f.words)}: {f.message}", file=out)
    if not report.ok:
        raise InvariantError(f"{len(report.failures)} certification failures")
    return EXIT_OK


def growth_exponent(xs, ys):
    """Least-squares slope of log y against log x."""
    slope, _ = statistics.linear_regression([math.log(x) for x in xs], [math.log(y) for y in ys])
    return slope


def cmd_bench(args, out):
    print("tags\tlength\tcombinations\tcells\tseconds", file=out)
    table = {}
    for tags in args.bench_tags:
        lexicon = bench_lexicon(tags_per_word=tags)
        params = bench_params(args.model, lexicon, args.seed)
        for n in args.lengths:
            words = bench_sentence(n, args.seed + n)
            t0 = time.perf_counter()
            stats = chart_stats(words, params, lexicon)
            dt = time.perf_counter() - t0
            table[tags, n] = stats
            print(f"{tags}\t{n}\t{stats.combinations}\t{stats.cells}\t{dt:.3f}", file=out)
    if len(args.lengths) > 1:
        for tags in args.bench_tags:
            comb = growth_exponent(args.lengths, [table[tags, n].combinations for n in args.lengths])
            cells = growth_exponent(args.lengths, [table[tags, n].cells for n in args.lengths])
            print(f"exponent in length (tags={tags}): combinations {comb:.2f}, cells {cells:.2f}", file=out)
    if len(args.bench_tags) > 1:
        for n in args.lengths:
            # s is the largest number of signatures seen on one substring
            sigs = [max(table[t, n].max_signatures.values()) for t in args.bench_tags]
            comb = growth_exponent(sigs, [table[t, n].combinations for t in args.bench_tags])
            print(f"exponent in signatures per substring (length={n}): combinations {comb:.2f}", file=out)
    return EXIT_OK


COMMANDS = {"train": cmd_train, "parse": cmd_parse, "eval": cmd_eval, "baseline": cmd_baseline,
            "oracle-check": cmd_oracle_check, "bench": cmd_bench}


def main(argv=None, out=None):
    out = out or sys.stdout
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        args = resolve(build_parser().parse_args(argv))
        if args.verbose:
            log.setLevel(logging.INFO)
        return COMMANDS[args.verb](args, out)
    except (InvariantError, AssertionError) as e:
        print(f"error: internal invariant violated: {e}", file=sys.stderr)
        return EXIT_INTERNAL
    except (UsageError, TreebankError, ParamsFormatError, AlignmentError, CapExceeded,
            ParseError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
