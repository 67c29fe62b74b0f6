import pytest

from spandep.corpus import Treebank, attach_eos

PRICE_WORDS = ("the", "price", "of", "the", "stock", "fell")
PRICE_TAGS = ("DT", "NN", "IN", "DT", "NN", "VBD")
PRICE_HEADS = (2, 6, 2, 5, 3, 0)


def conll(rows):
    """Sentences as lists of (word, tag, head) rows -> conll4 text."""
    blocks = []
    for sent in rows:
        blocks.append("".join(f"{i}\t{w}\t{t}\t{h}\n" for i, (w, t, h) in enumerate(sent, 1)))
    return "\n".join(blocks)


@pytest.fixture
def price_sentence():
    return attach_eos(PRICE_WORDS, PRICE_TAGS, PRICE_HEADS)


@pytest.fixture
def price_file(tmp_path):
    path = tmp_path / "price.conll"
    path.write_text(conll([list(zip(PRICE_WORDS, PRICE_TAGS, PRICE_HEADS))]))
    return path


def toy_bank():
    """A few hand-made sentences: determiners, nouns, one verb each."""
    rows = [
        (["the", "price", "fell"], ["D", "N", "V"], [2, 3, 0]),
        (["the", "stock", "rose"], ["D", "N", "V"], [2, 3, 0]),
        (["prices", "fell"], ["N", "V"], [2, 0]),
        (["the", "price", "of", "the", "stock", "fell"], ["D", "N", "P", "D", "N", "V"], [2, 6, 2, 5, 3, 0]),
    ]
    return Treebank([attach_eos(*r) for r in rows])


@pytest.fixture
def toy():
    return toy_bank()


def pytest_terminal_summary(terminalreporter):
    import sys
    module = sys.modules.get("test_acceptance")
    if module and module.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(module.RESULTS, key=lambda l: int(l.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
