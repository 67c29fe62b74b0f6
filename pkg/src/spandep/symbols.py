"""Reserved symbols shared by every module.

All of them are bracketed so they cannot collide with treebank words or tags;
the corpus reader rejects input that uses them.
"""

EOS_WORD = "<EOS>"
EOS_TAG = "<EOS>"
START = "<START>"
STOP = "<STOP>"
# Tag context beyond the end of the sentence in the tagging chain.
BOUNDARY = "<B>"
# Stands in for the tag of a word that lies outside the current span.
OUTSIDE = "<OUT>"
# Unseen word slot in word-given-tag alphabets.
UNKNOWN = "<UNK>"

LEFT = "L"
RIGHT = "R"

RESERVED = frozenset({EOS_WORD, EOS_TAG, START, STOP, BOUNDARY, OUTSIDE, UNKNOWN})


def flip(direction):
    return RIGHT if direction == LEFT else LEFT
