"""Canonical span derivations of projective trees.

Every legal tree has exactly one derivation in which each concatenation's
left part is minimal.  A span [s, t] either is a width-1 seed (with or without
a link between its two words) or splits at the leftmost interior word m that
no link inside [s, t] (other than a covering s-t link) passes over.

Links point from child to parent, so a *leftward* cover hangs the right
endword on the left endword and a *rightward* cover hangs the left endword
on the right endword.
"""

from dataclasses import dataclass

LEFTWARD = "leftward"    # left endword is the parent
RIGHTWARD = "rightward"  # right endword is the parent
COVERS = (None, LEFTWARD, RIGHTWARD)


@dataclass(frozen=True)
class Node:
    start: int
    end: int
    cover: str | None
    left: "Node | None" = None
    right: "Node | None" = None

    @property
    def is_seed(self):
        return self.left is None

    @property
    def mid(self):
        return self.left.end

    @property
    def minimal(self):
        return self.is_seed or self.cover is not None

    def postorder(self):
        if not self.is_seed:
            yield from self.left.postorder()
            yield from self.right.postorder()
        yield self


def link_cover(par, s, t):
    if par[t] == s:
        return LEFTWARD
    if par[s] == t:
        return RIGHTWARD
    return None


def derive(par, start=1, end=None):
    """Canonical derivation of the tree given as a padded parent list
    (``par[i]`` is the parent of token i, EOS is the last token)."""
    eos = len(par) - 1
    if end is None:
        end = eos
    # neighbours[i]: tokens linked to i
    neighbours = [[] for _ in range(eos + 1)]
    for i in range(1, eos + 1):
        h = par[i]
        if h:
            neighbours[i].append(h)
            neighbours[h].append(i)

    def build(s, t):
        cover = link_cover(par, s, t)
        if t == s + 1:
            return Node(s, t, cover)
        reach = s
        for m in range(s + 1, t):
            j_max = max((j for j in neighbours[m - 1] if j <= t and not (m - 1 == s and j == t)),
                        default=0)
            reach = max(reach, j_max)
            if reach <= m:
                return Node(s, t, cover, build(s, m), build(m, t))
        raise ValueError(f"span [{s}, {t}] has no split point; tree is not projective")

    return build(start, end)
