"""The Cayley tree of the rank-2 free group as an exact metric tree.

Points live at rational depths along root paths; ends are eventually
periodic infinite reduced words stored canonically as (prefix, period).
Every distance in this module is an exact Fraction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .words import EMPTY_WORD, Word, common_prefix_len, cyclic_reduce


class OutOfRangeError(ValueError):
    """Geodesic parameter outside the segment."""


class EmptyPeriodError(ValueError):
    """A trivial word has no tree end."""


class TreePoint:
    """Point of the tree at depth |anchor| - 1 + offset along [root, anchor].

    offset = 0 names the vertex `anchor` itself; 0 < offset < 1 is the point
    inside the last edge of the root path of `anchor`.
    """

    __slots__ = ("anchor", "offset")

    def __init__(self, anchor: Word, offset: Fraction = Fraction(0)):
        offset = Fraction(offset)
        if not 0 <= offset < 1:
            raise ValueError("offset must lie in [0, 1)")
        if offset > 0 and len(anchor) == 0:
            raise ValueError("the root vertex carries no offset")
        object.__setattr__(self, "anchor", anchor)
        object.__setattr__(self, "offset", offset)

    def __setattr__(self, name, value):
        raise AttributeError("TreePoint is immutable")

    @classmethod
    def vertex(cls, word: Word | str) -> "TreePoint":
        if isinstance(word, str):
            word = Word.from_str(word)
        return cls(word)

    @property
    def depth(self) -> Fraction:
        if self.offset == 0:
            return Fraction(len(self.anchor))
        return len(self.anchor) - 1 + self.offset

    def is_vertex(self) -> bool:
        return self.offset == 0

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, TreePoint)
            and self.anchor == other.anchor
            and self.offset == other.offset
        )

    def __hash__(self) -> int:
        return hash((self.anchor, self.offset))

    def __repr__(self) -> str:
        return f"TreePoint({self.serialize()!r})"

    def serialize(self) -> str:
        return f"{self.anchor}+{self.offset.numerator}/{self.offset.denominator}"

    @classmethod
    def parse(cls, text: str) -> "TreePoint":
        text = text.strip()
        if "+" in text:
            w, off = text.split("+", 1)
            num, den = off.split("/", 1)
            return cls(Word.from_str(w), Fraction(int(num), int(den)))
        return cls(Word.from_str(text))


ROOT = TreePoint(EMPTY_WORD)


def point_at_depth(word: Word, depth: Fraction) -> TreePoint:
    """Point at the given depth along the root path of `word`."""
    depth = Fraction(depth)
    if not 0 <= depth <= len(word):
        raise OutOfRangeError(f"depth {depth} outside [0, {len(word)}]")
    whole = depth.numerator // depth.denominator
    if Fraction(whole) == depth:
        return TreePoint(word.prefix(whole))
    return TreePoint(word.prefix(whole + 1), depth - whole)


def tree_dist(p: TreePoint, q: TreePoint) -> Fraction:
    """Exact path distance; for vertices u, v this is |reduce(u^-1 v)|."""
    dp, dq = p.depth, q.depth
    m = common_prefix_len(p.anchor, q.anchor)
    return dp + dq - 2 * min(dp, dq, Fraction(m))


def tree_geodesic_eval(p: TreePoint, q: TreePoint, s: Fraction) -> TreePoint:
    """The unique point at distance s from p on the geodesic [p, q]."""
    s = Fraction(s)
    dp, dq = p.depth, q.depth
    m = common_prefix_len(p.anchor, q.anchor)
    meet = min(dp, dq, Fraction(m))
    total = dp + dq - 2 * meet
    if not 0 <= s <= total:
        raise OutOfRangeError(f"parameter {s} outside [0, {total}]")
    if s <= dp - meet:
        return point_at_depth(p.anchor, dp - s)
    return point_at_depth(q.anchor, s - dp + 2 * meet)


def dist_point_to_tree_geodesic(
    x: TreePoint, p: TreePoint, q: TreePoint
) -> tuple[Fraction, Fraction]:
    """Exact (distance, parameter) of the projection of x onto [p, q].

    The map s -> dist(x, geodesic(s)) is the V-shape d0 + |s - s*|.
    """
    dxp = tree_dist(x, p)
    dxq = tree_dist(x, q)
    dpq = tree_dist(p, q)
    s_star = (dxp + dpq - dxq) / 2
    s_star = min(max(s_star, Fraction(0)), dpq)
    d0 = (dxp + dxq - dpq) / 2
    if d0 < 0:
        d0 = Fraction(0)
    return d0, s_star


def _primitive_root(letters: tuple[int, ...]) -> tuple[int, ...]:
    n = len(letters)
    for d in range(1, n + 1):
        if n % d:
            continue
        if letters == letters[:d] * (n // d):
            return letters[:d]
    return letters


class TreeEnd:
    """End of the tree: the infinite reduced word prefix * period^infinity.

    Canonical form: the period is primitive and cyclically reduced, the
    junction prefix/period carries no cancellation, and the prefix is the
    shortest possible (it never ends with the period's last letter).
    """

    __slots__ = ("prefix", "period")

    def __init__(self, prefix: Word, period: Word):
        # Absorb any conjugating part of the period into the prefix.
        u0, core = cyclic_reduce(period)
        if len(core) == 0:
            raise EmptyPeriodError("period must be nontrivial")
        pre = list((prefix * u0).letters)
        per = list(_primitive_root(core.letters))
        changed = True
        while changed and pre:
            changed = False
            # Cancellation at the junction eats into the periodic part.
            while pre and pre[-1] == per[0] ^ 2:
                pre.pop()
                per = per[1:] + per[:1]
                changed = True
            # A prefix ending in the period's last letter can be rotated away.
            while pre and pre[-1] == per[-1]:
                pre.pop()
                per = per[-1:] + per[:-1]
                changed = True
        object.__setattr__(self, "prefix", Word(pre))
        object.__setattr__(self, "period", Word(per))

    def __setattr__(self, name, value):
        raise AttributeError("TreeEnd is immutable")

    @classmethod
    def from_words(cls, prefix: str, period: str) -> "TreeEnd":
        return cls(Word.from_str(prefix), Word.from_str(period))

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, TreeEnd)
            and self.prefix == other.prefix
            and self.period == other.period
        )

    def __hash__(self) -> int:
        return hash((self.prefix, self.period))

    def __repr__(self) -> str:
        return f"TreeEnd({self.serialize()!r})"

    def serialize(self) -> str:
        return f"{self.prefix}({self.period})^inf"

    @classmethod
    def parse(cls, text: str) -> "TreeEnd":
        text = text.strip()
        if not text.endswith("^inf"):
            raise ValueError(f"tree end must end with '^inf': {text!r}")
        body = text[: -len("^inf")]
        if "(" in body:
            pre, rest = body.split("(", 1)
            if not rest.endswith(")"):
                raise ValueError(f"unbalanced parentheses in {text!r}")
            per = rest[:-1]
        else:
            pre, per = "", body
        return cls(Word.from_str(pre), Word.from_str(per))

    def letter_at(self, i: int) -> int:
        np = len(self.prefix)
        if i < np:
            return self.prefix.letters[i]
        return self.period.letters[(i - np) % len(self.period)]

    def expand(self, n: int) -> Word:
        """First n letters of the infinite word, as a (reduced) word."""
        letters = list(self.prefix.letters)
        while len(letters) < n:
            letters.extend(self.period.letters)
        return Word(letters[:n])


def power_end(w: Word) -> TreeEnd:
    """Limit end of the vertex sequence w^n; requires w nontrivial."""
    u, c = cyclic_reduce(w)
    if len(c) == 0:
        raise EmptyPeriodError("trivial word has no limit end")
    return TreeEnd(u, c)


def common_prefix_length(e1: TreeEnd, e2: TreeEnd) -> int | float:
    """Length of the common initial segment of two ends; inf iff equal."""
    if e1 == e2:
        return math.inf
    p1, p2 = len(e1.prefix), len(e2.prefix)
    c1, c2 = len(e1.period), len(e2.period)
    bound = max(p1, p2) + c1 * c2 + c1 + c2 + 4
    for i in range(bound):
        if e1.letter_at(i) != e2.letter_at(i):
            return i
    raise RuntimeError("distinct canonical ends agree beyond the safe bound")


def tree_ray_eval(base: TreePoint, end: TreeEnd, s: Fraction) -> TreePoint:
    """Point at distance s >= 0 from base along the unique ray base -> end."""
    s = Fraction(s)
    if s < 0:
        raise OutOfRangeError("ray parameter must be nonnegative")
    depth_bound = s + base.depth
    k = int(depth_bound) + len(end.prefix) + len(end.period) + 4
    far = TreePoint(end.expand(k))
    return tree_geodesic_eval(base, far, s)


def ray_vertex_word(base: TreePoint, end: TreeEnd, n: int) -> Word:
    """Vertex at integer distance n along the ray from a vertex base."""
    if not base.is_vertex():
        raise ValueError("ray vertices need a vertex base")
    pt = tree_ray_eval(base, end, Fraction(n))
    if not pt.is_vertex():
        raise RuntimeError("integer parameter from a vertex must hit a vertex")
    return pt.anchor
