"""Exact combinatorics of the rank-2 free group and its product with the integers.

Letters are the ints 0..3 encoding a, b, a^-1, b^-1 (ASCII a, b, A, B);
``x ^ 2`` is the inverse letter.  Words reduce eagerly on construction, so
every downstream distance formula may assume reduced form.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator

LETTER_A, LETTER_B, LETTER_AI, LETTER_BI = 0, 1, 2, 3
LETTER_CHARS = "abAB"
_CHAR_TO_LETTER = {c: i for i, c in enumerate(LETTER_CHARS)}


def inverse_letter(x: int) -> int:
    return x ^ 2


def _reduce(letters: Iterable[int]) -> tuple[int, ...]:
    out: list[int] = []
    for x in letters:
        if out and out[-1] == x ^ 2:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


class Word:
    """A reduced word in the free group on a, b."""

    __slots__ = ("letters",)

    def __init__(self, letters: Iterable[int] = ()):
        object.__setattr__(self, "letters", _reduce(letters))

    def __setattr__(self, name, value):
        raise AttributeError("Word is immutable")

    @classmethod
    def from_str(cls, text: str) -> "Word":
        try:
            return cls(_CHAR_TO_LETTER[c] for c in text.strip())
        except KeyError as exc:
            raise ValueError(f"invalid letter in word: {text!r}") from exc

    def __str__(self) -> str:
        return "".join(LETTER_CHARS[x] for x in self.letters)

    def __repr__(self) -> str:
        return f"Word({str(self)!r})"

    def __len__(self) -> int:
        return len(self.letters)

    def __getitem__(self, idx):
        if isinstance(idx, slice):
            return Word(self.letters[idx])
        return self.letters[idx]

    def __eq__(self, other) -> bool:
        return isinstance(other, Word) and self.letters == other.letters

    def __hash__(self) -> int:
        return hash(self.letters)

    def __lt__(self, other: "Word") -> bool:
        return self.sort_key() < other.sort_key()

    def sort_key(self):
        return (len(self.letters), self.letters)

    def __mul__(self, other: "Word") -> "Word":
        return Word(self.letters + other.letters)

    def inverse(self) -> "Word":
        return Word(x ^ 2 for x in reversed(self.letters))

    def prefix(self, n: int) -> "Word":
        return Word(self.letters[:n])

    def is_identity(self) -> bool:
        return not self.letters


EMPTY_WORD = Word()


def reduce_letters(letters: Iterable[int]) -> Word:
    """Free reduction; idempotent and length-nonincreasing."""
    return Word(letters)


def common_prefix_len(u: Word, v: Word) -> int:
    n = min(len(u), len(v))
    for i in range(n):
        if u.letters[i] != v.letters[i]:
            return i
    return n


@dataclass(frozen=True, slots=True)
class GroupElement:
    """Element of the direct product (free group on a, b) x Z."""

    word: Word = EMPTY_WORD
    z: int = 0

    @classmethod
    def from_str(cls, text: str) -> "GroupElement":
        if ":" not in text:
            raise ValueError(f"group element must look like 'word:z': {text!r}")
        w, zs = text.rsplit(":", 1)
        return cls(Word.from_str(w), int(zs))

    def __str__(self) -> str:
        return f"{self.word}:{self.z}"

    def sort_key(self):
        return (self.word.sort_key(), self.z)

    def is_identity(self) -> bool:
        return self.word.is_identity() and self.z == 0


IDENTITY = GroupElement()


def multiply(g: GroupElement, h: GroupElement) -> GroupElement:
    return GroupElement(g.word * h.word, g.z + h.z)


def inverse(g: GroupElement) -> GroupElement:
    return GroupElement(g.word.inverse(), -g.z)


def word_length(g: GroupElement) -> int:
    """Word length for the generating set {a, b, z}: |word| + |z|."""
    return len(g.word) + abs(g.z)


def free_words(max_len: int) -> list[Word]:
    """All reduced words of length <= max_len, in canonical order."""
    out: list[Word] = [EMPTY_WORD]
    layer: list[tuple[int, ...]] = [()]
    for _ in range(max_len):
        nxt: list[tuple[int, ...]] = []
        for w in layer:
            for x in range(4):
                if w and w[-1] == x ^ 2:
                    continue
                nxt.append(w + (x,))
        layer = nxt
        out.extend(Word(w) for w in layer)
    out.sort(key=Word.sort_key)
    return out


def free_word_count(length: int) -> int:
    """Number of reduced words of exactly the given length."""
    if length == 0:
        return 1
    return 4 * 3 ** (length - 1)


def ball_count(radius: int) -> int:
    """Closed-form size of the word-metric ball in the product group."""
    return sum(
        free_word_count(k) * (2 * (radius - k) + 1) for k in range(radius + 1)
    )


def ball(radius: int) -> list[GroupElement]:
    """All elements with |word| + |z| <= radius, in canonical order."""
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    out: list[GroupElement] = []
    for w in free_words(radius):
        zmax = radius - len(w)
        for z in range(-zmax, zmax + 1):
            out.append(GroupElement(w, z))
    out.sort(key=GroupElement.sort_key)
    return out


def iter_ball(radius: int) -> Iterator[GroupElement]:
    yield from ball(radius)


def cyclic_reduce(w: Word) -> tuple[Word, Word]:
    """Write w = u * c * u^-1 with c cyclically reduced and |u| minimal.

    Returns (u, c); c is empty iff w is.
    """
    letters = list(w.letters)
    i, j = 0, len(letters)
    while j - i >= 2 and letters[i] == letters[j - 1] ^ 2:
        i += 1
        j -= 1
    return Word(letters[:i]), Word(letters[i:j])
