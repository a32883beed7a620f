import itertools

import pytest

from conftest import random_word
from treeline.words import (
    GroupElement,
    Word,
    ball,
    ball_count,
    cyclic_reduce,
    free_word_count,
    free_words,
    inverse,
    multiply,
    reduce_letters,
    word_length,
)


def W(s: str) -> Word:
    return Word.from_str(s)


def test_reduce_examples():
    assert str(reduce_letters(W("aAb").letters)) == "b"
    assert str(reduce_letters([])) == ""
    assert str(W("abBa")) == "aa"


def test_reduce_idempotent_and_shrinking(rng):
    for _ in range(300):
        raw = [rng.randrange(4) for _ in range(rng.randint(0, 12))]
        once = reduce_letters(raw)
        assert reduce_letters(once.letters) == once
        assert len(once) <= len(raw)


def test_multiply_examples():
    assert multiply(GroupElement(W("ab"), 1), GroupElement(W("B"), 2)) == GroupElement(W("a"), 3)
    g = GroupElement(W("abA"), -5)
    assert multiply(g, inverse(g)).is_identity()
    assert multiply(GroupElement(W("a"), 0), GroupElement(W("a"), 0)) == GroupElement(W("aa"), 0)


def test_multiply_associative(rng):
    for _ in range(1000):
        g, h, k = (
            GroupElement(random_word(rng, 5), rng.randint(-3, 3)) for _ in range(3)
        )
        assert multiply(multiply(g, h), k) == multiply(g, multiply(h, k))


def test_inverse_examples():
    assert inverse(GroupElement(W("ab"), 3)) == GroupElement(W("BA"), -3)
    assert inverse(GroupElement()) == GroupElement()
    assert inverse(GroupElement(W("a"), 0)) == GroupElement(W("A"), 0)


def test_ball_small():
    b0 = ball(0)
    assert b0 == [GroupElement()]
    b1 = ball(1)
    assert len(b1) == 7
    assert GroupElement(W("a"), 0) in b1 and GroupElement(W(""), -1) in b1


def brute_force_words(max_len):
    seen = set()
    for n in range(max_len + 1):
        for combo in itertools.product("abAB", repeat=n):
            w = Word.from_str("".join(combo))
            if len(w) == n:
                seen.add(w)
    return seen


def test_free_words_against_enumeration_oracle():
    oracle = brute_force_words(3)
    assert set(free_words(3)) == oracle
    assert len([w for w in oracle if len(w) <= 2]) == 17


def test_ball_count_closed_form():
    for radius in range(0, 6):
        assert len(ball(radius)) == ball_count(radius)
    assert [free_word_count(k) for k in range(4)] == [1, 4, 12, 36]


def test_ball_strictly_increasing():
    sizes = [ball_count(radius) for radius in range(8)]
    assert all(a < b for a, b in zip(sizes, sizes[1:]))


def test_ball_membership_is_word_length():
    for g in ball(3):
        assert word_length(g) <= 3


def test_cyclic_reduce_examples():
    u, c = cyclic_reduce(W("abA"))
    assert (u, c) == (W("a"), W("b"))
    u, c = cyclic_reduce(W("ab"))
    assert (u, c) == (W(""), W("ab"))
    u, c = cyclic_reduce(W("abbA"))
    assert (u, c) == (W("a"), W("bb"))


def conjugation_oracle(w: Word):
    # Try every conjugating prefix length directly.
    best = None
    for k in range(len(w) // 2 + 1):
        u = w.prefix(k)
        c = u.inverse() * w * u
        if len(c) == len(w) - 2 * k and (len(c) == 0 or c.letters[0] != c.letters[-1] ^ 2):
            best = (u, c)
            break
    return best


def test_cyclic_reduce_against_oracle(rng):
    for _ in range(400):
        w = random_word(rng, 8)
        u, c = cyclic_reduce(w)
        assert u * c * u.inverse() == w
        assert len(c) == 0 or c.letters[0] != c.letters[-1] ^ 2
        oracle = conjugation_oracle(w)
        assert oracle is not None and (u, c) == oracle


def test_serialization_round_trip(rng):
    for _ in range(100):
        g = GroupElement(random_word(rng, 6), rng.randint(-9, 9))
        assert GroupElement.from_str(str(g)) == g
    assert str(GroupElement()) == ":0"
    assert GroupElement.from_str("ab:1") == GroupElement(W("ab"), 1)


def test_word_validation():
    with pytest.raises(ValueError):
        Word.from_str("xyz")
    with pytest.raises(ValueError):
        GroupElement.from_str("ab")
