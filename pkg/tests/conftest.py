import random
from fractions import Fraction

import pytest

from treeline.words import Word


@pytest.fixture
def rng():
    return random.Random(20240917)


def random_word(rng, max_len: int) -> Word:
    n = rng.randint(0, max_len)
    letters = []
    for _ in range(n):
        x = rng.randrange(4)
        while letters and x == letters[-1] ^ 2:
            x = rng.randrange(4)
        letters.append(x)
    return Word(letters)


def random_fraction(rng, den_max: int = 8, span: int = 6) -> Fraction:
    den = rng.randint(1, den_max)
    num = rng.randint(-span * den, span * den)
    return Fraction(num, den)
