"""Small exact-arithmetic helpers shared across the package.

Everything here works on `fractions.Fraction` so that geometric predicates
can be decided with zero tolerance.  The only irrationals the package ever
meets are square roots of rationals, which is why a sign test for numbers
of the form p + q*sqrt(k) is enough.
"""

from __future__ import annotations

import math
from fractions import Fraction

Rational = Fraction


def parse_rational(text: str) -> Fraction:
    """Parse 'p/q' or a plain integer/decimal string into a Fraction."""
    text = text.strip()
    if "/" in text:
        num, den = text.split("/", 1)
        return Fraction(int(num), int(den))
    return Fraction(text)


def fmt_rational(x: Fraction) -> str:
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def sign_linear_sqrt(p: Fraction, q: Fraction, k: Fraction) -> int:
    """Exact sign of p + q*sqrt(k), with k >= 0 rational."""
    if k < 0:
        raise ValueError("sqrt argument must be nonnegative")
    if q == 0 or k == 0:
        return (p > 0) - (p < 0)
    if p == 0:
        return (q > 0) - (q < 0)
    if p > 0 and q > 0:
        return 1
    if p < 0 and q < 0:
        return -1
    # Opposite signs: compare p^2 against q^2 * k.
    lhs = p * p
    rhs = q * q * k
    if p > 0:  # q < 0: positive iff p^2 > q^2 k
        return (lhs > rhs) - (lhs < rhs)
    return (rhs > lhs) - (rhs < lhs)


def sqrt_leq(a_sq: Fraction, bound: Fraction) -> bool:
    """Exact test sqrt(a_sq) <= bound for a_sq >= 0."""
    if bound < 0:
        return False
    return a_sq <= bound * bound


def sqrt_lt(a_sq: Fraction, bound: Fraction) -> bool:
    if bound <= 0:
        return False
    return a_sq < bound * bound


def leq_scaled_sqrt(a_sq: Fraction, lam: Fraction, b_sq: Fraction, c: Fraction) -> bool:
    """Exact test sqrt(a_sq) <= lam*sqrt(b_sq) + c with lam, c >= 0."""
    if lam < 0 or c < 0:
        raise ValueError("coefficients must be nonnegative")
    # sqrt(a) <= lam*sqrt(b) + c  <=>  a - lam^2 b - c^2 <= 2*lam*c*sqrt(b)
    lhs = a_sq - lam * lam * b_sq - c * c
    if lhs <= 0:
        return True
    return lhs * lhs <= 4 * lam * lam * c * c * b_sq


def ceil_to_grid(x_sq: Fraction, step: Fraction) -> Fraction:
    """Smallest multiple of `step` whose square is >= x_sq (x_sq >= 0)."""
    n = 0
    # Coarse float start, then exact fix-up in both directions.
    guess = int(math.sqrt(float(x_sq)) / float(step))
    n = max(guess - 2, 0)
    while (n * step) * (n * step) < x_sq:
        n += 1
    return n * step


def simplest_between(lo: Fraction, hi: Fraction) -> Fraction:
    """Rational with the smallest denominator in the closed interval [lo, hi].

    Ties on denominator are broken toward the smaller absolute value, then
    toward the smaller value, so the result is deterministic.
    """
    if lo > hi:
        raise ValueError("empty interval")
    if lo <= 0 <= hi:
        return Fraction(0)
    if hi < 0:
        return -_simplest_pos(-hi, -lo)
    return _simplest_pos(lo, hi)


def _simplest_pos(lo: Fraction, hi: Fraction) -> Fraction:
    """Simplest rational in [lo, hi] with 0 < lo <= hi."""
    fl = lo.numerator // lo.denominator
    if Fraction(fl) == lo:
        return lo
    if fl + 1 <= hi:
        return Fraction(fl + 1)
    frac = _simplest_pos(1 / (hi - fl), 1 / (lo - fl))
    return fl + 1 / frac
