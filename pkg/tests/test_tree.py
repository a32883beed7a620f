import math
from fractions import Fraction as F

import pytest

from conftest import random_word
from treeline.tree import (
    EmptyPeriodError,
    OutOfRangeError,
    TreeEnd,
    TreePoint,
    common_prefix_length,
    dist_point_to_tree_geodesic,
    point_at_depth,
    power_end,
    tree_dist,
    tree_geodesic_eval,
    tree_ray_eval,
)
from treeline.words import Word


def V(s: str) -> TreePoint:
    return TreePoint.vertex(s)


def random_point(rng, max_len=6) -> TreePoint:
    w = random_word(rng, max_len)
    if len(w) and rng.random() < 0.5:
        den = rng.randint(2, 8)
        return TreePoint(w, F(rng.randint(1, den - 1), den))
    return TreePoint(w)


def test_tree_dist_examples():
    assert tree_dist(V(""), V("ab")) == 2
    assert tree_dist(V("a"), V("b")) == 2
    assert tree_dist(TreePoint(Word.from_str("a"), F(1, 2)), V("a")) == F(1, 2)


def test_vertex_distance_is_word_length(rng):
    for _ in range(300):
        u, v = random_word(rng, 6), random_word(rng, 6)
        assert tree_dist(V(str(u)), V(str(v))) == len(u.inverse() * v)


def test_metric_axioms_exact(rng):
    pts = [random_point(rng) for _ in range(60)]
    for _ in range(1000):
        p, q, r = (pts[rng.randrange(len(pts))] for _ in range(3))
        dpq = tree_dist(p, q)
        assert dpq >= 0
        assert (dpq == 0) == (p == q)
        assert dpq == tree_dist(q, p)
        assert dpq <= tree_dist(p, r) + tree_dist(r, q)


def test_geodesic_eval_examples():
    assert tree_geodesic_eval(V(""), V("aab"), F(2)) == V("aa")
    assert tree_geodesic_eval(V("a"), V("b"), F(1)) == V("")
    assert tree_geodesic_eval(V(""), V("ab"), F(3, 2)) == TreePoint(Word.from_str("ab"), F(1, 2))


def test_geodesic_eval_endpoints_and_concat(rng):
    for _ in range(300):
        p, q = random_point(rng), random_point(rng)
        d = tree_dist(p, q)
        assert tree_geodesic_eval(p, q, F(0)) == p
        assert tree_geodesic_eval(p, q, d) == q
        if d == 0:
            continue
        s1 = F(rng.randint(0, 16), 16) * d
        s2 = F(rng.randint(0, 16), 16) * d
        g1 = tree_geodesic_eval(p, q, s1)
        g2 = tree_geodesic_eval(p, q, s2)
        assert tree_dist(g1, g2) == abs(s1 - s2)


def test_geodesic_eval_out_of_range():
    with pytest.raises(OutOfRangeError):
        tree_geodesic_eval(V(""), V("a"), F(2))


def test_ray_eval_examples():
    a_inf = TreeEnd.from_words("", "a")
    assert tree_ray_eval(V(""), a_inf, F(3)) == V("aaa")
    assert tree_ray_eval(V("b"), a_inf, F(1)) == V("")
    ab_inf = TreeEnd.from_words("", "ab")
    assert tree_ray_eval(V(""), ab_inf, F(5)) == V("ababa")


def test_ray_eval_is_unit_speed(rng):
    end = TreeEnd.from_words("a", "ba")
    base = V("bb")
    for _ in range(100):
        s1 = F(rng.randint(0, 64), 8)
        s2 = F(rng.randint(0, 64), 8)
        p1 = tree_ray_eval(base, end, s1)
        p2 = tree_ray_eval(base, end, s2)
        assert tree_dist(p1, p2) == abs(s1 - s2)


def projection_oracle(x, p, q, step=F(1, 4)):
    """Sample the V-shaped distance profile and intersect the two slopes."""
    d = tree_dist(p, q)
    samples = []
    s = F(0)
    while s <= d:
        samples.append((s, tree_dist(x, tree_geodesic_eval(p, q, s))))
        s += step
    if samples[-1][0] != d:
        samples.append((d, tree_dist(x, q)))
    k = min(range(len(samples)), key=lambda i: (samples[i][1], samples[i][0]))
    if k == 0 or k == len(samples) - 1:
        lo = max(k - 1, 0)
        hi = min(k + 1, len(samples) - 1)
    else:
        lo, hi = k - 1, k + 1
    (sl, fl), (sr, fr) = samples[lo], samples[hi]
    # Lines of slope -1 from the left sample and +1 from the right sample.
    s_star = (sl + sr + fl - fr) / 2
    d0 = fl - (s_star - sl)
    if s_star < 0 or s_star > d or d0 < 0:
        return samples[k][1], samples[k][0]
    return d0, s_star


def test_projection_examples():
    assert dist_point_to_tree_geodesic(V("aa"), V(""), V("aab")) == (0, 2)
    # nearest endpoint is the vertex a, two steps from b through the root
    assert dist_point_to_tree_geodesic(V("b"), V("a"), V("aa")) == (2, 0)
    assert dist_point_to_tree_geodesic(V("ab"), V(""), V("aa")) == (1, 1)


def test_projection_against_sampling_oracle(rng):
    for _ in range(500):
        x, p, q = random_point(rng), random_point(rng), random_point(rng)
        if p == q:
            continue
        d0, s_star = dist_point_to_tree_geodesic(x, p, q)
        od0, os_star = projection_oracle(x, p, q)
        assert (d0, s_star) == (od0, os_star)
        # V-shape law at random parameters
        d = tree_dist(p, q)
        s = F(rng.randint(0, 32), 32) * d
        assert tree_dist(x, tree_geodesic_eval(p, q, s)) == d0 + abs(s - s_star)


def test_end_canonicalization():
    assert TreeEnd.from_words("a", "ba") == TreeEnd.from_words("", "ab")
    assert TreeEnd.from_words("ab", "ab") == TreeEnd.from_words("", "ab")
    assert TreeEnd.from_words("", "abab") == TreeEnd.from_words("", "ab")
    assert TreeEnd.from_words("A", "a") == TreeEnd.from_words("", "a")
    # cancellation cascading into the period
    assert TreeEnd.from_words("a", "Ab") == TreeEnd.from_words("", "bA")
    # conjugate periods collapse
    assert TreeEnd.from_words("", "abA") == TreeEnd.from_words("a", "b")
    with pytest.raises(EmptyPeriodError):
        TreeEnd.from_words("a", "")


def test_end_serialization_round_trip():
    for text in ["(ab)^inf", "a(ba)^inf", "bA(abb)^inf"]:
        e = TreeEnd.parse(text)
        assert TreeEnd.parse(e.serialize()) == e
    assert TreeEnd.parse("a^inf") == TreeEnd.from_words("", "a")


def test_power_end_examples():
    assert power_end(Word.from_str("ab")) == TreeEnd.from_words("", "ab")
    assert power_end(Word.from_str("a")) == TreeEnd.from_words("", "a")
    assert power_end(Word.from_str("abA")) == TreeEnd.from_words("a", "b")
    with pytest.raises(EmptyPeriodError):
        power_end(Word.from_str("aA"))


def test_power_end_stable_under_squaring(rng):
    words = [w for w in _all_words(4) if len(w) > 0]
    for w in words:
        assert power_end(w) == power_end(w * w)


def _all_words(max_len):
    from treeline.words import free_words

    return free_words(max_len)


def test_power_end_matches_iterated_powers(rng):
    from treeline.words import cyclic_reduce

    for _ in range(200):
        w = random_word(rng, 5)
        if len(w) == 0:
            continue
        u, _ = cyclic_reduce(w)
        end = power_end(w)
        big = w
        for _ in range(9):
            big = big * w
        # w^10 agrees with the end except for the trailing conjugator.
        shared = len(big) - len(u)
        assert big.prefix(shared) == end.expand(shared)


def test_common_prefix_length_examples():
    a_inf = TreeEnd.from_words("", "a")
    for i in range(1, 21):
        gi = power_end(Word.from_str("a" * i + "b" * i))
        assert common_prefix_length(gi, a_inf) == i
    assert common_prefix_length(a_inf, a_inf) == math.inf
    assert common_prefix_length(a_inf, TreeEnd.from_words("", "b")) == 0
