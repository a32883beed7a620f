"""The product of the Cayley tree with a line, with the l2 product metric.

Squared distances are the primitive and stay exact rationals; square roots
appear only at presentation boundaries.  Boundary points use join
coordinates: a tree end with a rational slope (line rate per unit tree
rate), or one of the two poles where the tree factor degenerates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .exactmath import fmt_rational, parse_rational
from .tree import (
    OutOfRangeError,
    TreeEnd,
    TreePoint,
    dist_point_to_tree_geodesic,
    tree_dist,
    tree_geodesic_eval,
    tree_ray_eval,
)
from .words import Word, common_prefix_len


@dataclass(frozen=True, slots=True)
class SpacePoint:
    tree: TreePoint
    height: Fraction

    def __post_init__(self):
        object.__setattr__(self, "height", Fraction(self.height))

    @classmethod
    def at_vertex(cls, word: str | Word, height=0) -> "SpacePoint":
        return cls(TreePoint.vertex(word), Fraction(height))

    def serialize(self) -> str:
        return f"({self.tree.serialize()}, h={fmt_rational(self.height)})"

    @classmethod
    def parse(cls, text: str) -> "SpacePoint":
        body = text.strip()
        if not (body.startswith("(") and body.endswith(")")):
            raise ValueError(f"space point must look like '(tp, h=r)': {text!r}")
        tp, h = body[1:-1].rsplit(",", 1)
        h = h.strip()
        if not h.startswith("h="):
            raise ValueError(f"missing height in {text!r}")
        return cls(TreePoint.parse(tp), parse_rational(h[2:]))


ORIGIN = SpacePoint.at_vertex("", 0)


@dataclass(frozen=True, slots=True)
class Directional:
    """Boundary point with a tree end and a rational slope (tan of the
    join angle; slope 0 is the horizontal copy of the end, slope 1 is the
    45-degree direction)."""

    end: TreeEnd
    slope: Fraction

    def __post_init__(self):
        object.__setattr__(self, "slope", Fraction(self.slope))

    def serialize(self) -> str:
        return f"[{self.end.serialize()}, slope={fmt_rational(self.slope)}]"


@dataclass(frozen=True, slots=True)
class Pole:
    """Boundary point of the purely vertical directions; sign is +1 or -1."""

    sign: int

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError("pole sign must be +1 or -1")

    def serialize(self) -> str:
        return f"[pole, {'+' if self.sign > 0 else '-'}]"


BoundaryPoint = Directional | Pole


def parse_boundary_point(text: str) -> BoundaryPoint:
    body = text.strip()
    if not (body.startswith("[") and body.endswith("]")):
        raise ValueError(f"boundary point must look like '[end, slope]': {text!r}")
    left, right = body[1:-1].rsplit(",", 1)
    left, right = left.strip(), right.strip()
    if left == "pole":
        if right not in ("+", "-"):
            raise ValueError(f"pole sign must be + or -: {text!r}")
        return Pole(1 if right == "+" else -1)
    if right.startswith("slope="):
        right = right[len("slope=") :]
    return Directional(TreeEnd.parse(left), parse_rational(right))


def dist_sq(p: SpacePoint, q: SpacePoint) -> Fraction:
    dt = tree_dist(p.tree, q.tree)
    dh = p.height - q.height
    return dt * dt + dh * dh


def dist(p: SpacePoint, q: SpacePoint) -> float:
    return math.sqrt(dist_sq(p, q))


@dataclass(frozen=True, slots=True)
class GeodesicSegment:
    p: SpacePoint
    q: SpacePoint

    @property
    def tree_length(self) -> Fraction:
        return tree_dist(self.p.tree, self.q.tree)

    @property
    def length_sq(self) -> Fraction:
        return dist_sq(self.p, self.q)

    @property
    def length(self) -> float:
        return math.sqrt(self.length_sq)

    def eval(self, t: Fraction) -> SpacePoint:
        """Point at normalized parameter t in [0, 1]; affine in both factors."""
        t = Fraction(t)
        if not 0 <= t <= 1:
            raise OutOfRangeError(f"segment parameter {t} outside [0, 1]")
        dt = self.tree_length
        tree = tree_geodesic_eval(self.p.tree, self.q.tree, t * dt)
        height = self.p.height + t * (self.q.height - self.p.height)
        return SpacePoint(tree, height)


def segment_eval(seg: GeodesicSegment, t: Fraction) -> SpacePoint:
    return seg.eval(t)


@dataclass(frozen=True, slots=True)
class GeodesicRay:
    base: SpacePoint
    target: BoundaryPoint

    def speeds(self) -> tuple[float, float]:
        """(tree speed, height speed) of the unit-speed parametrization."""
        if isinstance(self.target, Pole):
            return 0.0, float(self.target.sign)
        v = float(self.target.slope)
        c = 1.0 / math.sqrt(1.0 + v * v)
        return c, v * c

    def eval(self, s: float) -> SpacePoint:
        """Point at arclength s >= 0; floating point (documented 1e-9 scale)."""
        if s < 0:
            raise OutOfRangeError("ray parameter must be nonnegative")
        ct, sh = self.speeds()
        if isinstance(self.target, Pole):
            return SpacePoint(self.base.tree, self.base.height + Fraction(sh * s))
        tree = tree_ray_eval(self.base.tree, self.target.end, Fraction(ct * s))
        return SpacePoint(tree, self.base.height + Fraction(sh * s))

    def eval_tree_param(self, tau: Fraction) -> SpacePoint:
        """Exact point advanced tau in the tree and tau*slope in height.

        For a pole the tree factor is frozen and tau advances the height.
        """
        tau = Fraction(tau)
        if tau < 0:
            raise OutOfRangeError("ray parameter must be nonnegative")
        if isinstance(self.target, Pole):
            return SpacePoint(self.base.tree, self.base.height + tau * self.target.sign)
        tree = tree_ray_eval(self.base.tree, self.target.end, tau)
        return SpacePoint(tree, self.base.height + tau * self.target.slope)


def ray_eval(ray: GeodesicRay, s: float) -> SpacePoint:
    return ray.eval(s)


def asymptotic(r1: GeodesicRay, r2: GeodesicRay) -> bool:
    """Rays are asymptotic iff their join coordinates agree canonically."""
    return r1.target == r2.target


def _track_projection(
    x: TreePoint, base: TreePoint, end: TreeEnd, reach: Fraction
) -> tuple[Fraction, Fraction]:
    """V-shape data (d0, s*) of x against the tree track of a ray.

    `reach` must dominate the projection parameter; the projection of x
    falls within tree_dist(base, x) of the base, so that always suffices.
    """
    k = int(base.depth + reach) + len(end.prefix) + len(end.period) + 6
    far = TreePoint(end.expand(k))
    return dist_point_to_tree_geodesic(x, base, far)


def dist_point_to_segment(
    x: SpacePoint, seg: GeodesicSegment
) -> tuple[Fraction, Fraction]:
    """Exact (min squared distance, argmin t in [0,1]) from x to the segment.

    The tree factor is a V-shape in the tree parameter, so the squared
    distance is piecewise quadratic; each piece is strictly convex and the
    minimum sits at a clamped parabola vertex.
    """
    dt = seg.tree_length
    dh = seg.q.height - seg.p.height
    if dt == 0:
        a = tree_dist(x.tree, seg.p.tree)
        if dh == 0:
            return a * a + (seg.p.height - x.height) ** 2, Fraction(0)
        lo, hi = sorted((seg.p.height, seg.q.height))
        h = min(max(x.height, lo), hi)
        t = (h - seg.p.height) / dh
        return a * a + (h - x.height) ** 2, t
    d0, s_star = dist_point_to_tree_geodesic(x.tree, seg.p.tree, seg.q.tree)
    mu = dh / dt
    beta = seg.p.height - x.height
    one = 1 + mu * mu

    def height_term(s: Fraction) -> Fraction:
        return (beta + mu * s) ** 2

    best: tuple[Fraction, Fraction] | None = None
    # Descending branch of the V, then the ascending branch.
    s_left = (d0 + s_star - mu * beta) / one
    s_left = min(max(s_left, Fraction(0)), s_star)
    f_left = (d0 + s_star - s_left) ** 2 + height_term(s_left)
    best = (f_left, s_left)
    s_right = (s_star - d0 - mu * beta) / one
    s_right = min(max(s_right, s_star), dt)
    f_right = (d0 + s_right - s_star) ** 2 + height_term(s_right)
    if (f_right, s_right) < best:
        best = (f_right, s_right)
    return best[0], best[1] / dt


def dist_point_to_ray(x: SpacePoint, ray: GeodesicRay) -> tuple[Fraction, Fraction]:
    """Exact (min squared distance, argmin tree parameter) from x to a ray."""
    bh = ray.base.height
    if isinstance(ray.target, Pole):
        a = tree_dist(x.tree, ray.base.tree)
        tau = (x.height - bh) * ray.target.sign
        tau = max(tau, Fraction(0))
        return a * a + (bh + tau * ray.target.sign - x.height) ** 2, tau
    v = ray.target.slope
    reach = tree_dist(x.tree, ray.base.tree)
    d0, s_star = _track_projection(x.tree, ray.base.tree, ray.target.end, reach)
    beta = bh - x.height
    one = 1 + v * v
    s_left = (d0 + s_star - v * beta) / one
    s_left = min(max(s_left, Fraction(0)), s_star)
    f_left = (d0 + s_star - s_left) ** 2 + (beta + v * s_left) ** 2
    best = (f_left, s_left)
    s_right = (s_star - d0 - v * beta) / one
    s_right = max(s_right, s_star)
    f_right = (d0 + s_right - s_star) ** 2 + (beta + v * s_right) ** 2
    if (f_right, s_right) < best:
        best = (f_right, s_right)
    return best


def segment_meets_ball(
    seg: GeodesicSegment, center: SpacePoint, radius: Fraction
) -> bool:
    """Exact test: does the segment meet the closed ball around center?"""
    radius = Fraction(radius)
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    d_sq, _ = dist_point_to_segment(center, seg)
    return d_sq <= radius * radius


# ---------------------------------------------------------------------------
# Floating-point track geometry: used only where arclength parameters force
# irrational coordinates (cone-topology neighborhoods).  Tolerance 1e-9.


@dataclass(frozen=True, slots=True)
class TrackPos:
    """A point described by a root word, a float depth along it, a height."""

    word: Word
    depth: float
    height: float


def as_track(p: SpacePoint) -> TrackPos:
    return TrackPos(p.tree.anchor, float(p.tree.depth), float(p.height))


def track_tree_dist(a: TrackPos, b: TrackPos) -> float:
    m = common_prefix_len(
        a.word.prefix(math.ceil(a.depth)), b.word.prefix(math.ceil(b.depth))
    )
    return a.depth + b.depth - 2.0 * min(a.depth, b.depth, float(m))


def track_dist(a: TrackPos, b: TrackPos) -> float:
    dt = track_tree_dist(a, b)
    dh = a.height - b.height
    return math.sqrt(dt * dt + dh * dh)


def segment_point_at_arclength(
    base: SpacePoint, x: SpacePoint, r: float
) -> TrackPos:
    """Point at arclength r along the geodesic from base to x (float)."""
    total = dist(base, x)
    if not 0 <= r <= total + 1e-12:
        raise OutOfRangeError(f"arclength {r} outside [0, {total}]")
    frac = 0.0 if total == 0 else r / total
    dt = float(tree_dist(base.tree, x.tree))
    s = frac * dt
    dp = float(base.tree.depth)
    dq = float(x.tree.depth)
    m = common_prefix_len(base.tree.anchor, x.tree.anchor)
    meet = min(dp, dq, float(m))
    height = float(base.height) + frac * float(x.height - base.height)
    if s <= dp - meet:
        return TrackPos(base.tree.anchor, dp - s, height)
    return TrackPos(x.tree.anchor, s - dp + 2.0 * meet, height)


def ray_point_at_arclength(ray: GeodesicRay, r: float) -> TrackPos:
    """Point at arclength r along the ray (float)."""
    if r < 0:
        raise OutOfRangeError("arclength must be nonnegative")
    ct, sh = ray.speeds()
    height = float(ray.base.height) + sh * r
    if isinstance(ray.target, Pole):
        return TrackPos(ray.base.tree.anchor, float(ray.base.tree.depth), height)
    tau = ct * r
    k = math.ceil(float(ray.base.tree.depth) + tau) + 6
    far = ray.target.end.expand(k + len(ray.target.end.prefix))
    dp = float(ray.base.tree.depth)
    m = common_prefix_len(ray.base.tree.anchor, far)
    meet = min(dp, float(len(far)), float(m))
    if tau <= dp - meet:
        return TrackPos(ray.base.tree.anchor, dp - tau, height)
    return TrackPos(far, tau - dp + 2.0 * meet, height)


def direction_point(base: SpacePoint, target, r: float) -> TrackPos:
    """Point at arclength r on the geodesic from base toward target.

    target may be a SpacePoint (segment) or a BoundaryPoint (ray).
    """
    if isinstance(target, SpacePoint):
        return segment_point_at_arclength(base, target, r)
    return ray_point_at_arclength(GeodesicRay(base, target), r)


def track_dist_to_segment(pos: TrackPos, seg: GeodesicSegment) -> float:
    """Float distance from a track position to a product segment."""
    p, q = as_track(seg.p), as_track(seg.q)
    dxp = track_tree_dist(pos, p)
    dxq = track_tree_dist(pos, q)
    dpq = track_tree_dist(p, q)
    if dpq == 0:
        lo, hi = sorted((p.height, q.height))
        h = min(max(pos.height, lo), hi)
        return math.sqrt(dxp * dxp + (h - pos.height) ** 2)
    s_star = min(max((dxp + dpq - dxq) / 2.0, 0.0), dpq)
    d0 = max((dxp + dxq - dpq) / 2.0, 0.0)
    mu = (q.height - p.height) / dpq
    beta = p.height - pos.height
    one = 1.0 + mu * mu
    best = math.inf
    s = min(max((d0 + s_star - mu * beta) / one, 0.0), s_star)
    best = min(best, (d0 + s_star - s) ** 2 + (beta + mu * s) ** 2)
    s = min(max((s_star - d0 - mu * beta) / one, s_star), dpq)
    best = min(best, (d0 + s - s_star) ** 2 + (beta + mu * s) ** 2)
    return math.sqrt(best)


def track_dist_to_image(pos: TrackPos, base: SpacePoint, target) -> float:
    """Float distance from a track position to the image of a geodesic
    (segment to a SpacePoint, or full ray to a BoundaryPoint)."""
    if isinstance(target, SpacePoint):
        return track_dist_to_segment(pos, GeodesicSegment(base, target))
    ray = GeodesicRay(base, target)
    if isinstance(target, Pole):
        a = track_tree_dist(pos, as_track(base))
        dh = pos.height - float(base.height)
        dh = min(dh * target.sign, 0.0)
        return math.sqrt(a * a + dh * dh)
    # Far cutoff: beyond the projection the distance only grows.
    reach = track_tree_dist(pos, as_track(base)) + abs(
        pos.height - float(base.height)
    )
    far_tau = Fraction(math.ceil(reach + 4))
    far = ray.eval_tree_param(far_tau)
    return track_dist_to_segment(pos, GeodesicSegment(ray.base, far))
