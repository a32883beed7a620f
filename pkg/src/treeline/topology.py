"""Cone-topology machinery: neighborhood bases, finite Cauchy detection,
and limit identification for orbit sequences.

Membership predicates compare at radius r along geodesics from the
basepoint.  Comparisons involving arclength parameters are floating point
with a 1e-9 working scale; ball exclusion tests stay exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .actions import ActionSpec, act
from .exactmath import simplest_between
from .space import (
    BoundaryPoint,
    Directional,
    Pole,
    SpacePoint,
    direction_point,
    dist_sq,
    track_dist,
    track_dist_to_image,
)
from .tree import TreeEnd, tree_dist
from .words import GroupElement, Word, common_prefix_len

DEFAULT_R_VALUES: tuple[float, ...] = (1.0, 2.0, 4.0, 8.0, 16.0)


class NotConvergentError(ValueError):
    """Direction data failed to stabilize over the finite sample."""

    def __init__(self, message: str, radius: float = 0.0):
        super().__init__(message)
        self.radius = radius


@dataclass(frozen=True, slots=True)
class NeighborhoodParams:
    r: float
    epsilon: float

    def __post_init__(self):
        if self.r <= 0 or self.epsilon <= 0:
            raise ValueError("neighborhood parameters must be positive")


@dataclass(frozen=True, slots=True)
class SampledSequence:
    points: tuple[SpacePoint, ...]
    claimed_unbounded: bool = True

    def __post_init__(self):
        if not self.points:
            raise ValueError("a sampled sequence must be nonempty")


def _outside_ball(x: SpacePoint, base: SpacePoint, r) -> bool:
    rr = Fraction(r)
    return dist_sq(base, x) > rr * rr


def _anchor_reaches(anchor, base: SpacePoint, r) -> bool:
    if isinstance(anchor, SpacePoint):
        rr = Fraction(r)
        return dist_sq(base, anchor) >= rr * rr
    return True


def in_U(
    alpha: BoundaryPoint | SpacePoint,
    params: NeighborhoodParams,
    x: SpacePoint | BoundaryPoint,
    base: SpacePoint,
) -> bool:
    """Same-radius direction test: x lies outside B(base, r) and the
    geodesics to alpha and to x are epsilon-close at arclength r.

    alpha may itself be a space point (the Cauchy definition anchors
    neighborhoods at sequence points).  An anchor whose geodesic is shorter
    than r has an empty neighborhood.
    """
    r, eps = params.r, params.epsilon
    if not _anchor_reaches(alpha, base, r):
        return False
    if isinstance(x, SpacePoint) and not _outside_ball(x, base, r):
        return False
    pa = direction_point(base, alpha, float(r))
    px = direction_point(base, x, float(r))
    return track_dist(pa, px) < eps


def in_U_prime(
    alpha: BoundaryPoint | SpacePoint,
    params: NeighborhoodParams,
    x: SpacePoint | BoundaryPoint,
    base: SpacePoint,
) -> bool:
    """Image variant: compares the point at radius r on the alpha-geodesic
    against the whole image of the geodesic to x."""
    r, eps = params.r, params.epsilon
    if not _anchor_reaches(alpha, base, r):
        return False
    if isinstance(x, SpacePoint) and not _outside_ball(x, base, r):
        return False
    pa = direction_point(base, alpha, float(r))
    return track_dist_to_image(pa, base, x) < eps


@dataclass(frozen=True, slots=True)
class CauchyVerdict:
    status: str  # "consistent" | "violated"
    witness: tuple[float, int, int] | None = None

    @property
    def consistent(self) -> bool:
        return self.status == "consistent"

    def to_json(self) -> dict:
        if self.witness is None:
            return {"status": self.status, "witness": None}
        r, i, j = self.witness
        return {"status": self.status, "witness": {"r": r, "i": i, "j": j}}


def is_cauchy_sample(
    seq: SampledSequence | Sequence[SpacePoint],
    eps0: float,
    r_values: Sequence[float] = DEFAULT_R_VALUES,
    base: SpacePoint | None = None,
) -> CauchyVerdict:
    """Finite-sample refutation of the Cauchy property.

    For each radius r, searches for an index i0 such that every later
    sample lies in U(x_i0; r, eps0).  Only indices with at least one
    successor anchor a candidate; a finite sample can refute but never
    prove, so the positive verdict is merely "consistent".
    """
    points = seq.points if isinstance(seq, SampledSequence) else tuple(seq)
    if not points:
        raise ValueError("empty sample")
    if base is None:
        base = SpacePoint.at_vertex("", 0)
    for r in r_values:
        rr = Fraction(r)
        params = NeighborhoodParams(float(r), float(eps0))
        best_witness: tuple[int, int] | None = None
        found = False
        for i0 in range(len(points) - 1):
            # Anchors inside B(base, r) cannot host a neighborhood; a
            # sample with no anchor beyond r cannot probe that radius.
            if dist_sq(base, points[i0]) <= rr * rr:
                continue
            failure: int | None = None
            for j in range(i0, len(points)):
                if not in_U(points[i0], params, points[j], base):
                    failure = j
                    break
            if failure is None:
                found = True
                break
            if best_witness is None or failure > best_witness[1]:
                best_witness = (i0, failure)
        if not found and best_witness is not None:
            return CauchyVerdict("violated", (float(r), *best_witness))
    return CauchyVerdict("consistent")


def _detect_periodic(track: Word) -> tuple[int, int] | None:
    """Smallest (period length, prefix length) describing the track word,
    requiring at least two full periods plus two letters of confirmation."""
    n = len(track)
    for per in range(1, n // 2 + 1):
        for pre in range(0, n - 2 * per - 1):
            ok = all(
                track.letters[i] == track.letters[i - per]
                for i in range(pre + per, n)
            )
            if ok:
                return per, pre
    return None


def limit_of_orbit_sequence(
    seq: Sequence[GroupElement],
    spec: ActionSpec,
    base: SpacePoint | None = None,
) -> BoundaryPoint:
    """Boundary limit of g_i . base extracted from the stabilized direction.

    The tail of the sample must share a growing prefix whose eventual
    periodicity is visible, and the height-per-tree-depth secants must pin
    a unique simplest rational slope; otherwise NotConvergentError reports
    the first unstable radius.
    """
    if base is None:
        base = SpacePoint.at_vertex("", 0)
    if not base.tree.is_vertex():
        raise ValueError("orbit limits are extracted from vertex basepoints")
    points = [act(spec, g, base) for g in seq]
    n = len(points)
    if n < 4:
        raise NotConvergentError("need at least four samples", radius=0.0)
    rho = [tree_dist(base.tree, p.tree) for p in points]
    heights = [p.height for p in points]
    ts = max(2 * n // 3, 1)
    head_max = max(rho[:ts])
    tail_max = max(rho[ts:])
    if tail_max <= head_max + 1:
        # Tree factor stopped growing: vertical escape or nothing.  The
        # trend must dominate any bounded wiggle of the tail heights.
        tail_h = heights[ts:]
        total = tail_h[-1] - tail_h[0]
        run_max, run_min = tail_h[0], tail_h[0]
        dip_down = dip_up = Fraction(0)
        for h in tail_h:
            run_max = max(run_max, h)
            run_min = min(run_min, h)
            dip_down = max(dip_down, run_max - h)
            dip_up = max(dip_up, h - run_min)
        if total > 0 and total >= 2 * dip_down:
            return Pole(1)
        if total < 0 and -total >= 2 * dip_up:
            return Pole(-1)
        raise NotConvergentError("bounded sample with no vertical escape", radius=1.0)
    words = [p.tree.anchor for p in points]
    track = words[ts]
    for w in words[ts + 1 :]:
        track = track.prefix(common_prefix_len(track, w))
    if len(track) < 3:
        raise NotConvergentError(
            "tail directions do not share a prefix", radius=float(len(track) + 1)
        )
    detected = _detect_periodic(track)
    if detected is None:
        raise NotConvergentError(
            "no visible periodicity in the stable prefix", radius=float(len(track))
        )
    per, pre = detected
    end = TreeEnd(track.prefix(pre), track[pre : pre + per])
    horizon = max(len(w) for w in words) + len(end.prefix) + len(end.period) + 2
    expanded = end.expand(horizon)
    proj = [Fraction(common_prefix_len(w, expanded)) for w in words]
    span = proj[-1] - proj[ts]
    gap_min = max(Fraction(2), span / 2)
    lo = hi = None
    for i in range(ts, n):
        for j in range(i + 1, n):
            if proj[j] - proj[i] < gap_min:
                continue
            sec = (heights[j] - heights[i]) / (proj[j] - proj[i])
            if lo is None:
                lo = hi = sec
            else:
                lo, hi = min(lo, sec), max(hi, sec)
    if lo is None:
        raise NotConvergentError("no usable slope window", radius=float(len(track)))
    if hi - lo > 1:
        raise NotConvergentError("slope secants do not stabilize", radius=float(len(track)))
    slope = lo if lo == hi else simplest_between(lo, hi)
    return Directional(end, slope)
