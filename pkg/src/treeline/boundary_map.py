"""Constructing and verifying the boundary extension of the orbit map.

Given two actions with the transfer condition, the orbit map g.baseX ->
g.baseY extends to the boundaries: a boundary point is approximated by
orbit points along its ray, the approximants are pushed through the other
action, and the image limit is extracted.  This module builds that
pipeline and the quantitative suites that certify it: quasi-isometry
constants, the six tracking bounds, the image-spread bound, continuity,
equivariance, and the injectivity/surjectivity probes.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import kernels
from .actions import (
    ActionSpec,
    ConstantsLedger,
    act,
    act_boundary,
    covering_radius_sq,
    orbit_limit,
    realize_boundary,
)
from .exactmath import sign_linear_sqrt
from .space import (
    BoundaryPoint,
    Directional,
    GeodesicRay,
    GeodesicSegment,
    Pole,
    SpacePoint,
    _track_projection,
    dist,
    dist_point_to_ray,
    dist_point_to_segment,
    dist_sq,
    ray_point_at_arclength,
    segment_point_at_arclength,
    track_dist,
    track_dist_to_image,
)
from .topology import (
    DEFAULT_R_VALUES,
    CauchyVerdict,
    NeighborhoodParams,
    NotConvergentError,
    in_U,
    is_cauchy_sample,
    limit_of_orbit_sequence,
)
from .tree import TreeEnd, TreePoint, tree_dist, tree_ray_eval
from .words import GroupElement, Word, ball

ORIGIN = SpacePoint.at_vertex("", 0)


class NoCoverError(ValueError):
    """No orbit point reaches within N of a ray point: N is below the
    covering radius."""


class NotCauchyError(ValueError):
    """The image sequence failed the finite Cauchy check (transfer
    condition violated in action)."""

    def __init__(self, verdict: CauchyVerdict):
        super().__init__(f"image sequence violated: {verdict.witness}")
        self.verdict = verdict


class AnalyticMismatchError(AssertionError):
    """Sequence-extracted limit disagrees with the analytic orbit limit."""


# ---------------------------------------------------------------------------
# Quasi-isometry constants on a ball.


@dataclass(frozen=True, slots=True)
class QiEstimate:
    lam: Fraction
    C: Fraction
    L: int

    def to_json(self) -> dict:
        from .exactmath import fmt_rational

        return {
            "lam": {"value": fmt_rational(self.lam), "exact": True},
            "C": {"value": fmt_rational(self.C), "exact": True},
            "L": self.L,
        }


GRID_STEP = Fraction(1, 8)
LAM_MAX = Fraction(8)
C_MAX = Fraction(16)


def _orbit_tables(specX: ActionSpec, specY: ActionSpec, L: int):
    elements = ball(L)
    scale = kernels.common_scale(
        specX.z_shift, specX.weight_a, specX.weight_b,
        specY.z_shift, specY.weight_a, specY.weight_b,
    )
    letters, lens = kernels.word_arrays([g.word for g in elements])
    hx = np.array([int(specX.height_of(g) * scale) for g in elements], dtype=np.int64)
    hy = np.array([int(specY.height_of(g) * scale) for g in elements], dtype=np.int64)
    dx2, dy2 = kernels.pair_tables(letters, lens, hx, hy, scale)
    return elements, scale, dx2, dy2


def _holds_exactly(a2_flat, b2_flat, lam: Fraction, c: Fraction, scale: int) -> bool:
    """Exact check that sqrt(a2) <= lam*sqrt(b2) + c for every pair, where
    a2, b2 are scaled by scale^2.  Floats decide away from the boundary;
    only near-ties fall back to exact integer arithmetic."""
    sa = np.sqrt(a2_flat.astype(np.float64)) / scale
    sb = np.sqrt(b2_flat.astype(np.float64)) / scale
    margin = float(lam) * sb + float(c) - sa
    if np.all(margin > 1e-6):
        return True
    if np.any(margin < -1e-6):
        return False
    suspect = np.nonzero(np.abs(margin) <= 1e-6)[0]
    ln, ld = lam.numerator, lam.denominator
    cn, cd = (c * scale).numerator, (c * scale).denominator
    for k in suspect:
        a = int(a2_flat[k]) * (ld * cd) ** 2
        b = int(b2_flat[k]) * (ln * cd) ** 2
        cc = cn * ld
        lhs = a - b - cc * cc
        if lhs > 0 and lhs * lhs > 4 * cc * cc * b:
            return False
    return True


def qi_constants(
    specX: ActionSpec,
    specY: ActionSpec,
    L: int,
    baseX: SpacePoint | None = None,
    baseY: SpacePoint | None = None,
) -> QiEstimate:
    """Minimal lam (then minimal C given lam) on a 1/8 grid making both
    quasi-isometry inequalities hold over every orbit pair in ball(L);
    the returned pair is re-verified exactly against every pair."""
    if L < 2:
        raise ValueError("need a ball of radius at least 2")
    for b in (baseX, baseY):
        if b is not None and not (b.tree.anchor.is_identity() and b.tree.is_vertex()):
            raise ValueError("constant search expects the root-vertex basepoint")
    _, scale, dx2, dy2 = _orbit_tables(specX, specY, L)
    iu = np.triu_indices(dx2.shape[0], k=1)
    ax = dx2[iu].ravel()
    ay = dy2[iu].ravel()
    sx = np.sqrt(ax.astype(np.float64)) / scale
    sy = np.sqrt(ay.astype(np.float64)) / scale
    lam = Fraction(1)
    while lam <= LAM_MAX:
        lf = float(lam)
        need = max(
            0.0,
            float(np.max(sx - lf * sy)),
            float(np.max(sy / lf - sx)),
        )
        c = Fraction(max(0, math.floor(need / float(GRID_STEP)))) * GRID_STEP
        for _ in range(4):
            if c > C_MAX:
                break
            ok = _holds_exactly(ax, ay, lam, c, scale) and _holds_exactly(
                ay, ax, lam, lam * c, scale
            )
            if ok:
                return QiEstimate(lam, c, L)
            c += GRID_STEP
        lam += GRID_STEP
    raise ValueError("no quasi-isometry constants on the search grid")


# ---------------------------------------------------------------------------
# Approximating sequences along a ray.


def _vertex_ball(center: Word, radius: int) -> list[Word]:
    out = {center}
    frontier = [center]
    for _ in range(radius):
        nxt = []
        for w in frontier:
            for x in range(4):
                n = w * Word([x])
                if n not in out:
                    out.add(n)
                    nxt.append(n)
        frontier = nxt
    return sorted(out, key=Word.sort_key)


def _directional_candidates(
    alpha: Directional, spec: ActionSpec, N: Fraction, i: int, base: SpacePoint
):
    """Exact squared distances of orbit points near the i-th ray point.

    Distances live in the field Q(sqrt(1+slope^2)); each candidate carries
    (p, q) with d^2 = p + q*sqrt(m)."""
    v = alpha.slope
    m_rad = 1 + v * v
    ed = int(N)
    cos_f = 1.0 / math.sqrt(float(m_rad))
    tau_f = i * cos_f
    base_word = base.tree.anchor
    lo = max(0, math.floor(tau_f - float(N)) - 1)
    hi = math.ceil(tau_f + float(N)) + 1
    seen: set[Word] = set()
    cands = []
    for j in range(lo, hi + 1):
        track_vertex = tree_ray_eval(base.tree, alpha.end, Fraction(j)).anchor
        for w in _vertex_ball(track_vertex, ed):
            if w in seen:
                continue
            seen.add(w)
            d0, s_star = _track_projection(
                TreePoint(w), base.tree, alpha.end, Fraction(hi + ed + 2)
            )
            g_word = w * base_word.inverse()
            psi = spec.psi(g_word)
            target_h = float(base.height) + tau_f * float(v)
            center = (target_h - float(base.height) - float(psi)) / float(spec.z_shift)
            for n in range(math.floor(center) - 2, math.ceil(center) + 3):
                g = GroupElement(g_word, n)
                delta_h = spec.height_of(g, base.height) - base.height
                # tau >= s_star iff i^2 >= s_star^2 * m_rad (both sides >= 0)
                sigma = 1 if Fraction(i * i) >= s_star * s_star * m_rad else -1
                c1 = d0 - sigma * s_star
                p = c1 * c1 + delta_h * delta_h + Fraction(i * i)
                q = Fraction(2) * (c1 * sigma - delta_h * v) * i / m_rad
                cands.append((g, p, q))
    return cands


def approximating_sequence(
    alpha: BoundaryPoint,
    spec: ActionSpec,
    N: Fraction,
    k: int,
    base: SpacePoint | None = None,
    choose: str = "min",
) -> list[GroupElement]:
    """Orbit elements g_1..g_k with d(g_i.base, ray(i)) <= N, exactly.

    Among qualifying candidates the exact minimizer is taken, ties broken
    by serialization order; choose="alt" instead takes the second-best
    qualifying candidate where one exists (used by the well-definedness
    check to produce an honestly different sequence).
    """
    N = Fraction(N)
    if k < 1:
        raise ValueError("need at least one step")
    base = base if base is not None else ORIGIN
    if not base.tree.is_vertex():
        raise ValueError("approximating sequences need a vertex basepoint")
    if N * N < covering_radius_sq(spec):
        raise NoCoverError("N is below the covering radius")
    out: list[GroupElement] = []
    if isinstance(alpha, Pole):
        ed = int(N)
        n_sq = N * N
        for i in range(1, k + 1):
            target_h = base.height + alpha.sign * i
            qualifying: list[tuple] = []
            for w in _vertex_ball(base.tree.anchor, ed):
                g_word = w * base.tree.anchor.inverse()
                dtree = tree_dist(TreePoint(w), base.tree)
                psi = spec.psi(g_word)
                center = (target_h - base.height - psi) / spec.z_shift
                cc = center.numerator // center.denominator
                for n in (cc - 1, cc, cc + 1, cc + 2):
                    g = GroupElement(g_word, n)
                    h = spec.height_of(g, base.height)
                    d_sq = dtree * dtree + (h - target_h) ** 2
                    if d_sq <= n_sq:
                        qualifying.append(((d_sq, str(g)), g))
            if not qualifying:
                raise NoCoverError(f"no orbit point within N of ray point {i}")
            qualifying.sort(key=lambda item: item[0])
            pick = 0 if choose == "min" or len(qualifying) == 1 else 1
            out.append(qualifying[pick][1])
        return out
    v = alpha.slope
    m_rad = 1 + v * v
    n_sq = N * N

    def order(x, y):
        cmp = sign_linear_sqrt(x[1] - y[1], x[2] - y[2], m_rad)
        if cmp:
            return cmp
        return -1 if str(x[0]) < str(y[0]) else (1 if str(x[0]) > str(y[0]) else 0)

    for i in range(1, k + 1):
        cands = _directional_candidates(alpha, spec, N, i, base)
        qualifying = [
            c for c in cands if sign_linear_sqrt(c[1] - n_sq, c[2], m_rad) <= 0
        ]
        if not qualifying:
            raise NoCoverError(f"no orbit point within N of ray point {i}")
        qualifying.sort(key=functools.cmp_to_key(order))
        pick = 0 if choose == "min" or len(qualifying) == 1 else 1
        out.append(qualifying[pick][0])
    return out


# ---------------------------------------------------------------------------
# The boundary extension.


@dataclass(frozen=True, slots=True)
class PhibarResult:
    input: BoundaryPoint
    sequence: tuple[GroupElement, ...]
    output: BoundaryPoint
    analytic_crosscheck: BoundaryPoint | None
    star_verified: bool
    cauchy: CauchyVerdict

    def to_json(self) -> dict:
        return {
            "input": self.input.serialize(),
            "sequence": [str(g) for g in self.sequence],
            "output": self.output.serialize(),
            "analytic_crosscheck": (
                None
                if self.analytic_crosscheck is None
                else self.analytic_crosscheck.serialize()
            ),
            "star_verified": self.star_verified,
            "cauchy": self.cauchy.to_json(),
        }


def _auto_steps(alpha: BoundaryPoint, k: int) -> int:
    """Enough steps that the extraction tail (the last third) sees the
    whole prefix plus two visible periods of the target end."""
    if isinstance(alpha, Pole):
        return k
    u, c = alpha.end.prefix, alpha.end.period
    v = float(alpha.slope)
    need = math.ceil(1.5 * (len(u) + 3 * len(c) + 8) * math.sqrt(1.0 + v * v))
    return max(k, need)


def phibar_from_sequence(
    seq: Sequence[GroupElement],
    specX: ActionSpec,
    specY: ActionSpec,
    baseY: SpacePoint | None = None,
    alpha: BoundaryPoint | None = None,
    eps0: float = 8.0,
    r_values: Sequence[float] = DEFAULT_R_VALUES,
    star_verified: bool = False,
    crosscheck: bool = True,
) -> PhibarResult:
    """Push an approximating sequence through the other action and extract
    the image limit; raises NotCauchyError if the image sample is violated."""
    baseY = baseY if baseY is not None else ORIGIN
    images = [act(specY, g, baseY) for g in seq]
    verdict = is_cauchy_sample(images, eps0, r_values, baseY)
    if not verdict.consistent:
        raise NotCauchyError(verdict)
    output = limit_of_orbit_sequence(seq, specY, baseY)
    analytic = None
    if crosscheck and alpha is not None:
        g_r = realize_boundary(specX, alpha)
        if orbit_limit(specX, g_r) != alpha:
            raise AssertionError("realization does not reproduce the input point")
        analytic = orbit_limit(specY, g_r)
        if analytic != output:
            raise AnalyticMismatchError(
                f"sequence limit {output.serialize()} vs analytic "
                f"{analytic.serialize()}; raise k for finer extraction"
            )
    return PhibarResult(
        input=alpha if alpha is not None else output,
        sequence=tuple(seq),
        output=output,
        analytic_crosscheck=analytic,
        star_verified=star_verified,
        cauchy=verdict,
    )


def phibar(
    alpha: BoundaryPoint,
    specX: ActionSpec,
    specY: ActionSpec,
    N: Fraction,
    k: int = 24,
    baseX: SpacePoint | None = None,
    baseY: SpacePoint | None = None,
    eps0: float = 8.0,
    r_values: Sequence[float] = DEFAULT_R_VALUES,
    star_verified: bool = False,
    crosscheck: bool = True,
    choose: str = "min",
) -> PhibarResult:
    """The boundary extension at alpha via the approximating sequence.

    star_verified only labels the output; callers wanting the label should
    first run the ball checker.  The analytic cross-check is computed for
    every representable input and mismatches are hard failures.
    """
    baseX = baseX if baseX is not None else ORIGIN
    steps = _auto_steps(alpha, k)
    seq = approximating_sequence(alpha, specX, N, steps, baseX, choose=choose)
    return phibar_from_sequence(
        seq, specX, specY, baseY, alpha, eps0, r_values, star_verified, crosscheck
    )


@dataclass(frozen=True, slots=True)
class WellDefinednessResult:
    alpha: BoundaryPoint
    primary: BoundaryPoint
    alternate: BoundaryPoint
    interleaved: BoundaryPoint

    @property
    def passed(self) -> bool:
        return self.primary == self.alternate == self.interleaved


def well_definedness_check(
    alpha: BoundaryPoint,
    specX: ActionSpec,
    specY: ActionSpec,
    N: Fraction,
    k: int = 24,
    baseX: SpacePoint | None = None,
    baseY: SpacePoint | None = None,
) -> WellDefinednessResult:
    """Two independent approximating sequences and their interleaving must
    produce the same image point."""
    baseX = baseX if baseX is not None else ORIGIN
    # The alternate sequence wiggles more, so give extraction a longer tail.
    steps = 2 * _auto_steps(alpha, k)
    seq_a = approximating_sequence(alpha, specX, N, steps, baseX, choose="min")
    seq_b = approximating_sequence(alpha, specX, N, steps, baseX, choose="alt")
    woven: list[GroupElement] = []
    for ga, gb in zip(seq_a, seq_b):
        woven.extend((ga, gb))
    ra = phibar_from_sequence(seq_a, specX, specY, baseY, alpha)
    rb = phibar_from_sequence(seq_b, specX, specY, baseY, alpha)
    rw = phibar_from_sequence(woven, specX, specY, baseY, alpha)
    return WellDefinednessResult(alpha, ra.output, rb.output, rw.output)


# ---------------------------------------------------------------------------
# Quantitative suites.


@dataclass(frozen=True, slots=True)
class BoundCheck:
    name: str
    bound: Fraction
    worst_sq: Fraction
    holds: bool

    @property
    def margin_sq(self) -> Fraction:
        return self.bound * self.bound - self.worst_sq

    def to_json(self) -> dict:
        from .exactmath import fmt_rational

        return {
            "name": self.name,
            "bound": fmt_rational(self.bound),
            "worst_sq": fmt_rational(self.worst_sq),
            "margin_sq": fmt_rational(self.margin_sq),
            "holds": self.holds,
            "exact": True,
        }


def sequence_tracking_suite(
    result: PhibarResult,
    ledger: ConstantsLedger,
    specX: ActionSpec,
    specY: ActionSpec,
    baseX: SpacePoint | None = None,
    baseY: SpacePoint | None = None,
    max_index: int | None = None,
    coverage_step: Fraction = Fraction(1, 2),
) -> list[BoundCheck]:
    """The six tracking bounds for an approximating sequence and its image,
    each with its exact worst case:
      1. sequence points stay 2N-close to initial segments on the X side;
      2. their images stay M_tilde-close to initial segments on the Y side;
      3. images stay (M_tilde+1)-close to the image ray;
      4. consecutive X steps move at most 2N+1;
      5. consecutive Y steps move at most lam(2N+1)+C;
      6. the image ray is covered by 3(M_tilde+1)+lam(2N+1)+C balls.
    """
    baseX = baseX if baseX is not None else ORIGIN
    baseY = baseY if baseY is not None else ORIGIN
    seq = result.sequence if max_index is None else result.sequence[:max_index]
    pts_x = [act(specX, g, baseX) for g in seq]
    pts_y = [act(specY, g, baseY) for g in seq]
    ray_y = GeodesicRay(baseY, result.output)

    worst1 = Fraction(0)
    worst2 = Fraction(0)
    for j in range(1, len(seq)):
        seg_x = GeodesicSegment(baseX, pts_x[j])
        seg_y = GeodesicSegment(baseY, pts_y[j])
        for i in range(j):
            d1, _ = dist_point_to_segment(pts_x[i], seg_x)
            d2, _ = dist_point_to_segment(pts_y[i], seg_y)
            worst1 = max(worst1, d1)
            worst2 = max(worst2, d2)
    worst3 = Fraction(0)
    taus = []
    for p in pts_y:
        d3, tau = dist_point_to_ray(p, ray_y)
        worst3 = max(worst3, d3)
        taus.append(tau)
    worst4 = Fraction(0)
    worst5 = Fraction(0)
    for i in range(len(seq) - 1):
        worst4 = max(worst4, dist_sq(pts_x[i], pts_x[i + 1]))
        worst5 = max(worst5, dist_sq(pts_y[i], pts_y[i + 1]))
    cover_bound = 3 * (ledger.M_tilde + 1) + ledger.lam * (2 * ledger.N + 1) + ledger.C
    worst6 = Fraction(0)
    tau_max = max(taus) if taus else Fraction(0)
    grid = []
    t = Fraction(0)
    while t <= tau_max:
        grid.append(t)
        t += coverage_step
    for t in grid:
        pt = ray_y.eval_tree_param(t)
        best = min(dist_sq(pt, p) for p in pts_y)
        worst6 = max(worst6, best)
    bounds = [
        ("x_point_to_initial_segments", ledger.N_tilde, worst1),
        ("y_point_to_initial_segments", ledger.M_tilde, worst2),
        ("y_point_to_image_ray", ledger.M_tilde + 1, worst3),
        ("x_consecutive_steps", 2 * ledger.N + 1, worst4),
        ("y_consecutive_steps", ledger.lam * (2 * ledger.N + 1) + ledger.C, worst5),
        ("image_ray_coverage", cover_bound, worst6),
    ]
    return [
        BoundCheck(name, bound, worst, worst <= bound * bound)
        for name, bound, worst in bounds
    ]


@dataclass(frozen=True, slots=True)
class SpreadCheck:
    radius: float
    spread: float
    bound: float
    holds: bool

    def to_json(self) -> dict:
        return {
            "radius": self.radius,
            "spread": self.spread,
            "bound": self.bound,
            "holds": self.holds,
            "exact": False,
        }


def image_spread_check(
    result: PhibarResult,
    ledger: ConstantsLedger,
    specY: ActionSpec,
    baseY: SpacePoint | None = None,
    radii: Sequence[float] = (1.0, 2.0, 4.0, 8.0),
) -> list[SpreadCheck]:
    """Direction spread of the image sequence at each radius, against the
    transfer bound lam(2N+1)+2M+C (float at arclength parameters, 1e-9)."""
    baseY = baseY if baseY is not None else ORIGIN
    pts = [act(specY, g, baseY) for g in result.sequence]
    bound = float(ledger.M_prime)
    out = []
    for r in radii:
        dirs = [
            segment_point_at_arclength(baseY, p, r)
            for p in pts
            if dist(baseY, p) > r
        ]
        spread = 0.0
        for i in range(len(dirs)):
            for j in range(i + 1, len(dirs)):
                spread = max(spread, track_dist(dirs[i], dirs[j]))
        out.append(SpreadCheck(float(r), spread, bound, spread <= bound + 1e-9))
    return out


@dataclass(frozen=True, slots=True)
class ContinuityProbeRow:
    beta: BoundaryPoint
    image: BoundaryPoint
    in_target: bool
    margin: float


@dataclass(frozen=True, slots=True)
class ContinuityProbeReport:
    alpha: BoundaryPoint
    alpha_image: BoundaryPoint
    r: Fraction
    r_bar: Fraction
    c_bar: Fraction
    rows: tuple[ContinuityProbeRow, ...]

    @property
    def passed(self) -> bool:
        return all(row.in_target for row in self.rows)

    def to_json(self) -> dict:
        from .exactmath import fmt_rational

        return {
            "alpha": self.alpha.serialize(),
            "alpha_image": self.alpha_image.serialize(),
            "r": fmt_rational(self.r),
            "r_bar": fmt_rational(self.r_bar),
            "c_bar": fmt_rational(self.c_bar),
            "passed": self.passed,
            "rows": [
                {
                    "beta": row.beta.serialize(),
                    "image": row.image.serialize(),
                    "in_target": row.in_target,
                    "margin": row.margin,
                    "exact": False,
                }
                for row in self.rows
            ],
        }


_PROBE_PERIOD_POOL = ("b", "a", "B", "A", "ab", "ba", "aB", "bA")


def _perturbed_ends(alpha: Directional, depth: int, count: int) -> list[TreeEnd]:
    """Ends sharing alpha's track to at least `depth` letters, then diverging
    into a different periodic tail; deterministic."""
    out = []
    pool = 0
    while len(out) < count:
        shared = depth + len(out) // 2
        base_word = alpha.end.expand(shared)
        for _ in range(len(_PROBE_PERIOD_POOL)):
            per = Word.from_str(_PROBE_PERIOD_POOL[pool % len(_PROBE_PERIOD_POOL)])
            pool += 1
            nxt = alpha.end.letter_at(shared)
            last = base_word.letters[-1] if len(base_word) else None
            first = per.letters[0]
            if first == nxt:
                continue  # would not diverge
            if last is not None and first == last ^ 2:
                continue  # junction would cancel
            cand = TreeEnd(base_word, per)
            if cand != alpha.end:
                out.append(cand)
                break
        else:
            raise RuntimeError("period pool exhausted")
    return out


def continuity_probe(
    alpha: Directional,
    specX: ActionSpec,
    specY: ActionSpec,
    ledger: ConstantsLedger,
    r_bar: Fraction,
    samples: int = 4,
    k: int = 24,
    baseX: SpacePoint | None = None,
    baseY: SpacePoint | None = None,
) -> ContinuityProbeReport:
    """Sample boundary points in the radius-r basis neighborhood of alpha
    (r from the proof formula) and test their images against the image
    neighborhood with the ledger constant."""
    if not isinstance(alpha, Directional):
        raise ValueError("the continuity probe samples directional points")
    baseX = baseX if baseX is not None else ORIGIN
    baseY = baseY if baseY is not None else ORIGIN
    r_bar = Fraction(r_bar)
    r = ledger.lam * (r_bar + ledger.C + ledger.M_tilde + 1) + ledger.N + 1
    depth = math.ceil(r) + 1
    res_alpha = phibar(alpha, specX, specY, ledger.N, k, baseX, baseY)
    rows = []
    params_in = NeighborhoodParams(float(r), 1.0)
    for end in _perturbed_ends(alpha, depth, samples):
        beta = Directional(end, alpha.slope)
        if not in_U(alpha, params_in, beta, baseX):
            raise AssertionError("sampled point escaped the source neighborhood")
        res_beta = phibar(beta, specX, specY, ledger.N, k, baseX, baseY)
        pos = ray_point_at_arclength(GeodesicRay(baseY, res_alpha.output), float(r_bar))
        d = track_dist_to_image(pos, baseY, res_beta.output)
        margin = float(ledger.c_bar) - d
        rows.append(
            ContinuityProbeRow(beta, res_beta.output, margin > 0, margin)
        )
    return ContinuityProbeReport(
        alpha, res_alpha.output, r, r_bar, ledger.c_bar, tuple(rows)
    )


@dataclass(frozen=True, slots=True)
class EquivarianceResult:
    g: GroupElement
    alpha: BoundaryPoint
    lhs: BoundaryPoint
    rhs: BoundaryPoint

    @property
    def passed(self) -> bool:
        return self.lhs == self.rhs


def equivariance_check(
    g: GroupElement,
    alpha: BoundaryPoint,
    specX: ActionSpec,
    specY: ActionSpec,
    N: Fraction,
    k: int = 24,
    baseX: SpacePoint | None = None,
    baseY: SpacePoint | None = None,
) -> EquivarianceResult:
    """Canonical equality of (extension of g.alpha) and (g acting on the
    extension of alpha)."""
    moved = act_boundary(specX, g, alpha)
    lhs = phibar(moved, specX, specY, N, k, baseX, baseY).output
    rhs = act_boundary(specY, g, phibar(alpha, specX, specY, N, k, baseX, baseY).output)
    return EquivarianceResult(g, alpha, lhs, rhs)


@dataclass(frozen=True, slots=True)
class SurjectivityRow:
    target: BoundaryPoint
    pullback: BoundaryPoint | None
    hit: bool
    note: str = ""


def surjectivity_probe(
    specX: ActionSpec,
    specY: ActionSpec,
    N: Fraction,
    M: Fraction,
    targets: Sequence[BoundaryPoint],
    k: int = 24,
    baseX: SpacePoint | None = None,
    baseY: SpacePoint | None = None,
) -> list[SurjectivityRow]:
    """For each target on the image side, build an image-side approximating
    sequence, read the source-side limit of the same group elements, and
    confirm the extension sends it back to the target."""
    baseX = baseX if baseX is not None else ORIGIN
    baseY = baseY if baseY is not None else ORIGIN
    rows = []
    for target in targets:
        steps = _auto_steps(target, k)
        try:
            seq = approximating_sequence(target, specY, M, steps, baseY)
            pullback = limit_of_orbit_sequence(seq, specX, baseX)
            res = phibar(pullback, specX, specY, N, k, baseX, baseY)
            rows.append(SurjectivityRow(target, pullback, res.output == target))
        except (NotConvergentError, NoCoverError, NotCauchyError,
                AnalyticMismatchError) as exc:
            rows.append(SurjectivityRow(target, None, False, note=str(exc)))
    return rows


@dataclass(frozen=True, slots=True)
class InjectivityReport:
    alpha: BoundaryPoint
    alpha2: BoundaryPoint
    image: BoundaryPoint
    image2: BoundaryPoint
    distinct: bool
    divergence_rows: tuple[tuple[Fraction, Fraction, Fraction], ...]
    # rows: (t, proof lower bound at t, observed image separation squared)


def injectivity_probe(
    alpha: BoundaryPoint,
    alpha2: BoundaryPoint,
    specX: ActionSpec,
    specY: ActionSpec,
    ledger: ConstantsLedger,
    k: int = 24,
    t_values: Sequence[Fraction] = (Fraction(4), Fraction(8), Fraction(16)),
    baseX: SpacePoint | None = None,
    baseY: SpacePoint | None = None,
) -> InjectivityReport:
    """Distinctness of the two images plus the proof's divergence ledger:
    for each sampled separation t of the source rays, the lower bound
    (t - 2N)/lam - C - (4(M_tilde+1) + lam(2N+1) + C) and the observed
    squared separation of the image rays at matching tree parameters."""
    if alpha == alpha2:
        raise ValueError("the probe needs two distinct boundary points")
    baseX = baseX if baseX is not None else ORIGIN
    baseY = baseY if baseY is not None else ORIGIN
    res1 = phibar(alpha, specX, specY, ledger.N, k, baseX, baseY)
    res2 = phibar(alpha2, specX, specY, ledger.N, k, baseX, baseY)
    ray_x2 = GeodesicRay(baseX, alpha2)
    ray_y1 = GeodesicRay(baseY, res1.output)
    ray_y2 = GeodesicRay(baseY, res2.output)
    rows = []
    for t in t_values:
        t = Fraction(t)
        bound = (t - 2 * ledger.N) / ledger.lam - ledger.C - (
            4 * (ledger.M_tilde + 1) + ledger.lam * (2 * ledger.N + 1) + ledger.C
        )
        # Find a source tree parameter where the source rays separate by > t.
        rho = Fraction(0)
        observed = Fraction(0)
        limit = 8 * (t + 1)
        while rho <= limit:
            pt = GeodesicRay(baseX, alpha).eval_tree_param(rho)
            d_sq, _ = dist_point_to_ray(pt, ray_x2)
            if d_sq > t * t:
                img_pt = ray_y1.eval_tree_param(rho)
                observed, _ = dist_point_to_ray(img_pt, ray_y2)
                break
            rho += Fraction(1, 2)
        rows.append((t, bound, observed))
    return InjectivityReport(
        alpha, alpha2, res1.output, res2.output,
        res1.output != res2.output, tuple(rows),
    )
