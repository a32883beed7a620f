"""Weighted-height isometric actions of (free group x Z) on the tree-line product.

An ActionSpec acts by left multiplication on the tree factor and by the
translation r -> r + z*z_shift + psi(word) on the line factor, where psi is
the homomorphism sending the generators to the two weights.  This family
contains the two classical actions of the non-extension example (presets
"dot" and "star") and is closed under everything the package constructs.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .exactmath import fmt_rational, parse_rational
from .space import BoundaryPoint, Directional, Pole, SpacePoint
from .tree import TreeEnd, TreePoint, cyclic_reduce
from .words import EMPTY_WORD, GroupElement, Word


class NoLimitError(ValueError):
    """The orbit of the identity is bounded and has no boundary limit."""


class UnsupportedSpecError(ValueError):
    """The covering-radius optimizer cannot certify this spec exactly."""


@dataclass(frozen=True, slots=True)
class ActionSpec:
    weight_a: Fraction
    weight_b: Fraction
    z_shift: Fraction

    def __post_init__(self):
        object.__setattr__(self, "weight_a", Fraction(self.weight_a))
        object.__setattr__(self, "weight_b", Fraction(self.weight_b))
        object.__setattr__(self, "z_shift", Fraction(self.z_shift))
        if self.z_shift <= 0:
            raise ValueError("z_shift must be positive for cocompactness")

    def psi(self, w: Word) -> Fraction:
        """Height contribution of a word (a homomorphism to the line)."""
        total = Fraction(0)
        for x in w.letters:
            if x == 0:
                total += self.weight_a
            elif x == 1:
                total += self.weight_b
            elif x == 2:
                total -= self.weight_a
            else:
                total -= self.weight_b
        return total

    def letter_psi(self) -> tuple[Fraction, Fraction, Fraction, Fraction]:
        return (self.weight_a, self.weight_b, -self.weight_a, -self.weight_b)

    def height_of(self, g: GroupElement, base_height: Fraction = Fraction(0)) -> Fraction:
        return base_height + g.z * self.z_shift + self.psi(g.word)

    def serialize(self) -> str:
        return (
            f"weight_a={fmt_rational(self.weight_a)} "
            f"weight_b={fmt_rational(self.weight_b)} "
            f"z_shift={fmt_rational(self.z_shift)}"
        )


PRESETS: dict[str, ActionSpec] = {
    "dot": ActionSpec(Fraction(0), Fraction(0), Fraction(1)),
    "star": ActionSpec(Fraction(0), Fraction(2), Fraction(1)),
    "scaled2": ActionSpec(Fraction(0), Fraction(0), Fraction(2)),
}


def spec_from_config(source: str | Path | dict) -> ActionSpec:
    """Resolve a preset name, a flat key-value config file, or a dict."""
    if isinstance(source, dict):
        data = source
    else:
        name = str(source)
        if name in PRESETS:
            return PRESETS[name]
        data = {}
        for line in Path(name).read_text().splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, value = line.partition("=")
            data[key.strip()] = value.strip()
    try:
        return ActionSpec(
            parse_rational(str(data["weight_a"])),
            parse_rational(str(data["weight_b"])),
            parse_rational(str(data["z_shift"])),
        )
    except KeyError as exc:
        raise ValueError(f"action config needs weight_a, weight_b, z_shift: {source!r}") from exc


def _act_tree(w: Word, t: TreePoint) -> TreePoint:
    if t.offset == 0:
        return TreePoint(w * t.anchor)
    head = w * t.anchor
    parent = w * t.anchor.prefix(len(t.anchor) - 1)
    if len(head) == len(parent) + 1:
        return TreePoint(head, t.offset)
    # The edge flips orientation in root naming.
    return TreePoint(parent, 1 - t.offset)


def act(spec: ActionSpec, g: GroupElement, p: SpacePoint) -> SpacePoint:
    """Apply the isometry of g; exact in both factors."""
    return SpacePoint(_act_tree(g.word, p.tree), spec.height_of(g, p.height))


def act_boundary(spec: ActionSpec, g: GroupElement, alpha: BoundaryPoint) -> BoundaryPoint:
    """Induced boundary homeomorphism.

    Weighted-height isometries translate the line factor by a constant, so
    they move boundary points only through the tree factor: the end is
    left-multiplied (with cancellation absorbed canonically) and the slope
    and the poles are fixed.
    """
    del spec  # the boundary action of this family is height-blind
    if isinstance(alpha, Pole):
        return alpha
    new_end = TreeEnd(g.word * alpha.end.prefix, alpha.end.period)
    return Directional(new_end, alpha.slope)


def orbit_limit(spec: ActionSpec, g: GroupElement, base: SpacePoint | None = None) -> BoundaryPoint:
    """Limit of g^n . base in the bordification; base does not matter.

    For a nontrivial word with cyclic reduction (u, c) the limit is the end
    u c^inf with slope (z*z_shift + psi(word)) / |c|; a trivial word with
    nonzero z limits on the corresponding pole.
    """
    del base
    if g.word.is_identity():
        if g.z == 0:
            raise NoLimitError("the identity has a bounded orbit")
        return Pole(1 if g.z > 0 else -1)
    u, c = cyclic_reduce(g.word)
    slope = (g.z * spec.z_shift + spec.psi(g.word)) / len(c)
    return Directional(TreeEnd(u, c), slope)


def realize_directional(spec: ActionSpec, alpha: Directional) -> GroupElement:
    """A group element whose orbit limit under `spec` is exactly `alpha`."""
    u, c = alpha.end.prefix, alpha.end.period
    tau = (alpha.slope * len(c) - spec.psi(c)) / spec.z_shift
    m, n = tau.denominator, tau.numerator
    word = u * Word(c.letters * m) * u.inverse()
    return GroupElement(word, n)


def realize_boundary(spec: ActionSpec, alpha: BoundaryPoint) -> GroupElement:
    if isinstance(alpha, Pole):
        return GroupElement(EMPTY_WORD, alpha.sign)
    return realize_directional(spec, alpha)


# ---------------------------------------------------------------------------
# Covering radius: the smallest N with (orbit of base thickened by N) = X.
#
# The orbit projects onto all tree vertices, and over each vertex v its
# heights form the ladder psi(v) + z_shift*Z (up to one global shift).  The
# worst point of one edge cell is therefore a largest-empty-circle problem
# against finitely many virtual sites, solved exactly.


def _cell_sites(spec: ActionSpec, first_letter: int, bound_sq: Fraction):
    """Deduplicated, dominance-pruned sites (x, height) for one edge cell."""
    zeta = spec.z_shift
    reach = 1
    while Fraction(reach * reach) < bound_sq:
        reach += 1
    letter_psi = spec.letter_psi()

    def side_offsets(excluded_first: int) -> dict[Fraction, int]:
        # offset -> least word length realizing it, root paths avoiding
        # the excluded first letter.
        best: dict[Fraction, int] = {Fraction(0): 0}
        frontier: list[tuple[int, Fraction]] = [(-1, Fraction(0))]
        for depth in range(1, reach + 1):
            nxt = []
            for last, off in frontier:
                for x in range(4):
                    if last == -1 and x == excluded_first:
                        continue
                    if last != -1 and x == last ^ 2:
                        continue
                    o = off + letter_psi[x]
                    nxt.append((x, o))
                    key = o % zeta
                    if key not in best:
                        best[key] = depth
            frontier = nxt
        return best

    e_side = side_offsets(excluded_first=first_letter)
    x_side = side_offsets(excluded_first=first_letter ^ 2)
    shift = letter_psi[first_letter]

    import math as _math

    pad = Fraction(_math.isqrt(int(4 * bound_sq)) + 2, 2)
    sites: list[tuple[Fraction, Fraction]] = []
    lo, hi = -pad, zeta + pad
    for offsets, anchor_x, psi0 in (
        (e_side, Fraction(0), Fraction(0)),
        (x_side, Fraction(1), shift),
    ):
        for off, k in offsets.items():
            x = anchor_x - k if anchor_x == 0 else anchor_x + k
            base = (psi0 + off) % zeta
            m = int((lo - base) / zeta) - 1
            level = base + m * zeta
            while level <= hi:
                if level >= lo:
                    sites.append((x, level))
                level += zeta
    if len(sites) > 400:
        raise UnsupportedSpecError(
            "height lattice too fine for the exact covering-radius optimizer"
        )
    return sites


def _min_site_dist_sq(pt, sites) -> Fraction:
    s, h = pt
    best = None
    for x, level in sites:
        d = (s - x) ** 2 + (h - level) ** 2
        if best is None or d < best:
            best = d
    return best


def _cell_radius_sq(spec: ActionSpec, first_letter: int) -> Fraction:
    zeta = spec.z_shift
    bound_sq = Fraction(1, 4) + zeta * zeta / 4
    sites = _cell_sites(spec, first_letter, bound_sq)
    candidates: list[tuple[Fraction, Fraction]] = [
        (Fraction(0), Fraction(0)),
        (Fraction(1), Fraction(0)),
        (Fraction(0), zeta),
        (Fraction(1), zeta),
        (Fraction(1, 2), zeta / 2),
    ]
    borders_s = (Fraction(0), Fraction(1))
    borders_h = (Fraction(0), zeta)
    for (x1, y1), (x2, y2) in itertools.combinations(sites, 2):
        # Bisector: 2(x2-x1) s + 2(y2-y1) h = |P2|^2 - |P1|^2.
        ax, ay = 2 * (x2 - x1), 2 * (y2 - y1)
        rhs = x2 * x2 + y2 * y2 - x1 * x1 - y1 * y1
        if ay != 0:
            for s in borders_s:
                candidates.append((s, (rhs - ax * s) / ay))
        if ax != 0:
            for h in borders_h:
                candidates.append(((rhs - ay * h) / ax, h))
    for (x1, y1), (x2, y2), (x3, y3) in itertools.combinations(sites, 3):
        a1, b1 = 2 * (x2 - x1), 2 * (y2 - y1)
        c1 = x2 * x2 + y2 * y2 - x1 * x1 - y1 * y1
        a2, b2 = 2 * (x3 - x1), 2 * (y3 - y1)
        c2 = x3 * x3 + y3 * y3 - x1 * x1 - y1 * y1
        det = a1 * b2 - a2 * b1
        if det == 0:
            continue
        s = (c1 * b2 - c2 * b1) / det
        h = (a1 * c2 - a2 * c1) / det
        candidates.append((s, h))
    best = Fraction(0)
    for s, h in candidates:
        if not (0 <= s <= 1 and 0 <= h <= zeta):
            continue
        d = _min_site_dist_sq((s, h), sites)
        if d > best:
            best = d
    return best


def covering_radius_sq(spec: ActionSpec, base: SpacePoint | None = None) -> Fraction:
    """Exact square of the covering radius for a vertex basepoint."""
    if base is not None and not base.tree.is_vertex():
        raise ValueError("covering radius is computed for vertex basepoints")
    return max(_cell_radius_sq(spec, 0), _cell_radius_sq(spec, 1))


def covering_radius(spec: ActionSpec, base: SpacePoint | None = None) -> float:
    return math.sqrt(covering_radius_sq(spec, base))


# ---------------------------------------------------------------------------
# Named constants used by the verification suites.


@dataclass(frozen=True, slots=True)
class ConstantsLedger:
    """The verification constants and their defining formulas.

    N and M are the covering constants of the two actions, lam and C the
    quasi-isometry constants.  The derived values are recomputed and
    asserted on construction:
      N_tilde = 2N, M_tilde = lam(N + N_tilde) + C + M,
      M_prime = lam(2N + 1) + 2M + C, c_bar = lam(2N + 3) + C + 2(M_tilde + 1).
    """

    N: Fraction
    M: Fraction
    lam: Fraction
    C: Fraction
    N_tilde: Fraction = field(default=None)  # type: ignore[assignment]
    M_tilde: Fraction = field(default=None)  # type: ignore[assignment]
    M_prime: Fraction = field(default=None)  # type: ignore[assignment]
    c_bar: Fraction = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        for name in ("N", "M", "lam", "C"):
            object.__setattr__(self, name, Fraction(getattr(self, name)))
        if self.N <= 0 or self.M <= 0:
            raise ValueError("covering constants must be positive")
        if self.lam < 1 or self.C < 0:
            raise ValueError("need lam >= 1 and C >= 0")
        n_tilde = 2 * self.N
        m_tilde = self.lam * (self.N + n_tilde) + self.C + self.M
        m_prime = self.lam * (2 * self.N + 1) + 2 * self.M + self.C
        c_bar = self.lam * (2 * self.N + 3) + self.C + 2 * (m_tilde + 1)
        for name, value in (
            ("N_tilde", n_tilde),
            ("M_tilde", m_tilde),
            ("M_prime", m_prime),
            ("c_bar", c_bar),
        ):
            given = getattr(self, name)
            if given is None:
                object.__setattr__(self, name, value)
            elif Fraction(given) != value:
                raise ValueError(f"{name} must equal {value}, got {given}")

    def as_dict(self) -> dict[str, Fraction]:
        return {
            "N": self.N,
            "M": self.M,
            "lam": self.lam,
            "C": self.C,
            "N_tilde": self.N_tilde,
            "M_tilde": self.M_tilde,
            "M_prime": self.M_prime,
            "c_bar": self.c_bar,
        }
