"""Exact geometry on the product of the rank-2 Cayley tree with a line.

The package models the space as (metric tree) x (line) with the l2 product
metric, carries weighted-height isometric actions of (free group) x Z on
it, computes boundary points in join coordinates, checks the
segment-meets-ball transfer condition over finite balls, and builds and
verifies the induced boundary map between two actions.
"""

from .actions import (
    ActionSpec,
    ConstantsLedger,
    NoLimitError,
    PRESETS,
    UnsupportedSpecError,
    act,
    act_boundary,
    covering_radius,
    covering_radius_sq,
    orbit_limit,
    realize_boundary,
    spec_from_config,
)
from .boundary_map import (
    AnalyticMismatchError,
    NoCoverError,
    NotCauchyError,
    PhibarResult,
    QiEstimate,
    approximating_sequence,
    continuity_probe,
    equivariance_check,
    image_spread_check,
    injectivity_probe,
    phibar,
    phibar_from_sequence,
    qi_constants,
    sequence_tracking_suite,
    surjectivity_probe,
    well_definedness_check,
)
from .kernels import KernelUnsupportedError, backend, set_backend
from .space import (
    BoundaryPoint,
    Directional,
    GeodesicRay,
    GeodesicSegment,
    Pole,
    SpacePoint,
    asymptotic,
    dist,
    dist_point_to_ray,
    dist_point_to_segment,
    dist_sq,
    parse_boundary_point,
    ray_eval,
    segment_eval,
    segment_meets_ball,
)
from .starcheck import (
    InvalidConstantsError,
    StarVerdict,
    StarWitness,
    check_condition_star,
    check_condition_star_exact,
    minimal_M_on_ball,
    witness_growth_scan,
)
from .topology import (
    CauchyVerdict,
    NeighborhoodParams,
    NotConvergentError,
    SampledSequence,
    in_U,
    in_U_prime,
    is_cauchy_sample,
    limit_of_orbit_sequence,
)
from .tree import (
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
from .words import (
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

__version__ = "0.1.0"
