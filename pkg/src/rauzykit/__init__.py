"""Substitution dynamics toolkit.

Exact incidence algebra, Pisot classification, contracting-plane
projections, Rauzy fractal point clouds, and the balanced pair algorithm
with its intersection substitution.
"""

from .algebra import (
    CLASSIFICATION_MARGIN,
    IntMatrix,
    IntPolynomial,
    PisotReport,
    Root,
    all_roots,
    char_poly,
    char_poly_via_cofactors,
    classify_pisot,
    determinant,
    dominant_real_root,
    evaluate_at_matrix,
    is_irreducible_over_q,
    is_primitive,
    is_unimodular,
    minimal_polynomial_of_dominant_root,
    poly_divides,
    poly_exact_div,
    poly_mul,
    positive_leading,
    reciprocal_poly,
)
from .bpa import (
    BalancedPair,
    BpaLimits,
    CommonPointsResult,
    NonTermination,
    NotFound,
    PairIncidence,
    PairSubstitution,
    ReciprocalFactorReport,
    check_incidence_homomorphism,
    first_minimal_balanced_pair,
    intersection_cloud,
    is_balanced,
    minimal_split,
    pair_incidence,
    pair_letter_name,
    reciprocal_factor_report,
    run_bpa,
    verify_common_points,
)
from .errors import (
    DegreeTooLarge,
    DimensionMismatch,
    DivideByZeroPoly,
    IllConditioned,
    IndeterminateClassification,
    MatrixMismatch,
    NegativeEntry,
    NoConvergence,
    NoSeedFound,
    NotBalanced,
    NotPisot,
    NotPrimitive,
    RauzykitError,
    SubstitutionParseError,
)
from .fractal import (
    GridIndex,
    IntersectionEstimate,
    LabeledPointCloud,
    broken_line_prefix_sums,
    export_csv,
    grid_intersection_estimate,
    hausdorff_distance,
    load_csv,
    negate_cells,
    rauzy_cloud,
    reflect_cloud,
    render_svg,
)
from .spectral import ProjectionOperator, SpectralSplit, project, projection_operator, spectral_split
from .words import (
    Alphabet,
    InfiniteWordStream,
    Substitution,
    Word,
    abelianization,
    apply,
    apply_power,
    check_strong_coincidence,
    find_fixed_point_seed,
    incidence_matrix,
    load_substitution,
    parse_substitution,
    reverse_substitution,
    save_substitution,
    seed_power_for_letter,
    stream_for,
    stream_prefix,
    substitution_from_dict,
    substitution_to_dict,
)

__version__ = "0.1.0"
