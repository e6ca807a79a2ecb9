"""Exact convexity and operator computations on metric Abelian groups.

The package instantiates finite Abelian groups, integer lattices and dyadic
lattices with validated translation-invariant norms, computes operator
norms, injectivity measures, spectral-radius brackets and geometric-series
inverses over their endomorphism rings, runs set arithmetic and convexity
checks, and verifies a catalogue of structural properties as executable
checks at desk scale.
"""

from .convexity import (
    BoxSet,
    FiniteSet,
    PointSet,
    box_set,
    closure,
    contains,
    convex_hull,
    diameter,
    family_of,
    finite_set,
    image_set,
    intersect,
    is_family_convex,
    is_n_convex,
    is_T_convex,
    member_of_sum,
    n_dilate,
    n_fold_sum,
    preimage_set,
    sample,
    subset_of,
    sumset,
    t_convex_pointwise,
)
from .endo import (
    Endomorphism,
    RhoBracket,
    all_endomorphisms,
    halve,
    identity,
    injectivity_measure,
    make_endo,
    midpoint_closed_form,
    midpoint_recursion,
    neumann_inverse,
    op_norm,
    operator_distance,
    scaling,
    shifted_inverse,
    spectral_radius,
    try_inverse,
    zero,
)
from .groups import (
    CyclicMetric,
    DyadicLattice,
    FiniteGroup,
    Group,
    IntLattice,
    L1Metric,
    LinfMetric,
    Metric,
    TableMetric,
    distance,
    mu_of_n,
    norm,
    norm_of_n,
    table_metric,
    validate_metric,
)
from .scalars import format_dyadic, format_rational, parse_scalar
from .theorems import (
    GeneratorConfig,
    Instance,
    Params,
    PropertyId,
    counterexample_search,
    verify,
)
from .verdicts import Status, Verdict, proved, refuted, unfalsified

__version__ = "0.1.0"
