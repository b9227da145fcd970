"""Injective sets in the sup norm, as executable objects.

The package represents subsets of R^n cut out by 1-Lipschitz coordinate
bounds, retracts points onto them by cyclic single-coordinate projections,
extends Lipschitz maps into them, enumerates the extremal functions of a
finite metric space on a grid, and reconstructs bound descriptions from
membership samples.
"""

from .boxset import (
    BoxLipschitzSet,
    DivergenceDetectedError,
    InconsistentBoundsError,
    IterationTrace,
    MaxSweepsExceededError,
    UnsupportedSetError,
    check_decay_certificate,
    coord_retract,
    cyclic_iterate,
    cyclic_retract,
    cyclic_retract_many,
    detect_noncontraction,
    enclosure_bounds,
    find_point,
    relaxation_order,
    retract_lambda_one_bounded,
    retract_lambda_one_bounded_many,
    retract_lambda_one_general,
    retract_lambda_one_general_many,
    set_from_obj,
    set_to_obj,
    shrink_set,
    trace_to_csv,
    truncated_set,
    violation,
    violation_many,
)
from .extension import NotLipschitzError, extend_into_Q, kuratowski_embed, mcshane_extend_component
from .hull import ExtremalityError, attach_point, enumerate_extremal_grid, extremal_zero_classification, in_delta, is_extremal
from .lipfun import (
    Blend,
    Const,
    DistCone,
    Infinite,
    LipExpr,
    Max,
    McShane,
    Min,
    bounds_of,
    expr_dumps,
    expr_from_obj,
    expr_loads,
    expr_to_obj,
    lip_bound,
    shifted,
    shrink,
    translated,
    verify_lipschitz_on_grid,
)
from .metric import (
    ConeDescriptor,
    FiniteMetricSpace,
    as_point,
    check_metric_axioms,
    clamp,
    cone_contains,
    hat,
    hausdorff_distance,
    insert_coord,
    sup_dist,
)
from .reconstruct import (
    ConeOverlapError,
    ReconstructionConfig,
    ReconstructionReport,
    choose_cone,
    epsilon_of,
    membership_from_samples,
    synthesize_bounds,
    verify_reconstruction,
)

__version__ = "0.1.0"
