"""Exact set arithmetic over constrained polynomial (matrix) zonotopes,
data-driven model-set learning, and reachability propagation."""

from .algebra import (
    MergedPair,
    add_exact,
    affine_cpmz,
    cartesian_exact,
    hadamard_exact,
    intersect_cpmz,
    map_linear,
    merge_id,
    mul_cpmz_cpz,
    pow_exact,
    project,
    reduce,
)
from .errors import (
    BudgetExceeded,
    CapacityExceeded,
    CzreachError,
    DuplicateId,
    DuplicateMonomial,
    Infeasible,
    IndexOutOfRange,
    MissingFactor,
    NegativeExponent,
    NotDivisible,
    ParseError,
    RankDeficient,
    ShapeMismatch,
    TooShort,
    ValidationError,
)
from .factors import FactorAssignment, FactorId, fresh_ids, merge_assignments
from .learning import (
    DataBatch,
    ModelSet,
    MonomialBasis,
    Trajectory,
    build_batch,
    concat_noise,
    model_set_lti,
    model_set_poly,
    monomial_basis,
    monomial_basis_custom,
    refine,
    regressor_matrix,
)
from .reach import (
    ReachConfig,
    ReachResult,
    factor_id_audit,
    monomial_image,
    run_lti,
    run_poly_data,
    run_poly_model,
    step_lti,
)
from .sets import (
    CPZ,
    CPMZ,
    FEASIBILITY_TOL,
    ConstrainedMatrixZonotope,
    ConstrainedZonotope,
    MatrixZonotope,
    Zonotope,
    compact,
    compact_matrix,
    constraint_residual,
    eval_matrix,
    eval_point,
    eval_point_many,
    from_dict,
    interval_hull,
    interval_hull_matrix,
    is_feasible,
    lift,
    new_cpmz,
    new_cpz,
    relabel_fresh,
    reshape_convert,
    singleton,
    to_dict,
    vec,
)

__version__ = "0.1.0"
