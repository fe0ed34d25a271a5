"""Operator exponentials that carry nonnegative polynomials into sums of squares."""

from .polynomials import (
    MINUS_INFINITY,
    GradedBasis,
    MultiIndex,
    Polynomial,
    evaluate,
    homogeneous_component,
    monomial_basis,
    motzkin,
    poly_add,
    poly_mul,
    poly_scale,
    sup_distance,
    sup_norm,
)
from .moments import (
    Explicit,
    GaussianFull,
    GaussianOrthant,
    GradedGaussian,
    LinearFunctional,
    PointEval,
    Riesz,
    functional_apply,
    functional_from_dict,
    gaussian_moment_full,
    gaussian_moment_orthant,
    riesz_apply,
)
from .operators import (
    BlowUpError,
    Bracket,
    Compose,
    FiniteMap,
    MonomialRule,
    NotInvariantError,
    OperatorExpr,
    OperatorMatrix,
    PolySpan,
    RankOne,
    RuleCase,
    Scale,
    Sum,
    exp_apply,
    expm,
    expm_dense,
    op_apply,
    operator_from_dict,
    prime_shift_operator,
    rank_one_exp,
    restrict_matrix,
    shift_even_up,
    shift_odd_up,
)
from .certifier import (
    Certified,
    CertifyOutcome,
    GramCertificate,
    GramProblem,
    RefutedByPoint,
    Undecided,
    build_gram_problem,
    certify_sos,
    export_sdpa,
    interior_point,
    validate_certificate,
)
from .transport import (
    AnnihilationViolated,
    HypothesisViolated,
    NonPositiveDirection,
    SampleNotNonneg,
    SearchExhausted,
    TransportPlan,
    build_graded_custom,
    build_graded_full,
    build_orthant,
    build_rank_one,
    check_sample_nonneg,
    find_tau,
    sample_pos,
    transport_problem,
    validate_plan,
)
from .glab import (
    GVerdict,
    SubspaceReport,
    check_invariance,
    degree_growth_profile,
    eval_rank_one,
    g_check,
    invariant_subspace,
    spot_check_lie_span,
)

__version__ = "0.1.0"
