"""Recovery from orthogonal projections onto subspaces via randomized
subspace actions, with Kaczmarz-bound analysis of the driving distribution
and a Monte Carlo error-moment experiment harness."""

from .bounds import (
    BoundEstimate,
    alpha_log_sup,
    alpha_one_exact,
    alpha_s_sup,
    c_log_quadrature,
    first_term_bound,
    inclusion_exclusion_bound,
    invariant_alpha_closed_form,
    lyapunov_check,
    tightness_test,
)
from .distributions import (
    DiscreteDistribution,
    InvariantDistribution,
    block_onb,
    distribution_from_text,
    from_fusion_frame,
    ronb,
    roots_of_unity,
    uniform_discrete,
)
from .errors import (
    ConfigError,
    DimensionMismatchError,
    DomainError,
    InvalidParameterError,
    MixedDimensionsError,
    NoConvergenceError,
    NotAFrameError,
    NotSymmetricError,
    NotUnitVectorError,
    RankDeficientError,
    SubspaceActionError,
    ToleranceNotReachedError,
    UnsupportedVariantError,
)
from .experiments import (
    ExperimentConfig,
    MomentCurve,
    collect_sq_error_trials,
    config_from_file,
    config_from_text,
    mc_moment_curves,
    moment_curve_from_trials,
    noisy_bound_check,
    reproduce_figure,
    theoretical_curve,
)
from .fusion import FrameBounds, FusionFrame, classic_recover, frame_bounds, frame_operator, measure
from .linalg import (
    SeededRng,
    digamma,
    gaussian_matrix,
    ln_gamma,
    log_beta,
    orthonormalize,
    quadrature_01,
    sym_eig,
)
from .solver import (
    Cyclic,
    IidStream,
    InSubspaceNoise,
    RandomDiscrete,
    SolveTrace,
    run,
    run_from_stream,
    step,
    trace_to_csv,
    verify_error_identities,
)
from .subspaces import (
    Subspace,
    from_spanning,
    grassmann_distance,
    proj_norm_sq,
    project,
    sample_invariant,
)

__all__ = [name for name in dir() if not name.startswith("_")]
