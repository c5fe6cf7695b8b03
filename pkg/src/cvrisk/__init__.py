"""cvrisk: exact and Monte Carlo analysis of k-fold cross-validation error.

Computes the mean-squared error of k-fold CV for risk estimation and its
decomposition into squared loss stability, inter-fold covariance, per-fold
noise, and correction terms, with exact rational arithmetic wherever the
instance is enumerable and seeded Monte Carlo otherwise.  Ships the three
benchmark learners whose fold covariance is known in closed form: the
majority rule, the randomized consistent-linear-function learner over a
prime field, and the square-wave rule.
"""

__version__ = "0.1.0"

from .types import (
    BudgetExceeded,
    CVRiskError,
    DomainMismatch,
    EstimateWithError,
    ExactValue,
    FiniteDistribution,
    FoldScheme,
    Hypothesis,
    HypothesisMixture,
    Inconsistent,
    InputMismatch,
    InvalidFoldSize,
    LabeledPoint,
    LearningRule,
    LengthMismatch,
    NotDivisible,
    OutOfRange,
    RTooSmall,
    constant_hypothesis,
    constant_rule,
    cv_estimate,
    partition_folds,
    population_risk,
)
from .exact import DEFAULT_BUDGET, FUNCTIONALS, exact_functional
from .mc import mc_functional
from .decomposition import (
    BoundCheck,
    DecompositionReport,
    StabilityProfile,
    anticorr_fixture,
    bound_suite,
    decompose,
    stability_estimates,
)
from .majority import (
    MajorityCovRow,
    cov_approx,
    cov_conditional,
    cov_exact,
    majority_rule,
    minimize_cov,
    mse_majority,
)
from .linfield import (
    FieldSpec,
    FqMatrix,
    LinearHypothesis,
    RankDistribution,
    SolutionCoset,
    expected_loss_exact,
    fold_noise_exact,
    gaussian_coefficient,
    linear_mse_bound,
    linear_mse_mc,
    linear_rule,
    rank_distribution,
    rank_prob,
    solve_uniform,
)
from .squarewave import (
    SqConstants,
    SquareWaveParams,
    ThetaSeries,
    cov_exact_factorized,
    epsilon_floor,
    f_exact,
    predicted_cov,
    square_wave_rule,
    squarewave_constants,
    theta_eval,
)

__all__ = [name for name in dir() if not name.startswith("_")]
