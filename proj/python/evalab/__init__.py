"""Evaluability laboratory for generative-model metrics on finite discrete domains.

Thin Python surface over the C++ core: distributions and divergences, tabular
test-function families with exact IPM / VC / fat-shattering computations,
score functions, the adversarial construction builders, and the seeded
Monte-Carlo evaluability harness.
"""

from ._core import (  # noqa: F401
    AnalyticFact,
    ConstructionBundle,
    Dataset,
    DiscreteDistribution,
    FunctionFamily,
    GroundTruthSelector,
    InfeasibleError,
    MetricSpec,
    RateEstimate,
    ScoreDistanceReport,
    ScoreSpec,
    TestFunction,
    TrialConfig,
    TrialReport,
    ValidationError,
    __version__,
    check_delta_close,
    check_estimability,
    check_lower_bound,
    check_margin,
    coverage_profile,
    coverage_score,
    coverage_triple,
    delta_close_pair,
    empirical_distribution,
    empirical_ipm_score,
    estimate_misranking,
    fat_shattering_dim,
    fixed_test_metric,
    fixed_test_pair,
    fixed_test_score,
    hellinger_sq,
    ipm_exact,
    kl,
    kl_pair,
    metric_value,
    nll_score,
    perplexity,
    renyi,
    renyi_pair,
    restricted_kl,
    restricted_kl_triple,
    run_trials,
    sample,
    scheffe_score,
    scheffe_select,
    score_distribution_distance,
    tv,
    tv_nll_triple,
    vc_dimension,
    verify_bundle,
)
