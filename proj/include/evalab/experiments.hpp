#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "evalab/distribution.hpp"
#include "evalab/function_family.hpp"
#include "evalab/scores.hpp"

namespace evalab {

/// Tagged description of an evaluation metric f(q, qstar).
struct MetricSpec {
    enum class Kind { Tv, Kl, Renyi, Hellinger2, Coverage, RestrictedKl, Ipm, FixedTest };

    Kind kind = Kind::Tv;
    double alpha = 0.0;                   // Renyi
    double coverage_n = 0.0;              // Coverage
    double beta = 0.0;                    // RestrictedKl
    std::optional<FunctionFamily> family; // Ipm
    std::optional<TestFunction> g;        // FixedTest

    static MetricSpec tv();
    static MetricSpec kl();
    static MetricSpec renyi(double alpha);
    static MetricSpec hellinger2();
    static MetricSpec coverage(double n);
    static MetricSpec restricted_kl(double beta);
    static MetricSpec ipm(FunctionFamily f);
    static MetricSpec fixed_test(TestFunction g);
};

/// f(q, qstar) for the described metric. The one-sided divergences put qstar
/// in the ground-truth slot: KL(qstar || q), Renyi with qstar on top, the
/// restricted KL of qstar against q.
double metric_value(const MetricSpec& metric, const DiscreteDistribution& q, const DiscreteDistribution& qstar);

/// How each trial picks its ground truth.
struct GroundTruthSelector {
    enum class Kind { Fixed, UniformOver };

    Kind kind = Kind::Fixed;
    std::vector<DiscreteDistribution> options;

    static GroundTruthSelector fixed(DiscreteDistribution qstar);
    static GroundTruthSelector uniform_over(std::vector<DiscreteDistribution> options);
};

/// One evaluability experiment: candidates, ground-truth law, metric, score,
/// sample size, trial count, the (c, eps) slack, and the master seed all
/// per-trial randomness is derived from.
struct TrialConfig {
    DiscreteDistribution q1;
    DiscreteDistribution q2;
    GroundTruthSelector selector;
    MetricSpec metric;
    ScoreSpec score;
    std::uint64_t m = 1;
    std::uint64_t trials = 1;
    double c = 1.0;
    double eps = 0.1;
    std::uint64_t master_seed = 0;

    void validate() const;
};

struct TrialRow {
    std::uint64_t trial;        // 1-based
    std::uint32_t ground_truth; // index into the selector's options
    double score1, score2;
    double metric1, metric2;
    bool implication_failure;
    bool misrank;
    bool tie;
};

/// Wilson 95% score interval for a binomial rate.
struct RateEstimate {
    std::uint64_t count = 0;
    std::uint64_t total = 0;
    double rate = 0.0;
    double lo = 0.0;
    double hi = 0.0;
};
RateEstimate wilson_interval(std::uint64_t count, std::uint64_t total);

struct ScoreStats {
    double mean_finite = 0.0; // over finite scores only
    double min = 0.0;
    double max_finite = 0.0;
    std::uint64_t inf_count = 0;
};

struct TrialReport {
    TrialConfig config;
    std::vector<TrialRow> rows;
    RateEstimate implication_failure;
    RateEstimate misrank;
    RateEstimate tie;
    RateEstimate prefer_q1; // score comparison s1 <= s2, ties included
    // metric values (f(q1, gt), f(q2, gt)) per selector option
    std::vector<std::array<double, 2>> metric_by_ground_truth;
    ScoreStats score1;
    ScoreStats score2;
};

/// Runs the full experiment. Workers only affect scheduling: per-trial seeds
/// are derived from (master_seed, trial index) and rows are aggregated in
/// trial order, so any thread count yields the identical report.
///
/// Per trial: draw the ground truth, draw a sample of size m from it, score
/// both candidates, and check the evaluability implication along the
/// score-preferred direction (a tie prefers q1): the trial fails when
/// f(preferred) > c * f(other) + eps.
TrialReport run_trials(const TrialConfig& config, unsigned threads = 1);

/// Misranking only: the fraction of trials where the score strictly prefers
/// the model with the strictly larger metric value.
RateEstimate estimate_misranking(const DiscreteDistribution& q1, const DiscreteDistribution& q2,
                                 const GroundTruthSelector& selector, const MetricSpec& metric,
                                 const ScoreSpec& score, std::uint64_t m, std::uint64_t trials,
                                 std::uint64_t seed, unsigned threads = 1);

/// Fraction of trials where |s(q, S) - f(q, qstar)| > eps, S ~ qstar^m.
RateEstimate check_estimability(const MetricSpec& metric, const ScoreSpec& score,
                                const DiscreteDistribution& qstar, const DiscreteDistribution& q, std::uint64_t m,
                                std::uint64_t trials, double eps, std::uint64_t seed, unsigned threads = 1);

struct ProbeEntry {
    std::uint64_t m;
    RateEstimate failure;
};

struct ProbeReport {
    std::vector<ProbeEntry> sweep;
    std::optional<std::uint64_t> m_star; // smallest grid m with failure <= delta
    double delta;
};

enum class ProbeMode { Evaluability, Estimability };

/// Failure-rate sweep over an ascending grid of sample sizes. Evaluability
/// mode reruns the implication check of run_trials; estimability mode needs
/// a Fixed selector and measures |s - f| > eps exceedance for q = q1.
ProbeReport sample_complexity_probe(ProbeMode mode, const TrialConfig& base, double delta,
                                    const std::vector<std::uint64_t>& m_grid, unsigned threads = 1);

struct ScoreDistanceReport {
    double estimate;  // two-sample sup-CDF gap between the score laws
    double tv_pair;   // tv(p1, p2)
    double slack;     // Monte-Carlo slack 2 sqrt(ln(4/0.05) / (2T))
    double bound;     // m * tv_pair + slack
    bool within_bound;
};

/// Empirical distance between the laws of score(q, S) under S ~ p1^m and
/// S ~ p2^m, compared against the data-processing bound m * tv(p1, p2).
ScoreDistanceReport score_distribution_distance(const ScoreSpec& score, const DiscreteDistribution& q,
                                                const DiscreteDistribution& p1, const DiscreteDistribution& p2,
                                                std::uint64_t m, std::uint64_t trials, std::uint64_t seed,
                                                unsigned threads = 1);

} // namespace evalab
