#include "evalab/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "evalab/rng.hpp"

namespace evalab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Seed streams, so the draws of one trial never alias another's.
enum Stream : std::uint64_t {
    kSelectorStream = 0,
    kSampleStream = 1,
    kProbeStream = 3,
    kFirstLawStream = 4,
    kSecondLawStream = 5,
};

/// Runs fn(t) for t in [0, trials). Slot-per-trial writing plus ordered
/// aggregation by the caller keeps results independent of the thread count.
template <typename Fn>
void parallel_trials(std::uint64_t trials, unsigned threads, Fn&& fn) {
    if (threads <= 1 || trials < 2) {
        for (std::uint64_t t = 0; t < trials; ++t) {
            fn(t);
        }
        return;
    }
    const unsigned workers = static_cast<unsigned>(std::min<std::uint64_t>(threads, trials));
    std::atomic<std::uint64_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            try {
                for (std::uint64_t t = next.fetch_add(1); t < trials; t = next.fetch_add(1)) {
                    fn(t);
                }
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) {
                    failure = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) {
        th.join();
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
}

void require_same_domain(const DomainPtr& a, const DomainPtr& b, const char* what) {
    if (!same_domain(a, b)) {
        throw DomainMismatch(std::string("config domains disagree: ") + what);
    }
}

double deviation(double s, double f) {
    if (std::isinf(s) && std::isinf(f)) {
        return 0.0;
    }
    return std::abs(s - f);
}

ScoreStats collect_stats(const std::vector<TrialRow>& rows, bool first) {
    ScoreStats st;
    double sum = 0.0;
    std::uint64_t finite = 0;
    st.min = kInf;
    st.max_finite = -kInf;
    for (const auto& row : rows) {
        const double s = first ? row.score1 : row.score2;
        st.min = std::min(st.min, s);
        if (std::isinf(s)) {
            ++st.inf_count;
        } else {
            sum += s;
            ++finite;
            st.max_finite = std::max(st.max_finite, s);
        }
    }
    st.mean_finite = finite > 0 ? sum / static_cast<double>(finite) : 0.0;
    if (finite == 0) {
        st.max_finite = 0.0;
    }
    return st;
}

} // namespace

MetricSpec MetricSpec::tv() {
    return {};
}
MetricSpec MetricSpec::kl() {
    MetricSpec m;
    m.kind = Kind::Kl;
    return m;
}
MetricSpec MetricSpec::renyi(double alpha) {
    MetricSpec m;
    m.kind = Kind::Renyi;
    m.alpha = alpha;
    return m;
}
MetricSpec MetricSpec::hellinger2() {
    MetricSpec m;
    m.kind = Kind::Hellinger2;
    return m;
}
MetricSpec MetricSpec::coverage(double n) {
    MetricSpec m;
    m.kind = Kind::Coverage;
    m.coverage_n = n;
    return m;
}
MetricSpec MetricSpec::restricted_kl(double beta) {
    MetricSpec m;
    m.kind = Kind::RestrictedKl;
    m.beta = beta;
    return m;
}
MetricSpec MetricSpec::ipm(FunctionFamily f) {
    MetricSpec m;
    m.kind = Kind::Ipm;
    m.family = std::move(f);
    return m;
}
MetricSpec MetricSpec::fixed_test(TestFunction g) {
    MetricSpec m;
    m.kind = Kind::FixedTest;
    m.g = std::move(g);
    return m;
}

double metric_value(const MetricSpec& metric, const DiscreteDistribution& q, const DiscreteDistribution& qstar) {
    switch (metric.kind) {
    case MetricSpec::Kind::Tv:
        return tv(q, qstar);
    case MetricSpec::Kind::Kl:
        return kl(qstar, q);
    case MetricSpec::Kind::Renyi:
        return renyi(qstar, q, metric.alpha);
    case MetricSpec::Kind::Hellinger2:
        return hellinger_sq(q, qstar);
    case MetricSpec::Kind::Coverage:
        return coverage_profile(q, qstar, metric.coverage_n);
    case MetricSpec::Kind::RestrictedKl:
        return restricted_kl(qstar, q, metric.beta);
    case MetricSpec::Kind::Ipm:
        return ipm_exact(q, qstar, *metric.family).value;
    case MetricSpec::Kind::FixedTest:
        return fixed_test_metric(q, qstar, *metric.g);
    }
    throw ValidationError("unknown metric kind");
}

GroundTruthSelector GroundTruthSelector::fixed(DiscreteDistribution qstar) {
    GroundTruthSelector s;
    s.kind = Kind::Fixed;
    s.options.push_back(std::move(qstar));
    return s;
}

GroundTruthSelector GroundTruthSelector::uniform_over(std::vector<DiscreteDistribution> options) {
    if (options.empty()) {
        throw ValidationError("uniform selector needs at least one distribution");
    }
    GroundTruthSelector s;
    s.kind = Kind::UniformOver;
    s.options = std::move(options);
    return s;
}

void TrialConfig::validate() const {
    if (m < 1 || trials < 1) {
        throw ValidationError("sample size and trial count must be at least 1");
    }
    if (!(c >= 1.0)) {
        throw ValidationError("c must be at least 1");
    }
    if (!(eps > 0.0 && eps < 1.0)) {
        throw ValidationError("eps must lie in (0, 1)");
    }
    if (selector.options.empty()) {
        throw ValidationError("selector has no ground-truth distributions");
    }
    if (selector.kind == GroundTruthSelector::Kind::Fixed && selector.options.size() != 1) {
        throw ValidationError("fixed selector must hold exactly one distribution");
    }
    const auto& dom = q1.domain();
    require_same_domain(dom, q2.domain(), "q1 vs q2");
    for (const auto& opt : selector.options) {
        require_same_domain(dom, opt.domain(), "candidates vs ground truth");
    }
    if (metric.family) {
        require_same_domain(dom, metric.family->domain(), "candidates vs metric family");
    }
    if (metric.g) {
        require_same_domain(dom, metric.g->domain(), "candidates vs metric test function");
    }
    if (score.family) {
        require_same_domain(dom, score.family->domain(), "candidates vs score family");
    }
    if (score.g) {
        require_same_domain(dom, score.g->domain(), "candidates vs score test function");
    }
    if ((metric.kind == MetricSpec::Kind::Ipm && !metric.family) ||
        (metric.kind == MetricSpec::Kind::FixedTest && !metric.g)) {
        throw ValidationError("metric spec is missing its family or test function");
    }
    if (((score.kind == ScoreSpec::Kind::EmpiricalIpm || score.kind == ScoreSpec::Kind::ScheffeIpm) &&
         !score.family) ||
        (score.kind == ScoreSpec::Kind::FixedTest && !score.g)) {
        throw ValidationError("score spec is missing its family or test function");
    }
}

RateEstimate wilson_interval(std::uint64_t count, std::uint64_t total) {
    if (total == 0) {
        throw ValidationError("rate over zero trials");
    }
    const double z = 1.959963984540054; // 95%
    const double n = static_cast<double>(total);
    const double p = static_cast<double>(count) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = (p + z2 / (2.0 * n)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    return {count, total, p, std::max(0.0, center - half), std::min(1.0, center + half)};
}

TrialReport run_trials(const TrialConfig& config, unsigned threads) {
    config.validate();
    const auto& opts = config.selector.options;

    // Metric values depend only on (candidate, ground truth); compute once.
    std::vector<std::array<double, 2>> fvals(opts.size());
    for (std::size_t i = 0; i < opts.size(); ++i) {
        fvals[i] = {metric_value(config.metric, config.q1, opts[i]),
                    metric_value(config.metric, config.q2, opts[i])};
    }

    std::vector<TrialRow> rows(config.trials);
    parallel_trials(config.trials, threads, [&](std::uint64_t t) {
        std::uint32_t gt = 0;
        if (config.selector.kind == GroundTruthSelector::Kind::UniformOver) {
            Rng pick(derive_seed(config.master_seed, t, kSelectorStream));
            gt = static_cast<std::uint32_t>(pick.next_index(opts.size()));
        }
        const auto s = sample(opts[gt], config.m, derive_seed(config.master_seed, t, kSampleStream));
        const double s1 = evaluate_score(config.score, config.q1, s, config.q1, config.q2);
        const double s2 = evaluate_score(config.score, config.q2, s, config.q1, config.q2);
        const double f1 = fvals[gt][0];
        const double f2 = fvals[gt][1];

        // The implication is checked along the score-preferred direction;
        // a tied score prefers q1. c * inf + eps stays inf, so an infinite
        // metric on the other side never fails the check.
        const bool tie = s1 == s2;
        const bool prefer1 = s1 <= s2;
        const bool failure = prefer1 ? f1 > config.c * f2 + config.eps : f2 > config.c * f1 + config.eps;
        const bool misrank = (s1 < s2 && f1 > f2) || (s2 < s1 && f2 > f1);
        rows[t] = {t + 1, gt, s1, s2, f1, f2, failure, misrank, tie};
    });

    std::uint64_t failures = 0, misranks = 0, ties = 0, prefer1 = 0;
    for (const auto& row : rows) {
        failures += row.implication_failure;
        misranks += row.misrank;
        ties += row.tie;
        prefer1 += row.score1 <= row.score2;
    }
    const auto stats1 = collect_stats(rows, true);
    const auto stats2 = collect_stats(rows, false);
    return TrialReport{config,
                       std::move(rows),
                       wilson_interval(failures, config.trials),
                       wilson_interval(misranks, config.trials),
                       wilson_interval(ties, config.trials),
                       wilson_interval(prefer1, config.trials),
                       std::move(fvals),
                       stats1,
                       stats2};
}

RateEstimate estimate_misranking(const DiscreteDistribution& q1, const DiscreteDistribution& q2,
                                 const GroundTruthSelector& selector, const MetricSpec& metric,
                                 const ScoreSpec& score, std::uint64_t m, std::uint64_t trials,
                                 std::uint64_t seed, unsigned threads) {
    TrialConfig config{q1, q2, selector, metric, score, m, trials, 1.0, 0.5, seed};
    return run_trials(config, threads).misrank;
}

RateEstimate check_estimability(const MetricSpec& metric, const ScoreSpec& score,
                                const DiscreteDistribution& qstar, const DiscreteDistribution& q, std::uint64_t m,
                                std::uint64_t trials, double eps, std::uint64_t seed, unsigned threads) {
    if (m < 1 || trials < 1) {
        throw ValidationError("sample size and trial count must be at least 1");
    }
    if (!(eps > 0.0)) {
        throw ValidationError("eps must be positive");
    }
    const double f = metric_value(metric, q, qstar);
    std::vector<std::uint8_t> exceed(trials, 0);
    parallel_trials(trials, threads, [&](std::uint64_t t) {
        const auto s = sample(qstar, m, derive_seed(seed, t, kSampleStream));
        const double value = evaluate_score(score, q, s, q, q);
        exceed[t] = deviation(value, f) > eps ? 1 : 0;
    });
    std::uint64_t count = 0;
    for (auto e : exceed) {
        count += e;
    }
    return wilson_interval(count, trials);
}

ProbeReport sample_complexity_probe(ProbeMode mode, const TrialConfig& base, double delta,
                                    const std::vector<std::uint64_t>& m_grid, unsigned threads) {
    if (m_grid.empty()) {
        throw EmptyGrid("sample-size grid is empty");
    }
    if (!std::is_sorted(m_grid.begin(), m_grid.end())) {
        throw ValidationError("sample-size grid must be ascending");
    }
    if (!(delta > 0.0 && delta < 1.0)) {
        throw ValidationError("delta must lie in (0, 1)");
    }
    if (mode == ProbeMode::Estimability && base.selector.kind != GroundTruthSelector::Kind::Fixed) {
        throw ValidationError("estimability probe needs a fixed ground truth");
    }

    ProbeReport report;
    report.delta = delta;
    for (std::size_t i = 0; i < m_grid.size(); ++i) {
        const std::uint64_t seed = derive_seed(base.master_seed, i, kProbeStream);
        RateEstimate rate;
        if (mode == ProbeMode::Evaluability) {
            TrialConfig cfg = base;
            cfg.m = m_grid[i];
            cfg.master_seed = seed;
            rate = run_trials(cfg, threads).implication_failure;
        } else {
            rate = check_estimability(base.metric, base.score, base.selector.options.front(), base.q1, m_grid[i],
                                      base.trials, base.eps, seed, threads);
        }
        report.sweep.push_back({m_grid[i], rate});
        if (!report.m_star && rate.rate <= delta) {
            report.m_star = m_grid[i];
        }
    }
    return report;
}

ScoreDistanceReport score_distribution_distance(const ScoreSpec& score, const DiscreteDistribution& q,
                                                const DiscreteDistribution& p1, const DiscreteDistribution& p2,
                                                std::uint64_t m, std::uint64_t trials, std::uint64_t seed,
                                                unsigned threads) {
    if (m < 1 || trials < 1) {
        throw ValidationError("sample size and trial count must be at least 1");
    }
    std::vector<double> first(trials), second(trials);
    parallel_trials(trials, threads, [&](std::uint64_t t) {
        const auto sa = sample(p1, m, derive_seed(seed, t, kFirstLawStream));
        const auto sb = sample(p2, m, derive_seed(seed, t, kSecondLawStream));
        first[t] = evaluate_score(score, q, sa, q, q);
        second[t] = evaluate_score(score, q, sb, q, q);
    });
    std::sort(first.begin(), first.end());
    std::sort(second.begin(), second.end());

    // sup over thresholds of the empirical-CDF gap (two-sample KS statistic)
    const double n = static_cast<double>(trials);
    double sup = 0.0;
    std::size_t i = 0, j = 0;
    while (i < first.size() && j < second.size()) {
        const double v = std::min(first[i], second[j]);
        while (i < first.size() && first[i] <= v) {
            ++i;
        }
        while (j < second.size() && second[j] <= v) {
            ++j;
        }
        sup = std::max(sup, std::abs(static_cast<double>(i) / n - static_cast<double>(j) / n));
    }

    ScoreDistanceReport report;
    report.estimate = sup;
    report.tv_pair = tv(p1, p2);
    report.slack = 2.0 * std::sqrt(std::log(4.0 / 0.05) / (2.0 * n));
    report.bound = static_cast<double>(m) * report.tv_pair + report.slack;
    report.within_bound = report.estimate <= report.bound;
    return report;
}

} // namespace evalab
