#include "evalab/scores.hpp"

#include <cmath>
#include <limits>

namespace evalab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_same_domain(const DomainPtr& a, const DomainPtr& b) {
    if (!same_domain(a, b)) {
        throw DomainMismatch("operands are defined over different domains");
    }
}

} // namespace

TestFunction TestFunction::make(std::vector<std::string> labels, std::vector<double> values) {
    return make(make_domain(std::move(labels)), std::move(values));
}

TestFunction TestFunction::make(DomainPtr domain, std::vector<double> values) {
    if (domain->labels.size() != values.size()) {
        throw ValidationError("labels and values differ in length");
    }
    for (double v : values) {
        if (!std::isfinite(v)) {
            throw ValidationError("test function values must be finite");
        }
    }
    return TestFunction(std::move(domain), std::move(values));
}

double TestFunction::expectation(const DiscreteDistribution& d) const {
    require_same_domain(domain_, d.domain());
    double acc = 0.0;
    for (std::size_t i = 0; i < values_.size(); ++i) {
        acc += d.prob(i) * values_[i];
    }
    return acc;
}

double TestFunction::sample_mean(const Dataset& s) const {
    require_same_domain(domain_, s.domain());
    double acc = 0.0;
    for (auto p : s.points()) {
        acc += values_[p];
    }
    return acc / static_cast<double>(s.size());
}

bool TestFunction::operator==(const TestFunction& other) const {
    return same_domain(domain_, other.domain_) && values_ == other.values_;
}

double nll_score(const DiscreteDistribution& q, const Dataset& s) {
    require_same_domain(q.domain(), s.domain());
    const auto counts = s.counts();
    double acc = 0.0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        if (counts[i] == 0) {
            continue;
        }
        if (q.prob(i) == 0.0) {
            return kInf;
        }
        acc -= static_cast<double>(counts[i]) * std::log(q.prob(i));
    }
    return acc / static_cast<double>(s.size());
}

double perplexity(const DiscreteDistribution& q, const Dataset& s) {
    return std::exp(nll_score(q, s));
}

double empirical_ipm_score(const DiscreteDistribution& q, const Dataset& s, const FunctionFamily& f) {
    return ipm_exact(q, empirical_distribution(s, q.domain()), f).value;
}

ScheffeSelection scheffe_select(const DiscreteDistribution& q1, const DiscreteDistribution& q2, const Dataset& s,
                                const FunctionFamily& f) {
    const auto pair_ipm = ipm_exact(q1, q2, f);
    const std::size_t w = pair_ipm.witness_index;
    require_same_domain(f.domain(), s.domain());
    const double empirical = f.sample_mean(w, s);
    const double gap1 = std::abs(f.expectation(w, q1) - empirical);
    const double gap2 = std::abs(f.expectation(w, q2) - empirical);
    return {gap1 <= gap2 ? std::size_t{0} : std::size_t{1}, w};
}

double scheffe_score(const DiscreteDistribution& q, const DiscreteDistribution& q1, const DiscreteDistribution& q2,
                     const Dataset& s, const FunctionFamily& f) {
    if (!(q == q1 || q == q2)) {
        throw CandidateNotInPair("scored model is neither candidate of the pair");
    }
    const auto sel = scheffe_select(q1, q2, s, f);
    const auto& winner = sel.winner == 0 ? q1 : q2;
    return ipm_exact(winner, q, f).value;
}

double coverage_score(const DiscreteDistribution& q, const Dataset& s, double n) {
    if (!(n >= 1.0)) {
        throw ValidationError("coverage threshold must be at least 1");
    }
    require_same_domain(q.domain(), s.domain());
    const auto counts = s.counts();
    const double m = static_cast<double>(s.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        if (counts[i] == 0) {
            continue;
        }
        const double qhat = static_cast<double>(counts[i]) / m;
        const double ratio = q.prob(i) == 0.0 ? kInf : qhat / q.prob(i);
        if (ratio >= n) {
            acc += qhat;
        }
    }
    return acc;
}

double fixed_test_score(const DiscreteDistribution& q, const Dataset& s, const TestFunction& g) {
    require_same_domain(q.domain(), s.domain());
    return std::abs(g.sample_mean(s) - g.expectation(q));
}

double fixed_test_metric(const DiscreteDistribution& p, const DiscreteDistribution& q, const TestFunction& g) {
    return std::abs(g.expectation(p) - g.expectation(q));
}

ScoreSpec ScoreSpec::nll() {
    return {};
}

ScoreSpec ScoreSpec::empirical_ipm(FunctionFamily f) {
    ScoreSpec s;
    s.kind = Kind::EmpiricalIpm;
    s.family = std::move(f);
    return s;
}

ScoreSpec ScoreSpec::scheffe_ipm(FunctionFamily f) {
    ScoreSpec s;
    s.kind = Kind::ScheffeIpm;
    s.family = std::move(f);
    return s;
}

ScoreSpec ScoreSpec::coverage(double n) {
    ScoreSpec s;
    s.kind = Kind::Coverage;
    s.coverage_n = n;
    return s;
}

ScoreSpec ScoreSpec::fixed_test(TestFunction g) {
    ScoreSpec s;
    s.kind = Kind::FixedTest;
    s.g = std::move(g);
    return s;
}

double evaluate_score(const ScoreSpec& spec, const DiscreteDistribution& q, const Dataset& s,
                      const DiscreteDistribution& q1, const DiscreteDistribution& q2) {
    switch (spec.kind) {
    case ScoreSpec::Kind::Nll:
        return nll_score(q, s);
    case ScoreSpec::Kind::EmpiricalIpm:
        return empirical_ipm_score(q, s, *spec.family);
    case ScoreSpec::Kind::ScheffeIpm:
        return scheffe_score(q, q1, q2, s, *spec.family);
    case ScoreSpec::Kind::Coverage:
        return coverage_score(q, s, spec.coverage_n);
    case ScoreSpec::Kind::FixedTest:
        return fixed_test_score(q, s, *spec.g);
    }
    throw ValidationError("unknown score kind");
}

} // namespace evalab
