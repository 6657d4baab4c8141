#pragma once

#include <optional>

#include "evalab/distribution.hpp"
#include "evalab/function_family.hpp"

namespace evalab {

/// A single real-valued test over the domain; values may be unbounded but
/// must be finite.
class TestFunction {
public:
    static TestFunction make(std::vector<std::string> labels, std::vector<double> values);
    static TestFunction make(DomainPtr domain, std::vector<double> values);

    const DomainPtr& domain() const { return domain_; }
    const std::vector<double>& values() const { return values_; }
    double value(std::size_t i) const { return values_[i]; }

    double expectation(const DiscreteDistribution& d) const;
    double sample_mean(const Dataset& s) const;

    bool operator==(const TestFunction& other) const;

private:
    TestFunction(DomainPtr domain, std::vector<double> values)
        : domain_(std::move(domain)), values_(std::move(values)) {}

    DomainPtr domain_;
    std::vector<double> values_;
};

// -- score functions ----------------------------------------------------
//
// Each one maps a model plus an evaluation sample to a real number.
// +infinity is a legal score; a tie between scores counts as "<=".

/// Average negative log-likelihood, -(1/m) sum ln q(x_i); +infinity as soon
/// as the model assigns zero mass to an observed point.
double nll_score(const DiscreteDistribution& q, const Dataset& s);

/// exp(nll). Natural base; any fixed base induces the same model ordering.
double perplexity(const DiscreteDistribution& q, const Dataset& s);

/// IPM distance between the model and the empirical distribution of s.
double empirical_ipm_score(const DiscreteDistribution& q, const Dataset& s, const FunctionFamily& f);

struct ScheffeSelection {
    std::size_t winner;        // 0 for q1, 1 for q2; ties go to q1
    std::size_t witness_index; // the pair's IPM witness row
};

/// Two-candidate minimum-distance selection: the witness function of
/// ipm_exact(q1, q2, f) is compared against its empirical mean on s and the
/// candidate whose expectation lands closer wins.
ScheffeSelection scheffe_select(const DiscreteDistribution& q1, const DiscreteDistribution& q2, const Dataset& s,
                                const FunctionFamily& f);

/// d_F(winner, q), where the winner comes from scheffe_select. q must equal
/// one of the candidates.
double scheffe_score(const DiscreteDistribution& q, const DiscreteDistribution& q1, const DiscreteDistribution& q2,
                     const Dataset& s, const FunctionFamily& f);

/// Empirical coverage: sum over observed points of qhat(x) 1[qhat(x)/q(x) >= n].
double coverage_score(const DiscreteDistribution& q, const Dataset& s, double n);

/// |sample mean of g - E_q g|.
double fixed_test_score(const DiscreteDistribution& q, const Dataset& s, const TestFunction& g);

/// |E_p g - E_q g|.
double fixed_test_metric(const DiscreteDistribution& p, const DiscreteDistribution& q, const TestFunction& g);

/// Tagged description of a score function, resolvable against a candidate
/// pair at trial time.
struct ScoreSpec {
    enum class Kind { Nll, EmpiricalIpm, ScheffeIpm, Coverage, FixedTest };

    Kind kind = Kind::Nll;
    std::optional<FunctionFamily> family; // EmpiricalIpm, ScheffeIpm
    double coverage_n = 0.0;              // Coverage
    std::optional<TestFunction> g;        // FixedTest

    static ScoreSpec nll();
    static ScoreSpec empirical_ipm(FunctionFamily f);
    static ScoreSpec scheffe_ipm(FunctionFamily f);
    static ScoreSpec coverage(double n);
    static ScoreSpec fixed_test(TestFunction g);
};

/// Evaluates a score spec. The candidate pair is only consulted by the
/// Scheffe score; q must be one of the candidates in that case.
double evaluate_score(const ScoreSpec& spec, const DiscreteDistribution& q, const Dataset& s,
                      const DiscreteDistribution& q1, const DiscreteDistribution& q2);

} // namespace evalab
