#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "evalab/distribution.hpp"
#include "evalab/scores.hpp"

namespace evalab {

/// A metric value (or bound on one) that is known in closed form for a
/// construction. `id` is the stable token the verifier dispatches on.
struct AnalyticFact {
    enum class Bound { Exact, Lower, Upper };

    std::string id;
    std::string description;
    Bound kind = Bound::Exact;
    double value = 0.0;
};

/// Distributions of one adversarial construction together with the closed
/// forms they were built to satisfy.
struct ConstructionBundle {
    std::string recipe;
    std::vector<std::pair<std::string, double>> parameters;
    std::optional<DiscreteDistribution> qstar;
    std::optional<DiscreteDistribution> q1;
    std::optional<DiscreteDistribution> q2;
    std::optional<DiscreteDistribution> q3;
    std::optional<TestFunction> g;
    std::vector<AnalyticFact> facts;

    double parameter(const std::string& name) const;
};

struct FactCheck {
    AnalyticFact fact;
    double recomputed;
    bool passed;
};

/// Recomputes every fact with the divergence routines. Exact facts must match
/// to 1e-10; bounds must hold up to a 1e-12 slack.
std::vector<FactCheck> check_bundle(const ConstructionBundle& bundle);

/// Throws ValidationError when any fact fails to re-verify.
void verify_bundle(const ConstructionBundle& bundle);

/// Three-point pair whose Renyi divergence reaches M/2 in both directions
/// while the pair stays within total variation eta (1 - e^-M). Picks
/// eta = exp(-(alpha-1) M / 2); requires M >= 2.
ConstructionBundle renyi_pair(double alpha, double m_param);

/// Same shape tuned for KL: eta = 2/M makes both one-sided KLs equal
/// eta M (1 - e^-M) > 1. Rejects M too small to keep mass non-negative.
ConstructionBundle kl_pair(double m_param);

/// Two-point triple where the coverage profile of q1 jumps from >= 1-gamma
/// under q2 to 0 under q3, while tv(q2, q3) = eta.
ConstructionBundle coverage_triple(double n, double gamma, double eta);

/// Two-point pair plus unbounded test g with g(x1) = (B+1) g2, g(x2) = g2.
/// Requires B large enough that the metric's closed-form lower bound
/// (B-1)/sqrt(B) |g2| actually holds (B >= (3+sqrt(5))/2).
ConstructionBundle fixed_test_pair(double b, double g2);

/// Three-point triple where tv(q1, qstar) exceeds c tv(q2, qstar) + eps yet
/// the nll score prefers q1. M defaults to just above the viability bound
/// 2 |ln(1-p-r)| / p when not supplied.
ConstructionBundle tv_nll_triple(double c, double eps, std::optional<double> m_param = std::nullopt);

/// Three-point triple where the beta-restricted KL of q2 is zero and of q1
/// at least (1-beta)(M/2 - ln 2), yet nll ranks q1 above q2 whenever the
/// sample touches x2. Requires M > 2 (1/(1-beta) + ln 2).
ConstructionBundle restricted_kl_triple(double beta, double m_param);

/// Random distribution within the pointwise ratio band
/// [(1-delta) qstar, (1+delta) qstar], by rejection.
DiscreteDistribution delta_close_pair(const DiscreteDistribution& qstar, double delta, std::uint64_t seed);

} // namespace evalab
