#include "evalab/constructions.hpp"

#include <cmath>

#include "evalab/rng.hpp"

namespace evalab {

namespace {

const std::vector<std::string> kTripleLabels{"x0", "x1", "x2"};
const std::vector<std::string> kPairLabels{"x0", "x1"};

constexpr double kExactTol = 1e-10;
constexpr double kBoundSlack = 1e-12;

AnalyticFact exact(std::string id, std::string description, double value) {
    return {std::move(id), std::move(description), AnalyticFact::Bound::Exact, value};
}

AnalyticFact lower(std::string id, std::string description, double value) {
    return {std::move(id), std::move(description), AnalyticFact::Bound::Lower, value};
}

const DiscreteDistribution& pick(const ConstructionBundle& b, const std::optional<DiscreteDistribution>& d,
                                 const char* role) {
    if (!d) {
        throw ValidationError("bundle '" + b.recipe + "' is missing distribution " + role);
    }
    return *d;
}

double recompute_fact(const ConstructionBundle& b, const AnalyticFact& fact) {
    const auto& id = fact.id;
    if (id == "renyi_q2_q1") {
        return renyi(pick(b, b.q2, "q2"), pick(b, b.q1, "q1"), b.parameter("alpha"));
    }
    if (id == "renyi_q1_q2") {
        return renyi(pick(b, b.q1, "q1"), pick(b, b.q2, "q2"), b.parameter("alpha"));
    }
    if (id == "tv_q1_q2") {
        return tv(pick(b, b.q1, "q1"), pick(b, b.q2, "q2"));
    }
    if (id == "kl_q1_q2") {
        return kl(pick(b, b.q1, "q1"), pick(b, b.q2, "q2"));
    }
    if (id == "kl_q2_q1") {
        return kl(pick(b, b.q2, "q2"), pick(b, b.q1, "q1"));
    }
    if (id == "coverage_q1_under_q2") {
        return coverage_profile(pick(b, b.q1, "q1"), pick(b, b.q2, "q2"), b.parameter("N"));
    }
    if (id == "coverage_q1_under_q3") {
        return coverage_profile(pick(b, b.q1, "q1"), pick(b, b.q3, "q3"), b.parameter("N"));
    }
    if (id == "tv_q2_q3") {
        return tv(pick(b, b.q2, "q2"), pick(b, b.q3, "q3"));
    }
    if (id == "fixed_metric_q1_q2" || id == "fixed_metric_floor") {
        if (!b.g) {
            throw ValidationError("bundle '" + b.recipe + "' is missing its test function");
        }
        return fixed_test_metric(pick(b, b.q1, "q1"), pick(b, b.q2, "q2"), *b.g);
    }
    if (id == "tv_q1_qstar") {
        return tv(pick(b, b.q1, "q1"), pick(b, b.qstar, "qstar"));
    }
    if (id == "tv_q2_qstar") {
        return tv(pick(b, b.q2, "q2"), pick(b, b.qstar, "qstar"));
    }
    if (id == "tv_gap_margin") {
        const double tv1 = tv(pick(b, b.q1, "q1"), pick(b, b.qstar, "qstar"));
        const double tv2 = tv(pick(b, b.q2, "q2"), pick(b, b.qstar, "qstar"));
        return tv1 - (b.parameter("c") * tv2 + b.parameter("eps"));
    }
    if (id == "rkl_qstar_q2") {
        return restricted_kl(pick(b, b.qstar, "qstar"), pick(b, b.q2, "q2"), b.parameter("beta"));
    }
    if (id == "rkl_qstar_q1") {
        return restricted_kl(pick(b, b.qstar, "qstar"), pick(b, b.q1, "q1"), b.parameter("beta"));
    }
    if (id == "prob_x2_in_sample") {
        const auto& qstar = pick(b, b.qstar, "qstar");
        const double mass = qstar.prob(*qstar.index_of("x2"));
        return 1.0 - std::pow(1.0 - mass, b.parameter("fact_m"));
    }
    if (id == "x2_mass_gap_q1_qstar") {
        const auto& qstar = pick(b, b.qstar, "qstar");
        const auto& q1 = pick(b, b.q1, "q1");
        return q1.prob(*q1.index_of("x2")) - qstar.prob(*qstar.index_of("x2"));
    }
    throw ValidationError("unknown analytic fact id: " + id);
}

} // namespace

double ConstructionBundle::parameter(const std::string& name) const {
    for (const auto& [key, value] : parameters) {
        if (key == name) {
            return value;
        }
    }
    throw ValidationError("bundle '" + recipe + "' has no parameter " + name);
}

std::vector<FactCheck> check_bundle(const ConstructionBundle& bundle) {
    std::vector<FactCheck> out;
    out.reserve(bundle.facts.size());
    for (const auto& fact : bundle.facts) {
        const double recomputed = recompute_fact(bundle, fact);
        bool passed = false;
        switch (fact.kind) {
        case AnalyticFact::Bound::Exact:
            passed = std::isinf(fact.value) ? recomputed == fact.value
                                            : std::abs(recomputed - fact.value) <= kExactTol;
            break;
        case AnalyticFact::Bound::Lower:
            passed = recomputed >= fact.value - kBoundSlack;
            break;
        case AnalyticFact::Bound::Upper:
            passed = recomputed <= fact.value + kBoundSlack;
            break;
        }
        out.push_back({fact, recomputed, passed});
    }
    return out;
}

void verify_bundle(const ConstructionBundle& bundle) {
    for (const auto& check : check_bundle(bundle)) {
        if (!check.passed) {
            throw ValidationError("analytic fact '" + check.fact.id + "' of bundle '" + bundle.recipe +
                                  "' does not re-verify: stated " + std::to_string(check.fact.value) +
                                  ", recomputed " + std::to_string(check.recomputed));
        }
    }
}

ConstructionBundle renyi_pair(double alpha, double m_param) {
    if (!(alpha > 1.0)) {
        throw AlphaOutOfRange("Renyi order must exceed 1");
    }
    if (!(m_param >= 2.0)) {
        throw InvalidParameters("M must be at least 2");
    }
    const double eta = std::exp(-(alpha - 1.0) * m_param / 2.0);
    const double small = eta * std::exp(-m_param);
    const double bulk = 1.0 - eta - small;
    if (bulk < 0.0) {
        throw InvalidParameters("off-bulk mass exceeds 1; increase M or alpha");
    }

    ConstructionBundle b;
    b.recipe = "renyi";
    b.parameters = {{"alpha", alpha}, {"M", m_param}, {"eta", eta}};
    b.q1 = DiscreteDistribution::make(kTripleLabels, {bulk, small, eta});
    b.q2 = DiscreteDistribution::make(kTripleLabels, {bulk, eta, small});
    b.facts.push_back(lower("renyi_q2_q1", "Renyi_alpha(q2 against ground truth q1)", m_param / 2.0));
    b.facts.push_back(lower("renyi_q1_q2", "Renyi_alpha(q1 against ground truth q2)", m_param / 2.0));
    b.facts.push_back(exact("tv_q1_q2", "tv(q1, q2)", eta * (1.0 - std::exp(-m_param))));
    verify_bundle(b);
    return b;
}

ConstructionBundle kl_pair(double m_param) {
    if (!(m_param > 0.0)) {
        throw InvalidParameters("M must be positive");
    }
    const double eta = 2.0 / m_param;
    const double small = eta * std::exp(-m_param);
    const double bulk = 1.0 - eta - small;
    if (eta >= 1.0 || bulk < 0.0) {
        throw InvalidParameters("eta = 2/M leaves no mass for the bulk point; increase M");
    }

    ConstructionBundle b;
    b.recipe = "kl";
    b.parameters = {{"M", m_param}, {"eta", eta}};
    b.q1 = DiscreteDistribution::make(kTripleLabels, {bulk, small, eta});
    b.q2 = DiscreteDistribution::make(kTripleLabels, {bulk, eta, small});
    const double value = eta * m_param * (1.0 - std::exp(-m_param));
    b.facts.push_back(exact("kl_q1_q2", "KL(q1 || q2)", value));
    b.facts.push_back(exact("kl_q2_q1", "KL(q2 || q1)", value));
    verify_bundle(b);
    return b;
}

ConstructionBundle coverage_triple(double n, double gamma, double eta) {
    if (!(n >= 2.0)) {
        throw InvalidParameters("N must be at least 2");
    }
    if (!(gamma > 0.0 && gamma < 1.0)) {
        throw InvalidParameters("gamma must lie in (0, 1)");
    }
    if (!(eta > 0.0 && eta < gamma / 10.0)) {
        throw InvalidParameters("eta must lie in (0, gamma/10)");
    }
    const double below = (1.0 - gamma) / n;
    if (!(below > 0.0 && below < 1.0)) {
        throw InvalidParameters("(1-gamma)/N must lie in (0, 1)");
    }

    ConstructionBundle b;
    b.recipe = "coverage";
    b.parameters = {{"N", n}, {"gamma", gamma}, {"eta", eta}};
    b.q1 = DiscreteDistribution::make(kPairLabels, {below, 1.0 - below});
    b.q2 = DiscreteDistribution::make(kPairLabels, {1.0 - gamma, gamma});
    b.q3 = DiscreteDistribution::make(kPairLabels, {1.0 - gamma - eta, gamma + eta});
    b.facts.push_back(lower("coverage_q1_under_q2", "coverage profile of q1 under q2", 1.0 - gamma));
    b.facts.push_back(exact("coverage_q1_under_q3", "coverage profile of q1 under q3", 0.0));
    b.facts.push_back(exact("tv_q2_q3", "tv(q2, q3)", eta));
    verify_bundle(b);
    return b;
}

ConstructionBundle fixed_test_pair(double b_param, double g2) {
    if (!(b_param > 1.0)) {
        throw InvalidParameters("B must exceed 1");
    }
    if (g2 == 0.0 || !std::isfinite(g2)) {
        throw InvalidParameters("g2 must be nonzero and finite");
    }
    const double root = std::sqrt(b_param);

    ConstructionBundle b;
    b.recipe = "fixedtest";
    b.parameters = {{"B", b_param}, {"g2", g2}};
    b.q1 = DiscreteDistribution::make(kPairLabels, {1.0 / root, 1.0 - 1.0 / root});
    b.q2 = DiscreteDistribution::make(kPairLabels, {0.0, 1.0});
    b.g = TestFunction::make(kPairLabels, {(b_param + 1.0) * g2, g2});
    // The candidates differ only through the 1/sqrt(B) mass moved onto x1,
    // so the metric is |g(x1) - g(x2)| / sqrt(B) = sqrt(B) |g2|, which sits
    // above the (B-1)/sqrt(B) |g2| floor for every B > 1.
    b.facts.push_back(exact("fixed_metric_q1_q2", "|E_q1 g - E_q2 g|",
                            std::abs((b_param + 1.0) * g2 - g2) / root));
    b.facts.push_back(lower("fixed_metric_floor", "|E_q1 g - E_q2 g| floor",
                            (b_param - 1.0) / root * std::abs(g2)));
    verify_bundle(b);
    return b;
}

ConstructionBundle tv_nll_triple(double c, double eps, std::optional<double> m_param) {
    if (!(c >= 1.0)) {
        throw InvalidParameters("c must be at least 1");
    }
    if (!(eps > 0.0 && eps < 1.0)) {
        throw InvalidParameters("eps must lie in (0, 1)");
    }
    const double p = (1.0 - eps) / (4.0 * c);
    const double r = (1.0 + eps) / 2.0 - p / 2.0;
    const double m_floor = 2.0 * std::abs(std::log(1.0 - p - r)) / p;
    const double m = m_param.value_or(m_floor + 1.0);
    if (!(m > m_floor)) {
        throw InvalidParameters("M must exceed 2 |ln(1-p-r)| / p = " + std::to_string(m_floor));
    }

    ConstructionBundle b;
    b.recipe = "tvnll";
    b.parameters = {{"c", c}, {"eps", eps}, {"M", m}, {"p", p}, {"r", r}};
    b.qstar = DiscreteDistribution::make(kTripleLabels, {1.0 - p, p, 0.0});
    b.q1 = DiscreteDistribution::make(kTripleLabels, {1.0 - p - r, p, r});
    const double small = p * std::exp(-m);
    b.q2 = DiscreteDistribution::make(kTripleLabels, {1.0 - small, small, 0.0});
    b.facts.push_back(exact("tv_q1_qstar", "tv(q1, qstar)", r));
    b.facts.push_back(exact("tv_q2_qstar", "tv(q2, qstar)", p * (1.0 - std::exp(-m))));
    b.facts.push_back(lower("tv_gap_margin", "tv(q1,qstar) - (c tv(q2,qstar) + eps)", 0.0));
    verify_bundle(b);
    return b;
}

ConstructionBundle restricted_kl_triple(double beta, double m_param) {
    if (!(beta > 0.0 && beta < 0.5)) {
        throw InvalidParameters("beta must lie in (0, 1/2)");
    }
    const double m_floor = 2.0 * (1.0 / (1.0 - beta) + std::log(2.0));
    if (!(m_param > m_floor)) {
        throw InvalidParameters("M must exceed 2 (1/(1-beta) + ln 2) = " + std::to_string(m_floor));
    }
    const double half = (1.0 - beta) / 2.0;
    const double em = std::exp(-m_param);

    ConstructionBundle b;
    b.recipe = "rkl";
    b.parameters = {{"beta", beta}, {"M", m_param}, {"fact_m", 50.0}};
    b.qstar = DiscreteDistribution::make(kTripleLabels, {half, half, beta});
    b.q1 = DiscreteDistribution::make(kTripleLabels, {(1.0 - beta) * em, (1.0 - beta) * (1.0 - em), beta});
    b.q2 = DiscreteDistribution::make(kTripleLabels, {0.5, 0.5, 0.0});
    b.facts.push_back(exact("rkl_qstar_q2", "beta-restricted KL of q2 against qstar", 0.0));
    b.facts.push_back(lower("rkl_qstar_q1", "beta-restricted KL of q1 against qstar",
                            (1.0 - beta) * (m_param / 2.0 - std::log(2.0))));
    b.facts.push_back(exact("prob_x2_in_sample", "P[x2 appears in a sample of size 50]",
                            1.0 - std::pow(1.0 - beta, 50.0)));
    b.facts.push_back(exact("x2_mass_gap_q1_qstar", "q1(x2) - qstar(x2)", 0.0));
    verify_bundle(b);
    return b;
}

DiscreteDistribution delta_close_pair(const DiscreteDistribution& qstar, double delta, std::uint64_t seed) {
    if (!(delta > 0.0 && delta < 0.5)) {
        throw InvalidParameters("delta must lie in (0, 1/2)");
    }
    Rng rng(seed);
    for (int attempt = 0; attempt < 1000; ++attempt) {
        std::vector<double> probs(qstar.size());
        double sum = 0.0;
        for (std::size_t i = 0; i < qstar.size(); ++i) {
            const double factor = 1.0 - delta + 2.0 * delta * rng.next_double();
            probs[i] = factor * qstar.prob(i);
            sum += probs[i];
        }
        for (auto& p : probs) {
            p /= sum;
        }
        auto result = DiscreteDistribution::make(qstar.domain(), std::move(probs));
        if (check_delta_close(qstar, result, delta)) {
            return result;
        }
    }
    throw InvalidParameters("could not draw a ratio-banded neighbor; delta too tight");
}

} // namespace evalab
