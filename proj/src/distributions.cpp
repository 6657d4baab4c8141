#include "evalab/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "evalab/rng.hpp"

namespace evalab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kInputSlack = 1e-9;

void require_same_domain(const DomainPtr& a, const DomainPtr& b) {
    if (!same_domain(a, b)) {
        throw DomainMismatch("operands are defined over different domains");
    }
}

} // namespace

DomainPtr make_domain(std::vector<std::string> labels) {
    auto dom = std::make_shared<Domain>();
    dom->index.reserve(labels.size());
    for (std::uint32_t i = 0; i < labels.size(); ++i) {
        auto [it, fresh] = dom->index.emplace(labels[i], i);
        if (!fresh) {
            throw DuplicateLabel("duplicate domain label: " + labels[i]);
        }
    }
    dom->labels = std::move(labels);
    return dom;
}

bool same_domain(const DomainPtr& a, const DomainPtr& b) {
    return a == b || a->labels == b->labels;
}

std::vector<std::string> indexed_labels(std::string_view stem, std::size_t n) {
    std::vector<std::string> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back(std::string(stem) + std::to_string(i));
    }
    return out;
}

DiscreteDistribution DiscreteDistribution::make(std::vector<std::string> labels, std::vector<double> probs) {
    return make(make_domain(std::move(labels)), std::move(probs));
}

DiscreteDistribution DiscreteDistribution::make(DomainPtr domain, std::vector<double> probs) {
    if (domain->labels.size() != probs.size()) {
        throw ValidationError("labels and probs differ in length");
    }
    if (probs.empty()) {
        throw ValidationError("a distribution needs at least one point");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (!(probs[i] >= 0.0)) { // also rejects NaN
            throw NegativeProbability("negative probability at label " + domain->labels[i]);
        }
        sum += probs[i];
    }
    if (std::abs(sum - 1.0) > kInputSlack) {
        throw NotNormalized("probabilities sum to " + std::to_string(sum));
    }
    for (auto& p : probs) {
        p /= sum;
    }
    std::vector<double> cdf(probs.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        acc += probs[i];
        cdf[i] = acc;
    }
    cdf.back() = 1.0;
    return DiscreteDistribution(std::move(domain), std::move(probs), std::move(cdf));
}

std::optional<std::uint32_t> DiscreteDistribution::index_of(std::string_view label) const {
    auto it = domain_->index.find(std::string(label));
    if (it == domain_->index.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::size_t DiscreteDistribution::support_size() const {
    return static_cast<std::size_t>(std::count_if(probs_.begin(), probs_.end(), [](double p) { return p > 0.0; }));
}

bool DiscreteDistribution::operator==(const DiscreteDistribution& other) const {
    return same_domain(domain_, other.domain_) && probs_ == other.probs_;
}

Dataset Dataset::from_indices(DomainPtr domain, std::vector<std::uint32_t> points) {
    if (points.empty()) {
        throw ValidationError("a dataset needs at least one point");
    }
    for (auto p : points) {
        if (p >= domain->labels.size()) {
            throw UnknownLabel("dataset point index out of range");
        }
    }
    return Dataset(std::move(domain), std::move(points));
}

Dataset Dataset::from_labels(const DomainPtr& domain, const std::vector<std::string>& points) {
    std::vector<std::uint32_t> idx;
    idx.reserve(points.size());
    for (const auto& label : points) {
        auto it = domain->index.find(label);
        if (it == domain->index.end()) {
            throw UnknownLabel("sample point not in domain: " + label);
        }
        idx.push_back(it->second);
    }
    return from_indices(domain, std::move(idx));
}

std::vector<std::uint64_t> Dataset::counts() const {
    std::vector<std::uint64_t> c(domain_->labels.size(), 0);
    for (auto p : points_) {
        ++c[p];
    }
    return c;
}

std::vector<std::string> Dataset::point_labels() const {
    std::vector<std::string> out;
    out.reserve(points_.size());
    for (auto p : points_) {
        out.push_back(domain_->labels[p]);
    }
    return out;
}

bool Dataset::operator==(const Dataset& other) const {
    return same_domain(domain_, other.domain_) && points_ == other.points_;
}

SubsetMask SubsetMask::from_labels(const DomainPtr& domain, const std::vector<std::string>& members) {
    std::uint64_t bits = 0;
    for (const auto& label : members) {
        auto it = domain->index.find(label);
        if (it == domain->index.end()) {
            throw UnknownLabel("subset member not in domain: " + label);
        }
        bits |= 1ULL << it->second;
    }
    return SubsetMask(domain, bits);
}

SubsetMask SubsetMask::from_bits(DomainPtr domain, std::uint64_t bits) {
    if (domain->labels.size() < 64 && (bits >> domain->labels.size()) != 0) {
        throw ValidationError("subset bits outside the domain");
    }
    return SubsetMask(std::move(domain), bits);
}

Dataset sample(const DiscreteDistribution& q, std::size_t m, std::uint64_t seed) {
    if (m < 1) {
        throw ValidationError("sample size must be at least 1");
    }
    Rng rng(seed);
    const auto& cdf = q.cdf();
    std::vector<std::uint32_t> points(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double u = rng.next_double();
        auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        points[i] = static_cast<std::uint32_t>(it - cdf.begin());
    }
    return Dataset::from_indices(q.domain(), std::move(points));
}

DiscreteDistribution empirical_distribution(const Dataset& s, const DomainPtr& domain) {
    const double m = static_cast<double>(s.size());
    std::vector<double> probs(domain->labels.size(), 0.0);
    if (same_domain(s.domain(), domain)) {
        for (auto p : s.points()) {
            probs[p] += 1.0;
        }
    } else {
        for (auto p : s.points()) {
            const auto& label = s.domain()->labels[p];
            auto it = domain->index.find(label);
            if (it == domain->index.end()) {
                throw UnknownLabel("sample point not in domain: " + label);
            }
            probs[it->second] += 1.0;
        }
    }
    for (auto& p : probs) {
        p /= m;
    }
    return DiscreteDistribution::make(domain, std::move(probs));
}

DiscreteDistribution empirical_distribution(const Dataset& s, const std::vector<std::string>& domain_labels) {
    if (s.domain()->labels == domain_labels) {
        return empirical_distribution(s, s.domain());
    }
    return empirical_distribution(s, make_domain(domain_labels));
}

double tv(const DiscreteDistribution& p, const DiscreteDistribution& q) {
    require_same_domain(p.domain(), q.domain());
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        acc += std::abs(p.prob(i) - q.prob(i));
    }
    return 0.5 * acc;
}

double kl(const DiscreteDistribution& p, const DiscreteDistribution& q) {
    require_same_domain(p.domain(), q.domain());
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double pi = p.prob(i);
        if (pi == 0.0) {
            continue; // 0 ln 0 = 0
        }
        const double qi = q.prob(i);
        if (qi == 0.0) {
            return kInf;
        }
        acc += pi * std::log(pi / qi);
    }
    return std::max(acc, 0.0);
}

double renyi(const DiscreteDistribution& p, const DiscreteDistribution& q, double alpha) {
    if (!(alpha > 1.0)) {
        throw AlphaOutOfRange("Renyi order must exceed 1");
    }
    require_same_domain(p.domain(), q.domain());
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double pi = p.prob(i);
        if (pi == 0.0) {
            continue;
        }
        const double qi = q.prob(i);
        if (qi == 0.0) {
            return kInf;
        }
        acc += std::pow(pi, alpha) * std::pow(qi, 1.0 - alpha);
    }
    return std::max(std::log(acc) / (alpha - 1.0), 0.0);
}

double hellinger_sq(const DiscreteDistribution& p, const DiscreteDistribution& q) {
    require_same_domain(p.domain(), q.domain());
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        acc += std::sqrt(p.prob(i) * q.prob(i));
    }
    return std::clamp(1.0 - acc, 0.0, 1.0);
}

double coverage_profile(const DiscreteDistribution& q, const DiscreteDistribution& qstar, double n) {
    if (!(n >= 1.0)) {
        throw ValidationError("coverage threshold must be at least 1");
    }
    require_same_domain(q.domain(), qstar.domain());
    double acc = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) {
        const double star = qstar.prob(i);
        if (star == 0.0) {
            continue;
        }
        const double ratio = q.prob(i) == 0.0 ? kInf : star / q.prob(i);
        if (ratio >= n) {
            acc += star;
        }
    }
    return acc;
}

namespace {

// Shared by kl_restricted_to and the exhaustive search. Returns the
// restricted KL of the conditionals given the subset's p-mass, q-mass and
// sum of p ln(p/q) over the subset. The identity:
//   KL(p(.|E) || q(.|E)) = (1/P) sum_E p ln(p/q) + ln(Q/P).
double conditional_kl_from_sums(double p_mass, double q_mass, double plogpq) {
    if (std::isinf(plogpq)) {
        return kInf;
    }
    if (q_mass == 0.0) {
        return kInf;
    }
    return std::max(plogpq / p_mass + std::log(q_mass / p_mass), 0.0);
}

} // namespace

double kl_restricted_to(const DiscreteDistribution& p, const DiscreteDistribution& q, const SubsetMask& e) {
    require_same_domain(p.domain(), q.domain());
    require_same_domain(p.domain(), e.domain());
    double p_mass = 0.0;
    double q_mass = 0.0;
    double plogpq = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (!e.contains(i)) {
            continue;
        }
        const double pi = p.prob(i);
        const double qi = q.prob(i);
        p_mass += pi;
        q_mass += qi;
        if (pi > 0.0) {
            if (qi == 0.0) {
                plogpq = kInf;
            } else if (!std::isinf(plogpq)) {
                plogpq += pi * std::log(pi / qi);
            }
        }
    }
    if (p_mass == 0.0) {
        throw ValidationError("restriction set carries no p-mass");
    }
    return conditional_kl_from_sums(p_mass, q_mass, plogpq);
}

RestrictedKlResult restricted_kl_with_witness(const DiscreteDistribution& p, const DiscreteDistribution& q,
                                              double beta) {
    if (!(beta > 0.0 && beta < 0.5)) {
        throw ValidationError("beta must lie in (0, 1/2)");
    }
    require_same_domain(p.domain(), q.domain());

    std::vector<std::uint32_t> support;
    for (std::uint32_t i = 0; i < p.size(); ++i) {
        if (p.prob(i) > 0.0) {
            support.push_back(i);
        }
    }
    const std::size_t n = support.size();
    if (n > caps::restricted_kl_support) {
        throw SupportTooLarge("restricted KL search capped at support size " +
                              std::to_string(caps::restricted_kl_support) + ", got " + std::to_string(n));
    }

    // Per-point pieces over the support, so each subset costs O(n).
    std::vector<double> pv(n), qv(n), term(n);
    for (std::size_t j = 0; j < n; ++j) {
        pv[j] = p.prob(support[j]);
        qv[j] = q.prob(support[j]);
        term[j] = qv[j] == 0.0 ? kInf : pv[j] * std::log(pv[j] / qv[j]);
    }

    const double need = 1.0 - beta - 1e-12;
    double best = kInf;
    std::uint64_t best_bits = 0;
    const std::uint64_t top = 1ULL << n;
    for (std::uint64_t mask = 1; mask < top; ++mask) {
        double p_mass = 0.0;
        double q_mass = 0.0;
        double plogpq = 0.0;
        for (std::uint64_t rest = mask; rest != 0; rest &= rest - 1) {
            const auto j = static_cast<std::size_t>(std::countr_zero(rest));
            p_mass += pv[j];
            q_mass += qv[j];
            plogpq += term[j]; // inf propagates
        }
        if (p_mass < need) {
            continue;
        }
        const double value = conditional_kl_from_sums(p_mass, q_mass, plogpq);
        if (value < best) {
            best = value;
            // Translate back to domain positions.
            std::uint64_t bits = 0;
            for (std::uint64_t rest = mask; rest != 0; rest &= rest - 1) {
                bits |= 1ULL << support[static_cast<std::size_t>(std::countr_zero(rest))];
            }
            best_bits = bits;
        }
    }
    return {best, best_bits};
}

double restricted_kl(const DiscreteDistribution& p, const DiscreteDistribution& q, double beta) {
    return restricted_kl_with_witness(p, q, beta).value;
}

bool check_lower_bound(const DiscreteDistribution& qstar, double gamma) {
    if (!(gamma > 0.0 && gamma <= 1.0)) {
        throw ValidationError("gamma must lie in (0, 1]");
    }
    for (std::size_t i = 0; i < qstar.size(); ++i) {
        const double p = qstar.prob(i);
        if (p > 0.0 && p < gamma) {
            return false;
        }
    }
    return true;
}

bool check_margin(const DiscreteDistribution& qstar, const DiscreteDistribution& q, double n, double alpha) {
    if (!(alpha > 0.0)) {
        throw ValidationError("margin alpha must be positive");
    }
    require_same_domain(qstar.domain(), q.domain());
    for (std::size_t i = 0; i < qstar.size(); ++i) {
        const double star = qstar.prob(i);
        if (star == 0.0) {
            continue;
        }
        const double ratio = q.prob(i) == 0.0 ? kInf : star / q.prob(i);
        if (!(std::abs(ratio - n) >= alpha)) {
            return false;
        }
    }
    return true;
}

bool check_delta_close(const DiscreteDistribution& qstar, const DiscreteDistribution& q, double delta) {
    if (!(delta > 0.0 && delta < 0.5)) {
        throw ValidationError("delta must lie in (0, 1/2)");
    }
    require_same_domain(qstar.domain(), q.domain());
    for (std::size_t i = 0; i < qstar.size(); ++i) {
        const double star = qstar.prob(i);
        const double qi = q.prob(i);
        if (qi < (1.0 - delta) * star || qi > (1.0 + delta) * star) {
            return false;
        }
    }
    return true;
}

} // namespace evalab
