#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "evalab/errors.hpp"

namespace evalab {

/// Ordered universe of point labels. Shared between distributions, datasets
/// and function families so domain checks are usually a pointer compare.
struct Domain {
    std::vector<std::string> labels;
    std::unordered_map<std::string, std::uint32_t> index;
};

using DomainPtr = std::shared_ptr<const Domain>;

/// Builds a domain, rejecting duplicate labels.
DomainPtr make_domain(std::vector<std::string> labels);

/// True when both point at the same universe or carry identical label lists.
bool same_domain(const DomainPtr& a, const DomainPtr& b);

/// Convenience: "x0", "x1", ... "x{n-1}".
std::vector<std::string> indexed_labels(std::string_view stem, std::size_t n);

/// A probability vector over a finite labeled domain. Immutable once built.
class DiscreteDistribution {
public:
    /// Validates and renormalizes. Rejects negative entries, duplicate labels
    /// and sums further than 1e-9 from one; after renormalization the sum is
    /// within 1e-12 of one.
    static DiscreteDistribution make(std::vector<std::string> labels, std::vector<double> probs);
    static DiscreteDistribution make(DomainPtr domain, std::vector<double> probs);

    const DomainPtr& domain() const { return domain_; }
    const std::vector<std::string>& labels() const { return domain_->labels; }
    const std::vector<double>& probs() const { return probs_; }
    double prob(std::size_t i) const { return probs_[i]; }
    std::size_t size() const { return probs_.size(); }
    std::optional<std::uint32_t> index_of(std::string_view label) const;

    /// Number of points with strictly positive mass.
    std::size_t support_size() const;

    /// Cumulative sums with the final entry pinned to exactly 1.
    const std::vector<double>& cdf() const { return cdf_; }

    bool operator==(const DiscreteDistribution& other) const;

private:
    DiscreteDistribution(DomainPtr domain, std::vector<double> probs, std::vector<double> cdf)
        : domain_(std::move(domain)), probs_(std::move(probs)), cdf_(std::move(cdf)) {}

    DomainPtr domain_;
    std::vector<double> probs_;
    std::vector<double> cdf_;
};

/// An ordered i.i.d. sample of domain points, stored as indices into a domain.
class Dataset {
public:
    static Dataset from_indices(DomainPtr domain, std::vector<std::uint32_t> points);
    /// Maps labels into the domain; throws UnknownLabel on a miss.
    static Dataset from_labels(const DomainPtr& domain, const std::vector<std::string>& points);

    const DomainPtr& domain() const { return domain_; }
    const std::vector<std::uint32_t>& points() const { return points_; }
    std::size_t size() const { return points_.size(); }

    /// Occurrence count per domain point, in domain order.
    std::vector<std::uint64_t> counts() const;

    std::vector<std::string> point_labels() const;

    bool operator==(const Dataset& other) const;

private:
    Dataset(DomainPtr domain, std::vector<std::uint32_t> points)
        : domain_(std::move(domain)), points_(std::move(points)) {}

    DomainPtr domain_;
    std::vector<std::uint32_t> points_;
};

/// A restriction set E, as a bitmask over the domain in label order.
class SubsetMask {
public:
    static SubsetMask from_labels(const DomainPtr& domain, const std::vector<std::string>& members);
    static SubsetMask from_bits(DomainPtr domain, std::uint64_t bits);

    const DomainPtr& domain() const { return domain_; }
    std::uint64_t bits() const { return bits_; }
    bool contains(std::size_t i) const { return (bits_ >> i) & 1ULL; }

private:
    SubsetMask(DomainPtr domain, std::uint64_t bits) : domain_(std::move(domain)), bits_(bits) {}

    DomainPtr domain_;
    std::uint64_t bits_;
};

// -- sampling ---------------------------------------------------------------

/// m i.i.d. draws by inverse CDF over the fixed label ordering. The same
/// (q, m, seed) always yields the same dataset.
Dataset sample(const DiscreteDistribution& q, std::size_t m, std::uint64_t seed);

/// Empirical distribution of S over the given domain; zero mass on unobserved
/// labels. Sample points outside the domain raise UnknownLabel.
DiscreteDistribution empirical_distribution(const Dataset& s, const std::vector<std::string>& domain_labels);
DiscreteDistribution empirical_distribution(const Dataset& s, const DomainPtr& domain);

// -- divergences ------------------------------------------------------------
//
// Conventions used throughout: natural logarithm, 0*ln(0) = 0, and
// p(x) > 0 = q(x) makes the one-sided divergences +infinity. Infinity is an
// ordinary value here; every finite value compares below it.

/// Total variation distance, (1/2) * sum |p - q|.
double tv(const DiscreteDistribution& p, const DiscreteDistribution& q);

/// KL(p || q) = sum p ln(p/q).
double kl(const DiscreteDistribution& p, const DiscreteDistribution& q);

/// Renyi divergence of order alpha > 1 with p in the ground-truth slot:
/// (1/(alpha-1)) ln sum p^alpha q^(1-alpha).
double renyi(const DiscreteDistribution& p, const DiscreteDistribution& q, double alpha);

/// Squared Hellinger distance, 1 - sum sqrt(p q).
double hellinger_sq(const DiscreteDistribution& p, const DiscreteDistribution& q);

/// Ground-truth mass of points whose likelihood ratio qstar/q reaches N:
/// sum over qstar(x) > 0 of qstar(x) * 1[qstar(x)/q(x) >= N]. The threshold
/// comparison is inclusive and a zero q(x) counts as an infinite ratio.
double coverage_profile(const DiscreteDistribution& q, const DiscreteDistribution& qstar, double n);

/// KL between the conditionals of p and q on E.
/// +infinity when E contains a point with p > 0 = q; ValidationError if p(E) = 0.
double kl_restricted_to(const DiscreteDistribution& p, const DiscreteDistribution& q, const SubsetMask& e);

/// Minimum of kl_restricted_to over every E within the support of p that
/// carries p-mass at least 1 - beta. Exhaustive; supports larger than 22
/// points raise SupportTooLarge.
double restricted_kl(const DiscreteDistribution& p, const DiscreteDistribution& q, double beta);

/// Also reports the minimizing subset.
struct RestrictedKlResult {
    double value;
    std::uint64_t subset_bits;
};
RestrictedKlResult restricted_kl_with_witness(const DiscreteDistribution& p, const DiscreteDistribution& q,
                                              double beta);

// -- assumption checks ------------------------------------------------------

/// Every support point of qstar carries mass at least gamma.
bool check_lower_bound(const DiscreteDistribution& qstar, double gamma);

/// |qstar(x)/q(x) - n| >= alpha on the support of qstar; an infinite ratio
/// satisfies the margin.
bool check_margin(const DiscreteDistribution& qstar, const DiscreteDistribution& q, double n, double alpha);

/// (1-delta) qstar(x) <= q(x) <= (1+delta) qstar(x) on the whole domain.
bool check_delta_close(const DiscreteDistribution& qstar, const DiscreteDistribution& q, double delta);

namespace caps {
inline constexpr std::size_t restricted_kl_support = 22;
inline constexpr std::size_t vc_domain = 24;
inline constexpr std::size_t fat_shattering_domain = 16;
inline constexpr std::size_t binary_enumeration_domain = 16;
} // namespace caps

} // namespace evalab
