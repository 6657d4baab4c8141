#pragma once

#include <cstddef>
#include <vector>

#include "evalab/distribution.hpp"

namespace evalab {

/// A tabular family of [0,1]-valued test functions: one row per member
/// function, one column per domain point.
class FunctionFamily {
public:
    /// Validates entries in [0,1], at least one row, no duplicate rows.
    static FunctionFamily make(std::vector<std::string> labels, std::vector<std::vector<double>> rows);
    static FunctionFamily make(DomainPtr domain, std::vector<std::vector<double>> rows);

    /// All 2^n binary functions on the domain, rows in lexicographic order
    /// (leftmost column most significant). Domain capped at 16 points.
    static FunctionFamily all_binary(std::vector<std::string> labels);
    static FunctionFamily all_binary(DomainPtr domain);

    /// Step functions 1[position >= t] for every cut point, n+1 rows
    /// including the all-ones and all-zeros rows.
    static FunctionFamily thresholds(std::vector<std::string> labels);

    /// One indicator per domain point, n rows.
    static FunctionFamily singletons(std::vector<std::string> labels);

    /// Block k of the taxonomy-defeating class: every binary function on a
    /// fresh n_k-point domain, scaled to take values in {0, 1/k}.
    static FunctionFamily no_taxonomy(std::size_t k, std::size_t n_k);

    const DomainPtr& domain() const { return domain_; }
    std::size_t domain_size() const { return domain_->labels.size(); }
    std::size_t members() const { return rows_; }
    bool is_binary() const { return is_binary_; }

    double value(std::size_t row, std::size_t col) const { return values_[row * stride_ + col]; }
    const double* row(std::size_t r) const { return values_.data() + r * stride_; }
    std::vector<std::vector<double>> row_vectors() const;

    /// Expectation of one member under a distribution on the same domain.
    double expectation(std::size_t row, const DiscreteDistribution& d) const;

    /// Sample mean of one member over a dataset on the same domain.
    double sample_mean(std::size_t row, const Dataset& s) const;

    /// New family with extra member rows appended.
    FunctionFamily with_rows(std::vector<std::vector<double>> extra) const;

private:
    FunctionFamily(DomainPtr domain, std::vector<double> values, std::size_t rows, bool is_binary)
        : domain_(std::move(domain)),
          values_(std::move(values)),
          rows_(rows),
          stride_(domain_->labels.size()),
          is_binary_(is_binary) {}

    DomainPtr domain_;
    std::vector<double> values_; // row-major, rows_ x stride_
    std::size_t rows_;
    std::size_t stride_;
    bool is_binary_;
};

struct IpmResult {
    double value;
    std::size_t witness_index; // lowest maximizing row
};

/// Exact IPM: max over member functions of |E_p phi - E_q phi|.
IpmResult ipm_exact(const DiscreteDistribution& p, const DiscreteDistribution& q, const FunctionFamily& f);

/// Size of the largest shattered subset of the domain (binary families only,
/// domain capped at 24 points).
std::size_t vc_dimension(const FunctionFamily& f);

/// Size of the largest gamma-shattered subset, with per-point thresholds
/// drawn from attained values and their pairwise midpoints (complete for
/// tabular families). Domain capped at 16 points; gamma in (0, 1/2].
std::size_t fat_shattering_dim(const FunctionFamily& f, double gamma);

} // namespace evalab
