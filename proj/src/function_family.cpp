#include "evalab/function_family.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

namespace evalab {

namespace {

void require_same_domain(const DomainPtr& a, const DomainPtr& b) {
    if (!same_domain(a, b)) {
        throw DomainMismatch("operands are defined over different domains");
    }
}

std::size_t floor_log2(std::size_t x) {
    std::size_t k = 0;
    while ((std::size_t{1} << (k + 1)) <= x) {
        ++k;
    }
    return k;
}

/// Calls fn with each k-combination of {0..n-1} until fn returns true.
template <typename Fn>
bool any_combination(std::size_t n, std::size_t k, Fn&& fn) {
    if (k == 0 || k > n) {
        return false;
    }
    std::vector<std::size_t> c(k);
    for (std::size_t i = 0; i < k; ++i) {
        c[i] = i;
    }
    while (true) {
        if (fn(c)) {
            return true;
        }
        std::size_t i = k;
        while (i > 0 && c[i - 1] == n - k + (i - 1)) {
            --i;
        }
        if (i == 0) {
            return false;
        }
        ++c[i - 1];
        for (std::size_t j = i; j < k; ++j) {
            c[j] = c[j - 1] + 1;
        }
    }
}

} // namespace

FunctionFamily FunctionFamily::make(std::vector<std::string> labels, std::vector<std::vector<double>> rows) {
    return make(make_domain(std::move(labels)), std::move(rows));
}

FunctionFamily FunctionFamily::make(DomainPtr domain, std::vector<std::vector<double>> rows) {
    const std::size_t n = domain->labels.size();
    if (rows.empty()) {
        throw ValidationError("a function family needs at least one member");
    }
    for (const auto& row : rows) {
        if (row.size() != n) {
            throw ValidationError("family row length does not match the domain");
        }
    }
    {
        auto sorted = rows;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
            throw ValidationError("duplicate member function");
        }
    }
    bool binary = true;
    std::vector<double> flat;
    flat.reserve(rows.size() * n);
    for (const auto& row : rows) {
        for (double v : row) {
            if (!(v >= 0.0 && v <= 1.0)) {
                throw ValidationError("family values must lie in [0, 1]");
            }
            binary = binary && (v == 0.0 || v == 1.0);
            flat.push_back(v);
        }
    }
    return FunctionFamily(std::move(domain), std::move(flat), rows.size(), binary);
}

FunctionFamily FunctionFamily::all_binary(std::vector<std::string> labels) {
    return all_binary(make_domain(std::move(labels)));
}

FunctionFamily FunctionFamily::all_binary(DomainPtr domain) {
    const std::size_t n = domain->labels.size();
    if (n > caps::binary_enumeration_domain) {
        throw TooManyFunctions("all-binary family capped at " +
                               std::to_string(caps::binary_enumeration_domain) + " points");
    }
    const std::size_t count = std::size_t{1} << n;
    std::vector<double> flat(count * n);
    for (std::size_t j = 0; j < count; ++j) {
        for (std::size_t c = 0; c < n; ++c) {
            flat[j * n + c] = static_cast<double>((j >> (n - 1 - c)) & 1U);
        }
    }
    return FunctionFamily(std::move(domain), std::move(flat), count, true);
}

FunctionFamily FunctionFamily::thresholds(std::vector<std::string> labels) {
    const std::size_t n = labels.size();
    std::vector<std::vector<double>> rows;
    rows.reserve(n + 1);
    // 1[position >= t]; emitted for t = n down to 0, which is lexicographic.
    for (std::size_t t = n + 1; t-- > 0;) {
        std::vector<double> row(n, 0.0);
        for (std::size_t c = t; c < n; ++c) {
            row[c] = 1.0;
        }
        rows.push_back(std::move(row));
    }
    return make(std::move(labels), std::move(rows));
}

FunctionFamily FunctionFamily::singletons(std::vector<std::string> labels) {
    const std::size_t n = labels.size();
    std::vector<std::vector<double>> rows;
    rows.reserve(n);
    for (std::size_t i = n; i-- > 0;) {
        std::vector<double> row(n, 0.0);
        row[i] = 1.0;
        rows.push_back(std::move(row));
    }
    return make(std::move(labels), std::move(rows));
}

FunctionFamily FunctionFamily::no_taxonomy(std::size_t k, std::size_t n_k) {
    if (k < 1 || n_k < 1) {
        throw ValidationError("block index and block size must be at least 1");
    }
    if (n_k > caps::binary_enumeration_domain) {
        throw TooManyFunctions("taxonomy block capped at " +
                               std::to_string(caps::binary_enumeration_domain) + " points");
    }
    auto domain = make_domain(indexed_labels("x", n_k));
    const std::size_t count = std::size_t{1} << n_k;
    const double high = 1.0 / static_cast<double>(k);
    std::vector<double> flat(count * n_k);
    for (std::size_t j = 0; j < count; ++j) {
        for (std::size_t c = 0; c < n_k; ++c) {
            flat[j * n_k + c] = ((j >> (n_k - 1 - c)) & 1U) ? high : 0.0;
        }
    }
    return FunctionFamily(std::move(domain), std::move(flat), count, k == 1);
}

std::vector<std::vector<double>> FunctionFamily::row_vectors() const {
    std::vector<std::vector<double>> out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) {
        out[r].assign(row(r), row(r) + stride_);
    }
    return out;
}

double FunctionFamily::expectation(std::size_t r, const DiscreteDistribution& d) const {
    require_same_domain(domain_, d.domain());
    const double* vals = row(r);
    double acc = 0.0;
    for (std::size_t c = 0; c < stride_; ++c) {
        acc += d.prob(c) * vals[c];
    }
    return acc;
}

double FunctionFamily::sample_mean(std::size_t r, const Dataset& s) const {
    require_same_domain(domain_, s.domain());
    const double* vals = row(r);
    const auto counts = s.counts();
    double acc = 0.0;
    for (std::size_t c = 0; c < stride_; ++c) {
        acc += static_cast<double>(counts[c]) * vals[c];
    }
    return acc / static_cast<double>(s.size());
}

FunctionFamily FunctionFamily::with_rows(std::vector<std::vector<double>> extra) const {
    auto rows = row_vectors();
    for (auto& r : extra) {
        rows.push_back(std::move(r));
    }
    return make(domain_, std::move(rows));
}

IpmResult ipm_exact(const DiscreteDistribution& p, const DiscreteDistribution& q, const FunctionFamily& f) {
    require_same_domain(p.domain(), q.domain());
    require_same_domain(p.domain(), f.domain());
    const std::size_t n = f.domain_size();
    std::vector<double> diff(n);
    for (std::size_t c = 0; c < n; ++c) {
        diff[c] = p.prob(c) - q.prob(c);
    }
    double best = -1.0;
    std::size_t witness = 0;
    for (std::size_t r = 0; r < f.members(); ++r) {
        const double* vals = f.row(r);
        double acc = 0.0;
        for (std::size_t c = 0; c < n; ++c) {
            acc += diff[c] * vals[c];
        }
        const double gap = std::abs(acc);
        if (gap > best) {
            best = gap;
            witness = r;
        }
    }
    return {best, witness};
}

std::size_t vc_dimension(const FunctionFamily& f) {
    if (!f.is_binary()) {
        throw NotBinary("VC dimension is defined for binary families only");
    }
    const std::size_t n = f.domain_size();
    if (n > caps::vc_domain) {
        throw DomainTooLarge("VC search capped at " + std::to_string(caps::vc_domain) + " points");
    }
    const std::size_t kmax = std::min(n, floor_log2(f.members()));
    std::vector<std::uint32_t> stamp;
    std::uint32_t generation = 0;

    for (std::size_t k = kmax; k >= 1; --k) {
        const std::size_t patterns = std::size_t{1} << k;
        stamp.assign(patterns, 0);
        generation = 0;
        const bool found = any_combination(n, k, [&](const std::vector<std::size_t>& cols) {
            ++generation;
            std::size_t distinct = 0;
            for (std::size_t r = 0; r < f.members(); ++r) {
                std::size_t pat = 0;
                for (std::size_t i = 0; i < k; ++i) {
                    pat |= static_cast<std::size_t>(f.value(r, cols[i]) == 1.0) << i;
                }
                if (stamp[pat] != generation) {
                    stamp[pat] = generation;
                    if (++distinct == patterns) {
                        return true;
                    }
                }
            }
            return false;
        });
        if (found) {
            return k;
        }
    }
    return 0;
}

namespace {

// Dynamic bitset over family members, for the fat-shattering search.
using MemberMask = std::vector<std::uint64_t>;

bool intersect_nonempty(const MemberMask& a, const MemberMask& b, MemberMask& out) {
    bool any = false;
    for (std::size_t w = 0; w < a.size(); ++w) {
        out[w] = a[w] & b[w];
        any = any || out[w] != 0;
    }
    return any;
}

struct SplitPair {
    MemberMask high; // members forced up by label +1
    MemberMask low;  // members forced down by label 0
};

// Depth-first search over threshold choices for a fixed candidate subset.
// `branches` holds, per labeling prefix, the member set still compatible.
bool shatterable(const std::vector<const std::vector<SplitPair>*>& point_splits, std::size_t depth,
                 const std::vector<MemberMask>& branches) {
    if (depth == point_splits.size()) {
        return true;
    }
    std::vector<MemberMask> next(branches.size() * 2);
    for (const auto& split : *point_splits[depth]) {
        bool ok = true;
        for (std::size_t b = 0; b < branches.size() && ok; ++b) {
            next[2 * b].assign(branches[b].size(), 0);
            next[2 * b + 1].assign(branches[b].size(), 0);
            ok = intersect_nonempty(branches[b], split.high, next[2 * b]) &&
                 intersect_nonempty(branches[b], split.low, next[2 * b + 1]);
        }
        if (ok && shatterable(point_splits, depth + 1, next)) {
            return true;
        }
    }
    return false;
}

} // namespace

std::size_t fat_shattering_dim(const FunctionFamily& f, double gamma) {
    if (!(gamma > 0.0 && gamma <= 0.5)) {
        throw GammaOutOfRange("gamma must lie in (0, 1/2]");
    }
    const std::size_t n = f.domain_size();
    if (n > caps::fat_shattering_domain) {
        throw DomainTooLarge("fat-shattering search capped at " +
                             std::to_string(caps::fat_shattering_domain) + " points");
    }
    const std::size_t members = f.members();
    const std::size_t words = (members + 63) / 64;

    // Candidate splits per point. A threshold r is feasible for the attained
    // values (vl, vh) iff vh - vl >= 2*gamma; only the maximal split per
    // upper value matters, so each point contributes at most one split per
    // distinct attained value.
    std::vector<std::vector<SplitPair>> splits(n);
    for (std::size_t c = 0; c < n; ++c) {
        std::vector<double> attained;
        attained.reserve(members);
        for (std::size_t r = 0; r < members; ++r) {
            attained.push_back(f.value(r, c));
        }
        std::sort(attained.begin(), attained.end());
        attained.erase(std::unique(attained.begin(), attained.end()), attained.end());
        for (std::size_t hi = 0; hi < attained.size(); ++hi) {
            const double vh = attained[hi];
            // largest attained value still separated from vh by 2*gamma
            double vl = -1.0;
            for (std::size_t lo = attained.size(); lo-- > 0;) {
                if (vh - attained[lo] >= 2.0 * gamma) {
                    vl = attained[lo];
                    break;
                }
            }
            if (vl < 0.0) {
                continue;
            }
            SplitPair sp{MemberMask(words, 0), MemberMask(words, 0)};
            for (std::size_t r = 0; r < members; ++r) {
                const double v = f.value(r, c);
                if (v >= vh) {
                    sp.high[r / 64] |= 1ULL << (r % 64);
                } else if (v <= vl) {
                    sp.low[r / 64] |= 1ULL << (r % 64);
                }
            }
            splits[c].push_back(std::move(sp));
        }
    }

    std::vector<std::size_t> usable;
    for (std::size_t c = 0; c < n; ++c) {
        if (!splits[c].empty()) {
            usable.push_back(c);
        }
    }
    if (usable.empty()) {
        return 0;
    }

    MemberMask full(words, ~0ULL);
    if (members % 64 != 0) {
        full.back() = (1ULL << (members % 64)) - 1;
    }

    const std::size_t kmax = std::min(usable.size(), floor_log2(members));
    for (std::size_t k = kmax; k >= 1; --k) {
        const bool found = any_combination(usable.size(), k, [&](const std::vector<std::size_t>& pick) {
            std::vector<const std::vector<SplitPair>*> point_splits(k);
            for (std::size_t i = 0; i < k; ++i) {
                point_splits[i] = &splits[usable[pick[i]]];
            }
            return shatterable(point_splits, 0, {full});
        });
        if (found) {
            return k;
        }
    }
    return 0;
}

} // namespace evalab
