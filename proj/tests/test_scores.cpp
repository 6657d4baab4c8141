#include <doctest.h>

#include <cmath>
#include <limits>

#include "evalab/rng.hpp"
#include "evalab/scores.hpp"
#include "support/oracles.hpp"

using namespace evalab;

namespace {
constexpr double inf = std::numeric_limits<double>::infinity();
}

TEST_CASE("nll score") {
    auto u = DiscreteDistribution::make({"a", "b"}, {0.5, 0.5});
    auto s = Dataset::from_labels(u.domain(), {"a", "b", "a"});
    CHECK(nll_score(u, s) == doctest::Approx(std::log(2.0)).epsilon(1e-14));

    auto point = DiscreteDistribution::make({"a", "b"}, {1.0, 0.0});
    CHECK(nll_score(point, s) == inf);
    CHECK(nll_score(point, Dataset::from_labels(point.domain(), {"a", "a"})) == 0.0);
}

TEST_CASE("nll gap to the empirical law is exactly a KL") {
    Rng rng(41);
    auto domain = make_domain(indexed_labels("x", 6));
    for (int i = 0; i < 20; ++i) {
        auto q = oracle::random_distribution(domain, rng);
        auto s = sample(q, 400, 1000 + i);
        auto qhat = empirical_distribution(s, domain);
        const double gap = nll_score(q, s) - nll_score(qhat, s);
        CHECK(gap == doctest::Approx(kl(qhat, q)).epsilon(1e-10));
    }
}

TEST_CASE("perplexity is the exponential of nll and preserves order") {
    auto u = DiscreteDistribution::make({"a", "b"}, {0.5, 0.5});
    auto s = Dataset::from_labels(u.domain(), {"a", "b"});
    CHECK(perplexity(u, s) == doctest::Approx(2.0).epsilon(1e-14));

    auto point = DiscreteDistribution::make({"a", "b"}, {1.0, 0.0});
    CHECK(perplexity(point, Dataset::from_labels(point.domain(), {"a"})) == 1.0);
    CHECK(perplexity(point, s) == inf);

    Rng rng(42);
    auto domain = make_domain(indexed_labels("x", 5));
    for (int i = 0; i < 20; ++i) {
        auto q1 = oracle::random_distribution(domain, rng);
        auto q2 = oracle::random_distribution(domain, rng);
        auto sm = sample(oracle::random_distribution(domain, rng), 50, 7000 + i);
        CHECK((nll_score(q1, sm) <= nll_score(q2, sm)) == (perplexity(q1, sm) <= perplexity(q2, sm)));
    }
}

TEST_CASE("empirical ipm score") {
    auto domain = make_domain(indexed_labels("x", 3));
    auto family = FunctionFamily::all_binary(domain);
    auto q = DiscreteDistribution::make(domain, {0.5, 0.25, 0.25});

    // a sample matching q exactly scores zero
    std::vector<std::string> exact;
    for (int i = 0; i < 2; ++i) {
        exact.push_back("x0");
    }
    exact.push_back("x1");
    exact.push_back("x2");
    CHECK(empirical_ipm_score(q, Dataset::from_labels(domain, exact), family) == 0.0);

    auto s = sample(q, 200, 3);
    auto qhat = empirical_distribution(s, domain);
    CHECK(empirical_ipm_score(q, s, family) == doctest::Approx(tv(q, qhat)).epsilon(1e-13));

    auto constant = FunctionFamily::make(domain, {{1.0, 1.0, 1.0}});
    CHECK(empirical_ipm_score(q, s, constant) <= 1e-15);

    // |d_F(q, qhat) - d_F(q, qstar)| <= d_F(qstar, qhat)
    Rng rng(44);
    for (int i = 0; i < 20; ++i) {
        auto model = oracle::random_distribution(domain, rng);
        auto qstar = oracle::random_distribution(domain, rng);
        auto sm = sample(qstar, 100, 9000 + i);
        auto emp = empirical_distribution(sm, domain);
        const double score = empirical_ipm_score(model, sm, family);
        const double truth = ipm_exact(model, qstar, family).value;
        CHECK(std::abs(score - truth) <= ipm_exact(qstar, emp, family).value + 1e-12);
    }
}

TEST_CASE("scheffe selection") {
    auto domain = make_domain(indexed_labels("x", 3));
    auto family = FunctionFamily::all_binary(domain);
    auto q1 = DiscreteDistribution::make(domain, {0.6, 0.2, 0.2});
    auto q2 = DiscreteDistribution::make(domain, {0.1, 0.45, 0.45});
    REQUIRE(tv(q1, q2) == doctest::Approx(0.5));

    // tie rule: identical candidates pick q1
    auto s0 = sample(q1, 10, 5);
    CHECK(scheffe_select(q1, q1, s0, family).winner == 0);

    // with the ground truth at q1 and m = 500, q1 wins nearly always
    int wins = 0;
    for (int t = 0; t < 200; ++t) {
        auto s = sample(q1, 500, 100 + t);
        wins += scheffe_select(q1, q2, s, family).winner == 0;
    }
    CHECK(wins >= 198);

    // the winner's witness-statistic gap never exceeds the loser's
    Rng rng(55);
    for (int t = 0; t < 50; ++t) {
        auto a = oracle::random_distribution(domain, rng);
        auto b = oracle::random_distribution(domain, rng);
        auto gt = oracle::random_distribution(domain, rng);
        auto s = sample(gt, 60, 4000 + t);
        auto sel = scheffe_select(a, b, s, family);
        const double mean = family.sample_mean(sel.witness_index, s);
        const double gap_a = std::abs(family.expectation(sel.witness_index, a) - mean);
        const double gap_b = std::abs(family.expectation(sel.witness_index, b) - mean);
        CHECK((sel.winner == 0 ? gap_a : gap_b) <= (sel.winner == 0 ? gap_b : gap_a));
    }
}

TEST_CASE("scheffe score") {
    auto domain = make_domain(indexed_labels("x", 3));
    auto family = FunctionFamily::all_binary(domain);
    auto q1 = DiscreteDistribution::make(domain, {0.6, 0.2, 0.2});
    auto q2 = DiscreteDistribution::make(domain, {0.1, 0.45, 0.45});
    auto other = DiscreteDistribution::make(domain, {0.3, 0.3, 0.4});

    auto s = sample(q1, 500, 8);
    CHECK_THROWS_AS(scheffe_score(other, q1, q2, s, family), CandidateNotInPair);

    // large sample, ground truth q1: winner is q1, so scores split 0 / d_F
    CHECK(scheffe_score(q1, q1, q2, s, family) == 0.0);
    CHECK(scheffe_score(q2, q1, q2, s, family) == doctest::Approx(tv(q1, q2)).epsilon(1e-13));
}

TEST_CASE("scheffe winner satisfies the 3 min + eps chain on random instances") {
    auto domain = make_domain(indexed_labels("x", 8));
    auto family = FunctionFamily::all_binary(domain);
    Rng rng(66);
    int good = 0;
    const int trials = 60;
    for (int t = 0; t < trials; ++t) {
        auto q1 = oracle::random_distribution(domain, rng);
        auto q2 = oracle::random_distribution(domain, rng);
        auto qstar = oracle::random_distribution(domain, rng);
        auto s = sample(qstar, 2000, 20000 + t);
        auto sel = scheffe_select(q1, q2, s, family);
        const auto& winner = sel.winner == 0 ? q1 : q2;
        const double d_win = ipm_exact(winner, qstar, family).value;
        const double d_min = std::min(ipm_exact(q1, qstar, family).value, ipm_exact(q2, qstar, family).value);
        good += d_win <= 3.0 * d_min + 0.1;
    }
    CHECK(good >= trials - 1);
}

TEST_CASE("coverage score") {
    auto domain = make_domain({"x0", "x1"});
    auto q1 = DiscreteDistribution::make(domain, {0.45, 0.55});

    // the empirical law itself has all ratios 1
    auto s = sample(q1, 100, 2);
    auto qhat = empirical_distribution(s, domain);
    CHECK(coverage_score(qhat, s, 2.0) == 0.0);

    // ten copies of x0: ratio 1/0.45 >= 2, so the whole mass counts
    auto all_x0 = Dataset::from_labels(domain, std::vector<std::string>(10, "x0"));
    CHECK(coverage_score(q1, all_x0, 2.0) == 1.0);

    // unobserved points contribute nothing even when the true ratio is high
    auto qstar2 = DiscreteDistribution::make(domain, {0.9, 0.1});
    auto only_x1 = Dataset::from_labels(domain, std::vector<std::string>(10, "x1"));
    CHECK(coverage_score(q1, only_x1, 2.0) == 0.0);

    // equals the plug-in coverage profile of the empirical law
    Rng rng(71);
    auto wide = make_domain(indexed_labels("x", 5));
    for (int t = 0; t < 20; ++t) {
        auto q = oracle::random_distribution(wide, rng);
        auto gt = oracle::random_distribution(wide, rng);
        auto sm = sample(gt, 100, 5000 + t);
        auto emp = empirical_distribution(sm, wide);
        for (double n : {1.0, 1.5, 2.0, 3.0}) {
            CHECK(coverage_score(q, sm, n) == doctest::Approx(coverage_profile(q, emp, n)).epsilon(1e-13));
        }
        CHECK(coverage_score(q, sm, 2.0) >= coverage_score(q, sm, 3.0) - 1e-15);
    }
    (void)qstar2;
}

TEST_CASE("fixed test score and metric") {
    auto domain = make_domain({"x1", "x2"});
    auto g = TestFunction::make(domain, {101.0, 1.0});
    auto q1 = DiscreteDistribution::make(domain, {0.1, 0.9}); // 1/sqrt(B), B = 100
    auto q2 = DiscreteDistribution::make(domain, {0.0, 1.0});

    CHECK(fixed_test_metric(q1, q1, g) == 0.0);
    // the 1/sqrt(B) mass on x1 moves the mean by sqrt(B) |g2| = 10
    CHECK(fixed_test_metric(q1, q2, g) == doctest::Approx(10.0).epsilon(1e-13));
    CHECK(fixed_test_metric(q1, q2, g) >= (100.0 - 1.0) / std::sqrt(100.0) * 1.0);

    auto pa = DiscreteDistribution::make(domain, {1.0, 0.0});
    auto pb = DiscreteDistribution::make(domain, {0.0, 1.0});
    CHECK(fixed_test_metric(pa, pb, g) == doctest::Approx(100.0).epsilon(1e-13));

    auto s = Dataset::from_labels(domain, {"x2", "x2", "x1", "x2"});
    auto constant = TestFunction::make(domain, {3.0, 3.0});
    CHECK(fixed_test_score(q1, s, constant) <= 1e-14);

    auto indicator = TestFunction::make(domain, {1.0, 0.0});
    CHECK(fixed_test_score(q1, s, indicator) == doctest::Approx(std::abs(0.25 - 0.1)).epsilon(1e-13));

    CHECK_THROWS_AS(TestFunction::make({"a"}, {inf}), ValidationError);
}

TEST_CASE("fixed test score concentrates for bounded g") {
    // Hoeffding at B = 1: m = ceil(ln(2/0.05) / (2 * 0.1^2)) = 185
    auto domain = make_domain(indexed_labels("x", 6));
    Rng rng(81);
    auto qstar = oracle::random_distribution(domain, rng);
    auto q = oracle::random_distribution(domain, rng);
    std::vector<double> gvals(6);
    for (auto& v : gvals) {
        v = rng.next_double();
    }
    auto g = TestFunction::make(domain, gvals);
    const double truth = fixed_test_metric(q, qstar, g);
    int exceed = 0;
    for (int t = 0; t < 500; ++t) {
        auto s = sample(qstar, 185, 30000 + t);
        exceed += std::abs(fixed_test_score(q, s, g) - truth) > 0.1;
    }
    CHECK(exceed <= 25); // delta = 0.05 of 500
}

TEST_CASE("score specs evaluate through the common entry point") {
    auto domain = make_domain(indexed_labels("x", 3));
    auto family = FunctionFamily::all_binary(domain);
    auto q1 = DiscreteDistribution::make(domain, {0.6, 0.2, 0.2});
    auto q2 = DiscreteDistribution::make(domain, {0.2, 0.6, 0.2});
    auto s = sample(q1, 50, 17);

    CHECK(evaluate_score(ScoreSpec::nll(), q1, s, q1, q2) == nll_score(q1, s));
    CHECK(evaluate_score(ScoreSpec::empirical_ipm(family), q1, s, q1, q2) ==
          empirical_ipm_score(q1, s, family));
    CHECK(evaluate_score(ScoreSpec::scheffe_ipm(family), q1, s, q1, q2) ==
          scheffe_score(q1, q1, q2, s, family));
    CHECK(evaluate_score(ScoreSpec::coverage(2.0), q1, s, q1, q2) == coverage_score(q1, s, 2.0));
    auto g = TestFunction::make(domain, {1.0, 2.0, 3.0});
    CHECK(evaluate_score(ScoreSpec::fixed_test(g), q1, s, q1, q2) == fixed_test_score(q1, s, g));
}
