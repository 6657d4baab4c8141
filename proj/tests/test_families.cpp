#include <doctest.h>

#include <cmath>

#include "evalab/function_family.hpp"
#include "evalab/rng.hpp"
#include "support/oracles.hpp"

using namespace evalab;

TEST_CASE("builders produce the documented tables") {
    auto all2 = FunctionFamily::all_binary({"a", "b"});
    CHECK(all2.members() == 4);
    CHECK(all2.is_binary());
    CHECK(all2.row_vectors() ==
          std::vector<std::vector<double>>{{0, 0}, {0, 1}, {1, 0}, {1, 1}});

    auto th = FunctionFamily::thresholds(indexed_labels("x", 5));
    CHECK(th.members() == 6);
    CHECK(th.row_vectors().front() == std::vector<double>(5, 0.0));
    CHECK(th.row_vectors().back() == std::vector<double>(5, 1.0));

    auto single = FunctionFamily::singletons(indexed_labels("x", 4));
    CHECK(single.members() == 4);

    auto nt = FunctionFamily::no_taxonomy(2, 3);
    CHECK(nt.members() == 8);
    CHECK_FALSE(nt.is_binary());
    for (const auto& row : nt.row_vectors()) {
        for (double v : row) {
            CHECK((v == 0.0 || v == 0.5));
        }
    }
    // k = 1 reduces to the plain binary class
    CHECK(FunctionFamily::no_taxonomy(1, 2).row_vectors() == all2.row_vectors());

    auto tiny = FunctionFamily::no_taxonomy(4, 1);
    CHECK(tiny.members() == 2);
    CHECK(fat_shattering_dim(tiny, 0.2) == 0); // 1/(2k) = 0.125 < gamma

    CHECK_THROWS_AS(FunctionFamily::all_binary(indexed_labels("x", 17)), TooManyFunctions);
    CHECK_THROWS_AS(FunctionFamily::no_taxonomy(2, 17), TooManyFunctions);
    CHECK_THROWS_AS(FunctionFamily::make({"a"}, {{0.5}, {0.5}}), ValidationError);
    CHECK_THROWS_AS(FunctionFamily::make({"a"}, {{1.5}}), ValidationError);
}

TEST_CASE("ipm_exact against closed forms") {
    auto domain = make_domain(indexed_labels("x", 3));
    Rng rng(21);
    auto p = oracle::random_distribution(domain, rng);
    auto q = oracle::random_distribution(domain, rng);

    // constants cancel up to the renormalization residue of the two sums
    auto constant = FunctionFamily::make(domain, {{1.0, 1.0, 1.0}});
    CHECK(ipm_exact(p, q, constant).value <= 1e-15);

    auto all3 = FunctionFamily::all_binary(domain);
    CHECK(ipm_exact(p, q, all3).value == doctest::Approx(tv(p, q)).epsilon(1e-14));

    auto single = FunctionFamily::singletons(indexed_labels("x", 3));
    double coord = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
        coord = std::max(coord, std::abs(p.prob(i) - q.prob(i)));
    }
    CHECK(ipm_exact(p, q, single).value == doctest::Approx(coord).epsilon(1e-14));

    CHECK_THROWS_AS(ipm_exact(p, oracle::random_distribution(make_domain({"u", "v", "w"}), rng), all3),
                    DomainMismatch);
}

TEST_CASE("ipm_exact properties") {
    Rng rng(22);
    for (std::size_t n : {2, 5, 8, 12}) {
        auto domain = make_domain(indexed_labels("x", n));
        auto family = FunctionFamily::all_binary(domain);
        for (int i = 0; i < 12; ++i) {
            auto p = oracle::random_distribution(domain, rng);
            auto q = oracle::random_distribution(domain, rng);
            const auto fwd = ipm_exact(p, q, family);
            CHECK(fwd.value == ipm_exact(q, p, family).value);
            CHECK(std::abs(fwd.value - tv(p, q)) <= 1e-12);
            CHECK(ipm_exact(p, p, family).value == 0.0);
        }
    }

    // adding rows never decreases the supremum
    auto domain = make_domain(indexed_labels("x", 4));
    auto base = FunctionFamily::singletons(indexed_labels("x", 4));
    Rng rng2(23);
    auto p = oracle::random_distribution(domain, rng2);
    auto q = oracle::random_distribution(domain, rng2);
    auto grown = base.with_rows({{1, 1, 0, 0}, {0.5, 0.25, 0.75, 0.0}});
    CHECK(grown.members() == 6);
    CHECK(ipm_exact(p, q, grown).value >= ipm_exact(p, q, base).value);

    // witness ties resolve to the lowest row index
    auto mirrored = FunctionFamily::make({"a", "b"}, {{1, 0}, {0, 1}});
    auto d1 = DiscreteDistribution::make({"a", "b"}, {0.7, 0.3});
    auto d2 = DiscreteDistribution::make({"a", "b"}, {0.3, 0.7});
    CHECK(ipm_exact(d1, d2, mirrored).witness_index == 0);
}

TEST_CASE("vc dimension closed forms") {
    for (std::size_t n = 1; n <= 6; ++n) {
        CHECK(vc_dimension(FunctionFamily::all_binary(indexed_labels("x", n))) == n);
    }
    CHECK(vc_dimension(FunctionFamily::thresholds(indexed_labels("x", 5))) == 1);
    CHECK(vc_dimension(FunctionFamily::make({"a", "b"}, {{1.0, 0.0}})) == 0);
    CHECK(vc_dimension(FunctionFamily::singletons(indexed_labels("x", 4))) == 1);

    CHECK_THROWS_AS(vc_dimension(FunctionFamily::no_taxonomy(2, 2)), NotBinary);
    CHECK_THROWS_AS(vc_dimension(FunctionFamily::make(indexed_labels("x", 25),
                                                      {std::vector<double>(25, 1.0)})),
                    DomainTooLarge);
}

TEST_CASE("fat-shattering dimension closed forms") {
    // binary families: fat dimension equals VC dimension for any gamma <= 1/2
    for (std::size_t n : {2, 4}) {
        auto family = FunctionFamily::all_binary(indexed_labels("x", n));
        for (double gamma : {0.1, 0.4, 0.5}) {
            CHECK(fat_shattering_dim(family, gamma) == n);
        }
    }
    CHECK(fat_shattering_dim(FunctionFamily::thresholds(indexed_labels("x", 5)), 0.5) == 1);

    auto constant = FunctionFamily::make({"a", "b"}, {{0.5, 0.5}});
    CHECK(fat_shattering_dim(constant, 0.1) == 0);

    // taxonomy blocks flip at gamma = 1/(2k)
    for (std::size_t k : {std::size_t{1}, std::size_t{2}, std::size_t{4}}) {
        for (std::size_t nk = 1; nk <= 4; ++nk) {
            auto block = FunctionFamily::no_taxonomy(k, nk);
            const double edge = 1.0 / (2.0 * static_cast<double>(k));
            CHECK(fat_shattering_dim(block, edge) == nk);
            CHECK(fat_shattering_dim(block, edge / 2) == nk);
            if (edge + 0.01 <= 0.5) {
                CHECK(fat_shattering_dim(block, edge + 0.01) == 0);
            }
        }
    }

    // monotone in gamma
    auto nt = FunctionFamily::no_taxonomy(2, 3);
    std::size_t prev = 100;
    for (double gamma : {0.05, 0.2, 0.3, 0.5}) {
        const auto d = fat_shattering_dim(nt, gamma);
        CHECK(d <= prev);
        prev = d;
    }

    CHECK_THROWS_AS(fat_shattering_dim(nt, 0.0), GammaOutOfRange);
    CHECK_THROWS_AS(fat_shattering_dim(nt, 0.6), GammaOutOfRange);
    CHECK_THROWS_AS(fat_shattering_dim(FunctionFamily::make(indexed_labels("x", 17),
                                                            {std::vector<double>(17, 0.5)}),
                                       0.2),
                    DomainTooLarge);
}

TEST_CASE("fat-shattering handles mixed-value tables") {
    // two points, values spaced so only gamma <= 0.15 shatters both
    auto f = FunctionFamily::make({"a", "b"}, {{0.2, 0.2}, {0.2, 0.5}, {0.5, 0.2}, {0.5, 0.5}});
    CHECK(fat_shattering_dim(f, 0.15) == 2);
    CHECK(fat_shattering_dim(f, 0.16) == 0);
}
