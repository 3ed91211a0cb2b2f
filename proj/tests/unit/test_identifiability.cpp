#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "revkin/identifiability.hpp"

using namespace revkin;

TEST_CASE("check_region_richness accepts the hand-built rich configuration") {
    const RichnessReport report = check_region_richness(test::demo_config());
    CHECK(report.satisfied);
    CHECK(report.violations.empty());
    CHECK(report.distinct_k34_count == 7);
    CHECK(report.distinct_alpha_count == 14);
    // Brute-force cross-check of the distinct counts under the same rule.
    std::vector<double> k34s;
    for (const auto& region : test::demo_regions()) {
        k34s.push_back(region.params.k3 + region.params.k4);
    }
    int pairs_separated = 0;
    for (std::size_t i = 0; i < k34s.size(); ++i) {
        for (std::size_t j = i + 1; j < k34s.size(); ++j) {
            if (std::fabs(k34s[i] - k34s[j]) > 1e-9) ++pairs_separated;
        }
    }
    CHECK(pairs_separated == 21);  // all pairs distinct -> 7 distinct values
}

TEST_CASE("check_region_richness needs at least p+3 regions") {
    auto regions = test::demo_regions();
    regions.resize(6);  // p + 2 for p = 4
    const Configuration config(std::move(regions), test::demo_input());
    const RichnessReport report = check_region_richness(config);
    CHECK_FALSE(report.satisfied);
    CHECK_FALSE(report.violations.empty());
}

TEST_CASE("regions sharing an eigenvalue reduce the distinct count") {
    auto regions = test::demo_regions();
    regions[1].params = regions[0].params;  // identical -> shares both alphas
    const Configuration config(std::move(regions), test::demo_input());
    const RichnessReport report = check_region_richness(config);
    CHECK(report.distinct_alpha_count == 12);
    CHECK(report.distinct_k34_count == 6);
    CHECK_FALSE(report.satisfied);
}

TEST_CASE("check_assumption_A holds for the rich configuration") {
    const RichnessReport report = check_assumption_A(test::demo_config());
    CHECK(report.satisfied);
    CHECK(report.violations.empty());
    CHECK(report.witnesses.size() == 4);  // one witness triple per exponent
}

TEST_CASE("check_assumption_A fails when all regions are identical") {
    std::vector<Region> regions;
    for (int i = 0; i < 7; ++i) {
        regions.push_back({"r" + std::to_string(i + 1), test::demo_params()});
    }
    const Configuration config(std::move(regions), test::demo_input());
    const RichnessReport report = check_assumption_A(config);
    CHECK_FALSE(report.satisfied);
    CHECK(report.violations.size() == 4);
}

TEST_CASE("richness implies the witness condition on random draws") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const Configuration config = sample_random_config(seed, 7, 4);
        if (check_region_richness(config).satisfied) {
            CHECK(check_assumption_A(config).satisfied);
        }
    }
}

TEST_CASE("equivalence_up_to_scale: identity") {
    const Configuration config = test::demo_config();
    const EquivalenceReport report = equivalence_up_to_scale(config, config, 1e-9);
    CHECK(report.equivalent);
    CHECK(*report.zeta == doctest::Approx(1.0).epsilon(1e-14));
    REQUIRE(report.reindexing.has_value());
    for (int j = 0; j < 4; ++j) CHECK((*report.reindexing)[j] == j);
    CHECK(report.max_param_deviation <= 1e-14);
}

namespace {

Configuration gauge_transformed(const Configuration& config, double c) {
    std::vector<Region> regions = config.regions();
    for (auto& region : regions) region.params.K1 /= c;
    std::vector<PolyexpTerm> terms = config.input().terms();
    for (auto& term : terms) term.lambda *= c;
    return Configuration(std::move(regions), PolyexpInput(std::move(terms)));
}

}  // namespace

TEST_CASE("equivalence_up_to_scale: gauge transformation") {
    const Configuration a = test::demo_config();
    const Configuration b = gauge_transformed(a, 2.0);
    const EquivalenceReport report = equivalence_up_to_scale(a, b, 1e-9);
    CHECK(report.equivalent);
    CHECK(*report.zeta == doctest::Approx(2.0).epsilon(1e-12));

    const EquivalenceReport reverse = equivalence_up_to_scale(b, a, 1e-9);
    CHECK(reverse.equivalent);
    CHECK(*reverse.zeta == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("gauge-transformed configurations simulate identical tables") {
    const Configuration a = test::demo_config();
    for (double c : {0.5, 3.0}) {
        const Configuration b = gauge_transformed(a, c);
        const auto grid = test::log_grid(0.25, 60.0, 16);
        const TacTable ta = simulate_tacs(a, grid);
        const TacTable tb = simulate_tacs(b, grid);
        for (std::size_t i = 0; i < ta.curves.size(); ++i) {
            for (std::size_t l = 0; l < grid.size(); ++l) {
                CHECK(std::fabs(ta.curves[i].values[l] - tb.curves[i].values[l]) <=
                      1e-12 * std::max(1.0, std::fabs(ta.curves[i].values[l])));
            }
        }
        const EquivalenceReport report = equivalence_up_to_scale(a, b, 1e-9);
        CHECK(report.equivalent);
        CHECK(*report.zeta == doctest::Approx(c).epsilon(1e-12));
    }
}

TEST_CASE("equivalence_up_to_scale flags a perturbed rate") {
    const Configuration a = test::demo_config();
    std::vector<Region> regions = a.regions();
    regions[2].params.k3 += 1e-2;
    const Configuration b(std::move(regions), a.input());
    const EquivalenceReport report = equivalence_up_to_scale(a, b, 1e-6);
    CHECK_FALSE(report.equivalent);
    CHECK(report.max_param_deviation == doctest::Approx(1e-2).epsilon(0.05));
    CHECK_FALSE(report.diagnostics.empty());
}

TEST_CASE("equivalence is invariant to input term permutation") {
    const Configuration a = test::demo_config();
    std::vector<PolyexpTerm> shuffled = {{0.1, -3.0}, {1.0, -0.05}, {-0.2, -1.0}, {0.5, -0.3}};
    const Configuration b(a.regions(), PolyexpInput(std::move(shuffled)));
    const EquivalenceReport report = equivalence_up_to_scale(a, b, 1e-12);
    CHECK(report.equivalent);
    CHECK(*report.zeta == doctest::Approx(1.0));
}

TEST_CASE("sample_random_config is deterministic and respects bounds") {
    const Configuration a = sample_random_config(123, 7, 4);
    const Configuration b = sample_random_config(123, 7, 4);
    REQUIRE(a.n_regions() == 7);
    REQUIRE(a.input().degree() == 4);
    for (int i = 0; i < 7; ++i) {
        CHECK(a.regions()[i].params.K1 == b.regions()[i].params.K1);
        CHECK(a.regions()[i].params.k4 == b.regions()[i].params.k4);
        CHECK(a.regions()[i].params.K1 >= 0.05);
        CHECK(a.regions()[i].params.K1 <= 1.5);
        CHECK(a.regions()[i].params.non_degenerate());
    }
    for (int j = 0; j < 4; ++j) {
        CHECK(a.input().terms()[j].mu == b.input().terms()[j].mu);
        CHECK(a.input().terms()[j].mu < 0.0);
        CHECK(a.input().terms()[j].lambda > 0.0);
    }
}

TEST_CASE("sample_random_config with collapsed k2 bounds") {
    SamplerRanges ranges;
    ranges.k2 = {0.4, 0.4};
    const Configuration config = sample_random_config(5, 5, 3, ranges);
    for (const auto& region : config.regions()) CHECK(region.params.k2 == 0.4);
}

TEST_CASE("sample_random_config validates its arguments") {
    CHECK_THROWS_AS(sample_random_config(1, 0, 4), ValidationError);
    SamplerRanges bad;
    bad.mu = {0.5, 1.0};
    CHECK_THROWS_AS(sample_random_config(1, 3, 2, bad), ValidationError);
}

TEST_CASE("sample_random_config gives up after too many duplicate exponents") {
    SamplerRanges collapsed;
    collapsed.mu = {-0.5, -0.5};  // every draw produces the same exponent
    CHECK_THROWS_AS(sample_random_config(1, 2, 3, collapsed), ExhaustedRedraws);
}
