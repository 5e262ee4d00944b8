#include "doctest.h"
#include "entcone/catalog.hpp"
#include "entcone/distribution.hpp"
#include "entcone/scenario.hpp"

#include <cmath>

using namespace entcone;

namespace {

const VariableSet XYZ({"X", "Y", "Z"});

std::vector<double> graded_real(const EntropyVector& v) { return v.real_in(graded_order(3)); }

JointDistribution uniform(const VariableSet& v, std::vector<int> alph, const std::vector<std::vector<int>>& support) {
    std::size_t n = 1;
    for (int a : alph) n *= static_cast<std::size_t>(a);
    RatVec p(n, Rational(0));
    for (const auto& o : support) {
        std::size_t idx = 0;
        for (std::size_t i = 0; i < o.size(); ++i) idx = idx * static_cast<std::size_t>(alph[i]) + static_cast<std::size_t>(o[i]);
        p[idx] = Rational(1, static_cast<long>(support.size()));
    }
    return JointDistribution::exact(v, alph, p);
}

}  // namespace

TEST_CASE("entropy of small distributions") {
    auto corr = uniform(XYZ, {2, 2, 2}, {{0, 0, 0}, {1, 1, 1}});
    auto h = entropy_vector(corr);
    REQUIRE(h.is_exact());
    for (Mask m = 1; m < 8; ++m) CHECK(h.q(m) == 1);

    auto indep = uniform(XYZ, {2, 2, 2}, {{0, 0, 0}, {0, 0, 1}, {0, 1, 0}, {0, 1, 1},
                                           {1, 0, 0}, {1, 0, 1}, {1, 1, 0}, {1, 1, 1}});
    auto g = entropy_vector(indep);
    for (Mask m = 1; m < 8; ++m) CHECK(g.q(m) == popcount(m));

    // A three-outcome variable: log2(3), not a power of two.
    auto third = JointDistribution::real(VariableSet({"X"}), {3}, {1.0 / 3, 1.0 / 3, 1.0 / 3});
    CHECK(entropy_vector(third).r(1) == doctest::Approx(std::log2(3.0)).epsilon(1e-12));
    CHECK_THROWS(JointDistribution::real(VariableSet({"X"}), {2}, {0.7, 0.7}).validate());
}

TEST_CASE("text round trip") {
    std::mt19937_64 rng(3);
    auto d = random_distribution(XYZ, {2, 3, 2}, rng);
    auto back = JointDistribution::parse(d.to_text());
    auto a = graded_real(entropy_vector(d)), b = graded_real(entropy_vector(back));
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-9));
}

TEST_CASE("strategies") {
    auto tri = load_scenario("triangle");
    auto fx = FixtureSet::load(data_path("fixtures/triangle_inner.txt"));
    auto d = run_strategy(fx.strategies.at("1"), tri);
    auto h = entropy_vector(d.marginal({"X", "Y", "Z"}));
    auto order = graded_order(3);
    std::vector<long> want{1, 1, 1, 2, 2, 2, 2};
    for (std::size_t i = 0; i < order.size(); ++i) CHECK(h.q(order[i]) == want[i]);
    for (const auto& c : check_compatibility(d, tri)) CHECK(c.pass);

    auto bad = StrategyRecipe::parse("source A uniform 2\nnode X = A\n");
    CHECK_FALSE(recipe_violation(bad, tri).empty());
    CHECK_THROWS_AS(run_strategy(bad, tri), std::invalid_argument);

    auto andor = run_strategy(fx.strategies.at("and-or"), tri);
    auto v = graded_real(entropy_vector(andor.marginal({"X", "Y", "Z"})));
    std::vector<double> v1{0.81, 0.81, 0.81, 1.55, 1.5, 1.5, 2.16};
    for (std::size_t i = 0; i < 7; ++i) CHECK(std::abs(v[i] - v1[i]) < 0.005);
}

TEST_CASE("fixtures of the fork reproduce their rays") {
    auto fork = load_scenario("fork");
    auto fx = FixtureSet::load(data_path("fixtures/fork.txt"));
    for (const auto& c : verify_fixtures(fx, fork))
        if (c.has_strategy) CHECK_MESSAGE(c.reproduced, c.detail);
}

TEST_CASE("post-processing") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 1000; ++trial) {
        auto d = random_distribution(XYZ, {4, 2, 3}, rng);
        auto same = postprocess(d, parse_map_spec("X=identity", d));
        auto a = graded_real(entropy_vector(d)), b = graded_real(entropy_vector(same));
        for (std::size_t i = 0; i < 7; ++i) REQUIRE(a[i] == doctest::Approx(b[i]).epsilon(1e-12));
        // Coarse-graining never increases any entropy.
        auto coarse = postprocess(d, parse_map_spec("X=and", d));
        auto c = entropy_vector(coarse);
        for (Mask m = 1; m < 8; ++m) REQUIRE(c.r(m) <= entropy_vector(d).r(m) + 1e-12);
    }
    auto m = parse_outcome_map("xor", 4);
    CHECK(m.table == std::vector<int>{0, 1, 1, 0});
    CHECK(parse_outcome_map("table:1,0,1", 3).out_alphabet == 2);
}

TEST_CASE("CHSH value of the maximally entangled construction") {
    CHECK(chsh_value(chsh_table()) == doctest::Approx(2 * std::sqrt(2.0)).epsilon(1e-9));
    auto f = fritz_distribution();
    f.validate();
}

TEST_CASE("solid angle") {
    // Sampling covers the positive sector, so the quadrant is everything and a >= b is half of it.
    VariableSet v({"a", "b"});
    Cone quadrant(v, {1, 2});
    quadrant.add_ineq({Integer(1), Integer(0)});
    quadrant.add_ineq({Integer(0), Integer(1)});
    CHECK(solid_angle(quadrant, 1000, 5).hits == 1000);
    Cone half = quadrant;
    half.add_ineq({Integer(1), Integer(-1)});
    auto e = solid_angle(half, 200000, 5);
    CHECK(e.samples == 200000);
    CHECK(e.alpha == doctest::Approx(double(e.hits) / 200000));
    CHECK(std::abs(e.alpha - 0.5) < 5 * e.standard_error);
    CHECK(solid_angle(half, 200000, 5, 1).hits == solid_angle(half, 200000, 5, 4).hits);
    CHECK_THROWS(solid_angle(quadrant, 0, 5));
}
