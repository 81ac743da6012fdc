#include "quis/json_io.hpp"
#include "quis/profile.hpp"

#include "../support/fixture_support.hpp"
#include "../support/oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace quis;

namespace {

RatingStrategy strat(RatingKind k, Direction d = Direction::Maximize, OutOfBounds o = OutOfBounds::Clamp,
                     double exponent = 2.0) {
    return {k, exponent, d, o};
}

double rate_of(double v, double lo, double hi, RatingStrategy s) {
    return rate(v, make_criterion("c", "x", lo, hi, s));
}

std::vector<std::string> codes(const std::vector<Diagnostic>& ds) {
    std::vector<std::string> out;
    for (const auto& d : ds) out.push_back(d.code);
    return out;
}

const RegionKey kVillage = parse_region_key("030515410320");  // population 3000
const RegionKey kHamlet = parse_region_key("030515410330");   // population 2000

}  // namespace

TEST(Rate, WorkedExamples) {
    EXPECT_EQ(rate_of(8500, 2000, 10000, strat(RatingKind::Linear)), 0.8125);
    EXPECT_EQ(rate_of(8500, 2000, 10000, strat(RatingKind::Exponential)), 0.66015625);
    EXPECT_EQ(rate_of(12000, 2000, 10000, strat(RatingKind::Boolean)), 0.0);
    EXPECT_EQ(rate_of(5000, 2000, 10000, strat(RatingKind::Boolean)), 1.0);
    for (auto k : {RatingKind::Linear, RatingKind::Exponential, RatingKind::Logarithmic, RatingKind::Boolean})
        EXPECT_EQ(rate_of(10000, 2000, 10000, strat(k)), 1.0) << to_string(k);
    for (auto k : {RatingKind::Linear, RatingKind::Exponential, RatingKind::Logarithmic})
        EXPECT_EQ(rate_of(2000, 2000, 10000, strat(k)), 0.0) << to_string(k);
}

TEST(Rate, DirectionAndOutOfBounds) {
    EXPECT_EQ(rate_of(4, 4, 14, strat(RatingKind::Linear, Direction::Minimize)), 1.0);
    EXPECT_EQ(rate_of(11.5, 4, 14, strat(RatingKind::Linear, Direction::Minimize)), 0.25);
    EXPECT_EQ(rate_of(20, 4, 14, strat(RatingKind::Linear, Direction::Minimize)), 0.0);
    EXPECT_EQ(rate_of(20, 4, 14, strat(RatingKind::Linear, Direction::Minimize, OutOfBounds::Zero)), 0.0);
    EXPECT_EQ(rate_of(0, 4, 14, strat(RatingKind::Linear, Direction::Minimize, OutOfBounds::Zero)), 0.0);
    EXPECT_EQ(rate_of(0, 4, 14, strat(RatingKind::Linear, Direction::Minimize)), 1.0);
    EXPECT_EQ(rate_of(80, 2, 60, strat(RatingKind::Logarithmic, Direction::Maximize, OutOfBounds::Zero)), 0.0);
    EXPECT_NEAR(rate_of(31, 2, 60, strat(RatingKind::Logarithmic)), std::log10(5.5), 1e-15);
    EXPECT_EQ(rate_of(3000, 2500, kUnbounded, strat(RatingKind::Boolean)), 1.0);
    EXPECT_EQ(rate_of(2000, 2500, kUnbounded, strat(RatingKind::Boolean)), 0.0);
    // an unbounded linear scale falls back to the bounds test
    EXPECT_EQ(rate_of(3000, 2500, kUnbounded, strat(RatingKind::Linear)), 1.0);
}

TEST(Rate, MatchesOracleAndProperties) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1e4, 1e4);
    const RatingKind kinds[] = {RatingKind::Linear, RatingKind::Exponential, RatingKind::Logarithmic,
                                RatingKind::Boolean};
    for (int i = 0; i < 10000; ++i) {
        double lo = u(rng), hi = u(rng);
        if (lo == hi) continue;
        if (lo > hi) std::swap(lo, hi);
        RatingStrategy s = strat(kinds[i % 4], i % 8 < 4 ? Direction::Maximize : Direction::Minimize,
                                 i % 3 == 0 ? OutOfBounds::Zero : OutOfBounds::Clamp,
                                 std::uniform_real_distribution<double>(0.1, 5)(rng));
        const auto c = make_criterion("c", "x", lo, hi, s);
        // sweep across and beyond the bounds, including extremes
        std::vector<double> vs{-1e300, lo - (hi - lo), lo, hi, hi + (hi - lo), 1e300};
        for (int j = 0; j <= 20; ++j) vs.push_back(lo + (hi - lo) * j / 20.0);
        std::sort(vs.begin(), vs.end());
        double prev = s.direction == Direction::Maximize ? 0.0 : 1.0;
        for (double v : vs) {
            const double r = rate(v, c);
            ASSERT_GE(r, 0.0);
            ASSERT_LE(r, 1.0);
            ASSERT_NEAR(r, test::oracle_rate(v, lo, hi, s), 1e-12);
            const bool monotone = s.kind != RatingKind::Boolean && s.out_of_bounds == OutOfBounds::Clamp;
            if (monotone) {
                if (s.direction == Direction::Maximize)
                    ASSERT_GE(r, prev - 1e-15);
                else
                    ASSERT_LE(r, prev + 1e-15);
            }
            prev = r;
        }
    }
}

TEST(EvaluateSite, MustHaveOnFixture) {
    const auto& data = test::fixture();
    const auto np = load_profile(test::fixture_profile("np"));
    const auto ok = evaluate_site(np, kVillage, data.store);
    EXPECT_FALSE(ok.eliminated);
    ASSERT_EQ(ok.per_criterion.size(), 1u);
    EXPECT_TRUE(ok.per_criterion[0].passed);
    EXPECT_EQ(ok.per_criterion[0].raw_value, 3000.0);

    const auto out = evaluate_site(np, kHamlet, data.store);
    EXPECT_TRUE(out.eliminated);
    EXPECT_EQ(out.elimination_reasons, std::vector<std::string>{"inhabitants"});
    EXPECT_FALSE(out.per_criterion[0].passed);
}

TEST(EvaluateSite, WeightedMean) {
    const auto& data = test::fixture();
    UserRequirementProfile p;
    p.name = "t";
    p.year = 2016;
    p.region_focus = {parse_region_key("030000000000")};
    p.criteria = {make_criterion("big", "population", 0, 1000, strat(RatingKind::Linear), 1.0),
                  make_criterion("small", "population", 1e8, 1e9, strat(RatingKind::Linear), 3.0)};
    const auto e = evaluate_site(p, kVillage, data.store);
    EXPECT_EQ(e.per_criterion[0].score, 1.0);
    EXPECT_EQ(e.per_criterion[1].score, 0.0);
    EXPECT_EQ(e.total_score, 0.25);

    // rescaling weights leaves totals unchanged
    auto scaled = p;
    for (auto& c : scaled.criteria) c.weight *= 7.5;
    EXPECT_EQ(evaluate_site(scaled, kVillage, data.store).total_score, 0.25);
}

TEST(EvaluateSite, GapsAndErrors) {
    const auto& data = test::fixture();
    UserRequirementProfile p;
    p.name = "t";
    p.year = 1990;  // no data
    p.region_focus = {parse_region_key("030000000000")};
    p.criteria = {make_criterion("pop", "population", 0, 1000, strat(RatingKind::Linear), 1.0),
                  make_criterion("must", "population", 0, 1000, strat(RatingKind::Boolean), 0.0, true)};
    const auto e = evaluate_site(p, kVillage, data.store);
    EXPECT_FALSE(e.per_criterion[0].raw_value);
    EXPECT_EQ(e.per_criterion[0].score, 0.0);
    EXPECT_FALSE(e.per_criterion[0].error.empty());
    EXPECT_TRUE(e.eliminated);
    EXPECT_EQ(e.elimination_reasons, std::vector<std::string>{"must"});

    try {
        evaluate_site(p, parse_region_key("030510000000"), data.store);
        FAIL();
    } catch (const Error& err) {
        EXPECT_EQ(err.code(), ErrorCode::WrongLevel);
    }
    try {
        evaluate_site(p, parse_region_key("030515410990"), data.store);
        FAIL();
    } catch (const Error& err) {
        EXPECT_EQ(err.code(), ErrorCode::UnknownSite);
    }
}

TEST(EvaluateSite, NoCompensationForMustHave) {
    const auto& data = test::fixture();
    UserRequirementProfile p;
    p.name = "t";
    p.year = 2016;
    p.region_focus = {parse_region_key("030000000000")};
    p.criteria = {make_criterion("must", "population", 2500, kUnbounded, strat(RatingKind::Boolean), 0.0, true),
                  make_criterion("pref", "purchasing_power_index", 0, 1, strat(RatingKind::Linear), 100.0)};
    const auto e = evaluate_site(p, kHamlet, data.store);
    EXPECT_EQ(e.total_score, 1.0);
    EXPECT_TRUE(e.eliminated);
}

TEST(ValidateProfile, Diagnostics) {
    const auto& data = test::fixture();
    for (const char* name : {"np", "lidl", "edeka", "ecenter", "walkthrough"})
        EXPECT_TRUE(validate_profile(load_profile(test::fixture_profile(name)), data.store).empty()) << name;

    UserRequirementProfile p;
    p.name = "t";
    p.year = 2016;
    p.region_focus = {parse_region_key("030000000000")};
    p.criteria = {make_criterion("a", "no_such_factor", 0, 1)};
    auto d = validate_profile(p, data.store);
    ASSERT_EQ(d.size(), 1u);
    EXPECT_EQ(d[0].code, "UnknownFactor");
    EXPECT_EQ(d[0].subject, "a");

    p.criteria = {make_criterion("a", "population", 10000, 2000)};
    EXPECT_EQ(codes(validate_profile(p, data.store)), std::vector<std::string>{"InvertedBounds"});

    p.criteria = {make_criterion("a", "population", 0, 1, {}, 0.0)};
    EXPECT_EQ(codes(validate_profile(p, data.store)), std::vector<std::string>{"ZeroTotalWeight"});

    p.criteria = {make_criterion("a", "population", 0, 1)};
    p.region_focus.clear();
    d = validate_profile(p, data.store);
    ASSERT_EQ(codes(d), std::vector<std::string>{"EmptyRegionFocus"});
    EXPECT_EQ(d[0].severity, Severity::Warning);

    p.region_focus = {parse_region_key("030000000000")};
    p.criteria = {make_criterion("a", "population", 0, 1), make_criterion("a", "households", 0, 1)};
    EXPECT_EQ(codes(validate_profile(p, data.store)), std::vector<std::string>{"DuplicateCriterion"});

    p.criteria = {make_criterion("a", "population", 0, 1), make_criterion("b", "households", 0, 1)};
    p.exclusions = {{"a", "b"}};
    EXPECT_EQ(codes(validate_profile(p, data.store)), std::vector<std::string>{"IncompatibleCriteria"});
    p.criteria[1].weight = 0.0;  // inactive
    EXPECT_TRUE(validate_profile(p, data.store).empty());
}
