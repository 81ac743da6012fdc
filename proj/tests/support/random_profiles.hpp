#pragma once

// Seeded random profiles over the fixture's factors, for property and
// oracle-equivalence tests.

#include "quis/profile.hpp"

#include <optional>
#include <random>
#include <string>
#include <vector>

namespace quis::test {

struct RandomTask {
    UserRequirementProfile profile;
    double min_score = 0.0;
    std::optional<std::size_t> top;
};

class ProfileGenerator {
public:
    explicit ProfileGenerator(std::uint64_t seed) : rng_(seed) {}

    RandomTask next() {
        struct Shape {
            const char* expr;
            double lo, hi;  // plausible range on the fixture
        };
        static const Shape shapes[] = {
            {"population", 1000, 60000},
            {"households", 500, 30000},
            {"purchasing_power_index", 80, 110},
            {"unemployment_rate", 4, 14},
            {"net_income / 1000", 15, 25},
            {"population_density", 20, 1500},
            {"avg_household_size", 1.7, 2.3},
            {"random_index", -0.2, 0.2},
            {"employees / population", 0.2, 0.5},  // gaps in some years
            {"gdp_per_inhabitant", 20000, 40000},
            {"employment_rate", 40, 80},
            {"households * avg_household_size / area_km2", 10, 800},
        };
        static const char* focus_pool[] = {"030000000000", "120000000000", "110000000000", "030510000000",
                                           "120640000000", "120645410340"};
        static const int years[] = {2016, 2016, 2016, 2012, 2005};

        RandomTask t;
        auto& p = t.profile;
        p.name = "random";
        p.year = years[pick(5)];
        const std::size_t n = 1 + pick(4);
        bool weighted = false;
        for (std::size_t i = 0; i < n; ++i) {
            const auto& s = shapes[pick(std::size(shapes))];
            const double span = s.hi - s.lo;
            double lo = s.lo + span * unit(-0.3, 0.6);
            double hi = lo + span * unit(0.1, 1.0);
            RatingStrategy strategy;
            strategy.kind = static_cast<RatingKind>(pick(4));
            strategy.direction = pick(3) == 0 ? Direction::Minimize : Direction::Maximize;
            strategy.out_of_bounds = pick(3) == 0 ? OutOfBounds::Zero : OutOfBounds::Clamp;
            strategy.exponent = unit(0.5, 3.0);
            if (strategy.kind == RatingKind::Boolean && pick(2) == 0) hi = kUnbounded;
            double weight = static_cast<double>(pick(5));
            const bool must = pick(10) < 3;
            const double threshold = must ? (pick(2) == 0 ? 1.0 : unit(0.2, 0.9)) : 1.0;
            if (i + 1 == n && !weighted && weight == 0.0) weight = 1.0;
            weighted = weighted || weight > 0.0;
            p.criteria.push_back(make_criterion("c" + std::to_string(i), s.expr, lo, hi, strategy, weight, must,
                                                threshold));
        }
        const std::size_t focus = 1 + pick(2);
        for (std::size_t i = 0; i < focus; ++i) p.region_focus.push_back(parse_region_key(focus_pool[pick(6)]));
        std::sort(p.region_focus.begin(), p.region_focus.end());
        p.region_focus.erase(std::unique(p.region_focus.begin(), p.region_focus.end()), p.region_focus.end());
        t.min_score = pick(3) == 0 ? unit(0.0, 0.6) : 0.0;
        if (pick(3) == 0) t.top = 1 + pick(10);
        return t;
    }

private:
    std::size_t pick(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }
    double unit(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng_); }

    std::mt19937_64 rng_;
};

}  // namespace quis::test
