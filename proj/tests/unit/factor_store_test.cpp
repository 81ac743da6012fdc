#include "quis/factor_store.hpp"

#include "../support/fixture_support.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace quis;

namespace {

RegionKey key(const char* raw) { return parse_region_key(raw); }

// state 12 > county 64 > district 5410 > municipalities 340, 350
//          > county 65 > district 5510 > municipality 310
std::shared_ptr<SiteHierarchy> small_hierarchy() {
    auto h = std::make_shared<SiteHierarchy>();
    for (const char* k : {"120000000000", "120640000000", "120645410000", "120645410340", "120645410350",
                          "120650000000", "120655510000", "120655510310"})
        h->add_site(make_site(key(k), k));
    return h;
}

FactorStore small_store() {
    FactorStore s(small_hierarchy());
    s.declare({"population", "Population", "count", Aggregation::Sum});
    s.declare({"net_income", "Net income", "EUR", Aggregation::InheritDown});
    s.declare({"density", "Density", "per km2", Aggregation::MeanOfChildren});
    s.put_series({"population", key("120645410340"), {2016}, {4000}});
    s.put_series({"population", key("120645410350"), {2016}, {6000}});
    s.put_series({"population", key("120655510310"), {2016}, {2500}});
    s.put_series({"net_income", key("120640000000"), {2015, 2016}, {20000, 21000}});
    s.put_series({"density", key("120645410340"), {2016}, {10}});
    s.put_series({"density", key("120645410350"), {2016}, {30}});
    s.put_series({"density", key("120655510310"), {2016}, {50}});
    return s;
}

template <class F>
ErrorCode code_of(F f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error";
    return ErrorCode::Usage;
}

}  // namespace

TEST(FactorStore, PutSeriesAndRead) {
    FactorStore s(small_hierarchy());
    s.declare({"population", "Population", "count", Aggregation::Sum});
    std::vector<int> years;
    std::vector<double> values;
    for (int y = 2000; y <= 2015; ++y) {
        years.push_back(y);
        values.push_back(4000 + 150.0 * (y - 2000));
    }
    values[14] = 6250;
    values[15] = 6300;
    s.put_series({"population", key("120640000000"), years, values});
    for (std::size_t i = 0; i < years.size(); ++i)
        EXPECT_EQ(s.value("population", key("120640000000"), years[i]), values[i]);  // bit-exact
    EXPECT_EQ(s.latest_value("population", key("120640000000")), std::make_pair(2015, 6300.0));
}

TEST(FactorStore, PutSeriesErrors) {
    FactorStore s(small_hierarchy());
    s.declare({"population", "Population", "count", Aggregation::Sum});
    EXPECT_EQ(code_of([&] { s.put_series({"population", key("120640000000"), {2001, 2000}, {1, 2}}); }),
              ErrorCode::UnsortedYears);
    EXPECT_EQ(code_of([&] { s.put_series({"population", key("120640000000"), {2000, 2000}, {1, 2}}); }),
              ErrorCode::UnsortedYears);
    EXPECT_EQ(code_of([&] { s.put_series({"xyz", key("120640000000"), {2000}, {1}}); }), ErrorCode::UnknownFactor);
    EXPECT_EQ(code_of([&] { s.put_series({"population", key("130000000000"), {2000}, {1}}); }),
              ErrorCode::UnknownSite);
    EXPECT_EQ(code_of([&] { s.put_series({"population", key("120640000000"), {2000, 2001}, {1}}); }),
              ErrorCode::LengthMismatch);
    EXPECT_EQ(code_of([&] { s.put_series({"population", key("120640000000"), {}, {}}); }),
              ErrorCode::LengthMismatch);
}

TEST(FactorStore, ReplacesSeries) {
    auto s = small_store();
    s.put_series({"population", key("120645410340"), {2016}, {4100}});
    EXPECT_EQ(s.value("population", key("120645410340"), 2016), 4100);
}

TEST(FactorStore, InheritsFromCounty) {
    const auto s = small_store();
    EXPECT_EQ(s.value("net_income", key("120645410340"), 2016), 21000);
    const auto r = s.resolve("net_income", key("120645410340"), 2016);
    EXPECT_EQ(r.source, key("120640000000"));
    EXPECT_EQ(r.year, 2016);
    // no ancestor of county 65 carries it
    EXPECT_EQ(code_of([&] { s.value("net_income", key("120655510310"), 2016); }), ErrorCode::NoValue);
    // the state above is not reached by inheritance from a sibling
    EXPECT_EQ(code_of([&] { s.value("net_income", key("120000000000"), 2016); }), ErrorCode::NoValue);
}

TEST(FactorStore, DirectHitAndMissingYear) {
    const auto s = small_store();
    EXPECT_EQ(s.value("population", key("120645410340"), 2016), 4000);
    EXPECT_EQ(code_of([&] { s.value("population", key("120645410340"), 1900); }), ErrorCode::NoValue);
    // missing year on the authoritative series is not filled from elsewhere
    EXPECT_EQ(code_of([&] { s.value("net_income", key("120645410340"), 2014); }), ErrorCode::NoValue);
    EXPECT_EQ(code_of([&] { s.value("nope", key("120645410340"), 2016); }), ErrorCode::UnknownFactor);
    EXPECT_EQ(code_of([&] { s.value("population", key("129990000000"), 2016); }), ErrorCode::UnknownSite);
    // Sum factors are not inherited downwards and not summed implicitly
    EXPECT_EQ(code_of([&] { s.value("population", key("120640000000"), 2016); }), ErrorCode::NoValue);
}

TEST(FactorStore, AggregateUp) {
    const auto s = small_store();
    EXPECT_EQ(s.aggregate_up("population", key("120640000000"), 2016), 10000);
    EXPECT_EQ(s.aggregate_up("population", key("120650000000"), 2016), 2500);  // single child
    EXPECT_EQ(s.aggregate_up("population", key("120000000000"), 2016), 12500);
    EXPECT_EQ(code_of([&] { s.aggregate_up("net_income", key("120640000000"), 2016); }),
              ErrorCode::WrongAggregationMode);
    EXPECT_EQ(code_of([&] { s.aggregate_up("population", key("120640000000"), 2015); }), ErrorCode::NoValue);
    // mean over direct children, recursing where a child has no value
    EXPECT_EQ(s.aggregate_up("density", key("120645410000"), 2016), 20);
    EXPECT_EQ(s.aggregate_up("density", key("120000000000"), 2016), 35);
}

TEST(FactorStore, LatestValue) {
    auto s = small_store();
    s.declare({"index", "Index", "", Aggregation::InheritDown});
    s.put_series({"index", key("120655510310"), {2016}, {42}});
    EXPECT_EQ(s.latest_value("index", key("120655510310")), std::make_pair(2016, 42.0));
    EXPECT_EQ(s.latest_value("net_income", key("120645410350")), std::make_pair(2016, 21000.0));
    EXPECT_EQ(code_of([&] { s.latest_value("index", key("120645410340")); }), ErrorCode::NoValue);
}

TEST(FactorStore, ValidateReportsSumMismatch) {
    auto s = small_store();
    EXPECT_TRUE(s.validate().empty());
    s.put_series({"population", key("120640000000"), {2016}, {10000}});
    EXPECT_TRUE(s.validate().empty());
    s.put_series({"population", key("120640000000"), {2016}, {10100}});
    const auto diags = s.validate();
    ASSERT_EQ(diags.size(), 1u);
    EXPECT_EQ(diags[0].severity, Severity::Warning);
    EXPECT_EQ(diags[0].code, "SumMismatch");
    // the stored parent value wins for lookups
    EXPECT_EQ(s.value("population", key("120640000000"), 2016), 10100);
    EXPECT_EQ(s.aggregate_up("population", key("120640000000"), 2016), 10000);
}

TEST(FactorStore, FixtureSumConsistency) {
    const auto& data = test::fixture();
    const auto& s = data.store;
    const auto& h = s.hierarchy();
    for (int year = 2000; year <= 2016; ++year) {
        for (const auto& state : h.roots()) {
            const double direct = s.aggregate_up("population", state, year);
            double over_counties = 0;
            for (const auto& c : h.children(state)) over_counties += s.aggregate_up("population", c, year);
            double over_munis = 0;
            for (const auto& m : h.descendants_at(state, HierarchyLevel::Municipality))
                over_munis += s.value("population", m, year);
            EXPECT_NEAR(direct, over_counties, 1e-9 * direct);
            EXPECT_NEAR(direct, over_munis, 1e-9 * direct);
            EXPECT_NEAR(s.value("population", state, year), direct, 1e-9 * direct);
        }
    }
    EXPECT_TRUE(s.validate().empty());
}

TEST(FactorStore, FixtureInheritanceIdempotent) {
    const auto& s = test::fixture().store;
    for (const auto& [id, d] : s.descriptors()) {
        if (d.aggregation != Aggregation::InheritDown) continue;
        for (const auto& m : s.hierarchy().sites_at(HierarchyLevel::Municipality)) {
            const auto r = s.resolve(id, m, 2016);
            EXPECT_NE(r.source, m) << "fixture stores " << id << " above municipality level";
            EXPECT_EQ(r.value, s.value(id, r.source, 2016));
            EXPECT_EQ(s.value(id, m, 2016), s.value(id, r.source, 2016));
        }
    }
}
