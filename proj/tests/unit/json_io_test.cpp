#include "quis/json_io.hpp"

#include "../support/fixture_support.hpp"
#include "../support/random_profiles.hpp"

#include <gtest/gtest.h>

using namespace quis;

namespace {

std::vector<std::string> diag_codes(const Json& doc) {
    try {
        profile_from_json(doc);
    } catch (const DiagnosticError& e) {
        EXPECT_EQ(e.code(), ErrorCode::InvalidProfile);
        std::vector<std::string> out;
        for (const auto& d : e.diagnostics()) out.push_back(d.code);
        return out;
    }
    ADD_FAILURE() << "accepted: " << doc.dump();
    return {};
}

Json np_doc() { return Json::parse(test::read_file(test::fixture_profile("np"))); }

}  // namespace

TEST(ProfileJson, RoundTrip) {
    for (const char* name : {"np", "lidl", "edeka", "ecenter", "walkthrough"}) {
        const auto p = load_profile(test::fixture_profile(name));
        EXPECT_EQ(profile_from_json(to_json(p)), p) << name;
        EXPECT_EQ(to_json(p).dump(2) + "\n", test::read_file(test::fixture_profile(name))) << name;
    }
    test::ProfileGenerator gen(3);
    for (int i = 0; i < 200; ++i) {
        auto p = gen.next().profile;
        p.exclusions = {{"c0", "c0"}};
        EXPECT_EQ(profile_from_json(Json::parse(to_json(p).dump())), p);
    }
}

TEST(ProfileJson, UnboundedBounds) {
    const auto p = load_profile(test::fixture_profile("np"));
    EXPECT_EQ(p.criteria[0].bound_high, kUnbounded);
    const auto doc = to_json(p);
    EXPECT_EQ(doc["criteria"][0]["bounds"][1], "inf");
    auto neg = np_doc();
    neg["criteria"][0]["bounds"] = Json::array({"-inf", 10});
    EXPECT_EQ(profile_from_json(neg).criteria[0].bound_low, -kUnbounded);
}

TEST(ProfileJson, Defaults) {
    Json doc = {{"name", "min"},
                {"year", 2016},
                {"region_focus", {"030000000000"}},
                {"criteria", {{{"id", "a"}, {"expression", "population"}, {"bounds", {0, 1}}}}}};
    const auto p = profile_from_json(doc);
    EXPECT_EQ(p.target_level, HierarchyLevel::Municipality);
    EXPECT_EQ(p.criteria[0].weight, 1.0);
    EXPECT_FALSE(p.criteria[0].must_have);
    EXPECT_EQ(p.criteria[0].strategy, RatingStrategy{});
}

TEST(ProfileJson, StructuralDiagnostics) {
    auto doc = np_doc();
    doc.erase("criteria");
    EXPECT_EQ(diag_codes(doc), std::vector<std::string>{"MissingField"});

    doc = np_doc();
    doc["criteria"][0]["strategy"]["kind"] = "sigmoid";
    doc["criteria"][0]["expression"] = "2 population";
    doc["target_level"] = "village";
    doc["region_focus"] = {"12"};
    const auto codes = diag_codes(doc);
    for (const char* c : {"UnknownStrategy", "SyntaxError", "UnknownLevel", "WrongLength"})
        EXPECT_NE(std::find(codes.begin(), codes.end(), c), codes.end()) << c;

    doc = np_doc();
    doc["criteria"][0]["weight"] = "heavy";
    doc["criteria"][0]["bounds"] = {1};
    EXPECT_EQ(diag_codes(doc), (std::vector<std::string>{"WrongType", "WrongType"}));

    EXPECT_EQ(diag_codes(Json::array()), std::vector<std::string>{"WrongType"});
}

TEST(ProfileJson, AtomicSave) {
    test::TempDir dir;
    const auto p = load_profile(test::fixture_profile("walkthrough"));
    save_profile(p, dir / "w.json");
    save_profile(p, dir / "w.json");  // overwrite
    EXPECT_EQ(load_profile(dir / "w.json"), p);
    std::size_t files = 0;
    for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir.path())) ++files;
    EXPECT_EQ(files, 1u);  // no temporaries left behind

    try {
        save_profile(p, dir / "missing" / "w.json");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::Io);
    }
    try {
        load_profile(dir / "nope.json");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::Io);
    }
    test::write_file(dir / "bad.json", "{ not json");
    EXPECT_THROW(load_profile(dir / "bad.json"), Error);
}

TEST(ResultJson, RunCarriesRanks) {
    const auto& data = test::fixture();
    RecommendationTask task;
    task.profile = load_profile(test::fixture_profile("walkthrough"));
    task.max_results = 3;
    const auto doc = to_json(recommend(task, data.store));
    ASSERT_EQ(doc["ranked"].size(), 3u);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_EQ(doc["ranked"][i]["rank"], i + 1);
        EXPECT_TRUE(doc["ranked"][i].contains("total_score"));
    }
}
