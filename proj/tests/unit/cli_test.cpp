#include "quis/cli.hpp"
#include "quis/json_io.hpp"

#include "../support/fixture_support.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace quis;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli_run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string manifest() { return test::fixture_manifest().string(); }
std::string profile(const char* name) { return test::fixture_profile(name).string(); }

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

}  // namespace

TEST(Cli, UsageErrors) {
    EXPECT_EQ(run({}).code, 1);
    EXPECT_EQ(run({"frobnicate"}).code, 1);
    EXPECT_EQ(run({"recommend", "--manifest", manifest()}).code, 1);  // --profile missing
    EXPECT_EQ(run({"recommend", "--manifest", manifest(), "--profile", profile("np"), "--format", "xml"}).code, 1);
    EXPECT_EQ(run({"recommend", "--manifest", manifest(), "--profile", profile("np"), "--top", "0"}).code, 1);
    const auto help = run({"--help"});
    EXPECT_EQ(help.code, 0);
    EXPECT_NE(help.out.find("recommend"), std::string::npos);
}

TEST(Cli, RecommendTop5) {
    const auto r = run({"recommend", "--manifest", manifest(), "--profile", profile("walkthrough"), "--top", "5"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto ls = lines(r.out);
    std::vector<std::string> rows;
    for (const auto& l : ls)
        if (!l.empty() && std::isdigit(static_cast<unsigned char>(l[0]))) rows.push_back(l);
    ASSERT_EQ(rows.size(), 5u);
    for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(rows[i].substr(0, rows[i].find(' ')), std::to_string(i + 1));

    const auto csv = run({"recommend", "--manifest", manifest(), "--profile", profile("walkthrough"), "--top", "5",
                          "--format", "csv"});
    ASSERT_EQ(csv.code, 0);
    const auto cl = lines(csv.out);
    ASSERT_EQ(cl.size(), 6u);
    EXPECT_EQ(cl[0].substr(0, 26), "rank,region_key,name,total");
    EXPECT_EQ(cl[1].substr(0, 2), "1,");
}

TEST(Cli, RecommendJsonMatchesLibrary) {
    const auto r = run({"recommend", "--manifest", manifest(), "--profile", profile("np"), "--format", "json",
                        "--exclude-existing", "NP"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto& data = test::fixture();
    const auto task = make_task(data, load_profile(test::fixture_profile("np")), {"NP"});
    EXPECT_EQ(Json::parse(r.out), to_json(recommend(task, data.store)));
}

TEST(Cli, ExplainBadSite) {
    auto r = run({"explain", "--manifest", manifest(), "--profile", profile("np"), "--site", "030515410990"});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("UnknownSite"), std::string::npos) << r.err;
    r = run({"explain", "--manifest", manifest(), "--profile", profile("np"), "--site", "999"});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("WrongLength"), std::string::npos) << r.err;
    r = run({"explain", "--manifest", manifest(), "--profile", profile("np"), "--site", "030515410330"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(lines(r.out)[0].find("ELIMINATED"), std::string::npos);
    r = run({"explain", "--manifest", manifest(), "--profile", profile("walkthrough"), "--site", "120645410340",
             "--compare", "030525420330"});
    EXPECT_EQ(r.code, 0) << r.err;
}

TEST(Cli, EvaluateNp) {
    const auto r = run({"evaluate", "--manifest", manifest(), "--profile", profile("np"), "--chain", "NP", "--format",
                        "json"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto doc = Json::parse(r.out);
    EXPECT_NEAR(doc["metrics"]["recall"].get<double>() * 100, 87.5, 2.0);
    EXPECT_GT(doc["without_markets"].size(), 0u);
    const auto text = run({"evaluate", "--manifest", manifest(), "--profile", profile("np"), "--chain", "NP"});
    EXPECT_NE(text.out.find("recall 87.50%"), std::string::npos) << text.out;
    EXPECT_EQ(run({"evaluate", "--manifest", manifest(), "--profile", profile("np"), "--chain", "Aldi"}).code, 2);
}

TEST(Cli, DataErrors) {
    test::TempDir dir;
    auto r = run({"ingest", (dir / "missing.txt").string()});
    EXPECT_EQ(r.code, 2);
    auto doc = Json::parse(test::read_file(test::fixture_profile("np")));
    doc["criteria"][0]["bounds"] = {10000, 2000};
    test::write_file(dir / "bad.json", doc.dump());
    r = run({"recommend", "--manifest", manifest(), "--profile", (dir / "bad.json").string()});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("InvertedBounds"), std::string::npos) << r.err;
}

TEST(Cli, IngestAndFixture) {
    auto r = run({"ingest", manifest()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("91"), std::string::npos);  // sites

    test::TempDir dir;
    r = run({"fixture", "--seed", "1", "--out", dir.path().string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(test::read_file(dir / "series.csv"), test::read_file(test::fixture_dir() / "series.csv"));
}

TEST(Cli, Analyze) {
    auto r = run({"analyze", "correlate", "--manifest", manifest(), "--factors", "population,random_index"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(lines(r.out)[0], "factor,E-Center,Edeka,Lidl,NP");
    EXPECT_EQ(lines(r.out).size(), 7u);

    r = run({"analyze", "wilcoxon", "--manifest", manifest(), "--factor", "purchasing_power_index", "--chain-a", "NP",
             "--chain-b", "Lidl", "--focus", "030000000000", "--focus", "120000000000", "--format", "json"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto w = Json::parse(r.out);
    EXPECT_LT(w["p_value"].get<double>(), 0.05);

    r = run({"analyze", "buckets", "--manifest", manifest(), "--factor", "purchasing_power_index", "--chain", "NP"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("5.000 and below"), std::string::npos);

    r = run({"analyze", "buckets", "--manifest", manifest(), "--factor", "nope"});
    EXPECT_EQ(r.code, 2);
}
