#include "quis/cli.hpp"
#include "quis/json_io.hpp"
#include "quis/service.hpp"

#include "../support/fixture_support.hpp"

#include <gtest/gtest.h>
#include <httplib.h>

#include <future>
#include <sstream>

using namespace quis;
namespace fs = std::filesystem;

namespace {

class ServiceTest : public ::testing::Test {
protected:
    void SetUp() override {
        for (const auto& e : fs::directory_iterator(test::fixture_dir() / "profiles"))
            fs::copy_file(e.path(), dir / e.path().filename().string());
        ServiceOptions options;
        options.profile_dir = dir.path();
        service = std::make_unique<Service>(std::make_shared<const Dataset>(test::fixture()), options);
        port = service->start(0);
        ASSERT_GT(port, 0);
    }
    void TearDown() override { service->stop(); }

    httplib::Client client() const {
        httplib::Client c("127.0.0.1", port);
        c.set_read_timeout(30);
        return c;
    }

    std::pair<int, Json> get(const std::string& path) const {
        auto r = client().Get(path);
        if (!r) return {0, nullptr};
        return {r->status, Json::parse(r->body)};
    }
    std::pair<int, Json> send(const std::string& method, const std::string& path, const std::string& body) const {
        auto c = client();
        auto r = method == "PUT" ? c.Put(path, body, "application/json") : c.Post(path, body, "application/json");
        if (!r) return {0, nullptr};
        return {r->status, Json::parse(r->body)};
    }

    static Json cli_json(std::vector<std::string> args) {
        std::ostringstream out, err;
        EXPECT_EQ(cli_run(args, out, err), 0) << err.str();
        return Json::parse(out.str());
    }

    test::TempDir dir;
    std::unique_ptr<Service> service;
    int port = 0;
};

std::string profile_path(const char* name) { return test::fixture_profile(name).string(); }

}  // namespace

TEST_F(ServiceTest, HealthAndCatalog) {
    auto [status, body] = get("/api/health");
    EXPECT_EQ(status, 200);
    EXPECT_EQ(body["status"], "ok");
    EXPECT_EQ(body["profiles"], 5);
    EXPECT_EQ(service->profile_count(), 5u);

    std::tie(status, body) = get("/api/sites?focus=120000000000&level=municipality");
    EXPECT_EQ(status, 200);
    EXPECT_EQ(body.size(), 30u);
    std::tie(status, body) = get("/api/sites?level=state");
    EXPECT_EQ(body.size(), 3u);
    std::tie(status, body) = get("/api/factors");
    EXPECT_EQ(body.size(), 12u);
    std::tie(status, body) = get("/api/profiles");
    EXPECT_EQ(body.size(), 5u);
    std::tie(status, body) = get("/api/profiles/np");
    EXPECT_EQ(status, 200);
    EXPECT_EQ(profile_from_json(body), load_profile(test::fixture_profile("np")));
}

TEST_F(ServiceTest, Series) {
    auto [status, body] = get("/api/factors/net_income/series?site=120645410340");
    EXPECT_EQ(status, 200);
    EXPECT_EQ(body["available"], true);
    EXPECT_EQ(body["source"], "120640000000");
    std::tie(status, body) = get("/api/factors/employees/series?site=110000000000");
    EXPECT_EQ(status, 200);
    EXPECT_EQ(body["available"], false);
}

TEST_F(ServiceTest, RecommendationsMatchCli) {
    for (const char* name : {"np", "lidl", "edeka", "ecenter", "walkthrough"}) {
        const auto cli = cli_json({"recommend", "--manifest", test::fixture_manifest().string(), "--profile",
                                   profile_path(name), "--format", "json"});
        auto [status, body] = send("POST", "/api/recommendations", Json{{"profile", name}}.dump());
        EXPECT_EQ(status, 200);
        EXPECT_EQ(body, cli) << name;
        // inline profile gives the same answer
        const Json inline_profile = Json::parse(test::read_file(test::fixture_profile(name)));
        std::tie(status, body) = send("POST", "/api/recommendations", Json{{"profile", inline_profile}}.dump());
        EXPECT_EQ(body, cli) << name;
    }
    const auto cli = cli_json({"recommend", "--manifest", test::fixture_manifest().string(), "--profile",
                               profile_path("walkthrough"), "--format", "json", "--top", "4", "--exclude-existing",
                               "Lidl", "--min-score", "0.2"});
    auto [status, body] = send(
        "POST", "/api/recommendations",
        Json{{"profile", "walkthrough"}, {"top", 4}, {"exclude_existing", "Lidl"}, {"min_score", 0.2}}.dump());
    EXPECT_EQ(body, cli);
}

TEST_F(ServiceTest, EvaluationMatchesCli) {
    const auto cli = cli_json({"evaluate", "--manifest", test::fixture_manifest().string(), "--profile",
                               profile_path("np"), "--chain", "NP", "--format", "json"});
    auto [status, body] = get("/api/evaluation?profile=np&chain=NP");
    EXPECT_EQ(status, 200);
    EXPECT_EQ(body, cli);
}

TEST_F(ServiceTest, Explanations) {
    auto [status, body] = get("/api/explanations?site=030515410330&profile=np");
    EXPECT_EQ(status, 200);
    EXPECT_EQ(body["verdict"], "eliminated");
    std::tie(status, body) = get("/api/explanations?site=110015410310&profile=np");
    EXPECT_EQ(body["out_of_focus"], true);
    std::tie(status, body) = get("/api/explanations?site=120645410340&profile=walkthrough&compare=030525420330");
    EXPECT_EQ(status, 200);
    EXPECT_TRUE(body.contains("diff"));
}

TEST_F(ServiceTest, ProfileWrites) {
    auto doc = Json::parse(test::read_file(test::fixture_profile("np")));
    doc["criteria"][0]["bounds"] = {10000, 2000};
    auto [status, body] = send("PUT", "/api/profiles/broken", doc.dump());
    EXPECT_EQ(status, 422);
    ASSERT_EQ(body["diagnostics"].size(), 1u);
    EXPECT_EQ(body["diagnostics"][0]["code"], "InvertedBounds");
    EXPECT_FALSE(fs::exists(dir / "broken.json"));

    doc["criteria"][0]["bounds"] = {3000, "inf"};
    std::tie(status, body) = send("PUT", "/api/profiles/np3000", doc.dump());
    EXPECT_EQ(status, 201);
    EXPECT_EQ(load_profile(dir / "np3000.json").criteria[0].bound_low, 3000.0);
    std::tie(status, body) = send("PUT", "/api/profiles/np3000", doc.dump());
    EXPECT_EQ(status, 200);
    EXPECT_EQ(service->profile_count(), 6u);

    std::tie(status, body) = send("PUT", "/api/profiles/np3000", "{ nope");
    EXPECT_EQ(status, 400);
    std::tie(status, body) = send("PUT", "/api/profiles/x", R"({"name": "x"})");
    EXPECT_EQ(status, 422);
    std::tie(status, body) = send("PUT", "/api/profiles/..bad", doc.dump());
    EXPECT_EQ(status, 400);

    // a restarted service picks the saved profile up
    ServiceOptions options;
    options.profile_dir = dir.path();
    Service again(std::make_shared<const Dataset>(test::fixture()), options);
    EXPECT_EQ(again.profile_count(), 6u);
}

TEST_F(ServiceTest, ErrorStatuses) {
    EXPECT_EQ(get("/api/profiles/nope").first, 404);
    EXPECT_EQ(get("/api/explanations?site=030515410990&profile=np").first, 404);
    EXPECT_EQ(get("/api/explanations?site=999&profile=np").first, 400);
    EXPECT_EQ(get("/api/explanations?site=030510000000&profile=np").first, 400);
    EXPECT_EQ(get("/api/explanations?profile=np").first, 400);
    EXPECT_EQ(get("/api/factors/nope/series?site=120645410340").first, 404);
    EXPECT_EQ(get("/api/evaluation?profile=np&chain=Aldi").first, 404);
    EXPECT_EQ(get("/api/sites?level=planet").first, 400);
    EXPECT_EQ(send("POST", "/api/recommendations", "[1,2]").first, 400);
    EXPECT_EQ(send("POST", "/api/recommendations", R"({"profile": "np", "top": 0})").first, 400);
    EXPECT_EQ(send("POST", "/api/recommendations", R"({"profile": "nope"})").first, 404);
    const auto [status, body] = get("/api/profiles/nope");
    EXPECT_EQ(body["error"]["code"], "UnknownProfile");
}

TEST_F(ServiceTest, Analysis) {
    auto [status, body] = get("/api/analysis/correlation?factors=population,random_index");
    EXPECT_EQ(status, 200);
    std::tie(status, body) = get("/api/analysis/buckets?factor=purchasing_power_index&chain=NP");
    EXPECT_EQ(status, 200);
    std::tie(status, body) = get("/api/analysis/buckets?factor=nope");
    EXPECT_EQ(status, 404);
}

TEST_F(ServiceTest, RepeatedAndConcurrentRequests) {
    const std::string body = Json{{"profile", "walkthrough"}}.dump();
    const auto first = client().Post("/api/recommendations", body, "application/json");
    ASSERT_TRUE(first);
    for (int i = 0; i < 3; ++i) EXPECT_EQ(client().Post("/api/recommendations", body, "application/json")->body, first->body);

    const auto expl = client().Get("/api/explanations?site=120645410340&profile=walkthrough");
    std::vector<std::future<bool>> readers;
    for (int i = 0; i < 50; ++i) {
        readers.push_back(std::async(std::launch::async, [&, i] {
            httplib::Client c("127.0.0.1", port);
            c.set_read_timeout(60);
            if (i % 2 == 0) {
                auto r = c.Post("/api/recommendations", body, "application/json");
                return r && r->status == 200 && r->body == first->body;
            }
            auto r = c.Get("/api/explanations?site=120645410340&profile=walkthrough");
            return r && r->status == 200 && r->body == expl->body;
        }));
    }
    for (auto& r : readers) EXPECT_TRUE(r.get());
}
