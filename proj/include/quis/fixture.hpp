#pragma once

#include "quis/ingest.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace quis {

// Placement rule for one chain in the synthetic dataset: `locations` focus
// municipalities carry the chain, of which `violations` fall below the
// chain's core-population requirement.
struct ChainPlan {
    std::string chain;
    std::string profile_file;
    double core_population = 0.0;
    std::size_t locations = 0;
    std::size_t violations = 0;
    double target_coverage_pct = 0.0;  // overlap rate the plan imitates

    double constructed_coverage_pct() const {
        return 100.0 * static_cast<double>(locations - violations) / static_cast<double>(locations);
    }
};

const std::vector<ChainPlan>& fixture_chain_plans();

inline constexpr int kFixtureBaseYear = 2016;

// Region keys of the two focus states and the city-state outside the focus.
inline constexpr const char* kFixtureFocusStates[] = {"030000000000", "120000000000"};
inline constexpr const char* kFixtureCityState = "110000000000";

// Writes manifest.txt, sites.csv, factors.csv, series.csv, stores.csv and
// profiles/*.json into `out_dir` (created if needed). Same seed, same bytes.
// Shape: 3 states / 8 counties / 20 districts / 60 municipalities, 12
// factors, 4 chains.
DatasetManifest generate_fixture(std::uint64_t seed, const std::filesystem::path& out_dir);

}  // namespace quis
