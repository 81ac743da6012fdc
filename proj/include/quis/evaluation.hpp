#pragma once

#include "quis/analysis.hpp"
#include "quis/ingest.hpp"
#include "quis/recommender.hpp"

#include <optional>
#include <string>
#include <vector>

namespace quis {

// Builds a task whose exclusion set holds every site where one of
// `exclude_chains` already operates. Throws UnknownChain.
RecommendationTask make_task(const Dataset& data, UserRequirementProfile profile,
                             const std::vector<std::string>& exclude_chains = {},
                             std::optional<std::size_t> top = std::nullopt, double min_score = 0.0);

// Recommendation quality against one chain's existing locations. The
// universe is the profile's candidate set; store records outside it are
// ignored.
struct ChainEvaluation {
    std::string chain;
    std::string profile;
    std::size_t universe = 0;
    std::size_t recommended = 0;
    ConfusionMatrix confusion;  // store yes/no x recommended yes/no
    MetricSet metrics;
    CoverageReport coverage;
    // Recommended sites where no chain has a store yet.
    std::vector<RegionKey> without_markets;
};

ChainEvaluation evaluate_chain(const Dataset& data, const UserRequirementProfile& profile, const std::string& chain,
                               double beta = 2.0, std::size_t parallelism = 1);

// Municipalities under any of `focus`; every municipality when empty.
std::vector<RegionKey> analysis_sites(const Dataset& data, const std::vector<RegionKey>& focus);

// Store counts per chain and site.
ChainCounts chain_counts(const Dataset& data);

}  // namespace quis
