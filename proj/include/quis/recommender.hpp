#pragma once

#include "quis/factor_store.hpp"
#include "quis/profile.hpp"

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace quis {

struct StoreRecord;

struct RecommendationTask {
    UserRequirementProfile profile;
    std::optional<std::size_t> max_results;
    double min_total_score = 0.0;
    // Post-filter, e.g. sites where a chain already operates.
    std::set<RegionKey> exclude_sites;
    // Worker threads for per-site evaluation; results do not depend on it.
    std::size_t parallelism = 1;
};

struct Recommendation {
    std::size_t rank = 0;
    SiteEvaluation evaluation;

    bool operator==(const Recommendation&) const = default;
};

struct RecommendationRun {
    std::vector<Recommendation> ranked;
    std::size_t candidates = 0;
    std::size_t eliminated = 0;
    std::size_t below_cutoff = 0;  // not eliminated, total < min_total_score
    std::size_t excluded = 0;      // removed by exclude_sites
    std::size_t truncated = 0;     // cut by max_results
    std::map<std::string, std::size_t> elimination_reasons;  // criterion id -> sites
};

// All sites at the profile's target level inside any region-focus site.
// Throws UnknownSite for a focus key missing from the hierarchy.
std::vector<RegionKey> candidate_sites(const UserRequirementProfile& profile, const SiteHierarchy& hierarchy);

// Throws DiagnosticError{ProfileRejected} when validate_profile reports
// errors. Sorted by total score descending, ties by region key ascending.
RecommendationRun recommend(const RecommendationTask& task, const FactorStore& store);

struct CoverageReport {
    std::string chain;
    std::size_t existing = 0;
    std::size_t recommended_among_existing = 0;
    double percentage = 0.0;  // 0..100
};

// Share of the chain's existing locations that were recommended. Throws
// UnknownChain when no record carries `chain`.
CoverageReport coverage_report(const std::vector<Recommendation>& recommendations,
                               const std::vector<StoreRecord>& actual, const std::string& chain);

}  // namespace quis
