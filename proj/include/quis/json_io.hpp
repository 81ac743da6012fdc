#pragma once

#include "quis/analysis.hpp"
#include "quis/evaluation.hpp"
#include "quis/explain.hpp"
#include "quis/ingest.hpp"
#include "quis/profile.hpp"
#include "quis/recommender.hpp"

#include <json.hpp>

#include <filesystem>

namespace quis {

using Json = nlohmann::ordered_json;

// Profile documents. Bounds are numbers or the strings "inf" / "-inf".
//
//   {"name": "np", "year": 2016, "target_level": "municipality",
//    "region_focus": ["030000000000"],
//    "criteria": [{"id": "inhabitants", "label": "...", "expression": "population",
//                  "bounds": [2500, "inf"],
//                  "strategy": {"kind": "boolean", "direction": "maximize",
//                               "out_of_bounds": "clamp", "exponent": 2},
//                  "weight": 1, "must_have": true, "threshold": 1}],
//    "exclusions": [["a", "b"]]}
//
// Structural problems (missing fields, bad enum names, unparsable keys or
// expressions) throw DiagnosticError{InvalidProfile} with one diagnostic per
// problem. Semantic checks belong to validate_profile.
UserRequirementProfile profile_from_json(const Json& doc);
Json to_json(const UserRequirementProfile& profile);

UserRequirementProfile load_profile(const std::filesystem::path& path);
// Writes a sibling temporary file, then renames it over `path`.
void save_profile(const UserRequirementProfile& profile, const std::filesystem::path& path);

Json to_json(const Diagnostic& d);
Json to_json(const std::vector<Diagnostic>& ds);
Json to_json(const Site& s);
Json to_json(const FactorDescriptor& d);
Json to_json(const FactorSeries& s);
Json to_json(const CriterionResult& r);
Json to_json(const SiteEvaluation& e);
Json to_json(const RecommendationRun& run);
Json to_json(const CoverageReport& c);
Json to_json(const ConfusionMatrix& m);
Json to_json(const MetricSet& m);
Json to_json(const CorrelationMatrix& m);
Json to_json(const BucketReport& b);
Json to_json(const WilcoxonResult& w);
Json to_json(const Explanation& e);
Json to_json(const ExplanationDiff& d);
Json to_json(const ChainEvaluation& e);

}  // namespace quis
