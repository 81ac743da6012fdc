#pragma once

#include "quis/factor_store.hpp"
#include "quis/profile.hpp"
#include "quis/recommender.hpp"

#include <optional>
#include <string>
#include <vector>

namespace quis {

enum class Verdict : std::uint8_t { Recommended, Eliminated, BelowCutoff };

std::string_view to_string(Verdict v);

struct FactorUse {
    std::string factor;
    std::optional<double> value;
    std::optional<RegionKey> source;  // site whose series supplied the value
    int year = 0;
    std::string error;
};

struct CriterionExplanation {
    std::string id;
    std::string label;
    std::string expression;
    std::vector<FactorUse> factors_used;
    std::optional<double> raw_value;
    double bound_low = 0.0;
    double bound_high = 0.0;
    RatingStrategy strategy;
    double score = 0.0;
    double weight = 0.0;
    double contribution = 0.0;  // weight / total weight * score
    bool must_have = false;
    double threshold = 1.0;
    bool passed = false;
    std::string error;
};

struct Explanation {
    RegionKey site;
    std::string site_name;
    std::string profile;
    Verdict verdict = Verdict::Recommended;
    bool out_of_focus = false;
    std::string cutoff_reason;  // set for BelowCutoff
    double total_score = 0.0;
    std::vector<CriterionExplanation> criteria;  // profile order
    std::vector<std::string> top_positive;       // by contribution, descending
    std::vector<std::string> failures;           // failed must-haves, profile order
};

// `evaluation` must come from evaluate_site with task.profile, otherwise
// ProfileMismatch. `run` (the result of recommend(task, store)) is consulted
// for result truncation; without it the run is recomputed when needed.
Explanation explain_site(const SiteEvaluation& evaluation, const RecommendationTask& task, const FactorStore& store,
                         const RecommendationRun* run = nullptr);

// Evaluates and explains any site at the target level, recommended or not.
// Throws UnknownSite, WrongLevel.
Explanation explain_why_not(const RegionKey& site, const RecommendationTask& task, const FactorStore& store,
                            const RecommendationRun* run = nullptr);

struct CriterionDelta {
    std::string id;
    double score_a = 0.0;
    double score_b = 0.0;
    double delta = 0.0;  // score_a - score_b
    double weight = 0.0;
};

struct ExplanationDiff {
    RegionKey site_a;
    RegionKey site_b;
    std::vector<CriterionDelta> per_criterion;
    std::optional<std::string> decisive;  // max |delta * weight|, first on ties
    double total_a = 0.0;
    double total_b = 0.0;
};

// Throws ProfileMismatch when the explanations list different criteria.
ExplanationDiff explain_diff(const Explanation& a, const Explanation& b);

std::string render_text(const Explanation& e);
std::string render_text(const ExplanationDiff& d);

}  // namespace quis
