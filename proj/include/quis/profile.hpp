#pragma once

#include "quis/error.hpp"
#include "quis/expression.hpp"
#include "quis/factor_store.hpp"
#include "quis/region_key.hpp"

#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace quis {

enum class RatingKind : std::uint8_t { Linear, Boolean, Exponential, Logarithmic };
enum class Direction : std::uint8_t { Maximize, Minimize };
enum class OutOfBounds : std::uint8_t { Clamp, Zero };

std::string_view to_string(RatingKind k);
std::string_view to_string(Direction d);
std::string_view to_string(OutOfBounds o);
std::optional<RatingKind> parse_rating_kind(std::string_view s);
std::optional<Direction> parse_direction(std::string_view s);
std::optional<OutOfBounds> parse_out_of_bounds(std::string_view s);

struct RatingStrategy {
    RatingKind kind = RatingKind::Linear;
    double exponent = 2.0;  // Exponential only, > 0
    Direction direction = Direction::Maximize;
    OutOfBounds out_of_bounds = OutOfBounds::Clamp;

    bool operator==(const RatingStrategy&) const = default;
};

inline constexpr double kUnbounded = std::numeric_limits<double>::infinity();

struct DecisionCriterion {
    std::string id;
    std::string label;
    std::string expression_text;
    MeansEndExpr expression;
    double bound_low = 0.0;
    double bound_high = 1.0;  // may be +inf for one-sided Boolean criteria
    RatingStrategy strategy;
    double weight = 1.0;
    bool must_have = false;
    double threshold = 1.0;  // meaningful only when must_have

    bool operator==(const DecisionCriterion&) const = default;
};

// Convenience constructor that parses `expression_text`.
DecisionCriterion make_criterion(std::string id, std::string expression_text, double bound_low,
                                 double bound_high, RatingStrategy strategy = {}, double weight = 1.0,
                                 bool must_have = false, double threshold = 1.0);

struct UserRequirementProfile {
    std::string name;
    std::vector<DecisionCriterion> criteria;
    std::vector<RegionKey> region_focus;
    HierarchyLevel target_level = HierarchyLevel::Municipality;
    int year = 0;
    // Incompatible criterion pairs; both may not be active at once.
    std::vector<std::pair<std::string, std::string>> exclusions;

    const DecisionCriterion* find(const std::string& criterion_id) const;
    bool operator==(const UserRequirementProfile&) const = default;
};

// Degree of fulfillment in [0,1]. With t = (value - lo) / (hi - lo):
// out-of-bounds handling first (Clamp pins t, Zero scores 0), then Minimize
// flips t to 1 - t, then Linear t | Exponential t^k | Logarithmic
// ln(1 + 9t) / ln 10. Boolean scores 1 iff lo <= value <= hi and ignores
// direction and out-of-bounds handling. A non-Boolean strategy with an
// infinite bound degrades to the Boolean test.
double rate(double value, const DecisionCriterion& criterion);

struct CriterionResult {
    std::string criterion_id;
    std::optional<double> raw_value;  // absent when the expression could not be evaluated
    double score = 0.0;
    bool passed = false;  // resolved, and score >= threshold for must-have criteria
    std::string error;    // why raw_value is absent

    bool operator==(const CriterionResult&) const = default;
};

struct SiteEvaluation {
    RegionKey site;
    std::vector<CriterionResult> per_criterion;
    double total_score = 0.0;  // sum(w*s) / sum(w) over criteria with w > 0
    bool eliminated = false;
    std::vector<std::string> elimination_reasons;

    bool operator==(const SiteEvaluation&) const = default;
};

// Throws UnknownSite, or WrongLevel when the site is not at the profile's
// target level. Data gaps never throw; they surface in the result.
SiteEvaluation evaluate_site(const UserRequirementProfile& profile, const RegionKey& site,
                             const FactorStore& store);

// Diagnostics with Severity::Error block recommendation; warnings do not.
std::vector<Diagnostic> validate_profile(const UserRequirementProfile& profile, const FactorStore& store);

}  // namespace quis
