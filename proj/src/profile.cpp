#include "quis/profile.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace quis {

std::string_view to_string(RatingKind k) {
    switch (k) {
    case RatingKind::Linear: return "linear";
    case RatingKind::Boolean: return "boolean";
    case RatingKind::Exponential: return "exponential";
    case RatingKind::Logarithmic: return "logarithmic";
    }
    return "linear";
}

std::string_view to_string(Direction d) { return d == Direction::Maximize ? "maximize" : "minimize"; }
std::string_view to_string(OutOfBounds o) { return o == OutOfBounds::Clamp ? "clamp" : "zero"; }

std::optional<RatingKind> parse_rating_kind(std::string_view s) {
    if (s == "linear") return RatingKind::Linear;
    if (s == "boolean") return RatingKind::Boolean;
    if (s == "exponential") return RatingKind::Exponential;
    if (s == "logarithmic") return RatingKind::Logarithmic;
    return std::nullopt;
}

std::optional<Direction> parse_direction(std::string_view s) {
    if (s == "maximize") return Direction::Maximize;
    if (s == "minimize") return Direction::Minimize;
    return std::nullopt;
}

std::optional<OutOfBounds> parse_out_of_bounds(std::string_view s) {
    if (s == "clamp") return OutOfBounds::Clamp;
    if (s == "zero") return OutOfBounds::Zero;
    return std::nullopt;
}

DecisionCriterion make_criterion(std::string id, std::string expression_text, double bound_low,
                                 double bound_high, RatingStrategy strategy, double weight, bool must_have,
                                 double threshold) {
    DecisionCriterion c;
    c.id = std::move(id);
    c.label = c.id;
    c.expression = parse_expression(expression_text);
    c.expression_text = std::move(expression_text);
    c.bound_low = bound_low;
    c.bound_high = bound_high;
    c.strategy = strategy;
    c.weight = weight;
    c.must_have = must_have;
    c.threshold = threshold;
    return c;
}

const DecisionCriterion* UserRequirementProfile::find(const std::string& criterion_id) const {
    for (const auto& c : criteria)
        if (c.id == criterion_id) return &c;
    return nullptr;
}

static double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

double rate(double value, const DecisionCriterion& criterion) {
    const double lo = criterion.bound_low;
    const double hi = criterion.bound_high;
    const auto& s = criterion.strategy;
    if (std::isnan(value)) return 0.0;

    const bool within = lo <= value && value <= hi;
    if (s.kind == RatingKind::Boolean || !std::isfinite(lo) || !std::isfinite(hi)) return within ? 1.0 : 0.0;

    double t = (value - lo) / (hi - lo);
    if (t < 0.0 || t > 1.0) {
        if (s.out_of_bounds == OutOfBounds::Zero) return 0.0;
        t = clamp01(t);
    }
    if (s.direction == Direction::Minimize) t = 1.0 - t;

    double score = t;
    switch (s.kind) {
    case RatingKind::Linear: break;
    case RatingKind::Exponential: score = std::pow(t, s.exponent); break;
    case RatingKind::Logarithmic: score = std::log1p(9.0 * t) / std::log(10.0); break;
    case RatingKind::Boolean: break;
    }
    return std::isnan(score) ? 0.0 : clamp01(score);
}

SiteEvaluation evaluate_site(const UserRequirementProfile& profile, const RegionKey& site,
                             const FactorStore& store) {
    const Site& s = store.hierarchy().at(site);
    if (s.level != profile.target_level)
        throw Error(ErrorCode::WrongLevel, "site " + site.raw() + " is a " + std::string(to_string(s.level)) +
                                               ", profile targets " +
                                               std::string(to_string(profile.target_level)));

    SiteEvaluation out;
    out.site = site;
    out.per_criterion.reserve(profile.criteria.size());
    double weighted = 0.0;
    double weight_sum = 0.0;
    const EvalContext ctx{store, site, profile.year};

    for (const auto& c : profile.criteria) {
        CriterionResult r;
        r.criterion_id = c.id;
        try {
            r.raw_value = evaluate(c.expression, ctx);
        } catch (const Error& e) {
            r.error = e.what();
        }
        r.score = r.raw_value ? rate(*r.raw_value, c) : 0.0;
        r.passed = r.raw_value.has_value() && (!c.must_have || r.score >= c.threshold);
        if (c.must_have && !r.passed) {
            out.eliminated = true;
            out.elimination_reasons.push_back(c.id);
        }
        if (c.weight > 0.0) {
            weighted += c.weight * r.score;
            weight_sum += c.weight;
        }
        out.per_criterion.push_back(std::move(r));
    }
    out.total_score = weight_sum > 0.0 ? weighted / weight_sum : 0.0;
    return out;
}

namespace {

bool active(const DecisionCriterion& c) { return c.weight > 0.0 || c.must_have; }

}  // namespace

std::vector<Diagnostic> validate_profile(const UserRequirementProfile& profile, const FactorStore& store) {
    std::vector<Diagnostic> out;
    auto error = [&](std::string code, std::string subject, std::string msg) {
        out.push_back({Severity::Error, std::move(code), std::move(subject), std::move(msg)});
    };
    auto warn = [&](std::string code, std::string subject, std::string msg) {
        out.push_back({Severity::Warning, std::move(code), std::move(subject), std::move(msg)});
    };

    if (profile.criteria.empty()) error("EmptyProfile", "", "profile has no decision criteria");

    std::set<std::string> ids;
    double weight_sum = 0.0;
    for (const auto& c : profile.criteria) {
        if (c.id.empty()) error("MissingCriterionId", "", "criterion without id");
        if (!ids.insert(c.id).second) error("DuplicateCriterion", c.id, "criterion id used twice");

        if (c.expression.empty()) {
            error("EmptyExpression", c.id, "criterion has no means-end expression");
        } else {
            for (const auto& f : referenced_factors(c.expression)) {
                if (!store.find_descriptor(f)) error("UnknownFactor", c.id, "factor '" + f + "' is not declared");
            }
        }

        if (std::isnan(c.bound_low) || std::isnan(c.bound_high)) {
            error("InvalidBounds", c.id, "bounds must be numbers");
        } else if (!(c.bound_low < c.bound_high)) {
            error("InvertedBounds", c.id, "bound_low must be below bound_high");
        } else if (c.strategy.kind != RatingKind::Boolean &&
                   (!std::isfinite(c.bound_low) || !std::isfinite(c.bound_high))) {
            error("UnboundedScale", c.id,
                  std::string(to_string(c.strategy.kind)) + " rating needs finite bounds; use boolean");
        }
        if (c.strategy.kind == RatingKind::Exponential && !(c.strategy.exponent > 0.0 && std::isfinite(c.strategy.exponent)))
            error("InvalidExponent", c.id, "exponential rating needs a positive exponent");

        if (!std::isfinite(c.weight) || c.weight < 0.0) {
            error("InvalidWeight", c.id, "weight must be finite and non-negative");
        } else {
            weight_sum += c.weight;
        }
        if (c.must_have && !(c.threshold >= 0.0 && c.threshold <= 1.0))
            error("InvalidThreshold", c.id, "threshold must lie in [0,1]");
    }
    if (!profile.criteria.empty() && !(weight_sum > 0.0))
        error("ZeroTotalWeight", "", "at least one criterion needs a positive weight");

    if (profile.region_focus.empty()) warn("EmptyRegionFocus", "", "no region focus; nothing will be recommended");
    for (const auto& k : profile.region_focus) {
        const Site* s = store.hierarchy().find(k);
        if (!s) {
            error("UnknownRegion", k.raw(), "region focus site is not in the hierarchy");
        } else if (s->level > profile.target_level) {
            warn("FocusFinerThanTarget", k.raw(), "focus site lies below the target level and selects nothing");
        }
    }

    for (const auto& [a, b] : profile.exclusions) {
        const auto* ca = profile.find(a);
        const auto* cb = profile.find(b);
        if (!ca || !cb) {
            error("UnknownCriterion", a + "|" + b, "exclusion names an unknown criterion");
            continue;
        }
        if (active(*ca) && active(*cb))
            error("IncompatibleCriteria", a + "|" + b, "criteria are declared incompatible but both are active");
    }
    return out;
}

}  // namespace quis
