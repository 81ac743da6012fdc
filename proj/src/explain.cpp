#include "quis/explain.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

namespace quis {

std::string_view to_string(Verdict v) {
    switch (v) {
    case Verdict::Recommended: return "recommended";
    case Verdict::Eliminated: return "eliminated";
    case Verdict::BelowCutoff: return "below_cutoff";
    }
    return "?";
}

namespace {

bool in_focus(const RegionKey& site, const UserRequirementProfile& profile, const SiteHierarchy& h) {
    for (const auto& f : profile.region_focus) {
        const Site* s = h.find(f);
        if (s && s->level <= profile.target_level && h.is_within(site, f)) return true;
    }
    return false;
}

bool in_run(const RegionKey& site, const RecommendationRun& run) {
    return std::any_of(run.ranked.begin(), run.ranked.end(),
                       [&](const Recommendation& r) { return r.evaluation.site == site; });
}

std::string num(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string fixed(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

}  // namespace

Explanation explain_site(const SiteEvaluation& evaluation, const RecommendationTask& task, const FactorStore& store,
                         const RecommendationRun* run) {
    const auto& profile = task.profile;
    if (evaluation.per_criterion.size() != profile.criteria.size())
        throw Error(ErrorCode::ProfileMismatch, "evaluation has " + std::to_string(evaluation.per_criterion.size()) +
                                                    " criteria, profile '" + profile.name + "' has " +
                                                    std::to_string(profile.criteria.size()));
    for (std::size_t i = 0; i < profile.criteria.size(); ++i) {
        if (evaluation.per_criterion[i].criterion_id != profile.criteria[i].id)
            throw Error(ErrorCode::ProfileMismatch, "evaluation criterion '" + evaluation.per_criterion[i].criterion_id +
                                                        "' does not match profile criterion '" +
                                                        profile.criteria[i].id + "'");
    }
    const auto& hierarchy = store.hierarchy();
    const Site& site = hierarchy.at(evaluation.site);
    if (site.level != profile.target_level)
        throw Error(ErrorCode::ProfileMismatch, "site " + evaluation.site.raw() + " is not at the profile's level");

    Explanation e;
    e.site = evaluation.site;
    e.site_name = site.name;
    e.profile = profile.name;
    e.total_score = evaluation.total_score;
    e.out_of_focus = !in_focus(evaluation.site, profile, hierarchy);

    double weight_sum = 0.0;
    for (const auto& c : profile.criteria)
        if (c.weight > 0.0) weight_sum += c.weight;

    for (std::size_t i = 0; i < profile.criteria.size(); ++i) {
        const auto& c = profile.criteria[i];
        const auto& r = evaluation.per_criterion[i];
        CriterionExplanation ce;
        ce.id = c.id;
        ce.label = c.label;
        ce.expression = c.expression_text;
        ce.raw_value = r.raw_value;
        ce.bound_low = c.bound_low;
        ce.bound_high = c.bound_high;
        ce.strategy = c.strategy;
        ce.score = r.score;
        ce.weight = c.weight;
        ce.contribution = (c.weight > 0.0 && weight_sum > 0.0) ? c.weight / weight_sum * r.score : 0.0;
        ce.must_have = c.must_have;
        ce.threshold = c.threshold;
        ce.passed = r.passed;
        ce.error = r.error;
        for (const auto& f : referenced_factors(c.expression)) {
            FactorUse use;
            use.factor = f;
            use.year = profile.year;
            try {
                const auto rv = store.resolve(f, evaluation.site, profile.year);
                use.value = rv.value;
                use.source = rv.source;
                use.year = rv.year;
            } catch (const Error& err) {
                use.error = err.what();
            }
            ce.factors_used.push_back(std::move(use));
        }
        if (c.must_have && !r.passed) e.failures.push_back(c.id);
        e.criteria.push_back(std::move(ce));
    }

    std::vector<std::size_t> order(e.criteria.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return e.criteria[a].contribution > e.criteria[b].contribution;
    });
    for (auto i : order)
        if (e.criteria[i].contribution > 0.0) e.top_positive.push_back(e.criteria[i].id);

    if (evaluation.eliminated) {
        e.verdict = Verdict::Eliminated;
    } else if (e.out_of_focus) {
        e.verdict = Verdict::BelowCutoff;
        e.cutoff_reason = "outside the region focus";
    } else if (evaluation.total_score < task.min_total_score) {
        e.verdict = Verdict::BelowCutoff;
        e.cutoff_reason = "total score " + fixed(evaluation.total_score) + " below minimum " +
                          fixed(task.min_total_score);
    } else if (task.exclude_sites.contains(evaluation.site)) {
        e.verdict = Verdict::BelowCutoff;
        e.cutoff_reason = "excluded site";
    } else if (task.max_results) {
        std::optional<RecommendationRun> own;
        if (!run) run = &own.emplace(recommend(task, store));
        if (in_run(evaluation.site, *run)) {
            e.verdict = Verdict::Recommended;
        } else {
            e.verdict = Verdict::BelowCutoff;
            e.cutoff_reason = "not among the top " + std::to_string(*task.max_results);
        }
    } else {
        e.verdict = Verdict::Recommended;
    }
    return e;
}

Explanation explain_why_not(const RegionKey& site, const RecommendationTask& task, const FactorStore& store,
                            const RecommendationRun* run) {
    return explain_site(evaluate_site(task.profile, site, store), task, store, run);
}

ExplanationDiff explain_diff(const Explanation& a, const Explanation& b) {
    if (a.criteria.size() != b.criteria.size())
        throw Error(ErrorCode::ProfileMismatch, "explanations cover different criteria");
    ExplanationDiff d;
    d.site_a = a.site;
    d.site_b = b.site;
    d.total_a = a.total_score;
    d.total_b = b.total_score;
    double best = -1.0;
    for (std::size_t i = 0; i < a.criteria.size(); ++i) {
        const auto& ca = a.criteria[i];
        const auto& cb = b.criteria[i];
        if (ca.id != cb.id) throw Error(ErrorCode::ProfileMismatch, "criterion '" + ca.id + "' vs '" + cb.id + "'");
        CriterionDelta cd{ca.id, ca.score, cb.score, ca.score - cb.score, ca.weight};
        const double impact = std::abs(cd.delta * cd.weight);
        if (impact > best) {
            best = impact;
            d.decisive = cd.id;
        }
        d.per_criterion.push_back(cd);
    }
    return d;
}

std::string render_text(const Explanation& e) {
    std::ostringstream out;
    out << e.site.raw() << ' ' << e.site_name << ": ";
    switch (e.verdict) {
    case Verdict::Recommended: out << "RECOMMENDED"; break;
    case Verdict::Eliminated: {
        out << "ELIMINATED by ";
        for (std::size_t i = 0; i < e.failures.size(); ++i) out << (i ? ", " : "") << e.failures[i];
        break;
    }
    case Verdict::BelowCutoff: out << "BELOW CUTOFF (" << e.cutoff_reason << ')'; break;
    }
    out << ", total " << fixed(e.total_score);
    if (e.out_of_focus) out << " [out of focus]";
    out << '\n';
    out << "profile: " << e.profile << '\n';

    for (const auto& c : e.criteria) {
        out << "  " << c.id;
        if (!c.label.empty()) out << " (" << c.label << ')';
        out << ": value " << (c.raw_value ? num(*c.raw_value) : std::string("n/a")) << ", bounds [" << num(c.bound_low)
            << ", " << num(c.bound_high) << "] " << to_string(c.strategy.kind);
        if (c.strategy.direction == Direction::Minimize) out << " minimize";
        out << ", score " << fixed(c.score) << ", weight " << num(c.weight) << ", contribution "
            << fixed(c.contribution);
        if (c.must_have) out << ", must-have >= " << num(c.threshold) << (c.passed ? " passed" : " FAILED");
        out << '\n';
        for (const auto& f : c.factors_used) {
            out << "    " << f.factor << " = ";
            if (f.value) {
                out << num(*f.value) << " (" << f.year;
                if (f.source && *f.source != e.site) out << ", from " << f.source->raw();
                out << ')';
            } else {
                out << "n/a (" << f.error << ')';
            }
            out << '\n';
        }
        if (!c.error.empty() && c.raw_value == std::nullopt) out << "    error: " << c.error << '\n';
    }
    if (!e.top_positive.empty()) {
        out << "strongest: ";
        for (std::size_t i = 0; i < e.top_positive.size(); ++i) out << (i ? ", " : "") << e.top_positive[i];
        out << '\n';
    }
    return out.str();
}

std::string render_text(const ExplanationDiff& d) {
    std::ostringstream out;
    out << d.site_a.raw() << " vs " << d.site_b.raw() << ": total " << fixed(d.total_a) << " vs " << fixed(d.total_b)
        << '\n';
    for (const auto& c : d.per_criterion) {
        out << "  " << c.id << ": " << fixed(c.score_a) << " vs " << fixed(c.score_b) << ", delta " << fixed(c.delta)
            << ", weight " << num(c.weight) << (d.decisive == c.id ? "  <- decisive" : "") << '\n';
    }
    return out.str();
}

}  // namespace quis
