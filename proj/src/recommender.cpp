#include "quis/recommender.hpp"

#include "quis/ingest.hpp"

#include <algorithm>
#include <future>

namespace quis {

std::vector<RegionKey> candidate_sites(const UserRequirementProfile& profile, const SiteHierarchy& hierarchy) {
    std::set<RegionKey> out;
    for (const auto& focus : profile.region_focus) {
        const Site& s = hierarchy.at(focus);
        if (s.level > profile.target_level) continue;
        for (auto& k : hierarchy.descendants_at(focus, profile.target_level)) out.insert(std::move(k));
    }
    return {out.begin(), out.end()};
}

static std::vector<SiteEvaluation> evaluate_all(const UserRequirementProfile& profile,
                                                const std::vector<RegionKey>& sites, const FactorStore& store,
                                                std::size_t parallelism) {
    std::vector<SiteEvaluation> out(sites.size());
    auto work = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) out[i] = evaluate_site(profile, sites[i], store);
    };
    const std::size_t workers = std::clamp<std::size_t>(parallelism, 1, std::max<std::size_t>(sites.size(), 1));
    if (workers == 1) {
        work(0, sites.size());
        return out;
    }
    std::vector<std::future<void>> jobs;
    const std::size_t chunk = (sites.size() + workers - 1) / workers;
    for (std::size_t b = 0; b < sites.size(); b += chunk)
        jobs.push_back(std::async(std::launch::async, work, b, std::min(sites.size(), b + chunk)));
    for (auto& j : jobs) j.get();
    return out;
}

RecommendationRun recommend(const RecommendationTask& task, const FactorStore& store) {
    if (task.max_results && *task.max_results == 0) throw Error(ErrorCode::Usage, "max_results must be at least 1");
    auto diags = validate_profile(task.profile, store);
    if (has_errors(diags)) {
        std::erase_if(diags, [](const Diagnostic& d) { return d.severity != Severity::Error; });
        throw DiagnosticError(ErrorCode::ProfileRejected, std::move(diags));
    }

    const auto sites = candidate_sites(task.profile, store.hierarchy());
    auto evaluations = evaluate_all(task.profile, sites, store, task.parallelism);

    RecommendationRun run;
    run.candidates = sites.size();
    std::vector<SiteEvaluation> kept;
    for (auto& e : evaluations) {
        if (e.eliminated) {
            ++run.eliminated;
            for (const auto& r : e.elimination_reasons) ++run.elimination_reasons[r];
            continue;
        }
        if (e.total_score < task.min_total_score) {
            ++run.below_cutoff;
            continue;
        }
        if (task.exclude_sites.contains(e.site)) {
            ++run.excluded;
            continue;
        }
        kept.push_back(std::move(e));
    }
    std::sort(kept.begin(), kept.end(), [](const SiteEvaluation& a, const SiteEvaluation& b) {
        if (a.total_score != b.total_score) return a.total_score > b.total_score;
        return a.site < b.site;
    });
    if (task.max_results && kept.size() > *task.max_results) {
        run.truncated = kept.size() - *task.max_results;
        kept.resize(*task.max_results);
    }
    run.ranked.reserve(kept.size());
    for (std::size_t i = 0; i < kept.size(); ++i) run.ranked.push_back({i + 1, std::move(kept[i])});
    return run;
}

CoverageReport coverage_report(const std::vector<Recommendation>& recommendations,
                               const std::vector<StoreRecord>& actual, const std::string& chain) {
    std::set<RegionKey> existing;
    for (const auto& r : actual)
        if (r.chain == chain) existing.insert(r.site);
    if (existing.empty()) throw Error(ErrorCode::UnknownChain, "no store records for chain '" + chain + "'");

    std::set<RegionKey> recommended;
    for (const auto& r : recommendations) recommended.insert(r.evaluation.site);

    CoverageReport rep;
    rep.chain = chain;
    rep.existing = existing.size();
    for (const auto& k : existing)
        if (recommended.contains(k)) ++rep.recommended_among_existing;
    rep.percentage = 100.0 * static_cast<double>(rep.recommended_among_existing) / static_cast<double>(rep.existing);
    return rep;
}

}  // namespace quis
