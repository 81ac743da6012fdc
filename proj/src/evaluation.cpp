#include "quis/evaluation.hpp"

#include <algorithm>
#include <set>

namespace quis {

RecommendationTask make_task(const Dataset& data, UserRequirementProfile profile,
                             const std::vector<std::string>& exclude_chains, std::optional<std::size_t> top,
                             double min_score) {
    RecommendationTask task;
    task.profile = std::move(profile);
    task.max_results = top;
    task.min_total_score = min_score;
    const auto known = data.chains();
    for (const auto& chain : exclude_chains) {
        if (std::find(known.begin(), known.end(), chain) == known.end())
            throw Error(ErrorCode::UnknownChain, "no store records for chain '" + chain + "'");
        for (const auto& k : data.chain_sites(chain)) task.exclude_sites.insert(k);
    }
    return task;
}

ChainEvaluation evaluate_chain(const Dataset& data, const UserRequirementProfile& profile, const std::string& chain,
                               double beta, std::size_t parallelism) {
    const auto known = data.chains();
    if (std::find(known.begin(), known.end(), chain) == known.end())
        throw Error(ErrorCode::UnknownChain, "no store records for chain '" + chain + "'");

    RecommendationTask task;
    task.profile = profile;
    task.parallelism = parallelism;
    const auto run = recommend(task, data.store);
    const auto universe = candidate_sites(profile, data.store.hierarchy());
    const std::set<RegionKey> in_universe(universe.begin(), universe.end());

    std::set<RegionKey> recommended;
    for (const auto& r : run.ranked) recommended.insert(r.evaluation.site);
    std::set<RegionKey> with_store;
    std::set<RegionKey> any_store;
    std::vector<StoreRecord> records;
    for (const auto& r : data.stores) {
        if (!in_universe.contains(r.site)) continue;
        any_store.insert(r.site);
        if (r.chain == chain) {
            with_store.insert(r.site);
            records.push_back(r);
        }
    }

    ChainEvaluation out;
    out.chain = chain;
    out.profile = profile.name;
    out.universe = universe.size();
    out.recommended = recommended.size();
    out.confusion = confusion(
        universe, [&](const RegionKey& k) { return with_store.contains(k); },
        [&](const RegionKey& k) { return recommended.contains(k); });
    out.metrics = metrics(out.confusion, beta);
    if (records.empty()) {
        out.coverage.chain = chain;
    } else {
        out.coverage = coverage_report(run.ranked, records, chain);
    }
    for (const auto& k : recommended)
        if (!any_store.contains(k)) out.without_markets.push_back(k);
    return out;
}

std::vector<RegionKey> analysis_sites(const Dataset& data, const std::vector<RegionKey>& focus) {
    const auto& h = data.store.hierarchy();
    if (focus.empty()) return h.sites_at(HierarchyLevel::Municipality);
    std::set<RegionKey> out;
    for (const auto& f : focus)
        for (auto& k : h.descendants_at(f, HierarchyLevel::Municipality)) out.insert(std::move(k));
    return {out.begin(), out.end()};
}

ChainCounts chain_counts(const Dataset& data) {
    ChainCounts out;
    for (const auto& r : data.stores) out[r.chain][r.site] += r.count;
    return out;
}

}  // namespace quis
