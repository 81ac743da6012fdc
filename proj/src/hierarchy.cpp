#include "quis/hierarchy.hpp"

#include "quis/error.hpp"

#include <algorithm>

namespace quis {

Site make_site(const RegionKey& key, std::string name) {
    Site s{key, key.level(), std::move(name), std::nullopt};
    auto chain = ancestors(key);
    if (!chain.empty()) s.parent = chain.back();
    return s;
}

void SiteHierarchy::add_site(const Site& site) {
    const std::string& raw = site.key.raw();
    if (site.level != site.key.level())
        throw Error(ErrorCode::InconsistentKey, "site " + raw + " declared as " +
                                                    std::string(to_string(site.level)) + " but key encodes " +
                                                    std::string(to_string(site.key.level())));
    const auto chain = ancestors(site.key);
    if (site.level == HierarchyLevel::State) {
        if (site.parent)
            throw Error(ErrorCode::InconsistentKey, "state site " + raw + " must not have a parent");
    } else {
        if (!site.parent || *site.parent != chain.back())
            throw Error(ErrorCode::InconsistentKey,
                        "site " + raw + " must have parent " + chain.back().raw());
        if (!sites_.contains(*site.parent))
            throw Error(ErrorCode::MissingParent,
                        "parent " + site.parent->raw() + " of site " + raw + " is not loaded");
    }

    if (auto it = sites_.find(site.key); it != sites_.end()) {
        if (it->second == site) return;
        throw Error(ErrorCode::ConflictingSite, "site " + raw + " already present with different fields");
    }
    sites_.emplace(site.key, site);
    children_[site.key];
    if (site.parent) children_[*site.parent].insert(site.key);
}

const Site& SiteHierarchy::at(const RegionKey& key) const {
    if (const Site* s = find(key)) return *s;
    throw Error(ErrorCode::UnknownSite, "unknown site " + key.raw());
}

const Site* SiteHierarchy::find(const RegionKey& key) const {
    auto it = sites_.find(key);
    return it == sites_.end() ? nullptr : &it->second;
}

const std::set<RegionKey>& SiteHierarchy::children(const RegionKey& key) const {
    auto it = children_.find(key);
    if (it == children_.end()) throw Error(ErrorCode::UnknownSite, "unknown site " + key.raw());
    return it->second;
}

std::vector<RegionKey> SiteHierarchy::descendants_at(const RegionKey& key, HierarchyLevel level) const {
    const Site& root = at(key);
    if (level < root.level)
        throw Error(ErrorCode::LevelTooCoarse, "level " + std::string(to_string(level)) +
                                                   " is coarser than site " + key.raw());
    std::vector<RegionKey> frontier{key};
    for (auto l = root.level; l < level; l = static_cast<HierarchyLevel>(static_cast<int>(l) + 1)) {
        std::vector<RegionKey> next;
        for (const auto& k : frontier) {
            const auto& kids = children_.at(k);
            next.insert(next.end(), kids.begin(), kids.end());
        }
        frontier = std::move(next);
    }
    std::sort(frontier.begin(), frontier.end());
    return frontier;
}

std::vector<RegionKey> SiteHierarchy::sites_at(HierarchyLevel level) const {
    std::vector<RegionKey> out;
    for (const auto& [k, s] : sites_)
        if (s.level == level) out.push_back(k);
    return out;
}

bool SiteHierarchy::is_within(const RegionKey& key, const RegionKey& ancestor) const {
    const Site* s = find(key);
    while (s) {
        if (s->key == ancestor) return true;
        if (!s->parent) return false;
        s = find(*s->parent);
    }
    return false;
}

std::size_t SiteHierarchy::count(HierarchyLevel level) const {
    std::size_t n = 0;
    for (const auto& [k, s] : sites_)
        if (s.level == level) ++n;
    return n;
}

}  // namespace quis
