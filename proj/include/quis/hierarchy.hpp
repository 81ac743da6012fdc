#pragma once

#include "quis/region_key.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace quis {

struct Site {
    RegionKey key;
    HierarchyLevel level = HierarchyLevel::State;
    std::string name;
    std::optional<RegionKey> parent;

    bool operator==(const Site&) const = default;
};

// Builds a Site whose level and parent are derived from the key.
Site make_site(const RegionKey& key, std::string name);

// State -> county -> district -> municipality tree. Built once during ingestion,
// read-only afterwards.
class SiteHierarchy {
public:
    // Idempotent for exact duplicates. Throws MissingParent, ConflictingSite,
    // or InconsistentKey when the site's level/parent disagree with its key.
    void add_site(const Site& site);

    bool contains(const RegionKey& key) const { return sites_.contains(key); }
    const Site& at(const RegionKey& key) const;  // throws UnknownSite
    const Site* find(const RegionKey& key) const;

    const std::set<RegionKey>& children(const RegionKey& key) const;

    // All sites under `key` at `level`, sorted by key. Reflexive when
    // level == level_of(key).
    std::vector<RegionKey> descendants_at(const RegionKey& key, HierarchyLevel level) const;

    std::vector<RegionKey> sites_at(HierarchyLevel level) const;
    std::vector<RegionKey> roots() const { return sites_at(HierarchyLevel::State); }

    // True if `ancestor` equals `key` or lies on its parent chain.
    bool is_within(const RegionKey& key, const RegionKey& ancestor) const;

    std::size_t size() const noexcept { return sites_.size(); }
    std::size_t count(HierarchyLevel level) const;
    const std::map<RegionKey, Site>& sites() const noexcept { return sites_; }

    bool operator==(const SiteHierarchy&) const = default;

private:
    std::map<RegionKey, Site> sites_;
    std::map<RegionKey, std::set<RegionKey>> children_;
};

}  // namespace quis
