#include "quis/region_key.hpp"

#include "quis/error.hpp"

namespace quis {

namespace {

constexpr std::array<std::size_t, 5> kOffsets{0, 2, 3, 5, 9};

// Segment index of the finest segment belonging to each level.
constexpr std::size_t level_segment(HierarchyLevel level) {
    switch (level) {
    case HierarchyLevel::State: return 0;
    case HierarchyLevel::County: return 2;
    case HierarchyLevel::District: return 3;
    case HierarchyLevel::Municipality: return 4;
    }
    return 0;
}

bool all_zero(std::string_view s) {
    return s.find_first_not_of('0') == std::string_view::npos;
}

}  // namespace

std::string_view to_string(HierarchyLevel level) {
    switch (level) {
    case HierarchyLevel::State: return "state";
    case HierarchyLevel::County: return "county";
    case HierarchyLevel::District: return "district";
    case HierarchyLevel::Municipality: return "municipality";
    }
    return "state";
}

std::optional<HierarchyLevel> parse_level(std::string_view text) {
    if (text == "state") return HierarchyLevel::State;
    if (text == "county") return HierarchyLevel::County;
    if (text == "district") return HierarchyLevel::District;
    if (text == "municipality") return HierarchyLevel::Municipality;
    return std::nullopt;
}

int RegionKey::segment(std::size_t index) const {
    int v = 0;
    for (std::size_t i = 0; i < kSegmentWidths[index]; ++i)
        v = v * 10 + (raw_[kOffsets[index] + i] - '0');
    return v;
}

HierarchyLevel RegionKey::level() const {
    if (municipality() != 0) return HierarchyLevel::Municipality;
    if (district() != 0) return HierarchyLevel::District;
    if (county() != 0) return HierarchyLevel::County;
    return HierarchyLevel::State;
}

RegionKey RegionKey::truncated(HierarchyLevel level) const {
    std::string out = raw_;
    std::size_t keep = kOffsets[level_segment(level)] + kSegmentWidths[level_segment(level)];
    if (level == HierarchyLevel::State) keep = kSegmentWidths[0];
    for (std::size_t i = keep; i < out.size(); ++i) out[i] = '0';
    return RegionKey(std::move(out));
}

std::string RegionKey::spaced() const {
    std::string out;
    for (std::size_t s = 0; s < kSegmentWidths.size(); ++s) {
        if (s) out += ' ';
        out.append(raw_, kOffsets[s], kSegmentWidths[s]);
    }
    return out;
}

RegionKey parse_region_key(std::string_view raw) {
    if (raw.size() != RegionKey::kLength)
        throw Error(ErrorCode::WrongLength, "region key '" + std::string(raw) + "' has " +
                                                std::to_string(raw.size()) + " characters, expected 12");
    for (std::size_t i = 0; i < raw.size(); ++i) {
        if (raw[i] < '0' || raw[i] > '9')
            throw Error(ErrorCode::NonDigit, "region key '" + std::string(raw) +
                                                 "' has a non-digit at position " + std::to_string(i));
    }
    if (raw.substr(0, 2) == "00")
        throw Error(ErrorCode::ZeroState, "region key '" + std::string(raw) + "' has state segment 00");

    const bool county_zero = all_zero(raw.substr(kOffsets[2], 2));
    const bool district_zero = all_zero(raw.substr(kOffsets[3], 4));
    const bool municipality_zero = all_zero(raw.substr(kOffsets[4], 3));
    if ((county_zero && !(district_zero && municipality_zero)) || (district_zero && !municipality_zero))
        throw Error(ErrorCode::InconsistentKey,
                    "region key '" + std::string(raw) + "' has a nonzero segment below a zero segment");
    return RegionKey(std::string(raw));
}

std::vector<RegionKey> ancestors(const RegionKey& key) {
    std::vector<RegionKey> out;
    const auto lvl = static_cast<int>(key.level());
    for (int l = 0; l < lvl; ++l) out.push_back(key.truncated(static_cast<HierarchyLevel>(l)));
    return out;
}

}  // namespace quis
