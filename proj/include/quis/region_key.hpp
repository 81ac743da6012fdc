#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace quis {

// Coarse to fine. The deprecated government-district digit has no level.
enum class HierarchyLevel : std::uint8_t { State = 0, County = 1, District = 2, Municipality = 3 };

std::string_view to_string(HierarchyLevel level);
std::optional<HierarchyLevel> parse_level(std::string_view text);

// Twelve-digit administrative key: state(2) gov_district(1) county(2)
// district(4) municipality(3). Sites above municipality level carry trailing
// zero segments.
class RegionKey {
public:
    static constexpr std::size_t kLength = 12;
    static constexpr std::array<std::size_t, 5> kSegmentWidths{2, 1, 2, 4, 3};

    RegionKey() = default;

    const std::string& raw() const noexcept { return raw_; }
    int state() const { return segment(0); }
    int gov_district() const { return segment(1); }
    int county() const { return segment(2); }
    int district() const { return segment(3); }
    int municipality() const { return segment(4); }

    HierarchyLevel level() const;

    // The key with every segment finer than `level` zeroed. The state
    // ancestor also drops the government-district digit.
    RegionKey truncated(HierarchyLevel level) const;

    // Segment-wise pretty form, e.g. "12 0 64 5410 340".
    std::string spaced() const;

    auto operator<=>(const RegionKey&) const = default;
    bool operator==(const RegionKey&) const = default;

private:
    friend RegionKey parse_region_key(std::string_view raw);
    explicit RegionKey(std::string raw) : raw_(std::move(raw)) {}
    int segment(std::size_t index) const;

    std::string raw_;
};

// Throws Error{WrongLength | NonDigit | ZeroState | InconsistentKey}.
RegionKey parse_region_key(std::string_view raw);

inline HierarchyLevel level_of(const RegionKey& key) { return key.level(); }

// Coarse to fine, excluding `key` itself.
std::vector<RegionKey> ancestors(const RegionKey& key);

}  // namespace quis

template <>
struct std::hash<quis::RegionKey> {
    std::size_t operator()(const quis::RegionKey& k) const noexcept {
        return std::hash<std::string>{}(k.raw());
    }
};
