#pragma once

#include "quis/error.hpp"
#include "quis/hierarchy.hpp"

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace quis {

enum class Aggregation : std::uint8_t {
    Sum,             // parent = sum over municipality descendants
    InheritDown,     // children take the nearest ancestor's value
    MeanOfChildren,  // parent = arithmetic mean over direct children
};

std::string_view to_string(Aggregation a);
std::optional<Aggregation> parse_aggregation(std::string_view text);

struct FactorDescriptor {
    std::string id;
    std::string name;
    std::string unit;
    Aggregation aggregation = Aggregation::Sum;

    bool operator==(const FactorDescriptor&) const = default;
};

struct FactorSeries {
    std::string factor;
    RegionKey site;
    std::vector<int> years;  // strictly ascending
    std::vector<double> values;

    std::optional<double> at(int year) const;
    bool operator==(const FactorSeries&) const = default;
};

// A looked-up value together with the site whose series supplied it. For
// inherited values `source` is the carrying ancestor.
struct ResolvedValue {
    double value = 0.0;
    RegionKey source;
    int year = 0;
};

class FactorStore {
public:
    explicit FactorStore(std::shared_ptr<const SiteHierarchy> hierarchy);

    // Throws DuplicateKey when the id is already declared differently.
    void declare(const FactorDescriptor& descriptor);

    // Replaces any prior series for the same (factor, site). Throws
    // UnknownFactor, UnknownSite, LengthMismatch, UnsortedYears.
    void put_series(FactorSeries series);

    const FactorDescriptor& descriptor(const std::string& id) const;
    const FactorDescriptor* find_descriptor(const std::string& id) const;
    const FactorSeries* find_series(const std::string& factor, const RegionKey& site) const;

    // Own series first; InheritDown factors then fall back to the nearest
    // ancestor carrying a series. The first series found is authoritative: a
    // missing year there is NoValue, never interpolated.
    double value(const std::string& factor, const RegionKey& site, int year) const;
    ResolvedValue resolve(const std::string& factor, const RegionKey& site, int year) const;

    // The series `value` would read from at `site`, or throws NoValue.
    const FactorSeries& resolve_series(const std::string& factor, const RegionKey& site) const;

    // Recomputes a Sum / MeanOfChildren factor from the hierarchy below
    // `site`, ignoring any stored value at `site` itself.
    double aggregate_up(const std::string& factor, const RegionKey& site, int year) const;

    // (year, value) at the last year of the resolved series.
    std::pair<int, double> latest_value(const std::string& factor, const RegionKey& site) const;

    // Reports stored Sum-factor rows that disagree with the recomputed
    // aggregate by more than `relative_tolerance`.
    std::vector<Diagnostic> validate(double relative_tolerance = 1e-6) const;

    const SiteHierarchy& hierarchy() const noexcept { return *hierarchy_; }
    std::shared_ptr<const SiteHierarchy> hierarchy_ptr() const noexcept { return hierarchy_; }
    const std::map<std::string, FactorDescriptor>& descriptors() const noexcept { return descriptors_; }
    const std::map<std::pair<std::string, RegionKey>, FactorSeries>& series() const noexcept { return series_; }

    bool operator==(const FactorStore& other) const;

private:
    const FactorSeries* resolve_series_or_null(const FactorDescriptor& d, const RegionKey& site) const;
    double mean_of_children(const std::string& factor, const RegionKey& site, int year) const;
    void require_site(const RegionKey& site) const;

    std::shared_ptr<const SiteHierarchy> hierarchy_;
    std::map<std::string, FactorDescriptor> descriptors_;
    std::map<std::pair<std::string, RegionKey>, FactorSeries> series_;
};

}  // namespace quis
