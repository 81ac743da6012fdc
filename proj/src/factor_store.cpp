#include "quis/factor_store.hpp"

#include <algorithm>
#include <cmath>

namespace quis {

std::string_view to_string(Aggregation a) {
    switch (a) {
    case Aggregation::Sum: return "sum";
    case Aggregation::InheritDown: return "inherit_down";
    case Aggregation::MeanOfChildren: return "mean_of_children";
    }
    return "sum";
}

std::optional<Aggregation> parse_aggregation(std::string_view text) {
    if (text == "sum") return Aggregation::Sum;
    if (text == "inherit_down") return Aggregation::InheritDown;
    if (text == "mean_of_children") return Aggregation::MeanOfChildren;
    return std::nullopt;
}

std::optional<double> FactorSeries::at(int year) const {
    auto it = std::lower_bound(years.begin(), years.end(), year);
    if (it == years.end() || *it != year) return std::nullopt;
    return values[static_cast<std::size_t>(it - years.begin())];
}

FactorStore::FactorStore(std::shared_ptr<const SiteHierarchy> hierarchy) : hierarchy_(std::move(hierarchy)) {
    if (!hierarchy_) hierarchy_ = std::make_shared<const SiteHierarchy>();
}

void FactorStore::declare(const FactorDescriptor& descriptor) {
    if (descriptor.id.empty()) throw Error(ErrorCode::UnknownFactor, "factor id must not be empty");
    auto [it, inserted] = descriptors_.emplace(descriptor.id, descriptor);
    if (!inserted && !(it->second == descriptor))
        throw Error(ErrorCode::DuplicateKey, "factor '" + descriptor.id + "' already declared differently");
}

void FactorStore::put_series(FactorSeries series) {
    if (!descriptors_.contains(series.factor))
        throw Error(ErrorCode::UnknownFactor, "factor '" + series.factor + "' is not declared");
    require_site(series.site);
    if (series.years.size() != series.values.size() || series.years.empty())
        throw Error(ErrorCode::LengthMismatch, "series " + series.factor + "@" + series.site.raw() + " has " +
                                                   std::to_string(series.years.size()) + " years and " +
                                                   std::to_string(series.values.size()) + " values");
    for (std::size_t i = 1; i < series.years.size(); ++i) {
        if (series.years[i] <= series.years[i - 1])
            throw Error(ErrorCode::UnsortedYears,
                        "series " + series.factor + "@" + series.site.raw() + " years are not strictly ascending");
    }
    auto key = std::make_pair(series.factor, series.site);
    series_.insert_or_assign(std::move(key), std::move(series));
}

const FactorDescriptor& FactorStore::descriptor(const std::string& id) const {
    if (const auto* d = find_descriptor(id)) return *d;
    throw Error(ErrorCode::UnknownFactor, "factor '" + id + "' is not declared");
}

const FactorDescriptor* FactorStore::find_descriptor(const std::string& id) const {
    auto it = descriptors_.find(id);
    return it == descriptors_.end() ? nullptr : &it->second;
}

const FactorSeries* FactorStore::find_series(const std::string& factor, const RegionKey& site) const {
    auto it = series_.find(std::make_pair(factor, site));
    return it == series_.end() ? nullptr : &it->second;
}

void FactorStore::require_site(const RegionKey& site) const {
    if (!hierarchy_->contains(site)) throw Error(ErrorCode::UnknownSite, "unknown site " + site.raw());
}

const FactorSeries* FactorStore::resolve_series_or_null(const FactorDescriptor& d, const RegionKey& site) const {
    if (const auto* own = find_series(d.id, site)) return own;
    if (d.aggregation != Aggregation::InheritDown) return nullptr;
    const auto chain = ancestors(site);
    for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
        if (const auto* s = find_series(d.id, *it)) return s;
    }
    return nullptr;
}

const FactorSeries& FactorStore::resolve_series(const std::string& factor, const RegionKey& site) const {
    const auto& d = descriptor(factor);
    require_site(site);
    if (const auto* s = resolve_series_or_null(d, site)) return *s;
    throw Error(ErrorCode::NoValue, "no series for '" + factor + "' at or above site " + site.raw());
}

ResolvedValue FactorStore::resolve(const std::string& factor, const RegionKey& site, int year) const {
    const FactorSeries& s = resolve_series(factor, site);
    auto v = s.at(year);
    if (!v)
        throw Error(ErrorCode::NoValue, "series '" + factor + "' at " + s.site.raw() + " has no value for " +
                                            std::to_string(year));
    return {*v, s.site, year};
}

double FactorStore::value(const std::string& factor, const RegionKey& site, int year) const {
    return resolve(factor, site, year).value;
}

double FactorStore::mean_of_children(const std::string& factor, const RegionKey& site, int year) const {
    const auto& kids = hierarchy_->children(site);
    if (kids.empty()) {
        if (const auto* own = find_series(factor, site)) {
            if (auto v = own->at(year)) return *v;
        }
        throw Error(ErrorCode::NoValue, "no value for '" + factor + "' at leaf " + site.raw());
    }
    double sum = 0.0;
    for (const auto& child : kids) {
        const auto* own = find_series(factor, child);
        std::optional<double> v = own ? own->at(year) : std::nullopt;
        sum += v ? *v : mean_of_children(factor, child, year);
    }
    return sum / static_cast<double>(kids.size());
}

double FactorStore::aggregate_up(const std::string& factor, const RegionKey& site, int year) const {
    const auto& d = descriptor(factor);
    require_site(site);
    switch (d.aggregation) {
    case Aggregation::InheritDown:
        throw Error(ErrorCode::WrongAggregationMode, "factor '" + factor + "' is inherited, not aggregated");
    case Aggregation::MeanOfChildren:
        return mean_of_children(factor, site, year);
    case Aggregation::Sum: {
        double sum = 0.0;
        for (const auto& m : hierarchy_->descendants_at(site, HierarchyLevel::Municipality)) {
            const auto* s = find_series(factor, m);
            auto v = s ? s->at(year) : std::nullopt;
            if (!v)
                throw Error(ErrorCode::NoValue, "municipality " + m.raw() + " has no '" + factor + "' value for " +
                                                    std::to_string(year));
            sum += *v;
        }
        return sum;
    }
    }
    return 0.0;
}

std::pair<int, double> FactorStore::latest_value(const std::string& factor, const RegionKey& site) const {
    const FactorSeries& s = resolve_series(factor, site);
    return {s.years.back(), s.values.back()};
}

std::vector<Diagnostic> FactorStore::validate(double relative_tolerance) const {
    std::vector<Diagnostic> out;
    for (const auto& [key, s] : series_) {
        const auto& d = descriptors_.at(key.first);
        if (d.aggregation != Aggregation::Sum) continue;
        if (hierarchy_->at(s.site).level == HierarchyLevel::Municipality) continue;
        for (std::size_t i = 0; i < s.years.size(); ++i) {
            double recomputed = 0.0;
            try {
                recomputed = aggregate_up(d.id, s.site, s.years[i]);
            } catch (const Error&) {
                continue;  // children lack this year; nothing to reconcile
            }
            const double stored = s.values[i];
            const double scale = std::max(std::abs(stored), std::abs(recomputed));
            if (scale > 0.0 && std::abs(stored - recomputed) > relative_tolerance * scale) {
                out.push_back({Severity::Warning, "SumMismatch", d.id + "@" + s.site.raw(),
                               "stored " + std::to_string(stored) + " vs children sum " +
                                   std::to_string(recomputed) + " in " + std::to_string(s.years[i])});
            }
        }
    }
    return out;
}

bool FactorStore::operator==(const FactorStore& other) const {
    return *hierarchy_ == *other.hierarchy_ && descriptors_ == other.descriptors_ && series_ == other.series_;
}

}  // namespace quis
