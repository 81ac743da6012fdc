#pragma once

#include "quis/factor_store.hpp"
#include "quis/region_key.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace quis {

// Rows: has a store yes/no. Columns: criteria fulfilled yes/no.
struct ConfusionMatrix {
    std::size_t tp = 0;  // store, fulfilled
    std::size_t fp = 0;  // no store, fulfilled
    std::size_t fn = 0;  // store, not fulfilled
    std::size_t tn = 0;

    std::size_t total() const { return tp + fp + fn + tn; }
    bool operator==(const ConfusionMatrix&) const = default;
};

template <class Range, class HasStore, class Fulfills>
ConfusionMatrix confusion(const Range& universe, HasStore has_store, Fulfills fulfills) {
    ConfusionMatrix m;
    for (const auto& site : universe) {
        const bool s = has_store(site);
        const bool f = fulfills(site);
        if (s && f) ++m.tp;
        else if (s) ++m.fn;
        else if (f) ++m.fp;
        else ++m.tn;
    }
    return m;
}

struct MetricSet {
    double recall = 0.0;
    double precision = 0.0;
    double f_beta = 0.0;
    double beta = 2.0;
    bool degenerate = false;  // some denominator was zero
};

// Throws Usage when beta <= 0.
MetricSet metrics(const ConfusionMatrix& m, double beta = 2.0);

// Sample Pearson product-moment correlation. Throws LengthMismatch (also for
// fewer than two points) or ConstantSeries.
double pearson(const std::vector<double>& x, const std::vector<double>& y);

struct CorrelationMatrix {
    std::vector<std::string> rows;  // factor ids, then chains
    std::vector<std::string> cols;  // chains
    std::vector<std::vector<std::optional<double>>> r;  // nullopt: undefined (constant series)
    std::vector<RegionKey> sites;          // analyzed
    std::vector<RegionKey> dropped_sites;  // some factor had no value

    std::optional<double> at(const std::string& row, const std::string& col) const;
};

// Per-site store counts per chain; absent sites count 0.
using ChainCounts = std::map<std::string, std::map<RegionKey, double>>;

CorrelationMatrix correlation_matrix(const FactorStore& store, const std::vector<std::string>& factors,
                                     const ChainCounts& chain_counts, const std::vector<RegionKey>& sites,
                                     int year);

struct PopulationBucket {
    std::string label;
    double lo = 0;  // exclusive, except the first bucket
    double hi = 0;  // inclusive
    std::vector<RegionKey> sites;
    std::optional<double> mean_factor_value;  // nullopt for an empty bucket
};

struct BucketReport {
    std::vector<PopulationBucket> buckets;
    std::vector<RegionKey> above_range;  // population > 100000
    std::vector<RegionKey> dropped;      // population or factor unresolvable
};

// "5.000 and below", "from 5.001 to 10.000", ... up to 100.000.
std::vector<PopulationBucket> default_population_buckets();

BucketReport bucket_means(const FactorStore& store, const std::vector<RegionKey>& sites, const std::string& factor,
                          int year, const std::string& population_factor = "population");

enum class WilcoxonMethod : std::uint8_t {
    Auto,    // Exact when n + m <= kWilcoxonExactLimit, else Normal
    Exact,   // permutation distribution of the midrank sum (tie-aware)
    Normal,  // normal approximation, continuity and tie corrected
};

inline constexpr std::size_t kWilcoxonExactLimit = 50;

struct WilcoxonResult {
    double w = 0.0;  // rank sum of x (midranks)
    double u = 0.0;  // w - n(n+1)/2
    double p_value = 1.0;  // two-sided
    double z = 0.0;        // normal approximation score, also reported for Exact
    WilcoxonMethod method = WilcoxonMethod::Normal;  // the one actually used
    bool degenerate = false;  // all pooled values identical
};

// Throws Usage for an empty sample.
WilcoxonResult wilcoxon_rank_sum(const std::vector<double>& x, const std::vector<double>& y,
                                 WilcoxonMethod method = WilcoxonMethod::Auto);

std::string_view to_string(WilcoxonMethod m);

}  // namespace quis
