#include "quis/analysis.hpp"

#include "quis/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace quis {

MetricSet metrics(const ConfusionMatrix& m, double beta) {
    if (!(beta > 0.0) || !std::isfinite(beta)) throw Error(ErrorCode::Usage, "beta must be positive");
    MetricSet out;
    out.beta = beta;
    const double tp = static_cast<double>(m.tp);
    if (m.tp + m.fn > 0) out.recall = tp / static_cast<double>(m.tp + m.fn);
    else out.degenerate = true;
    if (m.tp + m.fp > 0) out.precision = tp / static_cast<double>(m.tp + m.fp);
    else out.degenerate = true;
    const double b2 = beta * beta;
    const double denom = b2 * out.precision + out.recall;
    if (denom > 0.0) out.f_beta = (1.0 + b2) * out.precision * out.recall / denom;
    else out.degenerate = true;
    return out;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size())
        throw Error(ErrorCode::LengthMismatch,
                    "series lengths differ (" + std::to_string(x.size()) + " vs " + std::to_string(y.size()) + ")");
    if (x.size() < 2) throw Error(ErrorCode::LengthMismatch, "need at least two points");
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) throw Error(ErrorCode::ConstantSeries, "series is constant");
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::optional<double> CorrelationMatrix::at(const std::string& row, const std::string& col) const {
    auto ri = std::find(rows.begin(), rows.end(), row);
    auto ci = std::find(cols.begin(), cols.end(), col);
    if (ri == rows.end() || ci == cols.end()) return std::nullopt;
    return r[static_cast<std::size_t>(ri - rows.begin())][static_cast<std::size_t>(ci - cols.begin())];
}

CorrelationMatrix correlation_matrix(const FactorStore& store, const std::vector<std::string>& factors,
                                     const ChainCounts& chain_counts, const std::vector<RegionKey>& sites,
                                     int year) {
    for (const auto& f : factors) (void)store.descriptor(f);  // UnknownFactor

    CorrelationMatrix out;
    std::vector<std::vector<double>> values(factors.size());
    for (const auto& site : sites) {
        std::vector<double> row;
        bool complete = true;
        for (const auto& f : factors) {
            try {
                row.push_back(store.value(f, site, year));
            } catch (const Error&) {
                complete = false;
                break;
            }
        }
        if (!complete) {
            out.dropped_sites.push_back(site);
            continue;
        }
        out.sites.push_back(site);
        for (std::size_t i = 0; i < factors.size(); ++i) values[i].push_back(row[i]);
    }

    std::vector<std::vector<double>> counts;
    for (const auto& [chain, per_site] : chain_counts) {
        out.cols.push_back(chain);
        std::vector<double> c;
        for (const auto& site : out.sites) {
            auto it = per_site.find(site);
            c.push_back(it == per_site.end() ? 0.0 : it->second);
        }
        counts.push_back(std::move(c));
    }

    out.rows = factors;
    out.rows.insert(out.rows.end(), out.cols.begin(), out.cols.end());
    auto row_values = [&](std::size_t i) -> const std::vector<double>& {
        return i < factors.size() ? values[i] : counts[i - factors.size()];
    };
    for (std::size_t i = 0; i < out.rows.size(); ++i) {
        std::vector<std::optional<double>> line;
        for (std::size_t j = 0; j < out.cols.size(); ++j) {
            try {
                line.push_back(pearson(row_values(i), counts[j]));
            } catch (const Error&) {
                line.push_back(std::nullopt);
            }
        }
        out.r.push_back(std::move(line));
    }
    return out;
}

std::vector<PopulationBucket> default_population_buckets() {
    return {
        {"5.000 and below", 0, 5000, {}, {}},
        {"from 5.001 to 10.000", 5000, 10000, {}, {}},
        {"from 10.001 to 25.000", 10000, 25000, {}, {}},
        {"from 25.001 to 50.000", 25000, 50000, {}, {}},
        {"from 50.001 to 100.000", 50000, 100000, {}, {}},
    };
}

BucketReport bucket_means(const FactorStore& store, const std::vector<RegionKey>& sites, const std::string& factor,
                          int year, const std::string& population_factor) {
    (void)store.descriptor(factor);
    (void)store.descriptor(population_factor);
    BucketReport rep;
    rep.buckets = default_population_buckets();
    std::vector<double> sums(rep.buckets.size(), 0.0);
    for (const auto& site : sites) {
        double pop = 0.0, v = 0.0;
        try {
            pop = store.value(population_factor, site, year);
            v = store.value(factor, site, year);
        } catch (const Error&) {
            rep.dropped.push_back(site);
            continue;
        }
        if (pop > rep.buckets.back().hi) {
            rep.above_range.push_back(site);
            continue;
        }
        std::size_t b = 0;
        while (pop > rep.buckets[b].hi) ++b;
        rep.buckets[b].sites.push_back(site);
        sums[b] += v;
    }
    for (std::size_t b = 0; b < rep.buckets.size(); ++b) {
        if (!rep.buckets[b].sites.empty())
            rep.buckets[b].mean_factor_value = sums[b] / static_cast<double>(rep.buckets[b].sites.size());
    }
    return rep;
}

std::string_view to_string(WilcoxonMethod m) {
    switch (m) {
    case WilcoxonMethod::Auto: return "auto";
    case WilcoxonMethod::Exact: return "exact";
    case WilcoxonMethod::Normal: return "normal";
    }
    return "?";
}

namespace {

// Doubled midranks (integers) of the pooled sample, x first.
std::vector<long> doubled_midranks(const std::vector<double>& pooled) {
    std::vector<std::size_t> order(pooled.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return pooled[a] < pooled[b]; });
    std::vector<long> ranks(pooled.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && pooled[order[j + 1]] == pooled[order[i]]) ++j;
        // positions i..j hold ranks i+1..j+1; doubled midrank = i + j + 2
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = static_cast<long>(i + j + 2);
        i = j + 1;
    }
    return ranks;
}

// P(|S - E| >= |s_obs - E|) where S is the doubled rank sum of a uniformly
// random n-subset.
double exact_p(const std::vector<long>& ranks, std::size_t n, long observed) {
    const long total = std::accumulate(ranks.begin(), ranks.end(), 0L);
    // ways[k][s]: number of k-subsets of the items seen so far with sum s
    std::vector<std::vector<double>> ways(n + 1, std::vector<double>(static_cast<std::size_t>(total) + 1, 0.0));
    ways[0][0] = 1.0;
    for (long r : ranks) {
        for (std::size_t k = n; k >= 1; --k) {
            auto& to = ways[k];
            const auto& from = ways[k - 1];
            for (long s = total; s >= r; --s) to[static_cast<std::size_t>(s)] += from[static_cast<std::size_t>(s - r)];
        }
    }
    const std::size_t big_n = ranks.size();
    // expectation of S in doubled units is n * (N + 1)
    const long expected = static_cast<long>(n * (big_n + 1));
    const long dev = std::labs(observed - expected);
    double hit = 0.0, all = 0.0;
    for (long s = 0; s <= total; ++s) {
        const double w = ways[n][static_cast<std::size_t>(s)];
        if (w == 0.0) continue;
        all += w;
        if (std::labs(s - expected) >= dev) hit += w;
    }
    return std::min(1.0, hit / all);
}

}  // namespace

WilcoxonResult wilcoxon_rank_sum(const std::vector<double>& x, const std::vector<double>& y, WilcoxonMethod method) {
    if (x.empty() || y.empty()) throw Error(ErrorCode::Usage, "both samples must be non-empty");
    for (double v : x)
        if (!std::isfinite(v)) throw Error(ErrorCode::DomainError, "sample contains a non-finite value");
    for (double v : y)
        if (!std::isfinite(v)) throw Error(ErrorCode::DomainError, "sample contains a non-finite value");

    std::vector<double> pooled = x;
    pooled.insert(pooled.end(), y.begin(), y.end());
    const auto ranks = doubled_midranks(pooled);
    const double n = static_cast<double>(x.size());
    const double m = static_cast<double>(y.size());
    const double big_n = n + m;

    long w2 = 0;
    for (std::size_t i = 0; i < x.size(); ++i) w2 += ranks[i];

    WilcoxonResult out;
    out.w = static_cast<double>(w2) / 2.0;
    out.u = out.w - n * (n + 1.0) / 2.0;
    out.method = method == WilcoxonMethod::Auto
                     ? (x.size() + y.size() <= kWilcoxonExactLimit ? WilcoxonMethod::Exact : WilcoxonMethod::Normal)
                     : method;

    // tie correction: sum over tie groups of t^3 - t
    std::vector<double> sorted = pooled;
    std::sort(sorted.begin(), sorted.end());
    double ties = 0.0;
    for (std::size_t i = 0; i < sorted.size();) {
        std::size_t j = i;
        while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
        const double t = static_cast<double>(j - i);
        ties += t * t * t - t;
        i = j;
    }
    if (sorted.front() == sorted.back()) {
        out.degenerate = true;
        out.p_value = 1.0;
        return out;
    }

    const double mean = n * (big_n + 1.0) / 2.0;
    const double var = n * m / 12.0 * ((big_n + 1.0) - ties / (big_n * (big_n - 1.0)));
    const double d = out.w - mean;
    const double corrected = std::max(0.0, std::abs(d) - 0.5);
    out.z = (d < 0 ? -corrected : corrected) / std::sqrt(var);

    if (out.method == WilcoxonMethod::Exact) out.p_value = exact_p(ranks, x.size(), w2);
    else out.p_value = std::min(1.0, std::erfc(std::abs(out.z) / std::sqrt(2.0)));
    return out;
}

}  // namespace quis
