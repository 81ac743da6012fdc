#include "quis/ingest.hpp"

#include "quis/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace quis {

namespace fs = std::filesystem;

namespace {

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::optional<int> parse_int(std::string_view s) {
    int v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

std::optional<double> parse_real(std::string_view s) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

// Collects row-level diagnostics for one CSV file.
class CsvReader {
public:
    CsvReader(const fs::path& path, std::vector<std::string_view> expected_header)
        : name_(path.filename().string()), text_(read_file(path)) {
        std::string_view rest(text_);
        std::size_t line_no = 0;
        while (!rest.empty()) {
            auto nl = rest.find('\n');
            std::string_view line = rest.substr(0, nl);
            rest = nl == std::string_view::npos ? std::string_view{} : rest.substr(nl + 1);
            ++line_no;
            if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
            if (line_no == 1) {
                auto header = split(line, ',');
                width_ = expected_header.size();
                if (header != expected_header) {
                    std::string want;
                    for (auto h : expected_header) want += (want.empty() ? "" : ",") + std::string(h);
                    fail(ErrorCode::Io, 1, "BadHeader", "expected header '" + want + "'");
                }
                continue;
            }
            if (line.empty()) continue;
            rows_.push_back({line_no, split(line, ',')});
        }
        if (line_no == 0) fail(ErrorCode::Io, 0, "BadHeader", "file is empty");
    }

    struct Row {
        std::size_t line;
        std::vector<std::string_view> fields;
    };

    const std::vector<Row>& rows() const { return rows_; }
    std::size_t width() const { return width_; }

    void fail(ErrorCode code, std::size_t line, std::string diag_code, std::string message) {
        if (!first_code_) first_code_ = code;
        diags_.push_back({Severity::Error, std::move(diag_code), name_ + ":" + std::to_string(line), std::move(message)});
    }
    void fail(const Error& e, std::size_t line) { fail(e.code(), line, std::string(to_string(e.code())), e.what()); }

    bool check_width(const Row& r) {
        if (r.fields.size() == width_) return true;
        fail(ErrorCode::LengthMismatch, r.line, "LengthMismatch",
             "expected " + std::to_string(width_) + " columns, found " + std::to_string(r.fields.size()));
        return false;
    }

    void throw_if_failed() {
        if (!diags_.empty()) throw DiagnosticError(*first_code_, std::move(diags_));
    }

private:
    std::string name_;
    std::string text_;
    std::vector<Row> rows_;
    std::size_t width_ = 0;
    std::vector<Diagnostic> diags_;
    std::optional<ErrorCode> first_code_;
};

fs::path resolve_path(const fs::path& base, const std::string& value) {
    fs::path p(value);
    return p.is_absolute() ? p : base / p;
}

}  // namespace

DatasetManifest read_manifest(const fs::path& path) {
    const std::string text = read_file(path);
    const fs::path base = path.parent_path();
    DatasetManifest m;
    std::optional<int> year;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw Error(ErrorCode::Io, path.string() + ":" + std::to_string(line_no) + ": expected key=value");
        const std::string key = line.substr(0, eq);
        const std::string value = line.substr(eq + 1);
        if (key == "sites_file") m.sites_file = resolve_path(base, value);
        else if (key == "factors_file") m.factors_file = resolve_path(base, value);
        else if (key == "series_file") m.series_file = resolve_path(base, value);
        else if (key == "stores_file") m.stores_file = resolve_path(base, value);
        else if (key == "base_year") year = parse_int(value);
        else throw Error(ErrorCode::Io, path.string() + ":" + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    if (m.sites_file.empty() || m.factors_file.empty() || m.series_file.empty() || !year)
        throw Error(ErrorCode::Io, path.string() + ": manifest needs sites_file, factors_file, series_file, base_year");
    m.base_year = *year;
    return m;
}

void write_manifest(const DatasetManifest& m, const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
    out << "sites_file=" << m.sites_file.generic_string() << '\n'
        << "factors_file=" << m.factors_file.generic_string() << '\n'
        << "series_file=" << m.series_file.generic_string() << '\n';
    if (m.stores_file) out << "stores_file=" << m.stores_file->generic_string() << '\n';
    out << "base_year=" << m.base_year << '\n';
    if (!out) throw Error(ErrorCode::Io, "failed writing " + path.string());
}

std::vector<std::string> Dataset::chains() const {
    std::set<std::string> out;
    for (const auto& r : stores) out.insert(r.chain);
    return {out.begin(), out.end()};
}

std::vector<RegionKey> Dataset::chain_sites(const std::string& chain) const {
    std::vector<RegionKey> out;
    for (const auto& r : stores)
        if (r.chain == chain) out.push_back(r.site);
    std::sort(out.begin(), out.end());
    return out;
}

Dataset load_dataset(const fs::path& manifest_path) { return load_dataset(read_manifest(manifest_path)); }

Dataset load_dataset(const DatasetManifest& manifest) {
    auto hierarchy = std::make_shared<SiteHierarchy>();
    LoadReport report;

    {
        CsvReader csv(manifest.sites_file, {"region_key", "name", "level", "parent_key"});
        for (const auto& row : csv.rows()) {
            if (!csv.check_width(row)) continue;
            try {
                const auto key = parse_region_key(row.fields[0]);
                const auto level = parse_level(row.fields[2]);
                if (!level) {
                    csv.fail(ErrorCode::InconsistentKey, row.line, "BadLevel",
                             "unknown level '" + std::string(row.fields[2]) + "'");
                    continue;
                }
                Site site{key, *level, std::string(row.fields[1]), std::nullopt};
                if (!row.fields[3].empty()) site.parent = parse_region_key(row.fields[3]);
                if (hierarchy->contains(key)) {
                    csv.fail(ErrorCode::DuplicateKey, row.line, "DuplicateKey", "region key " + key.raw() + " repeated");
                    continue;
                }
                hierarchy->add_site(site);
            } catch (const Error& e) {
                csv.fail(e, row.line);
            }
        }
        csv.throw_if_failed();
        report.sites = hierarchy->size();
    }

    FactorStore store(hierarchy);
    {
        CsvReader csv(manifest.factors_file, {"factor_id", "name", "unit", "aggregation"});
        for (const auto& row : csv.rows()) {
            if (!csv.check_width(row)) continue;
            const auto agg = parse_aggregation(row.fields[3]);
            if (!agg) {
                csv.fail(ErrorCode::UnknownFactor, row.line, "BadAggregation",
                         "unknown aggregation '" + std::string(row.fields[3]) + "'");
                continue;
            }
            FactorDescriptor d{std::string(row.fields[0]), std::string(row.fields[1]), std::string(row.fields[2]), *agg};
            if (store.find_descriptor(d.id)) {
                csv.fail(ErrorCode::DuplicateKey, row.line, "DuplicateKey", "factor '" + d.id + "' declared twice");
                continue;
            }
            try {
                store.declare(d);
            } catch (const Error& e) {
                csv.fail(e, row.line);
            }
        }
        csv.throw_if_failed();
        report.factors = store.descriptors().size();
    }

    {
        CsvReader csv(manifest.series_file, {"factor_id", "region_key", "year", "value"});
        std::map<std::pair<std::string, RegionKey>, std::map<int, double>> grouped;
        for (const auto& row : csv.rows()) {
            if (!csv.check_width(row)) continue;
            try {
                const std::string factor(row.fields[0]);
                if (!store.find_descriptor(factor)) {
                    csv.fail(ErrorCode::UnknownFactor, row.line, "UnknownFactor", "factor '" + factor + "' is not declared");
                    continue;
                }
                const auto key = parse_region_key(row.fields[1]);
                if (!hierarchy->contains(key)) {
                    csv.fail(ErrorCode::UnknownSite, row.line, "UnknownSite", "site " + key.raw() + " is not loaded");
                    continue;
                }
                const auto year = parse_int(row.fields[2]);
                const auto value = parse_real(row.fields[3]);
                if (!year || !value) {
                    csv.fail(ErrorCode::Io, row.line, "BadNumber", "cannot parse year/value");
                    continue;
                }
                auto& bucket = grouped[{factor, key}];
                if (!bucket.emplace(*year, *value).second) {
                    csv.fail(ErrorCode::DuplicateKey, row.line, "DuplicateKey",
                             factor + "@" + key.raw() + " repeats year " + std::to_string(*year));
                    continue;
                }
                ++report.series_rows;
            } catch (const Error& e) {
                csv.fail(e, row.line);
            }
        }
        csv.throw_if_failed();
        for (auto& [key, points] : grouped) {
            FactorSeries s{key.first, key.second, {}, {}};
            for (const auto& [y, v] : points) {
                s.years.push_back(y);
                s.values.push_back(v);
            }
            store.put_series(std::move(s));
        }
        report.series = store.series().size();
    }

    bool base_year_seen = false;
    for (const auto& [k, s] : store.series()) {
        if (s.at(manifest.base_year)) {
            base_year_seen = true;
            break;
        }
    }
    if (!base_year_seen)
        throw Error(ErrorCode::NoValue, "base_year " + std::to_string(manifest.base_year) + " appears in no series");

    std::vector<StoreRecord> stores;
    if (manifest.stores_file) {
        CsvReader csv(*manifest.stores_file, {"chain", "region_key", "count"});
        std::set<std::pair<std::string, RegionKey>> seen;
        for (const auto& row : csv.rows()) {
            if (!csv.check_width(row)) continue;
            try {
                StoreRecord r{std::string(row.fields[0]), parse_region_key(row.fields[1]), 0};
                const auto count = parse_int(row.fields[2]);
                if (r.chain.empty()) {
                    csv.fail(ErrorCode::UnknownChain, row.line, "EmptyChain", "chain name is empty");
                    continue;
                }
                if (!count || *count < 1) {
                    csv.fail(ErrorCode::Io, row.line, "BadCount", "count must be a positive integer");
                    continue;
                }
                r.count = *count;
                const Site* s = hierarchy->find(r.site);
                if (!s) {
                    csv.fail(ErrorCode::UnknownSite, row.line, "UnknownSite", "site " + r.site.raw() + " is not loaded");
                    continue;
                }
                if (s->level != HierarchyLevel::Municipality) {
                    csv.fail(ErrorCode::WrongLevel, row.line, "WrongLevel", "stores must sit at municipalities");
                    continue;
                }
                if (!seen.insert({r.chain, r.site}).second) {
                    csv.fail(ErrorCode::DuplicateKey, row.line, "DuplicateKey",
                             r.chain + "@" + r.site.raw() + " listed twice");
                    continue;
                }
                stores.push_back(std::move(r));
            } catch (const Error& e) {
                csv.fail(e, row.line);
            }
        }
        csv.throw_if_failed();
        std::sort(stores.begin(), stores.end());
        report.store_records = stores.size();
    }

    return Dataset{std::move(hierarchy), std::move(store), std::move(stores), manifest.base_year, report};
}

}  // namespace quis
