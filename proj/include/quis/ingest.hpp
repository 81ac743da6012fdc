#pragma once

#include "quis/factor_store.hpp"
#include "quis/hierarchy.hpp"

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace quis {

struct StoreRecord {
    std::string chain;
    RegionKey site;  // municipality
    int count = 1;

    auto operator<=>(const StoreRecord&) const = default;
};

// Flat key=value file; relative paths resolve against the manifest's
// directory.
//
//   sites_file=sites.csv
//   factors_file=factors.csv
//   series_file=series.csv
//   stores_file=stores.csv      (optional)
//   base_year=2016
struct DatasetManifest {
    std::filesystem::path sites_file;
    std::filesystem::path factors_file;
    std::filesystem::path series_file;
    std::optional<std::filesystem::path> stores_file;
    int base_year = 0;
};

DatasetManifest read_manifest(const std::filesystem::path& path);
void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

struct LoadReport {
    std::size_t sites = 0;
    std::size_t factors = 0;
    std::size_t series = 0;
    std::size_t series_rows = 0;
    std::size_t store_records = 0;
};

struct Dataset {
    std::shared_ptr<const SiteHierarchy> hierarchy;
    FactorStore store;
    std::vector<StoreRecord> stores;  // sorted
    int base_year = 0;
    LoadReport report;

    std::vector<std::string> chains() const;
    // Municipalities where `chain` has at least one store.
    std::vector<RegionKey> chain_sites(const std::string& chain) const;
};

// All-or-nothing. Throws DiagnosticError{code} carrying "file:line" subjects
// for every rejected row of the first file that fails; the error code is that
// of the first problem (MissingParent, UnknownFactor, LengthMismatch, ...).
Dataset load_dataset(const DatasetManifest& manifest);
Dataset load_dataset(const std::filesystem::path& manifest_path);

}  // namespace quis
