#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pcekit/blackbox.hpp"
#include "pcekit/surrogate.hpp"

namespace pcekit {

struct ValidationSettings {
    int strata = 10;
    int repeats = 300;
    std::uint64_t seed = 1;
};

struct ReportSettings {
    std::vector<double> percentiles = {10, 25, 50, 75, 90};
    int histogram_bins = 40;
    int sobol_max_subset = 2;
    std::size_t uq_samples = 3000;
    std::string uq_sampler = "lhs";  // "lhs" or "uniform"
    std::uint64_t uq_seed = 2;
};

struct PathSettings {
    std::filesystem::path cache;
    std::filesystem::path model;
    std::filesystem::path report_dir;
};

/// Everything one reproducible run needs. Relative paths in the file are
/// resolved against the directory holding the config.
struct RunConfig {
    ModelSpec model;
    std::vector<InputVariable> inputs;
    std::vector<std::string> outputs;
    BuildMethod method = BuildMethod::full(4);
    ValidationSettings validation;
    ReportSettings report;
    PathSettings paths;
    int workers = 0;
    std::size_t max_grid_points = kDefaultMaxGridPoints;

    /// Canonical JSON of the effective settings (paths excluded).
    nlohmann::json canonical() const;
    /// Hex SHA-256 of canonical().
    std::string hash() const;
};

/// Validates the document against the schema. Unknown keys, wrong types and
/// inconsistent values raise ConfigError naming the field.
RunConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir);
/// Reads and parses a config file. Unreadable files raise IoError.
RunConfig load_config(const std::filesystem::path& path);

} // namespace pcekit
