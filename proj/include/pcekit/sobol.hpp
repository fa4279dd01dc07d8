#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pcekit/surrogate.hpp"

namespace pcekit {

/// Variables are addressed by 0-based position in the model inputs.
using VariableSet = std::vector<int>;

/// Variance below this is treated as zero and indices are undefined.
inline constexpr double kMinVariance = 1e-300;

/// S_U = (1/var) sum_{i : i_j > 0 iff j in U} Y_i^2 / prod_j (2 i_j + 1).
/// Throws NumericalError for a zero-variance output, std::invalid_argument for a bad subset.
double sobol_index(const PceModel& pce, const VariableSet& subset, std::size_t output);
double sobol_index(const PceModel& pce, const VariableSet& subset, const std::string& output);

/// T_U = sum_{V containing U} S_V, computed directly from the terms active in every member of U.
double total_index(const PceModel& pce, const VariableSet& subset, std::size_t output);
double total_index(const PceModel& pce, const VariableSet& subset, const std::string& output);

struct SubsetIndex {
    VariableSet subset;
    double value = 0.0;
};

struct OutputSobol {
    std::string output;
    double total_variance = 0.0;
    std::vector<SubsetIndex> indices;  // sorted by (size, positions)
    std::vector<double> totals;        // one per variable
    double remainder = 0.0;            // 1 - sum(indices)
};

struct SobolReport {
    std::vector<std::string> variables;
    int max_subset_size = 1;
    std::vector<OutputSobol> outputs;
};

/// Indices for every subset up to max_subset_size, singleton totals and the
/// higher-order remainder, for every output.
SobolReport full_report(const PceModel& pce, int max_subset_size);

/// Subsets of {0..n-1} with 1..max_size members, sorted by (size, positions).
std::vector<VariableSet> subsets_up_to(int n, int max_size);

/// Machine-readable form of a report.
nlohmann::json sobol_to_json(const SobolReport& report);

/// Aligned plain-text tables: main effects, interactions by order, totals, remainder.
void write_sobol_text(const SobolReport& report, std::ostream& out);

} // namespace pcekit
