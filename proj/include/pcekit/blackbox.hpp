#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "pcekit/surrogate.hpp"

namespace pcekit {

/// One of the registered analytic models, see builtin_names().
struct BuiltinSpec {
    std::string name;
    nlohmann::json parameters = nlohmann::json::object();
};

enum class IoFormat { File, Stdin };

/// A solver launched as a child process speaking the CSV batch protocol.
struct ExternalSpec {
    std::vector<std::string> command;
    std::filesystem::path working_dir;
    IoFormat io_format = IoFormat::File;
    std::chrono::milliseconds timeout = std::chrono::hours(1);
};

struct ModelSpec {
    std::variant<BuiltinSpec, ExternalSpec> kind;
    std::vector<std::string> input_names;
    std::vector<std::string> output_names;

    /// Throws ConfigError for unknown builtins, empty commands or missing names.
    void validate() const;
    /// Canonical JSON used for fingerprinting (working dir and timeout excluded).
    nlohmann::json identity() const;
    /// Hex SHA-256 of identity().
    std::string fingerprint() const;
    /// Short human readable label, e.g. "builtin:csg-proxy".
    std::string label() const;
};

using BuiltinFn = std::function<std::vector<double>(std::span<const double>)>;

const std::vector<std::string>& builtin_names();

/// Instantiates a builtin for the given arities. Throws ConfigError for unknown
/// names or bad parameters.
BuiltinFn make_builtin(const BuiltinSpec& spec, std::size_t inputs, std::size_t outputs);

/// Physical ranges and names of the four csg-proxy inputs.
std::vector<InputVariable> csg_proxy_inputs();
std::vector<std::string> csg_proxy_outputs();

/// Synthetic stand-in for a coal seam gas simulator. Inputs are fracture
/// porosity, fracture permeability (mD), reciprocal Langmuir pressure (1/kPa)
/// and Langmuir volume (gmole/kg); outputs are cumulative and peak gas.
/// The formula is documented in docs/csg_proxy.md.
std::vector<double> csg_proxy(std::span<const double> v);

/// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view data);

enum class Source { Fresh, Cached };

struct EvaluationRecord {
    std::vector<double> input;
    std::vector<double> output;
    Source source = Source::Fresh;
    std::string model_fingerprint;
    std::string error;  // empty on success

    bool ok() const { return error.empty(); }
};

/// Append-only JSON-lines store of evaluations keyed by model fingerprint and
/// the 17-significant-digit rendering of the inputs. Each line carries a
/// checksum; corrupt lines are skipped with a warning.
class EvaluationCache {
public:
    /// Empty path keeps the cache in memory only.
    explicit EvaluationCache(std::filesystem::path path = {});

    /// $PCEKIT_CACHE if set, otherwise `fallback`.
    static std::filesystem::path resolve_path(const std::filesystem::path& fallback);

    std::optional<std::vector<double>> find(const std::string& fingerprint,
                                            std::span<const double> input) const;
    /// Appends records and flushes. Serialized through one writer.
    void append(const std::string& fingerprint, std::span<const EvaluationRecord> records);

    struct Stats {
        std::size_t lines = 0;
        std::size_t entries = 0;
        std::size_t corrupt_lines = 0;
        std::map<std::string, std::size_t> per_model;
    };
    Stats stats() const;
    const std::vector<std::string>& warnings() const { return warnings_; }
    const std::filesystem::path& path() const { return path_; }

    struct VerifyResult {
        std::size_t lines = 0;
        std::vector<std::size_t> corrupt;  // 1-based line numbers
    };
    static VerifyResult verify(const std::filesystem::path& path);

    static std::string key(const std::string& fingerprint, std::span<const double> input);
    /// Serialized line (without newline) for one record.
    static std::string encode_line(const std::string& fingerprint, std::span<const double> input,
                                   std::span<const double> output);

private:
    void load();

    std::filesystem::path path_;
    std::unordered_map<std::string, std::vector<double>> index_;
    std::map<std::string, std::size_t> per_model_;
    std::size_t lines_ = 0;
    std::size_t corrupt_ = 0;
    std::vector<std::string> warnings_;
    mutable std::mutex write_mutex_;
};

struct RunnerOptions {
    int workers = 0;  // <= 0: hardware concurrency
    int retries = 1;  // extra attempts for failed external batches
};

struct RunStats {
    std::size_t fresh = 0;
    std::size_t cached = 0;
    std::size_t failed = 0;
    std::size_t process_launches = 0;
};

/// Evaluates a ModelSpec through the cache.
class ModelRunner {
public:
    ModelRunner(ModelSpec spec, EvaluationCache* cache, RunnerOptions options = {});

    /// Outputs in input order. Failures are reported per record, not thrown.
    std::vector<EvaluationRecord> evaluate_batch(const std::vector<std::vector<double>>& points);
    /// As evaluate_batch, throwing ModelError at the first failed point.
    std::vector<std::vector<double>> evaluate_or_throw(const std::vector<std::vector<double>>& points);
    BatchModel as_batch_model();

    const ModelSpec& spec() const { return spec_; }
    const std::string& fingerprint() const { return fingerprint_; }
    const RunStats& stats() const { return stats_; }

private:
    void run_builtin(std::vector<EvaluationRecord>& records, std::span<const std::size_t> todo);
    void run_external(std::vector<EvaluationRecord>& records, std::span<const std::size_t> todo);

    ModelSpec spec_;
    std::string fingerprint_;
    EvaluationCache* cache_;
    RunnerOptions options_;
    BuiltinFn builtin_;
    RunStats stats_;
};

struct ProcessResult {
    int exit_code = -1;
    bool timed_out = false;
    std::string std_out;
    std::string std_err;
};

/// Runs argv[0] with the given arguments, feeding `input` on stdin. Kills the
/// child after `timeout`. Throws ModelError if the process cannot be started.
ProcessResult run_process(const std::vector<std::string>& argv, const std::filesystem::path& working_dir,
                          const std::string& input, std::chrono::milliseconds timeout);

} // namespace pcekit
