#include "pcekit/blackbox.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>
#include <unistd.h>

#include "pcekit/error.hpp"
#include "pcekit/numfmt.hpp"

namespace pcekit {

using nlohmann::json;

std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw Error("SHA-256 digest failed");
    }
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xf];
    }
    return out;
}

// ---------------------------------------------------------------------------
// ModelSpec

void ModelSpec::validate() const {
    if (input_names.empty()) throw ConfigError("model needs at least one input name");
    if (output_names.empty()) throw ConfigError("model needs at least one output name");
    if (const auto* b = std::get_if<BuiltinSpec>(&kind)) {
        const auto& names = builtin_names();
        if (std::find(names.begin(), names.end(), b->name) == names.end()) {
            throw ConfigError("unknown builtin model '" + b->name + "'");
        }
        make_builtin(*b, input_names.size(), output_names.size());
    } else {
        const auto& e = std::get<ExternalSpec>(kind);
        if (e.command.empty() || e.command.front().empty()) throw ConfigError("external model command is empty");
        if (e.timeout.count() <= 0) throw ConfigError("external model timeout must be positive");
    }
}

json ModelSpec::identity() const {
    json id;
    if (const auto* b = std::get_if<BuiltinSpec>(&kind)) {
        id["builtin"] = {{"name", b->name}, {"parameters", b->parameters.is_null() ? json::object() : b->parameters}};
    } else {
        const auto& e = std::get<ExternalSpec>(kind);
        id["external"] = {{"command", e.command}, {"io_format", e.io_format == IoFormat::File ? "file" : "stdin"}};
    }
    id["inputs"] = input_names;
    id["outputs"] = output_names;
    return id;
}

std::string ModelSpec::fingerprint() const { return sha256_hex(identity().dump()); }

std::string ModelSpec::label() const {
    if (const auto* b = std::get_if<BuiltinSpec>(&kind)) return "builtin:" + b->name;
    const auto& e = std::get<ExternalSpec>(kind);
    return "external:" + (e.command.empty() ? std::string() : e.command.front());
}

// ---------------------------------------------------------------------------
// EvaluationCache

namespace {

std::string join_exact(std::span<const double> v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ',';
        s += format_exact(v[i]);
    }
    return s;
}

std::string line_checksum(const std::string& fp, const std::string& in, const std::string& out) {
    return sha256_hex(fp + "|" + in + "|" + out).substr(0, 16);
}

} // namespace

EvaluationCache::EvaluationCache(std::filesystem::path path) : path_(std::move(path)) {
    if (!path_.empty()) load();
}

std::filesystem::path EvaluationCache::resolve_path(const std::filesystem::path& fallback) {
    if (const char* env = std::getenv("PCEKIT_CACHE"); env && *env) return env;
    return fallback;
}

std::string EvaluationCache::key(const std::string& fingerprint, std::span<const double> input) {
    return fingerprint + "|" + join_exact(input);
}

std::string EvaluationCache::encode_line(const std::string& fingerprint, std::span<const double> input,
                                         std::span<const double> output) {
    json in = json::array();
    json out = json::array();
    for (double v : input) in.push_back(format_exact(v));
    for (double v : output) out.push_back(format_exact(v));
    json line;
    line["model"] = fingerprint;
    line["in"] = std::move(in);
    line["out"] = std::move(out);
    line["checksum"] = line_checksum(fingerprint, join_exact(input), join_exact(output));
    return line.dump();
}

namespace {

struct DecodedLine {
    std::string fingerprint;
    std::vector<double> input;
    std::vector<double> output;
};

// Returns an error message, empty on success.
std::string decode_line(const std::string& text, DecodedLine& d) {
    json line;
    try {
        line = json::parse(text);
    } catch (const json::parse_error&) {
        return "not valid JSON";
    }
    if (!line.is_object() || !line.contains("model") || !line.contains("in") || !line.contains("out") ||
        !line.contains("checksum") || !line["model"].is_string() || !line["in"].is_array() ||
        !line["out"].is_array() || !line["checksum"].is_string()) {
        return "missing fields";
    }
    d.fingerprint = line["model"].get<std::string>();
    std::string in_text, out_text;
    try {
        for (const auto& v : line["in"]) {
            if (!v.is_string()) return "non-string number";
            d.input.push_back(parse_double(v.get<std::string>(), "cache"));
            in_text += (in_text.empty() ? "" : ",") + v.get<std::string>();
        }
        for (const auto& v : line["out"]) {
            if (!v.is_string()) return "non-string number";
            d.output.push_back(parse_double(v.get<std::string>(), "cache"));
            out_text += (out_text.empty() ? "" : ",") + v.get<std::string>();
        }
    } catch (const IoError&) {
        return "unparsable number";
    }
    if (line["checksum"].get<std::string>() != line_checksum(d.fingerprint, in_text, out_text)) {
        return "checksum mismatch";
    }
    return {};
}

} // namespace

void EvaluationCache::load() {
    std::ifstream in(path_, std::ios::binary);
    if (!in) return;  // a missing cache is an empty cache
    std::string text;
    while (std::getline(in, text)) {
        ++lines_;
        if (text.empty()) continue;
        DecodedLine d;
        const std::string problem = decode_line(text, d);
        if (!problem.empty()) {
            ++corrupt_;
            warnings_.push_back("cache " + path_.string() + " line " + std::to_string(lines_) + ": " + problem +
                                "; entry ignored");
            continue;
        }
        if (index_.emplace(key(d.fingerprint, d.input), std::move(d.output)).second) ++per_model_[d.fingerprint];
    }
}

std::optional<std::vector<double>> EvaluationCache::find(const std::string& fingerprint,
                                                         std::span<const double> input) const {
    const auto it = index_.find(key(fingerprint, input));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

void EvaluationCache::append(const std::string& fingerprint, std::span<const EvaluationRecord> records) {
    std::lock_guard lock(write_mutex_);
    std::ofstream out;
    if (!path_.empty()) {
        if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
        out.open(path_, std::ios::binary | std::ios::app);
        if (!out) throw IoError("cannot append to cache '" + path_.string() + "'");
    }
    for (const auto& r : records) {
        if (!r.ok()) continue;
        if (out.is_open()) out << encode_line(fingerprint, r.input, r.output) << '\n';
        ++lines_;
        if (index_.insert_or_assign(key(fingerprint, r.input), r.output).second) ++per_model_[fingerprint];
    }
    if (out.is_open()) {
        out.flush();
        if (!out) throw IoError("failed writing cache '" + path_.string() + "'");
    }
}

EvaluationCache::Stats EvaluationCache::stats() const {
    Stats s;
    s.lines = lines_;
    s.entries = index_.size();
    s.corrupt_lines = corrupt_;
    s.per_model = per_model_;
    return s;
}

EvaluationCache::VerifyResult EvaluationCache::verify(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open cache '" + path.string() + "'");
    VerifyResult r;
    std::string text;
    while (std::getline(in, text)) {
        ++r.lines;
        if (text.empty()) continue;
        DecodedLine d;
        if (!decode_line(text, d).empty()) r.corrupt.push_back(r.lines);
    }
    return r;
}

// ---------------------------------------------------------------------------
// ModelRunner

ModelRunner::ModelRunner(ModelSpec spec, EvaluationCache* cache, RunnerOptions options)
    : spec_(std::move(spec)), cache_(cache), options_(options) {
    spec_.validate();
    fingerprint_ = spec_.fingerprint();
    if (const auto* b = std::get_if<BuiltinSpec>(&spec_.kind)) {
        builtin_ = make_builtin(*b, spec_.input_names.size(), spec_.output_names.size());
    }
}

namespace {

std::string render_point(std::span<const double> v) {
    std::string s = "(";
    for (std::size_t j = 0; j < v.size(); ++j) s += (j ? ", " : "") + format_short(v[j]);
    return s + ")";
}

std::string excerpt(const std::string& text) {
    constexpr std::size_t kMax = 400;
    std::string t = text.size() > kMax ? "..." + text.substr(text.size() - kMax) : text;
    while (!t.empty() && (t.back() == '\n' || t.back() == '\r')) t.pop_back();
    return t;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    fields.push_back(cur);
    for (auto& f : fields) {
        const auto b = f.find_first_not_of(" \t");
        const auto e = f.find_last_not_of(" \t");
        f = b == std::string::npos ? std::string() : f.substr(b, e - b + 1);
    }
    return fields;
}

// Parses the process output; returns an error message, empty on success.
std::string parse_batch_output(const std::string& text, const std::vector<std::string>& names, std::size_t rows,
                               std::vector<std::vector<double>>& values) {
    std::istringstream in(text);
    std::string line;
    std::vector<std::string> lines;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") != std::string::npos) lines.push_back(line);
    }
    if (lines.empty()) return "malformed output: no header row";
    if (split_csv_line(lines.front()) != names) {
        return "malformed output: header '" + lines.front() + "' does not list the outputs in order";
    }
    if (lines.size() - 1 != rows) {
        return "malformed output: expected " + std::to_string(rows) + " rows, got " + std::to_string(lines.size() - 1);
    }
    values.assign(rows, {});
    for (std::size_t r = 0; r < rows; ++r) {
        const auto fields = split_csv_line(lines[r + 1]);
        if (fields.size() != names.size()) {
            return "malformed output: row " + std::to_string(r + 1) + " has " + std::to_string(fields.size()) +
                   " fields";
        }
        try {
            for (const auto& f : fields) values[r].push_back(parse_double(f, "output row " + std::to_string(r + 1)));
        } catch (const IoError& e) {
            return std::string("malformed output: ") + e.what();
        }
    }
    return {};
}

std::atomic<unsigned> batch_counter{0};

} // namespace

void ModelRunner::run_builtin(std::vector<EvaluationRecord>& records, std::span<const std::size_t> todo) {
    auto work = [&](std::size_t begin, std::size_t end) {
        for (std::size_t k = begin; k < end; ++k) {
            EvaluationRecord& r = records[todo[k]];
            try {
                r.output = builtin_(r.input);
                if (r.output.size() != spec_.output_names.size()) r.error = "builtin returned the wrong output count";
            } catch (const std::exception& e) {
                r.error = e.what();
            }
        }
    };
    std::size_t workers = options_.workers > 0 ? static_cast<std::size_t>(options_.workers)
                                               : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min(workers, std::max<std::size_t>(1, todo.size() / 64));
    if (workers <= 1) {
        work(0, todo.size());
        return;
    }
    std::vector<std::jthread> pool;
    const std::size_t chunk = (todo.size() + workers - 1) / workers;
    for (std::size_t w = 0; w * chunk < todo.size(); ++w) {
        pool.emplace_back(work, w * chunk, std::min(todo.size(), (w + 1) * chunk));
    }
}

void ModelRunner::run_external(std::vector<EvaluationRecord>& records, std::span<const std::size_t> todo) {
    const auto& ext = std::get<ExternalSpec>(spec_.kind);
    std::string csv;
    for (std::size_t j = 0; j < spec_.input_names.size(); ++j) csv += (j ? "," : "") + spec_.input_names[j];
    csv += '\n';
    for (std::size_t k : todo) {
        csv += join_exact(records[k].input);
        csv += '\n';
    }

    std::string error;
    std::vector<std::vector<double>> values;
    for (int attempt = 0; attempt <= std::max(0, options_.retries); ++attempt) {
        std::vector<std::string> argv = ext.command;
        std::string stdin_data;
        std::filesystem::path input_file;
        if (ext.io_format == IoFormat::File) {
            input_file = std::filesystem::temp_directory_path() /
                         ("pcekit-batch-" + std::to_string(::getpid()) + "-" + std::to_string(batch_counter++) + ".csv");
            std::ofstream f(input_file, std::ios::binary);
            f << csv;
            if (!f) throw IoError("cannot write batch input '" + input_file.string() + "'");
            argv.push_back(std::filesystem::absolute(input_file).string());
        } else {
            stdin_data = csv;
        }
        ++stats_.process_launches;
        const ProcessResult res = run_process(argv, ext.working_dir, stdin_data, ext.timeout);
        if (!input_file.empty()) std::filesystem::remove(input_file);

        if (res.timed_out) {
            error = "external model timed out after " + std::to_string(ext.timeout.count()) + " ms and was killed";
        } else if (res.exit_code != 0) {
            error = "external model exited with code " + std::to_string(res.exit_code);
        } else {
            error = parse_batch_output(res.std_out, spec_.output_names, todo.size(), values);
        }
        if (error.empty()) break;
        if (!res.std_err.empty()) error += "; stderr: " + excerpt(res.std_err);
    }
    for (std::size_t k = 0; k < todo.size(); ++k) {
        EvaluationRecord& r = records[todo[k]];
        if (error.empty()) {
            r.output = std::move(values[k]);
        } else {
            r.error = error;
        }
    }
}

std::vector<EvaluationRecord> ModelRunner::evaluate_batch(const std::vector<std::vector<double>>& points) {
    std::vector<EvaluationRecord> records(points.size());
    std::vector<std::size_t> todo;
    for (std::size_t i = 0; i < points.size(); ++i) {
        EvaluationRecord& r = records[i];
        r.input = points[i];
        r.model_fingerprint = fingerprint_;
        if (points[i].size() != spec_.input_names.size()) {
            r.error = "point has " + std::to_string(points[i].size()) + " coordinates, model declares " +
                      std::to_string(spec_.input_names.size()) + " inputs";
            continue;
        }
        if (cache_) {
            if (auto hit = cache_->find(fingerprint_, points[i])) {
                r.output = std::move(*hit);
                r.source = Source::Cached;
                continue;
            }
        }
        todo.push_back(i);
    }
    if (!todo.empty()) {
        if (builtin_) {
            run_builtin(records, todo);
        } else {
            run_external(records, todo);
        }
    }
    std::vector<EvaluationRecord> fresh;
    for (std::size_t k : todo) {
        if (records[k].ok()) fresh.push_back(records[k]);
    }
    if (cache_ && !fresh.empty()) cache_->append(fingerprint_, fresh);
    for (const auto& r : records) {
        if (!r.ok()) {
            ++stats_.failed;
        } else if (r.source == Source::Cached) {
            ++stats_.cached;
        } else {
            ++stats_.fresh;
        }
    }
    return records;
}

std::vector<std::vector<double>> ModelRunner::evaluate_or_throw(const std::vector<std::vector<double>>& points) {
    auto records = evaluate_batch(points);
    std::vector<std::vector<double>> out;
    out.reserve(records.size());
    for (auto& r : records) {
        if (!r.ok()) throw ModelError("model " + spec_.label() + " failed at " + render_point(r.input) + ": " + r.error);
        out.push_back(std::move(r.output));
    }
    return out;
}

BatchModel ModelRunner::as_batch_model() {
    return [this](const std::vector<std::vector<double>>& points) { return evaluate_or_throw(points); };
}

} // namespace pcekit
