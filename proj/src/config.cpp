#include "pcekit/config.hpp"

#include <fstream>
#include <set>

#include "pcekit/error.hpp"

namespace pcekit {

using nlohmann::json;

namespace {

void only_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
    if (!obj.is_object()) throw ConfigError("config: '" + where + "' must be an object");
    for (const auto& [key, value] : obj.items()) {
        if (!allowed.count(key)) throw ConfigError("config: unknown key '" + where + "." + key + "'");
    }
}

const json& need(const json& obj, const std::string& where, const char* key) {
    const auto it = obj.find(key);
    if (it == obj.end()) throw ConfigError("config: missing key '" + where + "." + key + "'");
    return *it;
}

double get_number(const json& v, const std::string& field) {
    if (!v.is_number()) throw ConfigError("config: '" + field + "' must be a number");
    return v.get<double>();
}

long long get_int(const json& v, const std::string& field, long long lo) {
    if (!v.is_number_integer()) throw ConfigError("config: '" + field + "' must be an integer");
    const long long x = v.get<long long>();
    if (x < lo) throw ConfigError("config: '" + field + "' must be at least " + std::to_string(lo));
    return x;
}

std::uint64_t get_seed(const json& v, const std::string& field) {
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
        throw ConfigError("config: '" + field + "' must be a non-negative integer");
    }
    return v.get<std::uint64_t>();
}

std::string get_string(const json& v, const std::string& field) {
    if (!v.is_string()) throw ConfigError("config: '" + field + "' must be a string");
    return v.get<std::string>();
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    const std::filesystem::path path(p);
    return (path.is_absolute() || base.empty() ? path : base / path).lexically_normal();
}

} // namespace

RunConfig parse_config(const json& doc, const std::filesystem::path& base_dir) {
    only_keys(doc, "config", {"model", "inputs", "outputs", "method", "validation", "report", "paths", "workers",
                              "max_grid_points"});
    RunConfig cfg;

    // inputs and outputs first: the model spec takes their names
    const json& jin = need(doc, "config", "inputs");
    if (!jin.is_array() || jin.empty()) throw ConfigError("config: 'inputs' must be a non-empty array");
    for (std::size_t j = 0; j < jin.size(); ++j) {
        const std::string where = "inputs[" + std::to_string(j) + "]";
        only_keys(jin[j], where, {"name", "min", "max", "distribution"});
        InputVariable v;
        v.name = get_string(need(jin[j], where, "name"), where + ".name");
        v.v_min = get_number(need(jin[j], where, "min"), where + ".min");
        v.v_max = get_number(need(jin[j], where, "max"), where + ".max");
        if (jin[j].contains("distribution") && get_string(jin[j]["distribution"], where + ".distribution") != "uniform") {
            throw ConfigError("config: '" + where + ".distribution' must be 'uniform'");
        }
        if (!(v.v_min < v.v_max)) {
            throw ConfigError("config: input '" + v.name + "' has min >= max");
        }
        v.validate();
        cfg.inputs.push_back(std::move(v));
    }
    const json& jout = need(doc, "config", "outputs");
    if (!jout.is_array() || jout.empty()) throw ConfigError("config: 'outputs' must be a non-empty array");
    for (const auto& o : jout) cfg.outputs.push_back(get_string(o, "outputs[]"));

    const json& jm = need(doc, "config", "model");
    only_keys(jm, "model", {"builtin", "parameters", "external"});
    if (jm.contains("builtin") == jm.contains("external")) {
        throw ConfigError("config: 'model' needs exactly one of 'builtin' or 'external'");
    }
    if (jm.contains("builtin")) {
        BuiltinSpec b;
        b.name = get_string(jm["builtin"], "model.builtin");
        if (jm.contains("parameters")) b.parameters = jm["parameters"];
        cfg.model.kind = std::move(b);
    } else {
        if (jm.contains("parameters")) throw ConfigError("config: 'model.parameters' only applies to builtins");
        const json& je = jm["external"];
        only_keys(je, "model.external", {"command", "working_dir", "io_format", "timeout_seconds"});
        ExternalSpec e;
        const json& cmd = need(je, "model.external", "command");
        if (cmd.is_string()) {
            e.command = {cmd.get<std::string>()};
        } else if (cmd.is_array()) {
            for (const auto& a : cmd) e.command.push_back(get_string(a, "model.external.command[]"));
        } else {
            throw ConfigError("config: 'model.external.command' must be a string or an array of strings");
        }
        if (e.command.empty() || e.command.front().empty()) throw ConfigError("config: 'model.external.command' is empty");
        // A relative executable path containing a slash is relative to the config file.
        if (e.command.front().find('/') != std::string::npos) e.command.front() = resolve(base_dir, e.command.front()).string();
        e.working_dir = je.contains("working_dir") ? resolve(base_dir, get_string(je["working_dir"], "model.external.working_dir"))
                                                    : base_dir;
        if (je.contains("io_format")) {
            const std::string f = get_string(je["io_format"], "model.external.io_format");
            if (f == "file") e.io_format = IoFormat::File;
            else if (f == "stdin") e.io_format = IoFormat::Stdin;
            else throw ConfigError("config: 'model.external.io_format' must be 'file' or 'stdin'");
        }
        if (je.contains("timeout_seconds")) {
            const double t = get_number(je["timeout_seconds"], "model.external.timeout_seconds");
            if (!(t > 0)) throw ConfigError("config: 'model.external.timeout_seconds' must be positive");
            e.timeout = std::chrono::milliseconds(static_cast<long long>(t * 1000.0));
        }
        cfg.model.kind = std::move(e);
    }
    for (const auto& v : cfg.inputs) cfg.model.input_names.push_back(v.name);
    cfg.model.output_names = cfg.outputs;
    cfg.model.validate();

    const json& jmeth = need(doc, "config", "method");
    const std::string type = get_string(need(jmeth, "method", "type"), "method.type");
    if (type == "full") {
        only_keys(jmeth, "method", {"type", "order"});
        cfg.method = BuildMethod::full(static_cast<int>(get_int(need(jmeth, "method", "order"), "method.order", 0)));
    } else if (type == "sparse") {
        only_keys(jmeth, "method", {"type", "level"});
        cfg.method = BuildMethod::sparse(static_cast<int>(get_int(need(jmeth, "method", "level"), "method.level", 1)));
    } else {
        throw ConfigError("config: 'method.type' must be 'full' or 'sparse'");
    }

    if (doc.contains("validation")) {
        const json& jv = doc["validation"];
        only_keys(jv, "validation", {"strata", "repeats", "seed"});
        if (jv.contains("strata")) cfg.validation.strata = static_cast<int>(get_int(jv["strata"], "validation.strata", 1));
        if (jv.contains("repeats")) cfg.validation.repeats = static_cast<int>(get_int(jv["repeats"], "validation.repeats", 1));
        if (jv.contains("seed")) cfg.validation.seed = get_seed(jv["seed"], "validation.seed");
    }

    if (doc.contains("report")) {
        const json& jr = doc["report"];
        only_keys(jr, "report", {"percentiles", "histogram_bins", "sobol_max_subset", "uq_samples", "uq_sampler", "uq_seed"});
        if (jr.contains("percentiles")) {
            if (!jr["percentiles"].is_array()) throw ConfigError("config: 'report.percentiles' must be an array");
            cfg.report.percentiles.clear();
            for (const auto& p : jr["percentiles"]) {
                const double q = get_number(p, "report.percentiles[]");
                if (q < 0 || q > 100) throw ConfigError("config: 'report.percentiles' entries must lie in [0, 100]");
                cfg.report.percentiles.push_back(q);
            }
        }
        if (jr.contains("histogram_bins")) {
            cfg.report.histogram_bins = static_cast<int>(get_int(jr["histogram_bins"], "report.histogram_bins", 1));
        }
        if (jr.contains("sobol_max_subset")) {
            cfg.report.sobol_max_subset = static_cast<int>(get_int(jr["sobol_max_subset"], "report.sobol_max_subset", 1));
        }
        if (jr.contains("uq_samples")) {
            cfg.report.uq_samples = static_cast<std::size_t>(get_int(jr["uq_samples"], "report.uq_samples", 2));
        }
        if (jr.contains("uq_sampler")) {
            cfg.report.uq_sampler = get_string(jr["uq_sampler"], "report.uq_sampler");
            if (cfg.report.uq_sampler != "lhs" && cfg.report.uq_sampler != "uniform") {
                throw ConfigError("config: 'report.uq_sampler' must be 'lhs' or 'uniform'");
            }
        }
        if (jr.contains("uq_seed")) cfg.report.uq_seed = get_seed(jr["uq_seed"], "report.uq_seed");
    }
    if (cfg.report.sobol_max_subset > static_cast<int>(cfg.inputs.size())) {
        throw ConfigError("config: 'report.sobol_max_subset' exceeds the number of inputs");
    }

    cfg.paths.report_dir = resolve(base_dir, "report");
    if (doc.contains("paths")) {
        const json& jp = doc["paths"];
        only_keys(jp, "paths", {"cache", "model", "report_dir"});
        if (jp.contains("report_dir")) cfg.paths.report_dir = resolve(base_dir, get_string(jp["report_dir"], "paths.report_dir"));
        if (jp.contains("model")) cfg.paths.model = resolve(base_dir, get_string(jp["model"], "paths.model"));
        if (jp.contains("cache")) cfg.paths.cache = resolve(base_dir, get_string(jp["cache"], "paths.cache"));
    }
    if (cfg.paths.model.empty()) cfg.paths.model = cfg.paths.report_dir / "model.json";
    if (cfg.paths.cache.empty()) cfg.paths.cache = cfg.paths.report_dir / "cache.jsonl";

    if (doc.contains("workers")) cfg.workers = static_cast<int>(get_int(doc["workers"], "workers", 0));
    if (doc.contains("max_grid_points")) {
        cfg.max_grid_points = static_cast<std::size_t>(get_int(doc["max_grid_points"], "max_grid_points", 1));
    }
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open config file '" + path.string() + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config '" + path.string() + "' is not valid JSON: " + e.what());
    }
    return parse_config(doc, path.parent_path());
}

json RunConfig::canonical() const {
    json doc;
    doc["model"] = model.identity();
    json in = json::array();
    for (const auto& v : inputs) in.push_back({{"name", v.name}, {"min", v.v_min}, {"max", v.v_max}});
    doc["inputs"] = std::move(in);
    doc["outputs"] = outputs;
    doc["method"] = {{"type", method.kind == GridMethod::FullGrid ? "full" : "sparse"}, {"order", method.order}};
    doc["validation"] = {{"strata", validation.strata}, {"repeats", validation.repeats}, {"seed", validation.seed}};
    doc["report"] = {{"percentiles", report.percentiles},
                     {"histogram_bins", report.histogram_bins},
                     {"sobol_max_subset", report.sobol_max_subset},
                     {"uq_samples", report.uq_samples},
                     {"uq_sampler", report.uq_sampler},
                     {"uq_seed", report.uq_seed}};
    return doc;
}

std::string RunConfig::hash() const { return sha256_hex(canonical().dump()); }

} // namespace pcekit
