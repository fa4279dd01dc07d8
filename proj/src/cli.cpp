#include "pcekit/cli.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "pcekit/blackbox.hpp"
#include "pcekit/config.hpp"
#include "pcekit/error.hpp"
#include "pcekit/numfmt.hpp"
#include "pcekit/quadrature.hpp"
#include "pcekit/sampling.hpp"
#include "pcekit/sobol.hpp"
#include "pcekit/surrogate.hpp"

namespace pcekit {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonFlags {
    bool reproducible = false;
    int workers = -1;
};

std::string utc_timestamp() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream s;
    s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return s.str();
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory '" + dir.string() + "': " + ec.message());
}

std::ofstream open_out(const fs::path& path, bool append = false) {
    if (path.has_parent_path()) ensure_dir(path.parent_path());
    std::ofstream out(path, std::ios::binary | (append ? std::ios::app : std::ios::trunc));
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    return out;
}

void append_log(const fs::path& report_dir, const std::string& line, bool reproducible) {
    auto log = open_out(report_dir / "run.log", true);
    if (!reproducible) log << '[' << utc_timestamp() << "] ";
    log << line << '\n';
}

void print_cache_warnings(const EvaluationCache& cache, std::ostream& err) {
    for (const auto& w : cache.warnings()) err << "warning: " << w << '\n';
}

struct Runtime {
    RunConfig cfg;
    EvaluationCache cache;
    ModelRunner runner;

    Runtime(RunConfig c, int workers_override)
        : cfg(std::move(c)),
          cache(EvaluationCache::resolve_path(cfg.paths.cache)),
          runner(cfg.model, &cache, RunnerOptions{workers_override >= 0 ? workers_override : cfg.workers, 1}) {}
};

// ---------------------------------------------------------------------------

int cmd_build(const std::string& config_path, std::optional<int> full, std::optional<int> sparse,
              const std::string& model_out, const CommonFlags& flags, std::ostream& out, std::ostream& err) {
    RunConfig cfg = load_config(config_path);
    if (full) cfg.method = BuildMethod::full(*full);
    if (sparse) cfg.method = BuildMethod::sparse(*sparse);
    if (!model_out.empty()) cfg.paths.model = model_out;

    Runtime rt(std::move(cfg), flags.workers);
    print_cache_warnings(rt.cache, err);

    BuildOptions opts;
    opts.max_grid_points = rt.cfg.max_grid_points;
    opts.model_identity = rt.runner.spec().label() + "@" + rt.runner.fingerprint().substr(0, 16);
    opts.config_hash = rt.cfg.hash();
    opts.timestamp = flags.reproducible ? "" : utc_timestamp();

    const auto start = std::chrono::steady_clock::now();
    const PceModel pce = build_pce(rt.runner.as_batch_model(), rt.cfg.inputs, rt.cfg.outputs, rt.cfg.method, opts);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    save(pce, rt.cfg.paths.model);
    const auto& st = rt.runner.stats();
    std::ostringstream line;
    line << "build method=\"" << rt.cfg.method.label() << "\" evaluations=" << pce.build_meta().evaluation_count
         << " cache_hits=" << st.cached << " cache_misses=" << st.fresh << " terms=" << pce.term_count()
         << " config=" << opts.config_hash.substr(0, 16);
    if (!flags.reproducible) line << " wall_time_s=" << format_fixed(seconds, 3);
    append_log(rt.cfg.paths.report_dir, line.str(), flags.reproducible);

    out << "built " << rt.cfg.method.label() << " surrogate with " << pce.term_count() << " terms from "
        << pce.build_meta().evaluation_count << " model evaluations (" << st.cached << " cached, " << st.fresh
        << " fresh)\n"
        << "model written to " << rt.cfg.paths.model.string() << '\n';
    return kExitOk;
}

int cmd_validate(const std::string& config_path, const std::string& model_path, std::optional<std::uint64_t> seed,
                 const CommonFlags& flags, std::ostream& out, std::ostream& err) {
    RunConfig cfg = load_config(config_path);
    if (seed) cfg.validation.seed = *seed;
    const fs::path mpath = model_path.empty() ? cfg.paths.model : fs::path(model_path);
    const PceModel pce = load(mpath);
    if (pce.inputs() != cfg.inputs || pce.output_names() != cfg.outputs) {
        throw ConfigError("model file '" + mpath.string() + "' does not match the config's inputs and outputs");
    }

    Runtime rt(std::move(cfg), flags.workers);
    print_cache_warnings(rt.cache, err);
    const auto& v = rt.cfg.validation;
    const LhsDesign design = latin_hypercube(v.strata, static_cast<int>(pce.dim()), v.repeats, v.seed);
    const std::size_t n = design.size();
    const std::size_t dim = pce.dim();
    const std::size_t m = pce.output_count();

    std::vector<std::vector<double>> physical(n, std::vector<double>(dim));
    std::vector<double> flat(n * dim);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < dim; ++j) {
            physical[i][j] = unscale(design.points[i * dim + j], pce.inputs()[j]);
            flat[i * dim + j] = physical[i][j];
        }
    }
    const auto truth = rt.runner.evaluate_or_throw(physical);
    const auto pred = pce.evaluate_many(flat);

    std::vector<double> rm(m), rr(m);
    for (std::size_t o = 0; o < m; ++o) {
        std::vector<double> p(n), t(n);
        for (std::size_t i = 0; i < n; ++i) {
            p[i] = pred[i * m + o];
            t[i] = truth[i][o];
        }
        rm[o] = rmse(p, t);
        rr[o] = rrmse(p, t);
    }

    const auto& dir = rt.cfg.paths.report_dir;
    const std::string chash = rt.cfg.hash();
    {
        auto csv = open_out(dir / "validate.csv");
        csv << "method,evaluations,test_points,seed,config_hash";
        for (const auto& o : pce.output_names()) csv << ",rmse_" << o;
        for (const auto& o : pce.output_names()) csv << ",rrmse_" << o;
        csv << '\n'
            << '"' << pce.build_meta().method.label() << "\"," << pce.build_meta().evaluation_count << ',' << n << ','
            << v.seed << ',' << chash;
        for (double x : rm) csv << ',' << format_short(x);
        for (double x : rr) csv << ',' << format_short(x);
        csv << '\n';
    }
    {
        auto csv = open_out(dir / "scatter.csv");
        for (const auto& in : pce.inputs()) csv << in.name << ',';
        for (std::size_t o = 0; o < m; ++o) csv << "model_" << pce.output_names()[o] << ',';
        for (std::size_t o = 0; o < m; ++o) csv << "surrogate_" << pce.output_names()[o] << (o + 1 < m ? "," : "\n");
        for (std::size_t i = 0; i < n; ++i) {
            for (double x : physical[i]) csv << format_short(x) << ',';
            for (std::size_t o = 0; o < m; ++o) csv << format_short(truth[i][o]) << ',';
            for (std::size_t o = 0; o < m; ++o) csv << format_short(pred[i * m + o]) << (o + 1 < m ? "," : "\n");
        }
    }

    out << std::left << std::setw(16) << "Quadrature" << std::setw(8) << "Metric";
    for (const auto& o : pce.output_names()) out << std::right << std::setw(18) << o;
    out << std::right << std::setw(13) << "Evaluations" << '\n';
    for (int metric = 0; metric < 2; ++metric) {
        out << std::left << std::setw(16) << pce.build_meta().method.label() << std::setw(8)
            << (metric == 0 ? "RMSE" : "rRMSE");
        for (std::size_t o = 0; o < m; ++o) out << std::right << std::setw(18) << format_sci(metric == 0 ? rm[o] : rr[o], 3);
        out << std::right << std::setw(13) << pce.build_meta().evaluation_count << '\n';
    }
    out << std::left << "test points: " << n << " (LHS " << v.repeats << " x " << v.strata << ", seed " << v.seed
        << ")\n";

    std::ostringstream line;
    line << "validate method=\"" << pce.build_meta().method.label() << "\" test_points=" << n << " seed=" << v.seed;
    for (std::size_t o = 0; o < m; ++o) line << " rrmse_" << pce.output_names()[o] << '=' << format_sci(rr[o], 6);
    line << " cache_hits=" << rt.runner.stats().cached << " cache_misses=" << rt.runner.stats().fresh;
    append_log(dir, line.str(), flags.reproducible);
    return kExitOk;
}

struct UqArgs {
    std::string model_path;
    std::string config_path;
    std::optional<std::size_t> samples;
    std::optional<std::string> sampler;
    std::optional<std::uint64_t> seed;
    std::optional<int> bins;
    std::string out_dir;
};

std::string percentile_label(double q) {
    if (q == 50) return "Median";
    const std::string n = format_short(q);
    std::string suffix = "th";
    if (q == static_cast<int>(q)) {
        const int i = static_cast<int>(q);
        if (i % 100 < 11 || i % 100 > 13) {
            if (i % 10 == 1) suffix = "st";
            else if (i % 10 == 2) suffix = "nd";
            else if (i % 10 == 3) suffix = "rd";
        }
    }
    return n + suffix + " percentile";
}

int cmd_uq(const UqArgs& a, const CommonFlags& flags, std::ostream& out) {
    ReportSettings rs;
    fs::path out_dir;
    std::string chash;
    fs::path model_path = a.model_path;
    if (!a.config_path.empty()) {
        const RunConfig cfg = load_config(a.config_path);
        rs = cfg.report;
        out_dir = cfg.paths.report_dir;
        if (model_path.empty()) model_path = cfg.paths.model;
    }
    if (model_path.empty()) throw ConfigError("uq needs --model or --config");
    const PceModel pce = load(model_path);
    chash = pce.build_meta().config_hash;
    if (out_dir.empty()) out_dir = model_path.has_parent_path() ? model_path.parent_path() : fs::path(".");
    if (!a.out_dir.empty()) out_dir = a.out_dir;
    if (a.samples) rs.uq_samples = *a.samples;
    if (a.sampler) rs.uq_sampler = *a.sampler;
    if (a.seed) rs.uq_seed = *a.seed;
    if (a.bins) rs.histogram_bins = *a.bins;
    if (rs.uq_samples < 2) throw ConfigError("uq needs at least 2 samples");

    const std::size_t dim = pce.dim();
    const std::size_t m = pce.output_count();
    std::vector<double> ref;
    if (rs.uq_sampler == "lhs") {
        // One design with one stratum per sample.
        ref = latin_hypercube(static_cast<int>(rs.uq_samples), static_cast<int>(dim), 1, rs.uq_seed).points;
    } else if (rs.uq_sampler == "uniform") {
        ref = uniform_sample(rs.uq_samples, static_cast<int>(dim), rs.uq_seed);
    } else {
        throw ConfigError("unknown sampler '" + rs.uq_sampler + "' (expected lhs or uniform)");
    }
    std::vector<double> physical(ref.size());
    for (std::size_t i = 0; i < rs.uq_samples; ++i) {
        for (std::size_t j = 0; j < dim; ++j) physical[i * dim + j] = unscale(ref[i * dim + j], pce.inputs()[j]);
    }
    const auto values = pce.evaluate_many(physical);
    const auto mean = pce.mean();
    const auto var = pce.variance();

    std::vector<SummaryStats> stats;
    std::vector<EmpiricalDistribution> dists;
    std::vector<std::vector<double>> sorted_samples;
    for (std::size_t o = 0; o < m; ++o) {
        std::vector<double> col(rs.uq_samples);
        for (std::size_t i = 0; i < col.size(); ++i) col[i] = values[i * m + o];
        stats.push_back(summarize(col, mean[o], var[o]));
        dists.push_back(empirical_distribution(col, rs.histogram_bins));
        std::sort(col.begin(), col.end());
        sorted_samples.push_back(std::move(col));
    }

    std::vector<std::pair<std::string, std::vector<std::string>>> rows;
    std::vector<std::string> deriv;
    auto add = [&](const std::string& label, auto get, Derivation d) {
        std::vector<std::string> cells;
        for (std::size_t o = 0; o < m; ++o) cells.push_back(format_sci(get(o), 6));
        rows.emplace_back(label, std::move(cells));
        deriv.push_back(to_string(d));
    };
    add("Mean", [&](std::size_t o) { return stats[o].mean; }, stats[0].mean_derivation);
    add("Standard deviation", [&](std::size_t o) { return stats[o].std_dev; }, stats[0].std_dev_derivation);
    add("Sample minimum", [&](std::size_t o) { return stats[o].sample_min; }, Derivation::Empirical);
    std::vector<double> qs = rs.percentiles;
    std::sort(qs.begin(), qs.end());
    for (double q : qs) {
        add(percentile_label(q), [&](std::size_t o) { return percentile_sorted(sorted_samples[o], q / 100.0); },
            Derivation::Empirical);
    }
    add("Sample maximum", [&](std::size_t o) { return stats[o].sample_max; }, Derivation::Empirical);

    std::ostringstream text;
    text << "Summary statistics from " << pce.build_meta().method.label() << " PCE\n"
         << "samples: " << rs.uq_samples << " (" << rs.uq_sampler << "), seed: " << rs.uq_seed
         << ", config: " << (chash.empty() ? std::string("-") : chash) << "\n\n";
    std::size_t w0 = 9;
    for (const auto& r : rows) w0 = std::max(w0, r.first.size());
    std::vector<std::size_t> wc(m);
    for (std::size_t o = 0; o < m; ++o) {
        wc[o] = pce.output_names()[o].size();
        for (const auto& r : rows) wc[o] = std::max(wc[o], r.second[o].size());
    }
    text << std::left << std::setw(static_cast<int>(w0)) << "Statistic";
    for (std::size_t o = 0; o < m; ++o) text << "  " << std::right << std::setw(static_cast<int>(wc[o])) << pce.output_names()[o];
    text << "  Derivation\n";
    for (std::size_t r = 0; r < rows.size(); ++r) {
        text << std::left << std::setw(static_cast<int>(w0)) << rows[r].first;
        for (std::size_t o = 0; o < m; ++o) text << "  " << std::right << std::setw(static_cast<int>(wc[o])) << rows[r].second[o];
        text << "  " << deriv[r] << '\n';
    }

    open_out(out_dir / "uq_summary.txt") << text.str();
    {
        auto cdf = open_out(out_dir / "cdf.csv");
        write_cdf_csv(pce.output_names(), dists, cdf);
    }
    {
        auto hist = open_out(out_dir / "hist.csv");
        write_histogram_csv(pce.output_names(), dists, hist);
    }
    out << text.str();
    std::ostringstream line;
    line << "uq samples=" << rs.uq_samples << " sampler=" << rs.uq_sampler << " seed=" << rs.uq_seed;
    append_log(out_dir, line.str(), flags.reproducible);
    return kExitOk;
}

int cmd_sobol(const std::string& model_arg, const std::string& config_path, std::optional<int> max_subset,
              const std::string& out_arg, const CommonFlags& flags, std::ostream& out) {
    fs::path model_path = model_arg;
    fs::path out_dir;
    int max_size = 2;
    std::optional<std::uint64_t> seed;
    if (!config_path.empty()) {
        const RunConfig cfg = load_config(config_path);
        if (model_path.empty()) model_path = cfg.paths.model;
        out_dir = cfg.paths.report_dir;
        max_size = cfg.report.sobol_max_subset;
        seed = cfg.validation.seed;
    }
    if (model_path.empty()) throw ConfigError("sobol needs --model or --config");
    const PceModel pce = load(model_path);
    if (max_subset) max_size = *max_subset;
    if (out_dir.empty()) out_dir = model_path.has_parent_path() ? model_path.parent_path() : fs::path(".");
    if (!out_arg.empty()) out_dir = out_arg;
    max_size = std::min<int>(max_size, static_cast<int>(pce.dim()));

    const SobolReport report = full_report(pce, max_size);
    json doc = sobol_to_json(report);
    doc["config_hash"] = pce.build_meta().config_hash;
    doc["seed"] = seed ? json(*seed) : json(nullptr);
    doc["method"] = pce.build_meta().method.label();
    doc["model"] = pce.build_meta().model_identity;
    open_out(out_dir / "sobol.json") << doc.dump(2) << '\n';

    std::ostringstream text;
    text << "Sobol' indices from " << pce.build_meta().method.label() << " PCE (config: "
         << (pce.build_meta().config_hash.empty() ? std::string("-") : pce.build_meta().config_hash) << ")\n\n";
    write_sobol_text(report, text);
    open_out(out_dir / "sobol.txt") << text.str();
    out << text.str();
    append_log(out_dir, "sobol max_subset=" + std::to_string(max_size), flags.reproducible);
    return kExitOk;
}

int cmd_grid(int dim, std::optional<int> full, std::optional<int> sparse, const std::string& out_path,
             std::ostream& out) {
    if (full.has_value() == sparse.has_value()) throw ConfigError("grid needs exactly one of --full or --sparse");
    const GridQuadrature grid = full ? full_grid(dim, *full) : sparse_grid(dim, *sparse);
    if (out_path.empty()) {
        write_grid_csv(grid, out);
    } else {
        auto f = open_out(out_path);
        write_grid_csv(grid, f);
    }
    return kExitOk;
}

int cmd_cache(const std::string& action, const std::string& path_arg, const std::string& config_path,
              std::ostream& out, std::ostream& err) {
    fs::path path = path_arg;
    if (path.empty() && !config_path.empty()) path = EvaluationCache::resolve_path(load_config(config_path).paths.cache);
    if (path.empty()) path = EvaluationCache::resolve_path({});
    if (path.empty()) throw ConfigError("cache needs --path, --config or PCEKIT_CACHE");
    if (action == "verify") {
        const auto r = EvaluationCache::verify(path);
        out << "cache " << path.string() << ": " << r.lines << " lines, " << r.corrupt.size() << " corrupt\n";
        for (auto l : r.corrupt) err << "corrupt line " << l << '\n';
        return r.corrupt.empty() ? kExitOk : kExitIo;
    }
    if (!fs::exists(path)) throw IoError("cache '" + path.string() + "' does not exist");
    const EvaluationCache cache(path);
    const auto s = cache.stats();
    out << "cache " << path.string() << '\n'
        << "lines: " << s.lines << '\n'
        << "entries: " << s.entries << '\n'
        << "corrupt lines: " << s.corrupt_lines << '\n';
    for (const auto& [fp, count] : s.per_model) out << "model " << fp.substr(0, 16) << ": " << count << " entries\n";
    return kExitOk;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Polynomial chaos surrogates, uncertainty quantification and Sobol' sensitivity analysis", "pcekit"};
    app.require_subcommand(1);
    CommonFlags flags;

    std::string config_path, model_path, out_path, model_out;
    std::optional<int> full, sparse, max_subset;
    std::optional<std::uint64_t> seed;
    int dim = 0;

    auto* build = app.add_subcommand("build", "Evaluate the black box on a quadrature grid and write the surrogate");
    build->add_option("-c,--config", config_path, "Run configuration (JSON)")->required();
    auto* bf = build->add_option("--full", full, "Override: full Gauss-Legendre grid of order P");
    auto* bs = build->add_option("--sparse", sparse, "Override: sparse Clenshaw-Curtis grid of level L");
    bf->excludes(bs);
    build->add_option("-o,--model-out", model_out, "Write the model here instead of paths.model");
    build->add_flag("--reproducible", flags.reproducible, "Omit timestamps and timings from artifacts");
    build->add_option("-j,--workers", flags.workers, "Concurrent builtin evaluations (0 = all cores)");

    auto* validate = app.add_subcommand("validate", "RMSE and rRMSE of the surrogate at Latin hypercube test points");
    validate->add_option("-c,--config", config_path, "Run configuration (JSON)")->required();
    validate->add_option("-m,--model", model_path, "Surrogate file (default: paths.model)");
    validate->add_option("--seed", seed, "Override validation.seed");
    validate->add_flag("--reproducible", flags.reproducible, "Omit timestamps from the log");
    validate->add_option("-j,--workers", flags.workers, "Concurrent builtin evaluations (0 = all cores)");

    UqArgs uq_args;
    auto* uq = app.add_subcommand("uq", "Summary statistics and empirical distributions of the surrogate");
    uq->add_option("-m,--model", uq_args.model_path, "Surrogate file");
    uq->add_option("-c,--config", uq_args.config_path, "Run configuration supplying report settings");
    uq->add_option("-n,--samples", uq_args.samples, "Number of surrogate evaluations (default 3000)");
    uq->add_option("--sampler", uq_args.sampler, "lhs or uniform")->check(CLI::IsMember({"lhs", "uniform"}));
    uq->add_option("--seed", uq_args.seed, "Sampler seed");
    uq->add_option("--bins", uq_args.bins, "Histogram bins");
    uq->add_option("-o,--out", uq_args.out_dir, "Output directory");
    uq->add_flag("--reproducible", flags.reproducible, "Omit timestamps from the log");

    auto* sobol = app.add_subcommand("sobol", "Sobol' indices computed from the surrogate coefficients");
    sobol->add_option("-m,--model", model_path, "Surrogate file");
    sobol->add_option("-c,--config", config_path, "Run configuration");
    sobol->add_option("-k,--max-subset", max_subset, "Largest interaction order to report");
    sobol->add_option("-o,--out", out_path, "Output directory");
    sobol->add_flag("--reproducible", flags.reproducible, "Omit timestamps from the log");

    auto* grid = app.add_subcommand("grid", "Export quadrature points and weights as CSV");
    grid->add_option("-d,--dim", dim, "Number of dimensions")->required();
    auto* gf = grid->add_option("--full", full, "Full Gauss-Legendre grid of order P");
    auto* gs = grid->add_option("--sparse", sparse, "Sparse Clenshaw-Curtis grid of level L");
    gf->excludes(gs);
    grid->add_option("-o,--out", out_path, "Output file (default: stdout)");

    std::string cache_action;
    auto* cache = app.add_subcommand("cache", "Inspect the evaluation cache");
    cache->add_option("action", cache_action, "stats or verify")->required()->check(CLI::IsMember({"stats", "verify"}));
    cache->add_option("-p,--path", out_path, "Cache file (default: from --config or PCEKIT_CACHE)");
    cache->add_option("-c,--config", config_path, "Run configuration");

    std::vector<const char*> argv = {"pcekit"};
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*build) return cmd_build(config_path, full, sparse, model_out, flags, out, err);
        if (*validate) return cmd_validate(config_path, model_path, seed, flags, out, err);
        if (*uq) return cmd_uq(uq_args, flags, out);
        if (*sobol) return cmd_sobol(model_path, config_path, max_subset, out_path, flags, out);
        if (*grid) return cmd_grid(dim, full, sparse, out_path, out);
        if (*cache) return cmd_cache(cache_action, out_path, config_path, out, err);
    } catch (const ConfigError& e) {
        err << "configuration error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const NumericalError& e) {
        err << "numerical error: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const ModelError& e) {
        err << "model error: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const IoError& e) {
        err << "I/O error: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::invalid_argument& e) {
        err << "invalid argument: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitNumerical;
    }
    return kExitConfig;
}

} // namespace pcekit
