#include "pcekit/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

#include "pcekit/error.hpp"
#include "pcekit/numfmt.hpp"
#include "pcekit/polybasis.hpp"

namespace pcekit {

using nlohmann::json;

void InputVariable::validate() const {
    if (!std::isfinite(v_min) || !std::isfinite(v_max)) {
        throw ConfigError("input '" + name + "': range bounds must be finite");
    }
    if (!(v_min < v_max)) {
        throw ConfigError("input '" + name + "': range [" + format_short(v_min) + ", " +
                          format_short(v_max) + "] needs min < max");
    }
}

double rescale(double v, const InputVariable& var) {
    return (2.0 * v - var.v_max - var.v_min) / (var.v_max - var.v_min);
}

double unscale(double xi, const InputVariable& var) {
    // Endpoints are reproduced exactly.
    if (xi == -1.0) return var.v_min;
    if (xi == 1.0) return var.v_max;
    return 0.5 * (var.v_min + var.v_max) + 0.5 * (var.v_max - var.v_min) * xi;
}

std::string BuildMethod::label() const {
    return kind == GridMethod::FullGrid ? "Full, p=" + std::to_string(order)
                                        : "Sparse, p=" + std::to_string(order);
}

namespace {

Neighborhood neighborhood_for(BuildMethod method, int dim) {
    return method.kind == GridMethod::FullGrid
               ? Neighborhood{NeighborhoodKind::TensorProduct, method.order, dim}
               : Neighborhood{NeighborhoodKind::TotalOrder, method.order, dim};
}

void check_names(const std::vector<InputVariable>& inputs, const std::vector<std::string>& outputs) {
    if (inputs.empty()) throw ConfigError("at least one input variable is required");
    if (outputs.empty()) throw ConfigError("at least one output is required");
    std::set<std::string> seen;
    for (const auto& in : inputs) {
        in.validate();
        if (!seen.insert(in.name).second) throw ConfigError("duplicate input name '" + in.name + "'");
    }
    seen.clear();
    for (const auto& o : outputs) {
        if (!seen.insert(o).second) throw ConfigError("duplicate output name '" + o + "'");
    }
}

std::string render_point(std::span<const double> v) {
    std::string s = "(";
    for (std::size_t j = 0; j < v.size(); ++j) s += (j ? ", " : "") + format_short(v[j]);
    return s + ")";
}

} // namespace

PceModel::PceModel(std::vector<InputVariable> inputs, std::vector<std::string> output_names,
                   Neighborhood neighborhood, std::vector<double> coefficients, BuildMeta meta)
    : inputs_(std::move(inputs)),
      output_names_(std::move(output_names)),
      neighborhood_(neighborhood),
      coefficients_(std::move(coefficients)),
      meta_(std::move(meta)) {
    check_names(inputs_, output_names_);
    if (static_cast<std::size_t>(neighborhood_.dim) != inputs_.size()) {
        throw ConfigError("neighborhood dimension " + std::to_string(neighborhood_.dim) +
                          " does not match " + std::to_string(inputs_.size()) + " inputs");
    }
    terms_ = enumerate(neighborhood_);
    if (coefficients_.size() != terms_.size() * output_names_.size()) {
        throw std::invalid_argument("coefficient table has " + std::to_string(coefficients_.size()) +
                                    " entries, expected " +
                                    std::to_string(terms_.size() * output_names_.size()));
    }
}

double PceModel::coefficient(const MultiIndex& index, std::size_t output) const {
    if (!neighborhood_.contains(index)) return 0.0;
    const auto it = std::lower_bound(terms_.begin(), terms_.end(), index, graded_less);
    if (it == terms_.end() || *it != index) return 0.0;
    return coefficient(static_cast<std::size_t>(it - terms_.begin()), output);
}

std::size_t PceModel::output_index(const std::string& name) const {
    const auto it = std::find(output_names_.begin(), output_names_.end(), name);
    if (it == output_names_.end()) throw ConfigError("unknown output '" + name + "'");
    return static_cast<std::size_t>(it - output_names_.begin());
}

void PceModel::accumulate(std::span<const double> xi, std::span<double> out, std::vector<double>& table) const {
    const std::size_t n = inputs_.size();
    const std::size_t stride = static_cast<std::size_t>(neighborhood_.order) + 1;
    table.resize(n * stride);
    for (std::size_t j = 0; j < n; ++j) {
        legendre_table(neighborhood_.order, xi[j], std::span<double>(table.data() + j * stride, stride));
    }
    const std::size_t m = output_names_.size();
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t t = 0; t < terms_.size(); ++t) {
        const auto& orders = terms_[t].orders();
        double basis = 1.0;
        for (std::size_t j = 0; j < n; ++j) basis *= table[j * stride + orders[j]];
        const double* c = coefficients_.data() + t * m;
        for (std::size_t o = 0; o < m; ++o) out[o] += c[o] * basis;
    }
}

std::vector<double> PceModel::evaluate_reference(std::span<const double> xi) const {
    if (xi.size() != inputs_.size()) {
        throw std::invalid_argument("point has " + std::to_string(xi.size()) + " coordinates, model has " +
                                    std::to_string(inputs_.size()) + " inputs");
    }
    std::vector<double> out(output_names_.size());
    std::vector<double> table;
    accumulate(xi, out, table);
    return out;
}

std::vector<double> PceModel::evaluate(std::span<const double> physical) const {
    if (physical.size() != inputs_.size()) {
        throw std::invalid_argument("point has " + std::to_string(physical.size()) +
                                    " coordinates, model has " + std::to_string(inputs_.size()) + " inputs");
    }
    std::vector<double> xi(physical.size());
    for (std::size_t j = 0; j < xi.size(); ++j) xi[j] = rescale(physical[j], inputs_[j]);
    return evaluate_reference(xi);
}

std::vector<double> PceModel::evaluate_many(std::span<const double> physical, int threads) const {
    const std::size_t n = inputs_.size();
    if (physical.size() % n != 0) {
        throw std::invalid_argument("flattened points are not a multiple of the input dimension");
    }
    const std::size_t count = physical.size() / n;
    const std::size_t m = output_names_.size();
    std::vector<double> out(count * m);

    auto work = [&](std::size_t begin, std::size_t end) {
        std::vector<double> xi(n);
        std::vector<double> table;
        for (std::size_t i = begin; i < end; ++i) {
            for (std::size_t j = 0; j < n; ++j) xi[j] = rescale(physical[i * n + j], inputs_[j]);
            accumulate(xi, std::span<double>(out.data() + i * m, m), table);
        }
    };

    std::size_t workers = threads > 0 ? static_cast<std::size_t>(threads)
                                      : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min(workers, std::max<std::size_t>(1, count / 256));
    if (workers <= 1) {
        work(0, count);
        return out;
    }
    std::vector<std::jthread> pool;
    const std::size_t chunk = (count + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t b = w * chunk;
        const std::size_t e = std::min(count, b + chunk);
        if (b < e) pool.emplace_back(work, b, e);
    }
    pool.clear();
    return out;
}

std::vector<double> PceModel::mean() const {
    std::vector<double> m(output_names_.size());
    for (std::size_t o = 0; o < m.size(); ++o) m[o] = coefficient(0, o);
    return m;
}

std::vector<double> PceModel::variance() const {
    // The constant term is first, so summing from term 1 is
    // sum_i Y_i^2 <L_i, L_i> - Y_0^2 without the cancellation.
    std::vector<double> v(output_names_.size(), 0.0);
    for (std::size_t t = 1; t < terms_.size(); ++t) {
        const double norm = basis_norm(terms_[t]);
        for (std::size_t o = 0; o < v.size(); ++o) {
            const double c = coefficient(t, o);
            v[o] += c * c * norm;
        }
    }
    return v;
}

bool operator==(const PceModel& a, const PceModel& b) {
    return a.inputs_ == b.inputs_ && a.output_names_ == b.output_names_ &&
           a.neighborhood_ == b.neighborhood_ && a.coefficients_ == b.coefficients_ && a.meta_ == b.meta_;
}

GridQuadrature grid_for(BuildMethod method, int dim, std::size_t max_points) {
    if (method.kind == GridMethod::FullGrid) return full_grid(dim, method.order, max_points);
    return sparse_grid(dim, method.order, max_points);
}

std::vector<std::vector<double>> physical_points(const GridQuadrature& grid,
                                                 std::span<const InputVariable> inputs) {
    if (static_cast<std::size_t>(grid.dim()) != inputs.size()) {
        throw std::invalid_argument("grid dimension does not match the number of inputs");
    }
    std::vector<std::vector<double>> pts(grid.size(), std::vector<double>(inputs.size()));
    for (std::size_t q = 0; q < grid.size(); ++q) {
        const auto xi = grid.point(q);
        for (std::size_t j = 0; j < inputs.size(); ++j) pts[q][j] = unscale(xi[j], inputs[j]);
    }
    return pts;
}

PceModel assemble_pce(const GridQuadrature& grid, std::span<const std::vector<double>> outputs,
                      std::vector<InputVariable> inputs, std::vector<std::string> output_names,
                      BuildMethod method, BuildMeta meta) {
    const int dim = grid.dim();
    const std::size_t m = output_names.size();
    if (outputs.size() != grid.size()) {
        throw ModelError("model returned " + std::to_string(outputs.size()) + " results for " +
                         std::to_string(grid.size()) + " grid points");
    }
    for (std::size_t q = 0; q < outputs.size(); ++q) {
        if (outputs[q].size() != m) {
            throw ModelError("model returned " + std::to_string(outputs[q].size()) + " outputs at grid point " +
                             std::to_string(q) + ", expected " + std::to_string(m));
        }
        for (double y : outputs[q]) {
            if (!std::isfinite(y)) {
                throw ModelError("model returned a non-finite output at grid point " + render_point(grid.point(q)));
            }
        }
    }

    const Neighborhood nbhd = neighborhood_for(method, dim);
    const std::vector<MultiIndex> terms = enumerate(nbhd);
    const std::size_t stride = static_cast<std::size_t>(nbhd.order) + 1;
    std::vector<double> coef(terms.size() * m, 0.0);
    std::vector<double> table(static_cast<std::size_t>(dim) * stride);

    // One pass over the points; every coefficient reuses the same model values.
    for (std::size_t q = 0; q < grid.size(); ++q) {
        const auto xi = grid.point(q);
        for (int j = 0; j < dim; ++j) {
            legendre_table(nbhd.order, xi[j], std::span<double>(table.data() + j * stride, stride));
        }
        const double w = grid.weight(q);
        for (std::size_t t = 0; t < terms.size(); ++t) {
            const auto& orders = terms[t].orders();
            double basis = w;
            for (int j = 0; j < dim; ++j) basis *= table[j * stride + orders[j]];
            for (std::size_t o = 0; o < m; ++o) coef[t * m + o] += outputs[q][o] * basis;
        }
    }
    for (std::size_t t = 0; t < terms.size(); ++t) {
        double scale = 1.0;
        for (int order : terms[t].orders()) scale *= (2.0 * order + 1.0) / 2.0;
        for (std::size_t o = 0; o < m; ++o) coef[t * m + o] *= scale;
    }
    for (std::size_t o = 0; o < m; ++o) {
        double biggest = 0.0;
        for (std::size_t t = 0; t < terms.size(); ++t) biggest = std::max(biggest, std::abs(coef[t * m + o]));
        const double floor = 1e-14 * biggest;
        for (std::size_t t = 0; t < terms.size(); ++t) {
            if (std::abs(coef[t * m + o]) < floor) coef[t * m + o] = 0.0;
        }
    }

    meta.method = method;
    meta.evaluation_count = grid.size();
    return PceModel(std::move(inputs), std::move(output_names), nbhd, std::move(coef), std::move(meta));
}

PceModel build_pce(const BatchModel& model, std::vector<InputVariable> inputs,
                   std::vector<std::string> outputs, BuildMethod method, const BuildOptions& options) {
    check_names(inputs, outputs);
    if (method.kind == GridMethod::FullGrid && method.order < 0) {
        throw ConfigError("full-grid order must be non-negative");
    }
    if (method.kind == GridMethod::SparseGrid && method.order < 1) {
        throw ConfigError("sparse-grid level must be at least 1");
    }
    if (method.order > options.max_degree) {
        throw ConfigError("polynomial order " + std::to_string(method.order) + " exceeds the maximum degree " +
                          std::to_string(options.max_degree));
    }
    const int dim = static_cast<int>(inputs.size());
    const GridQuadrature grid = grid_for(method, dim, options.max_grid_points);
    cardinality(neighborhood_for(method, dim));

    const auto points = physical_points(grid, inputs);
    const auto values = model(points);

    BuildMeta meta;
    meta.model_identity = options.model_identity;
    meta.config_hash = options.config_hash;
    meta.timestamp = options.timestamp;
    return assemble_pce(grid, values, std::move(inputs), std::move(outputs), method, std::move(meta));
}

// ---------------------------------------------------------------------------
// Persistence

void save(const PceModel& model, std::ostream& out) {
    json doc;
    doc["schema"] = kModelSchemaId;
    doc["version"] = kModelSchemaVersion;
    json inputs = json::array();
    for (const auto& in : model.inputs()) {
        inputs.push_back({{"name", in.name},
                          {"distribution", "uniform"},
                          {"min", format_exact(in.v_min)},
                          {"max", format_exact(in.v_max)}});
    }
    doc["inputs"] = std::move(inputs);
    doc["outputs"] = model.output_names();
    const auto& nbhd = model.neighborhood();
    doc["neighborhood"] = {{"kind", to_string(nbhd.kind)}, {"order", nbhd.order}, {"dim", nbhd.dim}};
    json coefs = json::array();
    for (std::size_t t = 0; t < model.term_count(); ++t) {
        json values = json::array();
        for (std::size_t o = 0; o < model.output_count(); ++o) values.push_back(format_exact(model.coefficient(t, o)));
        coefs.push_back({{"index", model.terms()[t].orders()}, {"values", std::move(values)}});
    }
    doc["coefficients"] = std::move(coefs);
    const auto& meta = model.build_meta();
    doc["build"] = {{"method", meta.method.kind == GridMethod::FullGrid ? "full" : "sparse"},
                    {"order", meta.method.order},
                    {"evaluation_count", meta.evaluation_count},
                    {"model", meta.model_identity},
                    {"config_hash", meta.config_hash},
                    {"timestamp", meta.timestamp}};
    out << doc.dump(2) << '\n';
}

void save(const PceModel& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    save(model, out);
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

namespace {

const json& field(const json& obj, const char* name, const std::string& where) {
    if (!obj.is_object()) throw IoError("model file: " + where + " must be an object");
    const auto it = obj.find(name);
    if (it == obj.end()) throw IoError("model file: missing field '" + where + "." + name + "'");
    return *it;
}

std::string string_field(const json& obj, const char* name, const std::string& where) {
    const json& v = field(obj, name, where);
    if (!v.is_string()) throw IoError("model file: field '" + where + "." + name + "' must be a string");
    return v.get<std::string>();
}

long long int_field(const json& obj, const char* name, const std::string& where) {
    const json& v = field(obj, name, where);
    if (!v.is_number_integer()) throw IoError("model file: field '" + where + "." + name + "' must be an integer");
    return v.get<long long>();
}

} // namespace

PceModel load(std::istream& in) {
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw IoError(std::string("model file: malformed JSON: ") + e.what());
    }
    const std::string schema = string_field(doc, "schema", "document");
    if (schema != kModelSchemaId) throw IoError("model file: field 'schema' is '" + schema + "', expected '" + kModelSchemaId + "'");
    const long long version = int_field(doc, "version", "document");
    if (version != kModelSchemaVersion) {
        throw IoError("model file: unsupported schema version " + std::to_string(version) +
                      " (this build reads version " + std::to_string(kModelSchemaVersion) + ")");
    }

    std::vector<InputVariable> inputs;
    const json& jin = field(doc, "inputs", "document");
    if (!jin.is_array()) throw IoError("model file: field 'inputs' must be an array");
    for (std::size_t j = 0; j < jin.size(); ++j) {
        const std::string where = "inputs[" + std::to_string(j) + "]";
        InputVariable v;
        v.name = string_field(jin[j], "name", where);
        if (string_field(jin[j], "distribution", where) != "uniform") {
            throw IoError("model file: field '" + where + ".distribution' must be 'uniform'");
        }
        v.v_min = parse_double(string_field(jin[j], "min", where), where + ".min");
        v.v_max = parse_double(string_field(jin[j], "max", where), where + ".max");
        inputs.push_back(std::move(v));
    }

    const json& jout = field(doc, "outputs", "document");
    if (!jout.is_array()) throw IoError("model file: field 'outputs' must be an array");
    std::vector<std::string> outputs;
    for (const auto& o : jout) {
        if (!o.is_string()) throw IoError("model file: field 'outputs' must hold strings");
        outputs.push_back(o.get<std::string>());
    }

    const json& jn = field(doc, "neighborhood", "document");
    Neighborhood nbhd;
    nbhd.kind = neighborhood_kind_from_string(string_field(jn, "kind", "neighborhood"));
    nbhd.order = static_cast<int>(int_field(jn, "order", "neighborhood"));
    nbhd.dim = static_cast<int>(int_field(jn, "dim", "neighborhood"));
    if (nbhd.dim != static_cast<int>(inputs.size())) {
        throw IoError("model file: field 'neighborhood.dim' does not match the number of inputs");
    }

    std::vector<MultiIndex> terms;
    try {
        terms = enumerate(nbhd);
    } catch (const ConfigError& e) {
        throw IoError(std::string("model file: field 'neighborhood': ") + e.what());
    }
    const std::size_t m = outputs.size();
    std::vector<double> coef(terms.size() * m, 0.0);
    std::vector<bool> seen(terms.size(), false);
    const json& jc = field(doc, "coefficients", "document");
    if (!jc.is_array()) throw IoError("model file: field 'coefficients' must be an array");
    for (std::size_t e = 0; e < jc.size(); ++e) {
        const std::string where = "coefficients[" + std::to_string(e) + "]";
        const json& jidx = field(jc[e], "index", where);
        if (!jidx.is_array()) throw IoError("model file: field '" + where + ".index' must be an array");
        std::vector<int> orders;
        for (const auto& v : jidx) {
            if (!v.is_number_integer() || v.get<long long>() < 0) {
                throw IoError("model file: field '" + where + ".index' must hold non-negative integers");
            }
            orders.push_back(v.get<int>());
        }
        const MultiIndex idx(std::move(orders));
        if (!nbhd.contains(idx)) {
            throw IoError("model file: field '" + where + ".index' " + idx.to_string() + " is outside the neighborhood");
        }
        const auto t = static_cast<std::size_t>(
            std::lower_bound(terms.begin(), terms.end(), idx, graded_less) - terms.begin());
        if (seen[t]) throw IoError("model file: field '" + where + ".index' " + idx.to_string() + " repeated");
        seen[t] = true;
        const json& jv = field(jc[e], "values", where);
        if (!jv.is_array() || jv.size() != m) {
            throw IoError("model file: field '" + where + ".values' must hold one value per output");
        }
        for (std::size_t o = 0; o < m; ++o) {
            if (!jv[o].is_string()) throw IoError("model file: field '" + where + ".values' must hold decimal strings");
            coef[t * m + o] = parse_double(jv[o].get<std::string>(), where + ".values");
        }
    }
    for (std::size_t t = 0; t < terms.size(); ++t) {
        if (!seen[t]) throw IoError("model file: field 'coefficients' lacks an entry for " + terms[t].to_string());
    }

    const json& jb = field(doc, "build", "document");
    BuildMeta meta;
    const std::string method = string_field(jb, "method", "build");
    if (method != "full" && method != "sparse") throw IoError("model file: field 'build.method' must be 'full' or 'sparse'");
    meta.method = {method == "full" ? GridMethod::FullGrid : GridMethod::SparseGrid,
                   static_cast<int>(int_field(jb, "order", "build"))};
    meta.evaluation_count = static_cast<std::size_t>(int_field(jb, "evaluation_count", "build"));
    meta.model_identity = string_field(jb, "model", "build");
    meta.config_hash = string_field(jb, "config_hash", "build");
    meta.timestamp = string_field(jb, "timestamp", "build");

    try {
        return PceModel(std::move(inputs), std::move(outputs), nbhd, std::move(coef), std::move(meta));
    } catch (const ConfigError& e) {
        throw IoError(std::string("model file: ") + e.what());
    }
}

PceModel load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open model file '" + path.string() + "'");
    return load(in);
}

} // namespace pcekit
