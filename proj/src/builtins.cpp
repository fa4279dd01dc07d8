#include <cmath>
#include <set>
#include <string>

#include "pcekit/blackbox.hpp"
#include "pcekit/error.hpp"
#include "pcekit/polybasis.hpp"

namespace pcekit {

namespace {

using nlohmann::json;

void reject_unknown(const json& params, const std::set<std::string>& allowed, const std::string& model) {
    if (!params.is_object()) throw ConfigError("builtin '" + model + "': parameters must be an object");
    for (const auto& [key, value] : params.items()) {
        if (!allowed.count(key)) throw ConfigError("builtin '" + model + "': unknown parameter '" + key + "'");
    }
}

void require_arity(const std::string& model, std::size_t inputs, std::size_t outputs, std::size_t want_in,
                   std::size_t want_out) {
    if (inputs != want_in || outputs != want_out) {
        throw ConfigError("builtin '" + model + "' takes " + std::to_string(want_in) + " inputs and " +
                          std::to_string(want_out) + " outputs, configured with " + std::to_string(inputs) +
                          " and " + std::to_string(outputs));
    }
}

double number(const json& v, const std::string& what) {
    if (!v.is_number()) throw ConfigError(what + " must be a number");
    return v.get<double>();
}

BuiltinFn make_polynomial(const json& params, std::size_t inputs, std::size_t outputs) {
    reject_unknown(params, {"basis", "terms", "ranges"}, "polynomial");
    const std::string basis = params.value("basis", std::string("legendre"));
    if (basis != "legendre" && basis != "monomial") {
        throw ConfigError("builtin 'polynomial': basis must be 'legendre' or 'monomial'");
    }
    struct Term {
        std::vector<int> orders;
        std::vector<double> coefs;
    };
    std::vector<Term> terms;
    if (!params.contains("terms") || !params["terms"].is_array()) {
        throw ConfigError("builtin 'polynomial': 'terms' must be an array");
    }
    for (const auto& jt : params["terms"]) {
        Term t;
        if (!jt.is_object() || !jt.contains("index") || !jt["index"].is_array()) {
            throw ConfigError("builtin 'polynomial': every term needs an 'index' array");
        }
        for (const auto& o : jt["index"]) {
            if (!o.is_number_integer() || o.get<int>() < 0) {
                throw ConfigError("builtin 'polynomial': index entries must be non-negative integers");
            }
            t.orders.push_back(o.get<int>());
        }
        if (t.orders.size() != inputs) {
            throw ConfigError("builtin 'polynomial': index " + jt["index"].dump() + " does not have " +
                              std::to_string(inputs) + " entries");
        }
        const json& c = jt.contains("coefficients") ? jt["coefficients"] : json();
        if (c.is_number()) {
            t.coefs.assign(outputs, c.get<double>());
        } else if (c.is_array() && c.size() == outputs) {
            for (const auto& v : c) t.coefs.push_back(number(v, "builtin 'polynomial': coefficient"));
        } else {
            throw ConfigError("builtin 'polynomial': 'coefficients' must be a number or one number per output");
        }
        terms.push_back(std::move(t));
    }
    std::vector<InputVariable> ranges;
    if (params.contains("ranges")) {
        const json& r = params["ranges"];
        if (!r.is_array() || r.size() != inputs) {
            throw ConfigError("builtin 'polynomial': 'ranges' must hold one [min, max] pair per input");
        }
        for (std::size_t j = 0; j < inputs; ++j) {
            if (!r[j].is_array() || r[j].size() != 2) {
                throw ConfigError("builtin 'polynomial': 'ranges' must hold [min, max] pairs");
            }
            InputVariable v{"x" + std::to_string(j + 1), number(r[j][0], "range bound"), number(r[j][1], "range bound")};
            v.validate();
            ranges.push_back(v);
        }
    }
    const bool legendre = basis == "legendre";
    return [terms, ranges, legendre, outputs](std::span<const double> v) {
        std::vector<double> x(v.begin(), v.end());
        if (!ranges.empty()) {
            for (std::size_t j = 0; j < x.size(); ++j) x[j] = rescale(x[j], ranges[j]);
        }
        std::vector<double> out(outputs, 0.0);
        for (const auto& t : terms) {
            double b = 1.0;
            for (std::size_t j = 0; j < x.size(); ++j) {
                b *= legendre ? legendre_eval(t.orders[j], x[j]) : std::pow(x[j], t.orders[j]);
            }
            for (std::size_t o = 0; o < outputs; ++o) out[o] += t.coefs[o] * b;
        }
        return out;
    };
}

} // namespace

const std::vector<std::string>& builtin_names() {
    static const std::vector<std::string> names = {"constant", "polynomial", "sobol-example-1",
                                                   "sobol-example-2", "csg-proxy"};
    return names;
}

std::vector<InputVariable> csg_proxy_inputs() {
    return {{"fracture_porosity", 0.005, 0.05},
            {"fracture_permeability", 10.0, 1000.0},
            {"reciprocal_langmuir_pressure", 0.00017, 0.0003},
            {"langmuir_volume", 0.2, 1.0}};
}

std::vector<std::string> csg_proxy_outputs() { return {"cumulative_gas", "peak_gas"}; }

std::vector<double> csg_proxy(std::span<const double> v) {
    const double phi = v[0];
    const double perm = v[1];
    const double b = v[2];
    const double vl = v[3];
    if (!(phi >= 0.0 && phi <= 0.1) || !(perm > 0.0) || !(b > 0.0) || !(vl >= 0.0)) {
        throw ModelError("csg-proxy: input outside the physical domain");
    }
    constexpr double kMatrixPressure = 2750.0;  // kPa
    const double bp = b * kMatrixPressure;
    const double sorbed = bp / (1.0 + bp);
    const double recovery = 0.2 + 0.7 * (1.0 - std::exp(-perm / 300.0));
    const double dewatering = 1.0 - 0.35 * phi / 0.05;
    const double cumulative = 2.5e7 * vl * sorbed * recovery * dewatering;
    const double peak = 1.2e5 * (1.3 - std::exp(-perm / 400.0)) * std::exp(-phi / 0.03) * (0.6 + 0.5 * vl) *
                        (0.9 + 0.2 * sorbed);
    return {cumulative, peak};
}

BuiltinFn make_builtin(const BuiltinSpec& spec, std::size_t inputs, std::size_t outputs) {
    const std::string& name = spec.name;
    const json& params = spec.parameters.is_null() ? json::object() : spec.parameters;
    if (name == "constant") {
        reject_unknown(params, {"c"}, name);
        if (inputs < 1 || outputs < 1) throw ConfigError("builtin 'constant' needs at least one input and output");
        const double c = params.contains("c") ? number(params["c"], "builtin 'constant': c") : 0.0;
        return [c, outputs](std::span<const double>) { return std::vector<double>(outputs, c); };
    }
    if (name == "polynomial") {
        if (inputs < 1 || outputs < 1) throw ConfigError("builtin 'polynomial' needs at least one input and output");
        return make_polynomial(params, inputs, outputs);
    }
    if (name == "sobol-example-1") {
        reject_unknown(params, {}, name);
        require_arity(name, inputs, outputs, 2, 1);
        return [](std::span<const double> x) { return std::vector<double>{x[0] * x[0] + x[1] * x[1]}; };
    }
    if (name == "sobol-example-2") {
        reject_unknown(params, {}, name);
        require_arity(name, inputs, outputs, 2, 1);
        return [](std::span<const double> x) { return std::vector<double>{x[0] * x[0] * x[0] + x[1]}; };
    }
    if (name == "csg-proxy") {
        reject_unknown(params, {}, name);
        require_arity(name, inputs, outputs, 4, 2);
        return [](std::span<const double> x) { return csg_proxy(x); };
    }
    throw ConfigError("unknown builtin model '" + name + "'");
}

} // namespace pcekit
