#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "pcekit/blackbox.hpp"
#include "pcekit/cli.hpp"
#include "pcekit/error.hpp"
#include "pcekit/multiindex.hpp"
#include "pcekit/polybasis.hpp"
#include "pcekit/quadrature.hpp"
#include "pcekit/sampling.hpp"
#include "pcekit/sobol.hpp"
#include "pcekit/surrogate.hpp"

namespace py = pybind11;
using namespace pcekit;

namespace {

py::array_t<double> as_vector(const std::vector<double>& v) {
    py::array_t<double> a(static_cast<py::ssize_t>(v.size()));
    std::copy(v.begin(), v.end(), a.mutable_data());
    return a;
}

py::array_t<double> as_matrix(const std::vector<double>& flat, std::size_t cols) {
    py::array_t<double> a({flat.size() / cols, cols});
    std::copy(flat.begin(), flat.end(), a.mutable_data());
    return a;
}

std::vector<double> flatten(const py::array_t<double, py::array::c_style | py::array::forcecast>& a, std::size_t cols) {
    if (a.ndim() == 1 && static_cast<std::size_t>(a.shape(0)) == cols) return {a.data(), a.data() + cols};
    if (a.ndim() != 2 || static_cast<std::size_t>(a.shape(1)) != cols) {
        throw std::invalid_argument("expected an array with " + std::to_string(cols) + " columns");
    }
    return {a.data(), a.data() + a.size()};
}

py::tuple grid_arrays(const GridQuadrature& g) {
    return py::make_tuple(as_matrix(g.coords(), static_cast<std::size_t>(g.dim())),
                          as_vector(g.weights()));
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Polynomial chaos surrogates with Legendre bases";

    auto base = py::register_exception<Error>(m, "PcekitError", PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
    py::register_exception<NumericalError>(m, "NumericalError", base.ptr());
    py::register_exception<ModelError>(m, "ModelError", base.ptr());
    py::register_exception<IoError>(m, "IoError", base.ptr());

    m.def("legendre_eval", &legendre_eval, py::arg("n"), py::arg("x"));
    m.def("legendre_norm", &legendre_norm, py::arg("n"));

    m.def(
        "enumerate_neighborhood",
        [](const std::string& kind, int order, int dim) {
            std::vector<std::vector<int>> out;
            for (const auto& i : enumerate({neighborhood_kind_from_string(kind), order, dim})) out.push_back(i.orders());
            return out;
        },
        py::arg("kind"), py::arg("order"), py::arg("dim"));

    m.def("gauss_legendre", [](int n) {
        const auto r = gauss_legendre_1d(n);
        return py::make_tuple(r.nodes, r.weights);
    }, py::arg("n"));
    m.def("clenshaw_curtis", [](int level) {
        const auto r = clenshaw_curtis_1d(level);
        return py::make_tuple(r.nodes, r.weights);
    }, py::arg("level"));
    m.def("full_grid", [](int dim, int order) { return grid_arrays(full_grid(dim, order)); }, py::arg("dim"),
          py::arg("order"));
    m.def("sparse_grid", [](int dim, int level) { return grid_arrays(sparse_grid(dim, level)); }, py::arg("dim"),
          py::arg("level"));

    py::class_<PceModel>(m, "PceModel")
        .def_property_readonly("dim", &PceModel::dim)
        .def_property_readonly("output_names", &PceModel::output_names)
        .def_property_readonly("input_names", [](const PceModel& p) {
            std::vector<std::string> names;
            for (const auto& v : p.inputs()) names.push_back(v.name);
            return names;
        })
        .def_property_readonly("evaluation_count", [](const PceModel& p) { return p.build_meta().evaluation_count; })
        .def_property_readonly("method", [](const PceModel& p) { return p.build_meta().method.label(); })
        .def("terms", [](const PceModel& p) {
            std::vector<std::vector<int>> out;
            for (const auto& t : p.terms()) out.push_back(t.orders());
            return out;
        })
        .def("coefficients", [](const PceModel& p) {
            std::vector<double> flat;
            for (std::size_t t = 0; t < p.term_count(); ++t) {
                for (std::size_t o = 0; o < p.output_count(); ++o) flat.push_back(p.coefficient(t, o));
            }
            return as_matrix(flat, p.output_count());
        })
        .def("evaluate", [](const PceModel& p, const py::array_t<double, py::array::c_style | py::array::forcecast>& x) {
            const auto flat = flatten(x, p.dim());
            std::vector<double> out;
            {
                py::gil_scoped_release release;
                out = p.evaluate_many(flat);
            }
            return as_matrix(out, p.output_count());
        }, py::arg("points"))
        .def("mean", &PceModel::mean)
        .def("variance", &PceModel::variance)
        .def("save", [](const PceModel& p, const std::filesystem::path& path) { save(p, path); }, py::arg("path"))
        .def_static("load", [](const std::filesystem::path& path) { return load(path); }, py::arg("path"))
        .def("sobol_index", [](const PceModel& p, const VariableSet& s, const std::string& out) {
            return sobol_index(p, s, out);
        }, py::arg("subset"), py::arg("output"))
        .def("total_index", [](const PceModel& p, const VariableSet& s, const std::string& out) {
            return total_index(p, s, out);
        }, py::arg("subset"), py::arg("output"))
        .def("sobol_report", [](const PceModel& p, int max_subset) {
            return py::module_::import("json").attr("loads")(sobol_to_json(full_report(p, max_subset)).dump());
        }, py::arg("max_subset") = 2);

    m.def(
        "build_pce",
        [](py::function model, const std::vector<std::tuple<std::string, double, double>>& inputs,
           std::vector<std::string> outputs, const std::string& method, int order) {
            std::vector<InputVariable> in;
            for (const auto& [name, lo, hi] : inputs) in.push_back({name, lo, hi});
            BuildMethod bm;
            if (method == "full") bm = BuildMethod::full(order);
            else if (method == "sparse") bm = BuildMethod::sparse(order);
            else throw ConfigError("method must be 'full' or 'sparse'");
            const std::size_t n = in.size();
            BatchModel batch = [&model, n](const std::vector<std::vector<double>>& pts) {
                std::vector<double> flat;
                for (const auto& p : pts) flat.insert(flat.end(), p.begin(), p.end());
                py::array_t<double> res = py::array_t<double, py::array::c_style | py::array::forcecast>::ensure(
                    model(as_matrix(flat, n)));
                if (!res) throw ModelError("model must return an array");
                if (res.ndim() == 1) res = res.reshape({res.shape(0), py::ssize_t{1}});
                if (res.ndim() != 2 || static_cast<std::size_t>(res.shape(0)) != pts.size()) {
                    throw ModelError("model returned an array of the wrong shape");
                }
                std::vector<std::vector<double>> out(pts.size());
                const auto cols = static_cast<std::size_t>(res.shape(1));
                for (std::size_t i = 0; i < pts.size(); ++i) out[i].assign(res.data() + i * cols, res.data() + (i + 1) * cols);
                return out;
            };
            return build_pce(batch, std::move(in), std::move(outputs), bm);
        },
        py::arg("model"), py::arg("inputs"), py::arg("outputs"), py::arg("method") = "full", py::arg("order") = 4,
        "Build a surrogate; `model` maps an (n, N) array of physical points to an (n, M) array.");

    m.def("latin_hypercube", [](int strata, int dim, int repeats, std::uint64_t seed) {
        const auto d = latin_hypercube(strata, dim, repeats, seed);
        return as_matrix(d.points, static_cast<std::size_t>(dim));
    }, py::arg("strata"), py::arg("dim"), py::arg("repeats") = 1, py::arg("seed") = 1);
    m.def("rmse", [](std::vector<double> p, std::vector<double> t) { return rmse(p, t); });
    m.def("rrmse", [](std::vector<double> p, std::vector<double> t) { return rrmse(p, t); });

    m.def("csg_proxy", [](std::vector<double> v) { return csg_proxy(v); }, py::arg("inputs"));

    m.def("run_cli", [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = run_cli(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
    }, py::arg("args"));
}
