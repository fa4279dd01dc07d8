// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "pcekit/blackbox.hpp"
#include "pcekit/cli.hpp"
#include "pcekit/polybasis.hpp"
#include "pcekit/quadrature.hpp"
#include "pcekit/sampling.hpp"
#include "pcekit/sobol.hpp"
#include "pcekit/surrogate.hpp"

using namespace pcekit;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
    void require(bool ok, const std::string& what) {
        if (!ok && pass) detail = what;
        pass = pass && ok;
    }
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string num(double x) {
    std::ostringstream s;
    s.precision(4);
    s << x;
    return s.str();
}

BatchModel pointwise(std::function<double(const std::vector<double>&)> f) {
    return [f](const std::vector<std::vector<double>>& pts) {
        std::vector<std::vector<double>> out;
        out.reserve(pts.size());
        for (const auto& p : pts) out.push_back({f(p)});
        return out;
    };
}

std::vector<InputVariable> unit_box(int n) {
    std::vector<InputVariable> v;
    for (int j = 0; j < n; ++j) v.push_back({"x" + std::to_string(j + 1), -1.0, 1.0});
    return v;
}

double monomial_integral(int d) { return d % 2 ? 0.0 : 2.0 / (d + 1); }

// 1. Sobol' worked example
Outcome sobol_worked_example() {
    Outcome o;
    const auto t0 = Clock::now();
    const auto box = unit_box(2);
    const auto k1 = build_pce(pointwise([](const auto& x) { return x[0] * x[0] + x[1] * x[1]; }), box, {"y"},
                              BuildMethod::full(3));
    const auto k2 = build_pce(pointwise([](const auto& x) { return x[0] * x[0] * x[0] + x[1]; }), box, {"y"},
                              BuildMethod::full(3));
    struct Expect {
        const PceModel* pce;
        double mean, var, s1, s2;
    };
    for (const auto& e : {Expect{&k1, 2.0 / 3, 8.0 / 45, 0.5, 0.5}, Expect{&k2, 0.0, 10.0 / 21, 0.3, 0.7}}) {
        const double got[] = {e.pce->mean()[0], e.pce->variance()[0], sobol_index(*e.pce, {0}, 0),
                              sobol_index(*e.pce, {1}, 0)};
        const double want[] = {e.mean, e.var, e.s1, e.s2};
        for (int i = 0; i < 4; ++i) o.require(std::abs(got[i] - want[i]) <= 1e-10, "value " + num(got[i]) + " vs " + num(want[i]));
    }
    const double t = seconds_since(t0);
    o.require(t < 1.0, "took " + num(t) + " s");
    if (o.pass) o.detail = "means 2/3, 0; variances 8/45, 10/21; S = (1/2,1/2), (3/10,7/10); " + num(t * 1e3) + " ms";
    return o;
}

// 2. Grid cardinalities and nestedness
Outcome grid_cardinalities() {
    Outcome o;
    const auto s4 = sparse_grid(4, 4), s5 = sparse_grid(4, 5);
    const auto f5 = full_grid(4, 5), f6 = full_grid(4, 6);
    auto points = [](const GridQuadrature& g) {
        std::set<std::vector<double>> s;
        for (std::size_t i = 0; i < g.size(); ++i) s.emplace(g.point(i).begin(), g.point(i).end());
        return s;
    };
    const auto a = points(s4), b = points(s5);
    o.require(a.size() == 401 && s4.size() == 401, "sparse l=4 has " + std::to_string(a.size()));
    o.require(b.size() == 1105 && s5.size() == 1105, "sparse l=5 has " + std::to_string(b.size()));
    o.require(points(f5).size() == 1296, "full p=5 has " + std::to_string(f5.size()));
    o.require(points(f6).size() == 2401, "full p=6 has " + std::to_string(f6.size()));
    o.require(std::includes(b.begin(), b.end(), a.begin(), a.end()), "401-point set not nested in 1105-point set");
    if (o.pass) o.detail = "401, 1105, 1296, 2401 points; 401 subset of 1105 exactly";
    return o;
}

// 3. Quadrature exactness
Outcome quadrature_exactness() {
    Outcome o;
    double worst_gl = 0, worst_sparse = 0;
    for (int n = 1; n <= 10; ++n) {
        const auto r = gauss_legendre_1d(n);
        for (int d = 0; d <= 2 * n - 1; ++d) {
            double s = 0;
            for (int i = 0; i < n; ++i) s += r.weights[i] * std::pow(r.nodes[i], d);
            const double exact = monomial_integral(d);
            // odd monomials integrate to 0; compare against the scale of the even neighbour
            const double err = std::abs(s - exact) / (exact != 0 ? std::abs(exact) : monomial_integral(d - 1));
            worst_gl = std::max(worst_gl, err);
        }
    }
    const int l = 2;
    const auto g = sparse_grid(3, l);
    for (int i = 0; i <= 2 * l + 1; ++i) {
        for (int j = 0; i + j <= 2 * l + 1; ++j) {
            for (int k = 0; i + j + k <= 2 * l + 1; ++k) {
                const double v = integrate(g, [&](std::span<const double> x) {
                    return std::pow(x[0], i) * std::pow(x[1], j) * std::pow(x[2], k);
                });
                worst_sparse = std::max(worst_sparse, std::abs(v - monomial_integral(i) * monomial_integral(j) * monomial_integral(k)));
            }
        }
    }
    o.require(worst_gl <= 1e-12, "Gauss-Legendre relative error " + num(worst_gl));
    o.require(worst_sparse <= 1e-10, "sparse absolute error " + num(worst_sparse));
    if (o.pass) o.detail = "GL n<=10 worst rel " + num(worst_gl) + "; sparse N=3 l=2 worst abs " + num(worst_sparse);
    return o;
}

// 4. Polynomial reproduction
Outcome polynomial_reproduction() {
    Outcome o;
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(-1, 1);
    double worst = 0;
    int builds = 0;
    for (int sparse = 0; sparse <= 1; ++sparse) {
        for (int n = 1; n <= 4; ++n) {
            for (int p = sparse ? 1 : 0; p <= 5; ++p) {
                if (sparse && p > 3 * n) continue;
                const Neighborhood nb{sparse ? NeighborhoodKind::TotalOrder : NeighborhoodKind::TensorProduct, p, n};
                const auto terms = enumerate(nb);
                std::vector<double> coef(terms.size());
                for (auto& c : coef) c = u(rng);
                // random physical ranges so the rescaling is exercised
                std::vector<InputVariable> in;
                for (int j = 0; j < n; ++j) {
                    const double lo = 10 * u(rng);
                    in.push_back({"v" + std::to_string(j), lo, lo + 0.5 + 5 * (u(rng) + 1)});
                }
                auto truth = [&](const std::vector<double>& v) {
                    std::vector<double> xi(v.size());
                    for (std::size_t j = 0; j < v.size(); ++j) xi[j] = rescale(v[j], in[j]);
                    double s = 0;
                    for (std::size_t t = 0; t < terms.size(); ++t) s += coef[t] * eval_basis_product(terms[t], xi);
                    return s;
                };
                const auto pce = build_pce(pointwise(truth), in, {"y"},
                                           sparse ? BuildMethod::sparse(p) : BuildMethod::full(p));
                ++builds;
                for (int k = 0; k < 100; ++k) {
                    std::vector<double> v(n);
                    for (int j = 0; j < n; ++j) v[j] = unscale(u(rng), in[j]);
                    const double t = truth(v);
                    worst = std::max(worst, std::abs(pce.evaluate(v)[0] - t) / std::max(std::abs(t), 1.0));
                }
            }
        }
    }
    o.require(worst <= 1e-10, "worst relative error " + num(worst));
    if (o.pass) o.detail = std::to_string(builds) + " builds x 100 points, worst rel " + num(worst);
    return o;
}

std::vector<double> column(const std::vector<std::vector<double>>& rows, std::size_t c) {
    std::vector<double> out;
    for (const auto& r : rows) out.push_back(r[c]);
    return out;
}

// 5. Convergence on the synthetic proxy
Outcome proxy_convergence() {
    Outcome o;
    const auto in = csg_proxy_inputs();
    ModelSpec spec{BuiltinSpec{"csg-proxy", {}}, {}, csg_proxy_outputs()};
    for (const auto& v : in) spec.input_names.push_back(v.name);
    ModelRunner runner(spec, nullptr);
    const auto design = latin_hypercube(10, 4, 300, 1);
    std::vector<std::vector<double>> test(design.size(), std::vector<double>(4));
    std::vector<double> flat(design.points.size());
    for (std::size_t i = 0; i < design.size(); ++i) {
        for (int j = 0; j < 4; ++j) test[i][j] = flat[i * 4 + j] = unscale(design.point(i)[j], in[j]);
    }
    const auto truth = runner.evaluate_or_throw(test);
    std::vector<std::vector<double>> errs;
    for (int p = 2; p <= 5; ++p) {
        const auto pce = build_pce(runner.as_batch_model(), in, csg_proxy_outputs(), BuildMethod::full(p));
        const auto pred = pce.evaluate_many(flat);
        std::vector<double> e;
        for (std::size_t c = 0; c < 2; ++c) {
            std::vector<double> pc(test.size());
            for (std::size_t i = 0; i < test.size(); ++i) pc[i] = pred[i * 2 + c];
            e.push_back(rrmse(pc, column(truth, c)));
        }
        errs.push_back(e);
    }
    std::string trace;
    for (std::size_t c = 0; c < 2; ++c) {
        for (std::size_t k = 1; k < errs.size(); ++k) {
            o.require(errs[k][c] <= errs[k - 1][c], "rRMSE increased for output " + std::to_string(c));
        }
        o.require(errs.back()[c] < 0.05, "p=5 rRMSE " + num(errs.back()[c]));
    }
    for (const auto& e : errs) trace += (trace.empty() ? "" : " > ") + num(e[0]) + "/" + num(e[1]);
    if (o.pass) o.detail = "rRMSE p=2..5: " + trace;
    return o;
}

// 6. Throughput
Outcome throughput() {
    Outcome o;
    const auto in = csg_proxy_inputs();
    const auto pce = build_pce(
        [](const std::vector<std::vector<double>>& pts) {
            std::vector<std::vector<double>> out;
            for (const auto& p : pts) out.push_back(csg_proxy(p));
            return out;
        },
        in, csg_proxy_outputs(), BuildMethod::full(6));
    auto sample = [&](std::size_t n) {
        const auto x = uniform_sample(n, 4, 99);
        std::vector<double> v(x.size());
        for (std::size_t i = 0; i < n; ++i) {
            for (int j = 0; j < 4; ++j) v[i * 4 + j] = unscale(x[i * 4 + j], in[j]);
        }
        return v;
    };
    const auto small = sample(3000);
    auto t0 = Clock::now();
    const auto a = pce.evaluate_many(small, 1);
    const double t_small = seconds_since(t0);
    const auto big = sample(1'000'000);
    t0 = Clock::now();
    const auto b = pce.evaluate_many(big, 1);
    const double t_big = seconds_since(t0);
    o.require(a.size() == 6000 && b.size() == 2'000'000, "wrong output size");
    o.require(t_small < 1.0, "3000 evaluations took " + num(t_small) + " s");
    o.require(t_big < 300.0, "10^6 evaluations took " + num(t_big) + " s");
    if (o.pass) o.detail = "single thread: 3000 in " + num(t_small) + " s, 10^6 in " + num(t_big) + " s";
    return o;
}

// 7. Sobol' normalization and consistency
Outcome sobol_consistency() {
    Outcome o;
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1, 1);
    double worst_sum = 0, worst_total = 0;
    const auto in = unit_box(4);
    for (int trial = 0; trial < 50; ++trial) {
        const Neighborhood nb{trial % 2 ? NeighborhoodKind::TotalOrder : NeighborhoodKind::TensorProduct,
                              1 + trial % 4, 4};
        const auto terms = enumerate(nb);
        std::vector<double> coef(terms.size());
        for (auto& c : coef) c = u(rng);
        const PceModel pce(in, {"y"}, nb, coef, BuildMeta{});
        const auto report = full_report(pce, 4);
        double sum = 0;
        for (const auto& s : report.outputs[0].indices) sum += s.value;
        worst_sum = std::max(worst_sum, std::abs(sum - 1));
        for (int v = 0; v < 4; ++v) {
            double acc = 0;
            for (const auto& s : report.outputs[0].indices) {
                if (std::find(s.subset.begin(), s.subset.end(), v) != s.subset.end()) acc += sobol_index(pce, s.subset, 0);
            }
            worst_total = std::max(worst_total, std::abs(total_index(pce, {v}, 0) - acc));
        }
    }
    o.require(worst_sum <= 1e-12, "sum deviates by " + num(worst_sum));
    o.require(worst_total <= 1e-12, "totals deviate by " + num(worst_total));
    if (o.pass) o.detail = "50 random PCEs, |sum-1| <= " + num(worst_sum) + ", total mismatch <= " + num(worst_total);
    return o;
}

// 8. LHS stratification
Outcome lhs_stratification() {
    Outcome o;
    const int n = 10;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        const auto d = latin_hypercube(n, 4, 1, seed);
        for (int j = 0; j < 4; ++j) {
            std::vector<int> hits(n, 0);
            for (std::size_t i = 0; i < d.size(); ++i) {
                const double x = d.point(i)[j];
                for (int k = 0; k < n; ++k) {
                    if (x >= -1.0 + 2.0 * k / n && x < -1.0 + 2.0 * (k + 1) / n) ++hits[k];
                }
            }
            o.require(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }),
                      "seed " + std::to_string(seed) + " dimension " + std::to_string(j));
        }
    }
    if (o.pass) o.detail = "100 designs x 4 dimensions, one point per stratum";
    return o;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

// 9. End-to-end determinism
Outcome determinism() {
    Outcome o;
    const fs::path root = fs::temp_directory_path() / ("pcekit-acceptance-" + std::to_string(::getpid()));
    fs::remove_all(root);
    const std::string config = R"({
  "model": {"builtin": "csg-proxy"},
  "inputs": [
    {"name": "fracture_porosity", "min": 0.005, "max": 0.05},
    {"name": "fracture_permeability", "min": 10, "max": 1000},
    {"name": "reciprocal_langmuir_pressure", "min": 0.00017, "max": 0.0003},
    {"name": "langmuir_volume", "min": 0.2, "max": 1}
  ],
  "outputs": ["cumulative_gas", "peak_gas"],
  "method": {"type": "sparse", "level": 4},
  "validation": {"strata": 10, "repeats": 30, "seed": 11}
})";
    const std::vector<std::string> artifacts = {"model.json", "validate.csv", "scatter.csv", "sobol.json",
                                                "sobol.txt", "run.log", "cache.jsonl"};
    std::vector<std::vector<std::string>> runs;
    for (const char* tag : {"a", "b"}) {
        const fs::path dir = root / tag;
        fs::create_directories(dir);
        std::ofstream(dir / "config.json") << config;
        const std::string cfg = (dir / "config.json").string();
        std::ostringstream out, err;
        for (const auto& cmd : std::vector<std::vector<std::string>>{
                 {"build", "-c", cfg, "--reproducible"},
                 {"validate", "-c", cfg, "--reproducible"},
                 {"sobol", "-c", cfg, "--reproducible"}}) {
            const int code = run_cli(cmd, out, err);
            o.require(code == kExitOk, cmd[0] + " exited " + std::to_string(code) + ": " + err.str());
        }
        std::vector<std::string> files;
        for (const auto& a : artifacts) files.push_back(slurp(dir / "report" / a));
        runs.push_back(std::move(files));
    }
    for (std::size_t i = 0; i < artifacts.size(); ++i) {
        o.require(!runs[0][i].empty(), artifacts[i] + " missing");
        o.require(runs[0][i] == runs[1][i], artifacts[i] + " differs between runs");
    }
    fs::remove_all(root);
    if (o.pass) o.detail = std::to_string(artifacts.size()) + " artifacts byte-identical across two runs";
    return o;
}

} // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        Outcome (*fn)();
    };
    const Criterion criteria[] = {
        {1, "Sobol' worked example", sobol_worked_example},
        {2, "grid cardinalities and nestedness", grid_cardinalities},
        {3, "quadrature exactness", quadrature_exactness},
        {4, "polynomial reproduction", polynomial_reproduction},
        {5, "proxy rRMSE convergence", proxy_convergence},
        {6, "surrogate throughput", throughput},
        {7, "Sobol' normalization and consistency", sobol_consistency},
        {8, "LHS stratification", lhs_stratification},
        {9, "end-to-end determinism", determinism},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        Outcome o;
        try {
            o = c.fn();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        failed += !o.pass;
        std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << c.id << ": " << c.name << " (" << o.detail
                  << ")" << std::endl;
    }
    std::cout << (failed ? std::to_string(failed) + " criteria failed" : std::string("all criteria passed")) << '\n';
    return failed ? 1 : 0;
}
