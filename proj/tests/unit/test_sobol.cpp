#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "helpers.hpp"
#include "pcekit/error.hpp"
#include "pcekit/polybasis.hpp"
#include "pcekit/sobol.hpp"
#include "pcekit/surrogate.hpp"

using namespace pcekit;

namespace {

using Fn2 = std::function<double(double, double)>;

PceModel build2(Fn2 f, int p = 3) {
    BatchModel m = [f](const std::vector<std::vector<double>>& pts) {
        std::vector<std::vector<double>> out;
        for (const auto& x : pts) out.push_back({f(x[0], x[1])});
        return out;
    };
    return build_pce(m, {{"x1", -1, 1}, {"x2", -1, 1}}, {"y"}, BuildMethod::full(p));
}

// Composite Simpson on [-1, 1] with the uniform density 1/2.
double simpson(const std::function<double(double)>& g, int panels = 400) {
    const double h = 2.0 / panels;
    double s = g(-1) + g(1);
    for (int i = 1; i < panels; ++i) s += (i % 2 ? 4 : 2) * g(-1 + i * h);
    return s * h / 3 / 2;
}

struct Decomposition {
    double s1, s2, s12;
};

// Sobol' decomposition of a two-variable function by direct integration of its
// ANOVA summands.
Decomposition oracle(const Fn2& f) {
    constexpr int n = 1000;
    const double m0 = simpson([&](double a) { return simpson([&](double b) { return f(a, b); }, n); }, n);
    auto m1 = [&](double a) { return simpson([&](double b) { return f(a, b); }, n) - m0; };
    auto m2 = [&](double b) { return simpson([&](double a) { return f(a, b); }, n) - m0; };
    const double d1 = simpson([&](double a) { const double v = m1(a); return v * v; }, n);
    const double d2 = simpson([&](double b) { const double v = m2(b); return v * v; }, n);
    const double var = simpson([&](double a) {
        return simpson([&](double b) { const double v = f(a, b) - m0; return v * v; }, n);
    }, n);
    return {d1 / var, d2 / var, (var - d1 - d2) / var};
}

} // namespace

TEST_CASE("worked examples") {
    const auto k1 = build2([](double a, double b) { return a * a + b * b; });
    const auto k2 = build2([](double a, double b) { return a * a * a + b; });
    CHECK(sobol_index(k1, {0}, 0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(sobol_index(k1, {1}, "y") == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(std::abs(sobol_index(k1, {0, 1}, 0)) <= 1e-14);
    CHECK(sobol_index(k2, {0}, 0) == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(sobol_index(k2, {1}, 0) == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(total_index(k1, {0}, 0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(total_index(k2, {1}, "y") == doctest::Approx(sobol_index(k2, {1}, 0)).epsilon(1e-14));
}

TEST_CASE("indices agree with a quadrature oracle") {
    const std::vector<Fn2> fns = {
        [](double a, double b) { return a * a + b * b; },
        [](double a, double b) { return a * a * a + b; },
        [](double a, double b) { return a * b + 0.5 * a * a * b + b * b; },
        [](double a, double b) { return (1 + a) * (2 - b * b) + 0.3 * a * a * a * b * b; },
    };
    for (const auto& f : fns) {
        const auto pce = build2(f, 5);
        const auto o = oracle(f);
        CHECK(sobol_index(pce, {0}, 0) == doctest::Approx(o.s1).epsilon(1e-9));
        CHECK(sobol_index(pce, {1}, 0) == doctest::Approx(o.s2).epsilon(1e-9));
        CHECK(std::abs(sobol_index(pce, {0, 1}, 0) - o.s12) <= 1e-9);
    }
}

TEST_CASE("full report structure") {
    const auto k2 = build2([](double a, double b) { return a * a * a + b; });
    const auto r = full_report(k2, 2);
    REQUIRE(r.outputs.size() == 1);
    const auto& o = r.outputs[0];
    REQUIRE(o.indices.size() == 3);
    CHECK(o.indices[0].subset == VariableSet{0});
    CHECK(o.indices[0].value == doctest::Approx(0.3));
    CHECK(o.indices[1].value == doctest::Approx(0.7));
    CHECK(std::abs(o.indices[2].value) <= 1e-14);
    CHECK(std::abs(o.remainder) <= 1e-12);
    CHECK(o.total_variance == doctest::Approx(10.0 / 21));

    std::vector<InputVariable> in4;
    for (int j = 0; j < 4; ++j) in4.push_back({"v" + std::to_string(j), -1, 1});
    BatchModel m = [](const std::vector<std::vector<double>>& pts) {
        std::vector<std::vector<double>> out;
        for (const auto& x : pts) out.push_back({x[0] * x[1] + x[2] * x[2] * x[3] + x[0]});
        return out;
    };
    const auto r4 = full_report(build_pce(m, in4, {"y"}, BuildMethod::full(3)), 2);
    CHECK(r4.outputs[0].indices.size() == 10);
    CHECK(subsets_up_to(4, 2).size() == 10);
    CHECK(subsets_up_to(4, 4).size() == 15);
    CHECK_THROWS_AS(full_report(build_pce(m, in4, {"y"}, BuildMethod::full(2)), 5), ConfigError);

    const auto j = sobol_to_json(r4);
    CHECK(j["outputs"][0]["indices"].size() == 10);
    std::ostringstream text;
    write_sobol_text(r4, text);
    CHECK(text.str().find("Main effect Sobol' indices") != std::string::npos);
    CHECK(text.str().find("Sobol' indices for pairwise interactions") != std::string::npos);
}

TEST_CASE("zero variance is an explicit error") {
    const auto c = build2([](double, double) { return 3.0; });
    CHECK_THROWS_AS(sobol_index(c, {0}, 0), NumericalError);
    CHECK_THROWS_AS(full_report(c, 2), NumericalError);
}

TEST_CASE("normalization and consistency on random expansions") {
    testutil::Gen g(23);
    std::vector<InputVariable> in4;
    for (int j = 0; j < 4; ++j) in4.push_back({"v" + std::to_string(j), -1, 1});
    for (int trial = 0; trial < 20; ++trial) {
        const Neighborhood nb{NeighborhoodKind::TotalOrder, g.integer(1, 5), 4};
        const auto terms = enumerate(nb);
        std::vector<double> coef(terms.size());
        for (auto& c : coef) c = g.uniform(-1, 1);
        const PceModel pce(in4, {"y"}, nb, coef, BuildMeta{});
        const auto r = full_report(pce, 4);
        double sum = 0;
        for (const auto& s : r.outputs[0].indices) {
            CHECK(s.value >= -1e-12);
            CHECK(s.value <= 1 + 1e-12);
            sum += s.value;
        }
        CHECK(std::abs(sum - 1) <= 1e-12);
        double ssum = 0, tsum = 0;
        for (int u = 0; u < 4; ++u) {
            double acc = 0;
            for (const auto& s : r.outputs[0].indices) {
                if (std::find(s.subset.begin(), s.subset.end(), u) != s.subset.end()) acc += s.value;
            }
            CHECK(std::abs(total_index(pce, {u}, 0) - acc) <= 1e-12);
            ssum += sobol_index(pce, {u}, 0);
            tsum += total_index(pce, {u}, 0);
        }
        CHECK(ssum <= tsum + 1e-12);
    }
}
