#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "helpers.hpp"
#include "pcekit/error.hpp"
#include "pcekit/quadrature.hpp"

using namespace pcekit;
using testutil::monomial_integral;

namespace {

std::set<std::vector<double>> point_set(const GridQuadrature& g) {
    std::set<std::vector<double>> s;
    for (std::size_t i = 0; i < g.size(); ++i) s.emplace(g.point(i).begin(), g.point(i).end());
    return s;
}

double weight_sum(const std::vector<double>& w) { return std::accumulate(w.begin(), w.end(), 0.0); }

} // namespace

TEST_CASE("gauss-legendre small rules") {
    const auto r1 = gauss_legendre_1d(1);
    CHECK(r1.nodes == std::vector<double>{0.0});
    CHECK(r1.weights[0] == doctest::Approx(2.0));
    const auto r2 = gauss_legendre_1d(2);
    CHECK(r2.nodes[0] == doctest::Approx(-1 / std::sqrt(3.0)).epsilon(1e-15));
    CHECK(r2.nodes[1] == doctest::Approx(1 / std::sqrt(3.0)).epsilon(1e-15));
    CHECK(r2.weights[0] == doctest::Approx(1.0));
    CHECK(r2.exact_degree == 3);
    CHECK_FALSE(std::signbit(gauss_legendre_1d(3).nodes[1]));
    const auto r5 = gauss_legendre_1d(5);
    double s = 0;
    for (std::size_t i = 0; i < 5; ++i) s += r5.weights[i] * std::pow(r5.nodes[i], 8);
    CHECK(std::abs(s - 2.0 / 9) <= 1e-13);
    CHECK_THROWS_AS(gauss_legendre_1d(0), ConfigError);
    CHECK_THROWS_AS(gauss_legendre_1d(kMaxGaussLegendrePoints + 1), ConfigError);
}

TEST_CASE("gauss-legendre invariants and exactness") {
    for (int n = 1; n <= kMaxGaussLegendrePoints; ++n) {
        const auto r = gauss_legendre_1d(n);
        REQUIRE(r.size() == static_cast<std::size_t>(n));
        for (int i = 1; i < n; ++i) CHECK(r.nodes[i - 1] < r.nodes[i]);
        CHECK(std::abs(weight_sum(r.weights) - 2.0) <= 1e-13);
        CHECK(r.exact_degree == 2 * n - 1);
    }
    for (int n = 1; n <= 10; ++n) {
        const auto r = gauss_legendre_1d(n);
        for (int d = 0; d <= 2 * n - 1; ++d) {
            double s = 0;
            for (int i = 0; i < n; ++i) s += r.weights[i] * std::pow(r.nodes[i], d);
            const double exact = monomial_integral(d);
            CHECK(std::abs(s - exact) <= 1e-12 * std::max(1.0, std::abs(exact)));
        }
    }
}

TEST_CASE("clenshaw-curtis rules") {
    const auto c1 = clenshaw_curtis_1d(1);
    CHECK(c1.nodes == std::vector<double>{0.0});
    CHECK(c1.weights == std::vector<double>{2.0});
    CHECK(clenshaw_curtis_1d(2).nodes == std::vector<double>{-1.0, 0.0, 1.0});
    const auto c3 = clenshaw_curtis_1d(3);
    REQUIRE(c3.size() == 5);
    const double r = 1 / std::sqrt(2.0);
    const std::vector<double> expected = {-1, -r, 0, r, 1};
    for (int i = 0; i < 5; ++i) CHECK(c3.nodes[i] == doctest::Approx(expected[i]).epsilon(1e-15));
    CHECK(std::abs(weight_sum(c3.weights) - 2) <= 1e-13);
    CHECK(clenshaw_curtis_size(1) == 1);
    CHECK(clenshaw_curtis_size(4) == 9);
    CHECK_THROWS_AS(clenshaw_curtis_1d(0), ConfigError);
    for (int k = 1; k < kMaxClenshawCurtisLevel; ++k) {
        const auto a = clenshaw_curtis_1d(k);
        const auto b = clenshaw_curtis_1d(k + 1);
        CHECK(std::abs(weight_sum(b.weights) - 2) <= 1e-13);
        for (double x : a.nodes) CHECK(std::find(b.nodes.begin(), b.nodes.end(), x) != b.nodes.end());
        for (std::size_t i = 1; i < b.size(); ++i) CHECK(b.nodes[i - 1] < b.nodes[i]);
    }
}

TEST_CASE("full grids") {
    CHECK(full_grid(4, 5).size() == 1296);
    CHECK(full_grid(4, 6).size() == 2401);
    const auto g = full_grid(1, 0);
    REQUIRE(g.size() == 1);
    CHECK(g.point(0)[0] == 0.0);
    CHECK(g.weight(0) == doctest::Approx(2.0));
    CHECK(std::abs(weight_sum(full_grid(3, 4).weights()) - 8) <= 1e-10);
    try {
        full_grid(8, 20, 1000);
        FAIL("expected a cap error");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("21^8") != std::string::npos);
    }
}

TEST_CASE("sparse grids") {
    const auto s4 = sparse_grid(4, 4);
    const auto s5 = sparse_grid(4, 5);
    CHECK(s4.size() == 401);
    CHECK(s5.size() == 1105);
    const auto a = point_set(s4), b = point_set(s5);
    CHECK(a.size() == 401);
    CHECK(std::includes(b.begin(), b.end(), a.begin(), a.end()));
    CHECK(std::abs(weight_sum(s5.weights()) - 16) <= 1e-10);
    for (int l = 1; l <= 3; ++l) {
        const auto s = sparse_grid(1, l);
        const auto c = clenshaw_curtis_1d(l + 1);
        REQUIRE(s.size() == c.size());
        for (std::size_t i = 0; i < s.size(); ++i) {
            CHECK(s.point(i)[0] == c.nodes[i]);
            CHECK(s.weight(i) == doctest::Approx(c.weights[i]).epsilon(1e-13));
        }
    }
    CHECK_THROWS_AS(sparse_grid(2, 0), ConfigError);
    CHECK_THROWS_AS(sparse_grid(2, 7), ConfigError);
}

TEST_CASE("sparse exactness on total order 2l+1") {
    const int l = 2;
    const auto g = sparse_grid(3, l);
    for (int i = 0; i <= 2 * l + 1; ++i) {
        for (int j = 0; i + j <= 2 * l + 1; ++j) {
            for (int k = 0; i + j + k <= 2 * l + 1; ++k) {
                const double got = integrate(g, [&](std::span<const double> x) {
                    return std::pow(x[0], i) * std::pow(x[1], j) * std::pow(x[2], k);
                });
                const double exact = monomial_integral(i) * monomial_integral(j) * monomial_integral(k);
                CHECK(std::abs(got - exact) <= 1e-10);
            }
        }
    }
}

TEST_CASE("integration") {
    CHECK(integrate(full_grid(3, 2), [](auto) { return 1.0; }) == doctest::Approx(8.0).epsilon(1e-12));
    const double v = integrate(full_grid(2, 2), [](std::span<const double> x) { return x[0] * x[0] * x[1] * x[1]; });
    CHECK(v == doctest::Approx(4.0 / 9).epsilon(1e-14));
    for (const auto& g : {full_grid(2, 3), sparse_grid(3, 3)}) {
        CHECK(std::abs(integrate(g, [](std::span<const double> x) { return x[0] * x[0] * x[0]; })) <= 1e-13);
    }
    try {
        integrate(full_grid(1, 1), [](std::span<const double> x) -> double {
            if (x[0] > 0) throw std::runtime_error("boom");
            return 0.0;
        });
        FAIL("expected a model error");
    } catch (const ModelError& e) {
        CHECK(std::string(e.what()).find("0.57735") != std::string::npos);
    }
}

TEST_CASE("grid csv export") {
    std::ostringstream s;
    write_grid_csv(full_grid(1, 0), s);
    CHECK(s.str() == "0,2\n");
}
