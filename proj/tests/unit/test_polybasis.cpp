#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "helpers.hpp"
#include "pcekit/multiindex.hpp"
#include "pcekit/polybasis.hpp"
#include "pcekit/quadrature.hpp"

using namespace pcekit;

TEST_CASE("legendre values at known points") {
    CHECK(legendre_eval(0, 0.37) == 1.0);
    for (int n = 0; n <= 30; ++n) CHECK(legendre_eval(n, 1.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(legendre_eval(3, 0.5) == doctest::Approx(-0.4375).epsilon(1e-15));
    // closed forms
    for (double x : {-0.9, -0.3, 0.0, 0.2, 0.77}) {
        CHECK(legendre_eval(1, x) == doctest::Approx(x));
        CHECK(legendre_eval(2, x) == doctest::Approx((3 * x * x - 1) / 2));
        CHECK(legendre_eval(3, x) == doctest::Approx((5 * x * x * x - 3 * x) / 2));
        CHECK(legendre_eval(4, x) == doctest::Approx((35 * std::pow(x, 4) - 30 * x * x + 3) / 8));
    }
}

TEST_CASE("legendre table matches single evaluations") {
    std::vector<double> t(13);
    legendre_table(12, 0.41, t);
    for (int n = 0; n <= 12; ++n) CHECK(t[n] == legendre_eval(n, 0.41));
}

TEST_CASE("legendre derivative") {
    for (double x : {-0.8, 0.1, 0.6}) {
        auto d = legendre_eval_with_derivative(3, x);
        CHECK(d.value == doctest::Approx(legendre_eval(3, x)));
        CHECK(d.derivative == doctest::Approx((15 * x * x - 3) / 2));
    }
}

TEST_CASE("recurrence consistency and parity") {
    testutil::Gen g(11);
    for (int trial = 0; trial < 200; ++trial) {
        const double x = g.uniform(-1, 1);
        for (int n = 1; n < 20; ++n) {
            const double r = (n + 1) * legendre_eval(n + 1, x) - (2 * n + 1) * x * legendre_eval(n, x) +
                             n * legendre_eval(n - 1, x);
            CHECK(std::abs(r) <= 1e-12);
        }
        for (int n = 0; n <= 20; ++n) {
            const double sign = n % 2 ? -1.0 : 1.0;
            CHECK(std::abs(legendre_eval(n, -x) - sign * legendre_eval(n, x)) <= 1e-13);
        }
    }
}

TEST_CASE("norms") {
    CHECK(legendre_norm(0) == 1.0);
    CHECK(legendre_norm(2) == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(basis_norm(MultiIndex{2, 1}) == doctest::Approx(1.0 / 15));
}

TEST_CASE("numerical orthogonality under the uniform weight") {
    const auto rule = gauss_legendre_1d(10);
    for (int i = 0; i <= 8; ++i) {
        for (int j = 0; j <= 8; ++j) {
            double s = 0;
            for (std::size_t q = 0; q < rule.size(); ++q) {
                s += rule.weights[q] * legendre_eval(i, rule.nodes[q]) * legendre_eval(j, rule.nodes[q]) * 0.5;
            }
            const double expected = i == j ? 1.0 / (2 * i + 1) : 0.0;
            CHECK(std::abs(s - expected) <= 1e-12);
        }
    }
}

TEST_CASE("basis products") {
    const std::vector<double> p4 = {0.3, -0.2, 0.9, 0.1};
    CHECK(eval_basis_product(MultiIndex{0, 0, 0, 0}, p4) == 1.0);
    const std::vector<double> ab = {0.35, -0.6};
    CHECK(eval_basis_product(MultiIndex{1, 1}, ab) == doctest::Approx(0.35 * -0.6));
    const std::vector<double> half = {0.5, 0.5};
    CHECK(eval_basis_product(MultiIndex{2, 1}, half) == doctest::Approx(-0.0625).epsilon(1e-15));
    CHECK_THROWS_AS(eval_basis_product(MultiIndex{1, 1, 1}, half), std::invalid_argument);
}
