#include "pcekit/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <ostream>
#include <string>

#include "pcekit/error.hpp"
#include "pcekit/numfmt.hpp"
#include "pcekit/polybasis.hpp"

namespace pcekit {

QuadratureRule1D gauss_legendre_1d(int n) {
    if (n < 1 || n > kMaxGaussLegendrePoints) {
        throw ConfigError("Gauss-Legendre point count " + std::to_string(n) + " outside [1, " +
                          std::to_string(kMaxGaussLegendrePoints) + "]");
    }
    QuadratureRule1D rule;
    rule.family = RuleFamily::GaussLegendre;
    rule.exact_degree = 2 * n - 1;
    rule.nodes.assign(n, 0.0);
    rule.weights.assign(n, 0.0);

    // Roots come in +/- pairs; solve for the positive half and mirror.
    const int half = (n + 1) / 2;
    for (int i = 1; i <= half; ++i) {
        double x = std::cos(std::numbers::pi * (i - 0.25) / (n + 0.5));
        LegendreWithDerivative ld{};
        for (int iter = 0; iter < 100; ++iter) {
            ld = legendre_eval_with_derivative(n, x);
            const double dx = ld.value / ld.derivative;
            x -= dx;
            if (std::abs(dx) <= 1e-15) break;
        }
        if (2 * i - 1 == n) x = 0.0;
        ld = legendre_eval_with_derivative(n, x);
        const double w = 2.0 / ((1.0 - x * x) * ld.derivative * ld.derivative);
        rule.nodes[n - i] = x;
        rule.nodes[i - 1] = x == 0.0 ? 0.0 : -x;
        rule.weights[n - i] = w;
        rule.weights[i - 1] = w;
    }
    return rule;
}

int clenshaw_curtis_size(int level) {
    if (level < 1 || level > kMaxClenshawCurtisLevel) {
        throw ConfigError("Clenshaw-Curtis level " + std::to_string(level) + " outside [1, " +
                          std::to_string(kMaxClenshawCurtisLevel) + "]");
    }
    return level == 1 ? 1 : (1 << (level - 1)) + 1;
}

QuadratureRule1D clenshaw_curtis_1d(int level) {
    const int n = clenshaw_curtis_size(level);
    QuadratureRule1D rule;
    rule.family = RuleFamily::ClenshawCurtis;
    if (n == 1) {
        rule.nodes = {0.0};
        rule.weights = {2.0};
        rule.exact_degree = 1;
        return rule;
    }
    const int m = n - 1;  // always even here
    rule.exact_degree = m + 1;
    rule.nodes.assign(n, 0.0);
    rule.weights.assign(n, 0.0);
    for (int j = 0; j <= m / 2; ++j) {
        // -cos(j pi / m) written as a sine of an argument whose numerator and
        // denominator both double between levels, so nested nodes are bit-identical.
        const double arg = (static_cast<double>(m - 2 * j) * std::numbers::pi) / static_cast<double>(2 * m);
        const double x = std::sin(arg);
        rule.nodes[j] = -x;
        rule.nodes[m - j] = x;

        const double theta = static_cast<double>(j) * std::numbers::pi / static_cast<double>(m);
        double sum = 0.0;
        for (int k = 1; k <= m / 2; ++k) {
            const double b = (2 * k == m) ? 1.0 : 2.0;
            sum += b / (4.0 * k * k - 1.0) * std::cos(2.0 * k * theta);
        }
        const double c = (j == 0) ? 1.0 : 2.0;
        const double w = c / m * (1.0 - sum);
        rule.weights[j] = w;
        rule.weights[m - j] = w;
    }
    rule.nodes[m / 2] = 0.0;
    return rule;
}

GridQuadrature::GridQuadrature(int dim, std::vector<double> coords, std::vector<double> weights,
                               GridProvenance provenance)
    : dim_(dim), coords_(std::move(coords)), weights_(std::move(weights)), provenance_(provenance) {
    if (dim_ < 1 || coords_.size() != weights_.size() * static_cast<std::size_t>(dim_)) {
        throw std::invalid_argument("grid coordinates do not match weights and dimension");
    }
}

std::size_t full_grid_size(int dim, int order, std::size_t max_points) {
    if (dim < 1) throw ConfigError("grid dimension must be at least 1");
    if (order < 0) throw ConfigError("full-grid order must be non-negative");
    std::size_t count = 1;
    for (int j = 0; j < dim; ++j) {
        count *= static_cast<std::size_t>(order + 1);
        if (count > max_points) {
            throw ConfigError("full grid (N=" + std::to_string(dim) + ", p=" + std::to_string(order) +
                              ") needs " + std::to_string(order + 1) + "^" + std::to_string(dim) +
                              " points, above the cap of " + std::to_string(max_points));
        }
    }
    return count;
}

GridQuadrature full_grid(int dim, int order, std::size_t max_points) {
    const std::size_t count = full_grid_size(dim, order, max_points);
    const QuadratureRule1D rule = gauss_legendre_1d(order + 1);
    const std::size_t n1 = rule.size();

    std::vector<double> coords(count * dim);
    std::vector<double> weights(count);
    std::vector<std::size_t> digit(dim, 0);
    for (std::size_t q = 0; q < count; ++q) {
        double w = 1.0;
        for (int j = 0; j < dim; ++j) {
            coords[q * dim + j] = rule.nodes[digit[j]];
            w *= rule.weights[digit[j]];
        }
        weights[q] = w;
        // last coordinate varies fastest, giving lexicographic order
        for (int j = dim - 1; j >= 0; --j) {
            if (++digit[j] < n1) break;
            digit[j] = 0;
        }
    }
    return GridQuadrature(dim, std::move(coords), std::move(weights), {GridMethod::FullGrid, order});
}

namespace {

double binomial(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return std::round(r);
}

} // namespace

GridQuadrature sparse_grid(int dim, int level, std::size_t max_points) {
    if (dim < 1) throw ConfigError("grid dimension must be at least 1");
    if (level < 1 || level > 3 * dim) {
        throw ConfigError("sparse-grid level " + std::to_string(level) + " outside [1, 3N] = [1, " +
                          std::to_string(3 * dim) +
                          "]; total-order exactness 2l+1 is only guaranteed for l <= 3N");
    }
    if (level + 1 > kMaxClenshawCurtisLevel) {
        throw ConfigError("sparse-grid level " + std::to_string(level) +
                          " needs a Clenshaw-Curtis rule above level " +
                          std::to_string(kMaxClenshawCurtisLevel));
    }

    std::vector<QuadratureRule1D> rules;
    rules.reserve(level + 1);
    for (int k = 1; k <= level + 1; ++k) rules.push_back(clenshaw_curtis_1d(k));

    // Smolyak: sum over l+1 <= |k| <= l+N of (-1)^(l+N-|k|) C(N-1, l+N-|k|) Q_k.
    std::map<std::vector<double>, double> merged;
    std::vector<int> k(dim, 1);
    std::vector<double> point(dim);
    auto add_tensor = [&](double coef) {
        std::vector<std::size_t> digit(dim, 0);
        while (true) {
            double w = coef;
            for (int j = 0; j < dim; ++j) {
                const QuadratureRule1D& r = rules[k[j] - 1];
                point[j] = r.nodes[digit[j]];
                w *= r.weights[digit[j]];
            }
            merged[point] += w;
            if (merged.size() > max_points) {
                throw ConfigError("sparse grid (N=" + std::to_string(dim) + ", level " +
                                  std::to_string(level) + ") exceeds the cap of " +
                                  std::to_string(max_points) + " points");
            }
            int j = dim - 1;
            for (; j >= 0; --j) {
                if (++digit[j] < rules[k[j] - 1].size()) break;
                digit[j] = 0;
            }
            if (j < 0) break;
        }
    };

    const int lo = level + 1;
    const int hi = level + dim;
    auto rec = [&](auto&& self, int j, int sum) -> void {
        if (j == dim) {
            if (sum < lo) return;
            const int r = hi - sum;
            const double coef = (r % 2 == 0 ? 1.0 : -1.0) * binomial(dim - 1, r);
            add_tensor(coef);
            return;
        }
        const int remaining = dim - j - 1;  // each later component is at least 1
        for (int v = 1; sum + v + remaining <= hi; ++v) {
            k[j] = v;
            self(self, j + 1, sum + v);
        }
        k[j] = 1;
    };
    rec(rec, 0, 0);

    std::vector<double> coords;
    std::vector<double> weights;
    coords.reserve(merged.size() * dim);
    weights.reserve(merged.size());
    for (const auto& [p, w] : merged) {
        coords.insert(coords.end(), p.begin(), p.end());
        weights.push_back(w);
    }
    return GridQuadrature(dim, std::move(coords), std::move(weights), {GridMethod::SparseGrid, level});
}

double integrate(const GridQuadrature& grid, const Integrand& f) {
    double sum = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto x = grid.point(i);
        double fx = 0.0;
        try {
            fx = f(x);
        } catch (const std::exception& e) {
            std::string where = "(";
            for (std::size_t j = 0; j < x.size(); ++j) where += (j ? ", " : "") + format_short(x[j]);
            throw ModelError("integrand failed at " + where + "): " + e.what());
        }
        sum += fx * grid.weight(i);
    }
    return sum;
}

void write_grid_csv(const GridQuadrature& grid, std::ostream& out) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
        for (double x : grid.point(i)) out << format_short(x) << ',';
        out << format_short(grid.weight(i)) << '\n';
    }
}

} // namespace pcekit
