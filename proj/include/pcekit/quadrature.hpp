#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

namespace pcekit {

enum class RuleFamily { GaussLegendre, ClenshawCurtis };

/// One-dimensional rule on [-1, 1] with respect to dx (weights sum to 2).
struct QuadratureRule1D {
    std::vector<double> nodes;   // strictly increasing
    std::vector<double> weights;
    RuleFamily family = RuleFamily::GaussLegendre;
    int exact_degree = 0;

    std::size_t size() const { return nodes.size(); }
};

inline constexpr int kMaxGaussLegendrePoints = 64;
inline constexpr int kMaxClenshawCurtisLevel = 12;
inline constexpr std::size_t kDefaultMaxGridPoints = 10'000'000;

/// n-point Gauss-Legendre rule, 1 <= n <= 64. Nodes by Newton iteration on L_n.
QuadratureRule1D gauss_legendre_1d(int n);

/// Number of Clenshaw-Curtis nodes at level k: 1 for k = 1, 2^(k-1) + 1 otherwise.
int clenshaw_curtis_size(int level);

/// Nested Clenshaw-Curtis rule at level 1 <= k <= 12.
QuadratureRule1D clenshaw_curtis_1d(int level);

enum class GridMethod { FullGrid, SparseGrid };

/// Which construction produced a grid; `parameter` is the order p for a full
/// grid and the level for a sparse grid.
struct GridProvenance {
    GridMethod method = GridMethod::FullGrid;
    int parameter = 0;
    friend bool operator==(const GridProvenance&, const GridProvenance&) = default;
};

/// Points and weights of an N-dimensional rule on [-1, 1]^N, stored row-major
/// in lexicographic coordinate order.
class GridQuadrature {
public:
    GridQuadrature(int dim, std::vector<double> coords, std::vector<double> weights,
                   GridProvenance provenance);

    int dim() const { return dim_; }
    std::size_t size() const { return weights_.size(); }
    std::span<const double> point(std::size_t i) const {
        return {coords_.data() + i * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_)};
    }
    double weight(std::size_t i) const { return weights_[i]; }
    const std::vector<double>& coords() const { return coords_; }
    const std::vector<double>& weights() const { return weights_; }
    const GridProvenance& provenance() const { return provenance_; }

private:
    int dim_;
    std::vector<double> coords_;
    std::vector<double> weights_;
    GridProvenance provenance_;
};

/// Tensor product of gauss_legendre_1d(order + 1) in every dimension.
GridQuadrature full_grid(int dim, int order, std::size_t max_points = kDefaultMaxGridPoints);

/// Smolyak combination of nested Clenshaw-Curtis rules at level 1 <= level <= 3 dim.
/// Coincident points are merged and their signed weights summed; weights may be negative.
GridQuadrature sparse_grid(int dim, int level, std::size_t max_points = kDefaultMaxGridPoints);

/// Number of points either construction would produce, without building weights
/// for full grids. Throws ConfigError when the count exceeds max_points.
std::size_t full_grid_size(int dim, int order, std::size_t max_points = kDefaultMaxGridPoints);

using Integrand = std::function<double(std::span<const double>)>;

/// sum_i f(x_i) w_i in stored point order. Failures of f are rethrown as
/// ModelError carrying the offending point.
double integrate(const GridQuadrature& grid, const Integrand& f);

/// One row per point: coordinates then weight, comma separated, shortest round-trip form.
void write_grid_csv(const GridQuadrature& grid, std::ostream& out);

} // namespace pcekit
