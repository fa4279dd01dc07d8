#pragma once

#include <span>
#include <vector>

namespace pcekit {

class MultiIndex;

/// Highest univariate degree accepted by the builders unless overridden.
inline constexpr int kDefaultMaxDegree = 64;

/// Legendre polynomial L_n(x) from the three-term recurrence
/// (n+1) L_{n+1} = (2n+1) x L_n - n L_{n-1}. No clamping of x.
double legendre_eval(int n, double x);

/// Fills out[0..n] with L_0(x) .. L_n(x). out must hold n + 1 values.
void legendre_table(int n, double x, std::span<double> out);

/// L_n(x) and its derivative, as used by the Newton root finder.
struct LegendreWithDerivative {
    double value;
    double derivative;
};
LegendreWithDerivative legendre_eval_with_derivative(int n, double x);

/// <L_n, L_n> under the uniform weight 1/2 on [-1, 1], i.e. 1 / (2n + 1).
double legendre_norm(int n);

/// prod_j L_{i_j}(x_j). Throws std::invalid_argument on dimension mismatch.
double eval_basis_product(const MultiIndex& index, std::span<const double> point);

/// prod_j 1 / (2 i_j + 1), the squared norm of the tensor-product basis function.
double basis_norm(const MultiIndex& index);

} // namespace pcekit
