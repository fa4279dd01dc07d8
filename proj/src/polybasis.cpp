#include "pcekit/polybasis.hpp"

#include <stdexcept>
#include <string>

#include "pcekit/multiindex.hpp"

namespace pcekit {

double legendre_eval(int n, double x) {
    if (n == 0) return 1.0;
    double prev = 1.0;
    double cur = x;
    for (int k = 1; k < n; ++k) {
        const double next = ((2.0 * k + 1.0) * x * cur - k * prev) / (k + 1.0);
        prev = cur;
        cur = next;
    }
    return cur;
}

void legendre_table(int n, double x, std::span<double> out) {
    out[0] = 1.0;
    if (n == 0) return;
    out[1] = x;
    for (int k = 1; k < n; ++k) {
        out[k + 1] = ((2.0 * k + 1.0) * x * out[k] - k * out[k - 1]) / (k + 1.0);
    }
}

LegendreWithDerivative legendre_eval_with_derivative(int n, double x) {
    if (n == 0) return {1.0, 0.0};
    // P'_n = n (P_{n-1} - x P_n) / (1 - x^2) breaks down at the endpoints, so
    // carry the derivative through its own recurrence instead.
    double p_prev = 1.0, p = x;
    double d_prev = 0.0, d = 1.0;
    for (int k = 1; k < n; ++k) {
        const double p_next = ((2.0 * k + 1.0) * x * p - k * p_prev) / (k + 1.0);
        const double d_next = ((2.0 * k + 1.0) * (p + x * d) - k * d_prev) / (k + 1.0);
        p_prev = p;
        p = p_next;
        d_prev = d;
        d = d_next;
    }
    return {p, d};
}

double legendre_norm(int n) { return 1.0 / (2.0 * n + 1.0); }

double eval_basis_product(const MultiIndex& index, std::span<const double> point) {
    if (index.dim() != point.size()) {
        throw std::invalid_argument("basis product: multi-index has dimension " +
                                    std::to_string(index.dim()) + " but point has " +
                                    std::to_string(point.size()));
    }
    double prod = 1.0;
    for (std::size_t j = 0; j < point.size(); ++j) prod *= legendre_eval(index[j], point[j]);
    return prod;
}

double basis_norm(const MultiIndex& index) {
    double norm = 1.0;
    for (int order : index.orders()) norm *= legendre_norm(order);
    return norm;
}

} // namespace pcekit
