#include "pcekit/multiindex.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "pcekit/error.hpp"

namespace pcekit {

MultiIndex::MultiIndex(std::vector<int> orders) : orders_(std::move(orders)) {
    for (int o : orders_) {
        if (o < 0) throw std::invalid_argument("multi-index orders must be non-negative");
    }
}

MultiIndex::MultiIndex(std::initializer_list<int> orders) : MultiIndex(std::vector<int>(orders)) {}

int MultiIndex::total_order() const { return std::accumulate(orders_.begin(), orders_.end(), 0); }

int MultiIndex::max_order() const {
    return orders_.empty() ? 0 : *std::max_element(orders_.begin(), orders_.end());
}

std::uint64_t MultiIndex::support_mask() const {
    std::uint64_t mask = 0;
    for (std::size_t j = 0; j < orders_.size(); ++j) {
        if (orders_[j] > 0) mask |= std::uint64_t{1} << j;
    }
    return mask;
}

std::string MultiIndex::to_string() const {
    std::string s = "(";
    for (std::size_t j = 0; j < orders_.size(); ++j) {
        if (j) s += ",";
        s += std::to_string(orders_[j]);
    }
    return s + ")";
}

bool Neighborhood::contains(const MultiIndex& index) const {
    if (index.dim() != static_cast<std::size_t>(dim)) return false;
    return kind == NeighborhoodKind::TotalOrder ? index.total_order() <= order
                                                : index.max_order() <= order;
}

bool graded_less(const MultiIndex& a, const MultiIndex& b) {
    const int ta = a.total_order();
    const int tb = b.total_order();
    if (ta != tb) return ta < tb;
    return a.orders() > b.orders();
}

namespace {

void check_shape(const Neighborhood& nbhd) {
    if (nbhd.dim < 1) throw ConfigError("neighborhood dimension must be at least 1");
    if (nbhd.order < 0) throw ConfigError("neighborhood order must be non-negative");
    if (nbhd.dim > 64) throw ConfigError("at most 64 input variables are supported");
}

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
    if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a) {
        throw ConfigError("neighborhood size overflows 64-bit arithmetic");
    }
    return a * b;
}

[[noreturn]] void too_large(const Neighborhood& nbhd, const std::string& count) {
    throw ConfigError("neighborhood " + std::string(to_string(nbhd.kind)) + "(p=" +
                      std::to_string(nbhd.order) + ", N=" + std::to_string(nbhd.dim) + ") has " +
                      count + " members, above the limit of " + std::to_string(kMaxNeighborhoodSize));
}

} // namespace

std::uint64_t cardinality(const Neighborhood& nbhd) {
    check_shape(nbhd);
    const auto p = static_cast<std::uint64_t>(nbhd.order);
    const auto n = static_cast<std::uint64_t>(nbhd.dim);
    std::uint64_t count = 1;
    if (nbhd.kind == NeighborhoodKind::TensorProduct) {
        for (std::uint64_t j = 0; j < n; ++j) {
            count = checked_mul(count, p + 1);
            if (count > kMaxNeighborhoodSize) too_large(nbhd, "more than " + std::to_string(count));
        }
    } else {
        // C(p+N, N) built incrementally; every partial product is itself a binomial.
        for (std::uint64_t k = 1; k <= n; ++k) {
            count = checked_mul(count, p + k) / k;
            if (count > kMaxNeighborhoodSize) too_large(nbhd, "more than " + std::to_string(count));
        }
    }
    return count;
}

std::vector<MultiIndex> enumerate(const Neighborhood& nbhd) {
    const std::uint64_t count = cardinality(nbhd);
    const int n = nbhd.dim;
    const int p = nbhd.order;
    const bool total = nbhd.kind == NeighborhoodKind::TotalOrder;

    std::vector<MultiIndex> out;
    out.reserve(count);
    std::vector<int> cur(n, 0);
    std::function<void(int, int)> rec = [&](int j, int used) {
        if (j == n) {
            out.emplace_back(cur);
            return;
        }
        const int hi = total ? p - used : p;
        for (int v = 0; v <= hi; ++v) {
            cur[j] = v;
            rec(j + 1, used + v);
        }
        cur[j] = 0;
    };
    rec(0, 0);
    std::sort(out.begin(), out.end(), graded_less);
    return out;
}

const char* to_string(NeighborhoodKind kind) {
    return kind == NeighborhoodKind::TotalOrder ? "total_order" : "tensor_product";
}

NeighborhoodKind neighborhood_kind_from_string(const std::string& name) {
    if (name == "total_order") return NeighborhoodKind::TotalOrder;
    if (name == "tensor_product") return NeighborhoodKind::TensorProduct;
    throw IoError("unknown neighborhood kind '" + name + "'");
}

} // namespace pcekit
