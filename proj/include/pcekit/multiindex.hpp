#pragma once

#include <compare>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

namespace pcekit {

/// Per-dimension polynomial orders (i_1, ..., i_N).
class MultiIndex {
public:
    MultiIndex() = default;
    explicit MultiIndex(std::vector<int> orders);
    MultiIndex(std::initializer_list<int> orders);

    std::size_t dim() const { return orders_.size(); }
    int operator[](std::size_t j) const { return orders_[j]; }
    const std::vector<int>& orders() const { return orders_; }

    /// |i|_1
    int total_order() const;
    int max_order() const;
    /// Bit j set when i_j > 0. Requires dim() <= 64.
    std::uint64_t support_mask() const;

    std::string to_string() const;

    friend bool operator==(const MultiIndex&, const MultiIndex&) = default;
    friend auto operator<=>(const MultiIndex&, const MultiIndex&) = default;

private:
    std::vector<int> orders_;
};

enum class NeighborhoodKind { TotalOrder, TensorProduct };

struct Neighborhood {
    NeighborhoodKind kind = NeighborhoodKind::TotalOrder;
    int order = 0;
    int dim = 1;

    bool contains(const MultiIndex& index) const;
    friend bool operator==(const Neighborhood&, const Neighborhood&) = default;
};

/// Refuse to materialize neighborhoods larger than this.
inline constexpr std::uint64_t kMaxNeighborhoodSize = 10'000'000;

/// Graded ordering: by |i|_1 ascending, then by orders descending
/// lexicographically, so (1,0) precedes (0,1) and the constant term is first.
bool graded_less(const MultiIndex& a, const MultiIndex& b);

/// Number of members, C(p+N, N) or (p+1)^N. Throws ConfigError above
/// kMaxNeighborhoodSize or on overflow.
std::uint64_t cardinality(const Neighborhood& nbhd);

/// Every member exactly once, in graded order.
std::vector<MultiIndex> enumerate(const Neighborhood& nbhd);

const char* to_string(NeighborhoodKind kind);
NeighborhoodKind neighborhood_kind_from_string(const std::string& name);

} // namespace pcekit
