#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "pcekit/multiindex.hpp"
#include "pcekit/polybasis.hpp"
#include "pcekit/quadrature.hpp"

namespace pcekit {

/// A uniformly distributed input with physical range [v_min, v_max].
struct InputVariable {
    std::string name;
    double v_min = -1.0;
    double v_max = 1.0;

    /// Throws ConfigError unless v_min < v_max and both are finite.
    void validate() const;
    friend bool operator==(const InputVariable&, const InputVariable&) = default;
};

/// Physical value to [-1, 1]: (2v - max - min) / (max - min).
double rescale(double v, const InputVariable& var);
/// Inverse of rescale.
double unscale(double xi, const InputVariable& var);

/// Full grid of order p (tensor-product basis) or sparse grid of level l (total-order basis of order l).
struct BuildMethod {
    GridMethod kind = GridMethod::FullGrid;
    int order = 1;

    static BuildMethod full(int p) { return {GridMethod::FullGrid, p}; }
    static BuildMethod sparse(int level) { return {GridMethod::SparseGrid, level}; }
    std::string label() const;
    friend bool operator==(const BuildMethod&, const BuildMethod&) = default;
};

struct BuildMeta {
    BuildMethod method;
    std::size_t evaluation_count = 0;
    std::string model_identity;
    std::string config_hash;
    std::string timestamp;  // empty for reproducible builds
    friend bool operator==(const BuildMeta&, const BuildMeta&) = default;
};

/// Evaluates the black box at physical-space points; returns one output vector
/// per point, in order. Should throw ModelError naming the failing point.
using BatchModel = std::function<std::vector<std::vector<double>>(const std::vector<std::vector<double>>&)>;

struct BuildOptions {
    int max_degree = kDefaultMaxDegree;
    std::size_t max_grid_points = kDefaultMaxGridPoints;
    std::string model_identity;
    std::string config_hash;
    std::string timestamp;
};

/// Legendre chaos expansion Y(xi) = sum_i Y_i prod_j L_{i_j}(xi_j) over a
/// neighborhood, one coefficient per output. Immutable after construction.
class PceModel {
public:
    /// `coefficients` is row-major [term][output] with terms in enumerate(neighborhood) order.
    PceModel(std::vector<InputVariable> inputs, std::vector<std::string> output_names,
             Neighborhood neighborhood, std::vector<double> coefficients, BuildMeta meta);

    std::size_t dim() const { return inputs_.size(); }
    std::size_t output_count() const { return output_names_.size(); }
    std::size_t term_count() const { return terms_.size(); }

    const std::vector<InputVariable>& inputs() const { return inputs_; }
    const std::vector<std::string>& output_names() const { return output_names_; }
    const Neighborhood& neighborhood() const { return neighborhood_; }
    const std::vector<MultiIndex>& terms() const { return terms_; }
    const BuildMeta& build_meta() const { return meta_; }

    double coefficient(std::size_t term, std::size_t output) const {
        return coefficients_[term * output_names_.size() + output];
    }
    /// Coefficient of an arbitrary multi-index, 0 if it is outside the neighborhood.
    double coefficient(const MultiIndex& index, std::size_t output) const;
    std::size_t output_index(const std::string& name) const;

    /// Surrogate value at a physical-space point.
    std::vector<double> evaluate(std::span<const double> physical) const;
    /// Surrogate value at a point already in [-1, 1]^N.
    std::vector<double> evaluate_reference(std::span<const double> xi) const;
    /// Row-major physical points [n][N] to row-major outputs [n][outputs], threads <= 0 means hardware concurrency.
    std::vector<double> evaluate_many(std::span<const double> physical, int threads = 0) const;

    std::vector<double> mean() const;
    std::vector<double> variance() const;

    friend bool operator==(const PceModel& a, const PceModel& b);

private:
    void accumulate(std::span<const double> xi, std::span<double> out, std::vector<double>& table) const;

    std::vector<InputVariable> inputs_;
    std::vector<std::string> output_names_;
    Neighborhood neighborhood_;
    std::vector<MultiIndex> terms_;
    std::vector<double> coefficients_;
    BuildMeta meta_;
};

/// Node strengths by quadrature, one black-box evaluation per grid point.
PceModel build_pce(const BatchModel& model, std::vector<InputVariable> inputs,
                   std::vector<std::string> outputs, BuildMethod method,
                   const BuildOptions& options = {});

/// Node strengths from outputs already evaluated on `grid` (rows follow grid order).
PceModel assemble_pce(const GridQuadrature& grid, std::span<const std::vector<double>> outputs,
                      std::vector<InputVariable> inputs, std::vector<std::string> output_names,
                      BuildMethod method, BuildMeta meta);

/// Grid used by build_pce for a given method.
GridQuadrature grid_for(BuildMethod method, int dim, std::size_t max_points = kDefaultMaxGridPoints);

/// Grid points mapped to physical units.
std::vector<std::vector<double>> physical_points(const GridQuadrature& grid,
                                                 std::span<const InputVariable> inputs);

inline constexpr const char* kModelSchemaId = "pcekit.model";
inline constexpr int kModelSchemaVersion = 1;

void save(const PceModel& model, std::ostream& out);
void save(const PceModel& model, const std::filesystem::path& path);
/// Throws IoError naming the offending field.
PceModel load(std::istream& in);
PceModel load(const std::filesystem::path& path);

} // namespace pcekit
