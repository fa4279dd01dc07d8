#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace pcekit {

class PceModel;

/// Portable seeded generator: std::mt19937_64 with explicit bit-level conversions,
/// so streams are identical on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed);
    std::uint64_t next();
    /// Uniform in [0, 1) with 53 random bits.
    double uniform01();
    /// Uniform integer in [0, bound) by rejection.
    std::uint64_t below(std::uint64_t bound);

private:
    std::mt19937_64 engine_;
};

/// r independent Latin hypercube designs of n points each, in [-1, 1]^dim,
/// stored row-major [r * n][dim].
struct LhsDesign {
    int strata = 1;
    int dim = 1;
    int repeats = 1;
    std::uint64_t seed = 0;
    std::vector<double> points;

    std::size_t size() const { return points.size() / static_cast<std::size_t>(dim); }
    std::span<const double> point(std::size_t i) const {
        return {points.data() + i * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
    }
};

/// Stratum bounds [lower, upper) for stratum k of n on [-1, 1].
double stratum_lower(int k, int n);
double stratum_upper(int k, int n);

LhsDesign latin_hypercube(int strata, int dim, int repeats, std::uint64_t seed);

/// Plain uniform sample on [-1, 1]^dim, row-major.
std::vector<double> uniform_sample(std::size_t count, int dim, std::uint64_t seed);

double rmse(std::span<const double> predictions, std::span<const double> truths);
/// Throws NumericalError naming the index of any zero truth.
double rrmse(std::span<const double> predictions, std::span<const double> truths);

/// Percentile q in [0, 1] of sorted data with h = (n - 1) q + 1 interpolation.
double percentile_sorted(std::span<const double> sorted, double q);

enum class Derivation { Analytic, Empirical };
const char* to_string(Derivation d);

struct SummaryStats {
    double mean = 0.0;
    double std_dev = 0.0;
    double sample_min = 0.0;
    double p10 = 0.0;
    double p25 = 0.0;
    double p50 = 0.0;
    double p75 = 0.0;
    double p90 = 0.0;
    double sample_max = 0.0;
    Derivation mean_derivation = Derivation::Empirical;
    Derivation std_dev_derivation = Derivation::Empirical;
    std::size_t sample_count = 0;
};

/// Sample mean, n-1 standard deviation and type-7 percentiles. Needs >= 2 samples.
SummaryStats summarize(std::span<const double> samples);
/// As summarize, with mean and standard deviation replaced by the analytic moments.
SummaryStats summarize(std::span<const double> samples, double analytic_mean, double analytic_variance);

struct CdfPoint {
    double value;
    double rank;  // k / n
};

struct Histogram {
    std::vector<double> edges;  // bins + 1
    std::vector<std::size_t> counts;
};

struct EmpiricalDistribution {
    std::vector<CdfPoint> cdf;
    Histogram histogram;
};

EmpiricalDistribution empirical_distribution(std::span<const double> samples, int bins);

void write_cdf_csv(std::span<const std::string> outputs,
                   std::span<const EmpiricalDistribution> dists, std::ostream& out);
void write_histogram_csv(std::span<const std::string> outputs,
                         std::span<const EmpiricalDistribution> dists, std::ostream& out);

} // namespace pcekit
