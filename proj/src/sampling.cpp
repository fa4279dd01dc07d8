#include "pcekit/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

#include "pcekit/error.hpp"
#include "pcekit/numfmt.hpp"

namespace pcekit {

Rng::Rng(std::uint64_t seed) : engine_(seed) {}

std::uint64_t Rng::next() { return engine_(); }

double Rng::uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

std::uint64_t Rng::below(std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("Rng::below needs a positive bound");
    // Reject the top partial block so every residue is equally likely.
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x = next();
    while (x >= limit) x = next();
    return x % bound;
}

double stratum_lower(int k, int n) { return -1.0 + 2.0 * k / n; }
double stratum_upper(int k, int n) { return k + 1 == n ? 1.0 : -1.0 + 2.0 * (k + 1) / n; }

LhsDesign latin_hypercube(int strata, int dim, int repeats, std::uint64_t seed) {
    if (strata < 1 || dim < 1 || repeats < 1) {
        throw ConfigError("Latin hypercube needs strata, dimension and repeats >= 1");
    }
    LhsDesign d;
    d.strata = strata;
    d.dim = dim;
    d.repeats = repeats;
    d.seed = seed;
    const std::size_t n = static_cast<std::size_t>(strata);
    d.points.assign(static_cast<std::size_t>(repeats) * n * dim, 0.0);

    Rng rng(seed);
    std::vector<int> perm(n);
    for (int r = 0; r < repeats; ++r) {
        const std::size_t base = static_cast<std::size_t>(r) * n;
        for (int j = 0; j < dim; ++j) {
            for (std::size_t i = 0; i < n; ++i) perm[i] = static_cast<int>(i);
            // Fisher-Yates with our own bounded draw; std::shuffle is not portable.
            for (std::size_t i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng.below(i + 1)]);
            for (std::size_t i = 0; i < n; ++i) {
                const int k = perm[i];
                const double lo = stratum_lower(k, strata);
                const double hi = stratum_upper(k, strata);
                double x = lo + (hi - lo) * rng.uniform01();
                if (x >= hi) x = std::nextafter(hi, lo);
                d.points[(base + i) * dim + j] = x;
            }
        }
    }
    return d;
}

std::vector<double> uniform_sample(std::size_t count, int dim, std::uint64_t seed) {
    if (dim < 1) throw ConfigError("sample dimension must be at least 1");
    Rng rng(seed);
    std::vector<double> pts(count * dim);
    for (double& x : pts) x = -1.0 + 2.0 * rng.uniform01();
    return pts;
}

namespace {

void check_pair(std::span<const double> p, std::span<const double> t) {
    if (p.size() != t.size()) {
        throw std::invalid_argument("prediction and truth lengths differ (" + std::to_string(p.size()) +
                                    " vs " + std::to_string(t.size()) + ")");
    }
    if (p.empty()) throw std::invalid_argument("error metrics need at least one value");
}

} // namespace

double rmse(std::span<const double> predictions, std::span<const double> truths) {
    check_pair(predictions, truths);
    double sum = 0.0;
    for (std::size_t i = 0; i < truths.size(); ++i) {
        const double d = predictions[i] - truths[i];
        sum += d * d;
    }
    return std::sqrt(sum / static_cast<double>(truths.size()));
}

double rrmse(std::span<const double> predictions, std::span<const double> truths) {
    check_pair(predictions, truths);
    double sum = 0.0;
    for (std::size_t i = 0; i < truths.size(); ++i) {
        if (std::abs(truths[i]) < 1e-300) {
            throw NumericalError("relative error undefined: truth value at index " + std::to_string(i) + " is zero");
        }
        const double r = (predictions[i] - truths[i]) / truths[i];
        sum += r * r;
    }
    return std::sqrt(sum / static_cast<double>(truths.size()));
}

double percentile_sorted(std::span<const double> sorted, double q) {
    if (sorted.empty()) throw std::invalid_argument("percentile of an empty sample");
    const double h = (static_cast<double>(sorted.size()) - 1.0) * q;  // 0-based position
    const auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= sorted.size()) return sorted.back();
    const double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

const char* to_string(Derivation d) { return d == Derivation::Analytic ? "Analytic" : "Empirical"; }

SummaryStats summarize(std::span<const double> samples) {
    if (samples.size() < 2) {
        throw NumericalError("summary statistics need at least 2 samples, got " + std::to_string(samples.size()));
    }
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());

    SummaryStats s;
    s.sample_count = sorted.size();
    double sum = 0.0;
    for (double x : samples) sum += x;
    s.mean = sum / n;
    double ss = 0.0;
    for (double x : samples) ss += (x - s.mean) * (x - s.mean);
    s.std_dev = std::sqrt(ss / (n - 1.0));
    s.sample_min = sorted.front();
    s.sample_max = sorted.back();
    s.p10 = percentile_sorted(sorted, 0.10);
    s.p25 = percentile_sorted(sorted, 0.25);
    s.p50 = percentile_sorted(sorted, 0.50);
    s.p75 = percentile_sorted(sorted, 0.75);
    s.p90 = percentile_sorted(sorted, 0.90);
    return s;
}

SummaryStats summarize(std::span<const double> samples, double analytic_mean, double analytic_variance) {
    SummaryStats s = summarize(samples);
    s.mean = analytic_mean;
    s.std_dev = std::sqrt(std::max(0.0, analytic_variance));
    s.mean_derivation = Derivation::Analytic;
    s.std_dev_derivation = Derivation::Analytic;
    return s;
}

EmpiricalDistribution empirical_distribution(std::span<const double> samples, int bins) {
    if (samples.empty()) throw NumericalError("empirical distribution of an empty sample");
    if (bins < 1) throw ConfigError("histogram needs at least one bin");
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();

    EmpiricalDistribution d;
    d.cdf.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        d.cdf.push_back({sorted[i], static_cast<double>(i + 1) / static_cast<double>(n)});
    }

    const double lo = sorted.front();
    const double hi = sorted.back();
    d.histogram.edges.resize(bins + 1);
    for (int b = 0; b <= bins; ++b) d.histogram.edges[b] = b == bins ? hi : lo + (hi - lo) * b / bins;
    d.histogram.counts.assign(bins, 0);
    for (double x : sorted) {
        std::size_t b = 0;
        if (hi > lo) {
            b = static_cast<std::size_t>((x - lo) / (hi - lo) * bins);
            b = std::min<std::size_t>(b, bins - 1);  // x == max lands in the last, closed bin
        }
        ++d.histogram.counts[b];
    }
    return d;
}

void write_cdf_csv(std::span<const std::string> outputs, std::span<const EmpiricalDistribution> dists,
                   std::ostream& out) {
    out << "output,value,cumulative_probability\n";
    for (std::size_t o = 0; o < dists.size(); ++o) {
        for (const auto& p : dists[o].cdf) {
            out << outputs[o] << ',' << format_short(p.value) << ',' << format_short(p.rank) << '\n';
        }
    }
}

void write_histogram_csv(std::span<const std::string> outputs, std::span<const EmpiricalDistribution> dists,
                         std::ostream& out) {
    out << "output,bin_lower,bin_upper,count,density\n";
    for (std::size_t o = 0; o < dists.size(); ++o) {
        const auto& h = dists[o].histogram;
        std::size_t total = 0;
        for (auto c : h.counts) total += c;
        for (std::size_t b = 0; b < h.counts.size(); ++b) {
            const double width = h.edges[b + 1] - h.edges[b];
            const double density = width > 0.0 ? static_cast<double>(h.counts[b]) / (static_cast<double>(total) * width) : 0.0;
            out << outputs[o] << ',' << format_short(h.edges[b]) << ',' << format_short(h.edges[b + 1]) << ','
                << h.counts[b] << ',' << format_short(density) << '\n';
        }
    }
}

} // namespace pcekit
