#include "pcekit/sobol.hpp"

#include <algorithm>
#include <cstdint>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "pcekit/error.hpp"
#include "pcekit/numfmt.hpp"
#include "pcekit/polybasis.hpp"

namespace pcekit {

namespace {

std::uint64_t mask_of(const PceModel& pce, const VariableSet& subset) {
    if (subset.empty()) throw std::invalid_argument("Sobol' subset must be non-empty");
    std::uint64_t mask = 0;
    for (int v : subset) {
        if (v < 0 || static_cast<std::size_t>(v) >= pce.dim()) {
            throw std::invalid_argument("variable position " + std::to_string(v) + " outside [0, " +
                                        std::to_string(pce.dim()) + ")");
        }
        const std::uint64_t bit = std::uint64_t{1} << v;
        if (mask & bit) throw std::invalid_argument("variable position " + std::to_string(v) + " repeated");
        mask |= bit;
    }
    return mask;
}

double checked_variance(const PceModel& pce, std::size_t output) {
    if (output >= pce.output_count()) throw std::invalid_argument("output position out of range");
    const double var = pce.variance()[output];
    if (!(var >= kMinVariance)) {
        throw NumericalError("Sobol' indices are undefined for output '" + pce.output_names()[output] +
                             "': its variance is zero");
    }
    return var;
}

// Sum of Y_i^2 <L_i, L_i> over terms selected by `keep(support mask)`.
template <typename Pred>
double partial_variance(const PceModel& pce, std::size_t output, Pred keep) {
    double d = 0.0;
    for (std::size_t t = 1; t < pce.term_count(); ++t) {
        const MultiIndex& idx = pce.terms()[t];
        if (!keep(idx.support_mask())) continue;
        const double c = pce.coefficient(t, output);
        d += c * c * basis_norm(idx);
    }
    return d;
}

} // namespace

double sobol_index(const PceModel& pce, const VariableSet& subset, std::size_t output) {
    const std::uint64_t mask = mask_of(pce, subset);
    const double var = checked_variance(pce, output);
    return partial_variance(pce, output, [mask](std::uint64_t s) { return s == mask; }) / var;
}

double sobol_index(const PceModel& pce, const VariableSet& subset, const std::string& output) {
    return sobol_index(pce, subset, pce.output_index(output));
}

double total_index(const PceModel& pce, const VariableSet& subset, std::size_t output) {
    const std::uint64_t mask = mask_of(pce, subset);
    const double var = checked_variance(pce, output);
    return partial_variance(pce, output, [mask](std::uint64_t s) { return (s & mask) == mask; }) / var;
}

double total_index(const PceModel& pce, const VariableSet& subset, const std::string& output) {
    return total_index(pce, subset, pce.output_index(output));
}

std::vector<VariableSet> subsets_up_to(int n, int max_size) {
    std::vector<VariableSet> out;
    VariableSet cur;
    for (int size = 1; size <= std::min(n, max_size); ++size) {
        auto rec = [&](auto&& self, int start) -> void {
            if (static_cast<int>(cur.size()) == size) {
                out.push_back(cur);
                return;
            }
            for (int v = start; v < n; ++v) {
                cur.push_back(v);
                self(self, v + 1);
                cur.pop_back();
            }
        };
        rec(rec, 0);
    }
    return out;
}

SobolReport full_report(const PceModel& pce, int max_subset_size) {
    const int n = static_cast<int>(pce.dim());
    if (max_subset_size < 1 || max_subset_size > n) {
        throw ConfigError("Sobol' max subset size " + std::to_string(max_subset_size) + " outside [1, " +
                          std::to_string(n) + "]");
    }
    SobolReport report;
    report.max_subset_size = max_subset_size;
    for (const auto& in : pce.inputs()) report.variables.push_back(in.name);

    const auto subsets = subsets_up_to(n, max_subset_size);
    for (std::size_t o = 0; o < pce.output_count(); ++o) {
        const double var = checked_variance(pce, o);
        // Partial variances D_U grouped by the support of each term.
        std::map<std::uint64_t, double> by_support;
        for (std::size_t t = 1; t < pce.term_count(); ++t) {
            const MultiIndex& idx = pce.terms()[t];
            const double c = pce.coefficient(t, o);
            by_support[idx.support_mask()] += c * c * basis_norm(idx);
        }

        OutputSobol out;
        out.output = pce.output_names()[o];
        out.total_variance = var;
        double reported = 0.0;
        for (const auto& s : subsets) {
            std::uint64_t mask = 0;
            for (int v : s) mask |= std::uint64_t{1} << v;
            const auto it = by_support.find(mask);
            const double value = it == by_support.end() ? 0.0 : it->second / var;
            out.indices.push_back({s, value});
            reported += value;
        }
        out.totals.resize(n, 0.0);
        for (int u = 0; u < n; ++u) {
            const std::uint64_t bit = std::uint64_t{1} << u;
            double d = 0.0;
            for (const auto& [mask, value] : by_support) {
                if (mask & bit) d += value;
            }
            out.totals[u] = d / var;
        }
        out.remainder = 1.0 - reported;
        report.outputs.push_back(std::move(out));
    }
    return report;
}

nlohmann::json sobol_to_json(const SobolReport& report) {
    nlohmann::json doc;
    doc["variables"] = report.variables;
    doc["max_subset_size"] = report.max_subset_size;
    nlohmann::json outs = nlohmann::json::array();
    for (const auto& o : report.outputs) {
        nlohmann::json indices = nlohmann::json::array();
        for (const auto& s : o.indices) {
            std::vector<std::string> names;
            for (int v : s.subset) names.push_back(report.variables[v]);
            indices.push_back({{"subset", s.subset}, {"variables", names}, {"value", format_exact(s.value)}});
        }
        nlohmann::json totals = nlohmann::json::object();
        for (std::size_t u = 0; u < o.totals.size(); ++u) totals[report.variables[u]] = format_exact(o.totals[u]);
        outs.push_back({{"output", o.output},
                        {"total_variance", format_exact(o.total_variance)},
                        {"indices", std::move(indices)},
                        {"totals", std::move(totals)},
                        {"higher_order_remainder", format_exact(o.remainder)}});
    }
    doc["outputs"] = std::move(outs);
    return doc;
}

namespace {

std::string subset_label(const std::vector<std::string>& names, const VariableSet& s) {
    std::string label;
    for (std::size_t i = 0; i < s.size(); ++i) label += (i ? ", " : "") + names[s[i]];
    return label;
}

std::string subset_symbol(const std::vector<std::string>& names, const VariableSet& s, const char* letter) {
    return std::string(letter) + "(" + subset_label(names, s) + ")";
}

void write_table(std::ostream& out, const std::string& title, const std::vector<std::string>& header,
                 const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::size_t> width(header.size());
    for (std::size_t c = 0; c < header.size(); ++c) width[c] = header[c].size();
    for (const auto& r : rows) {
        for (std::size_t c = 0; c < r.size(); ++c) width[c] = std::max(width[c], r[c].size());
    }
    auto line = [&](const std::vector<std::string>& r) {
        for (std::size_t c = 0; c < r.size(); ++c) {
            // text columns left aligned, numbers right aligned
            if (c < 2) out << std::left; else out << std::right;
            out << std::setw(static_cast<int>(width[c])) << r[c];
            out << (c + 1 < r.size() ? "  " : "");
        }
        out << std::left << '\n';
    };
    std::size_t total = 0;
    for (auto w : width) total += w + 2;
    out << title << '\n' << std::string(total - 2, '-') << '\n';
    line(header);
    out << std::string(total - 2, '-') << '\n';
    for (const auto& r : rows) line(r);
    out << std::string(total - 2, '-') << "\n\n";
}

} // namespace

void write_sobol_text(const SobolReport& report, std::ostream& out) {
    std::vector<std::string> header = {"Variable", "Index"};
    for (const auto& o : report.outputs) header.push_back(o.output);

    for (int size = 1; size <= report.max_subset_size; ++size) {
        std::vector<std::vector<std::string>> rows;
        if (report.outputs.empty()) break;
        for (std::size_t k = 0; k < report.outputs.front().indices.size(); ++k) {
            const auto& s = report.outputs.front().indices[k].subset;
            if (static_cast<int>(s.size()) != size) continue;
            std::vector<std::string> row = {subset_label(report.variables, s),
                                            subset_symbol(report.variables, s, "S")};
            for (const auto& o : report.outputs) row.push_back(format_fixed(o.indices[k].value, 7));
            rows.push_back(std::move(row));
        }
        const std::string title = size == 1 ? "Main effect Sobol' indices"
                                : size == 2 ? "Sobol' indices for pairwise interactions"
                                            : "Sobol' indices for " + std::to_string(size) + "-way interactions";
        write_table(out, title, header, rows);
    }

    std::vector<std::vector<std::string>> rows;
    for (std::size_t u = 0; u < report.variables.size(); ++u) {
        std::vector<std::string> row = {report.variables[u], "T(" + report.variables[u] + ")"};
        for (const auto& o : report.outputs) row.push_back(format_fixed(o.totals[u], 7));
        rows.push_back(std::move(row));
    }
    write_table(out, "Total Sobol' indices", header, rows);

    std::vector<std::vector<std::string>> tail;
    std::vector<std::string> rem = {"higher-order remainder", "1 - sum(S)"};
    std::vector<std::string> var = {"total variance", "Var"};
    for (const auto& o : report.outputs) {
        rem.push_back(format_fixed(o.remainder, 7));
        var.push_back(format_sci(o.total_variance, 6));
    }
    tail.push_back(std::move(rem));
    tail.push_back(std::move(var));
    write_table(out, "Summary", header, tail);
}

} // namespace pcekit
