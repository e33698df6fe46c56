#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "error.hpp"
#include "ingest.hpp"
#include "numfmt.hpp"
#include "som.hpp"

namespace spidersom {

/**
 * @brief Binarized codebook: which nodes are "active" for each variable.
 *
 * active[v][j] is true when node j's weight for variable v exceeds the
 * variable's cut value thresholds[v].
 */
struct ActivationTable {
    std::vector<std::string> variable_names;
    std::vector<std::vector<bool>> active;
    std::size_t total_nodes = 0;
    std::vector<double> thresholds;

    std::size_t variables() const { return variable_names.size(); }

    std::size_t active_count(std::size_t v) const {
        return static_cast<std::size_t>(std::count(active[v].begin(), active[v].end(), true));
    }

    /// Builds a table directly from active node lists; used for synthetic inputs.
    static ActivationTable from_sets(std::vector<std::string> names, std::size_t total_nodes,
                                     const std::vector<std::vector<std::size_t>>& sets) {
        if (names.size() != sets.size()) throw std::invalid_argument("one active set per variable required");
        ActivationTable t{std::move(names), {}, total_nodes, std::vector<double>(sets.size(), 0.0)};
        for (const auto& s : sets) {
            std::vector<bool> bits(total_nodes, false);
            for (auto j : s) {
                if (j >= total_nodes) throw std::out_of_range("active node index out of range");
                bits[j] = true;
            }
            t.active.push_back(std::move(bits));
        }
        return t;
    }
};

/// Linear-interpolated quantile at position q*(N-1) of the sorted values.
inline double quantile_of(std::vector<double> values, double q) {
    if (values.empty()) throw std::invalid_argument("quantile of an empty set");
    if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("quantile must lie in [0,1]");
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const double frac = pos - static_cast<double>(lo);
    if (lo + 1 >= values.size() || frac == 0.0) return values[lo];
    return values[lo] + frac * (values[lo + 1] - values[lo]);
}

/**
 * Per-variable cut at the given quantile of that variable's codebook
 * weights (the median by default); a node is active when strictly above it.
 */
inline ActivationTable filter_codebook(const Codebook& cb, const std::vector<std::string>& names,
                                       double quantile = 0.5) {
    if (names.size() != cb.dim())
        throw data_error("filter_codebook: " + std::to_string(names.size()) + " names for a codebook of dimension " +
                         std::to_string(cb.dim()));
    if (cb.size() == 0) throw data_error("filter_codebook: empty codebook");

    ActivationTable t;
    t.variable_names = names;
    t.total_nodes = cb.size();
    for (std::size_t v = 0; v < cb.dim(); ++v) {
        std::vector<double> column(cb.size());
        for (std::size_t j = 0; j < cb.size(); ++j) column[j] = cb.node(j)[v];
        const double cut = quantile_of(column, quantile);
        std::vector<bool> bits(cb.size());
        for (std::size_t j = 0; j < cb.size(); ++j) bits[j] = column[j] > cut;
        t.thresholds.push_back(cut);
        t.active.push_back(std::move(bits));
    }
    return t;
}

namespace detail {

struct PairCounts {
    std::size_t a = 0, b = 0, both = 0, either = 0;
};

inline PairCounts count_pair(const ActivationTable& t, std::size_t a, std::size_t b) {
    if (a >= t.variables() || b >= t.variables()) throw std::out_of_range("variable index out of range");
    PairCounts c;
    for (std::size_t j = 0; j < t.total_nodes; ++j) {
        const bool x = t.active[a][j];
        const bool y = t.active[b][j];
        c.a += x;
        c.b += y;
        c.both += x && y;
        c.either += x || y;
    }
    return c;
}

}  // namespace detail

/// P(b active | a active) = |A∩B| / |A|, or 0 when A is empty.
inline double pair_conditional(const ActivationTable& t, std::size_t a, std::size_t b) {
    const auto c = detail::count_pair(t, a, b);
    return c.a == 0 ? 0.0 : static_cast<double>(c.both) / static_cast<double>(c.a);
}

/// Jaccard |A∩B| / |A∪B|, or 0 when both are empty.
inline double pair_symmetric(const ActivationTable& t, std::size_t a, std::size_t b) {
    const auto c = detail::count_pair(t, a, b);
    return c.either == 0 ? 0.0 : static_cast<double>(c.both) / static_cast<double>(c.either);
}

/**
 * @brief Pairwise strengths between variables.
 *
 * conditional(a,b) drives the directed threads, symmetric(a,b) the
 * segments, frequency(v) the segment colouring.
 */
class StrengthMatrix {
public:
    StrengthMatrix() = default;

    StrengthMatrix(std::vector<std::string> names, std::vector<double> frequency, std::vector<double> conditional,
                   std::vector<double> symmetric)
        : names_(std::move(names)),
          frequency_(std::move(frequency)),
          conditional_(std::move(conditional)),
          symmetric_(std::move(symmetric)) {
        const std::size_t n = names_.size();
        if (frequency_.size() != n || conditional_.size() != n * n || symmetric_.size() != n * n)
            throw data_error("strength matrix blocks do not match the variable count");
        auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
        if (!std::all_of(frequency_.begin(), frequency_.end(), in_unit) ||
            !std::all_of(conditional_.begin(), conditional_.end(), in_unit) ||
            !std::all_of(symmetric_.begin(), symmetric_.end(), in_unit))
            throw data_error("strength values must lie in [0,1]");
    }

    std::size_t size() const { return names_.size(); }
    const std::vector<std::string>& names() const { return names_; }

    double frequency(std::size_t v) const { return frequency_.at(v); }
    double conditional(std::size_t a, std::size_t b) const { return conditional_.at(a * size() + b); }
    double symmetric(std::size_t a, std::size_t b) const { return symmetric_.at(a * size() + b); }

    const std::vector<double>& frequencies() const { return frequency_; }
    const std::vector<double>& conditional_values() const { return conditional_; }
    const std::vector<double>& symmetric_values() const { return symmetric_; }

    friend bool operator==(const StrengthMatrix&, const StrengthMatrix&) = default;

private:
    std::vector<std::string> names_;
    std::vector<double> frequency_;
    std::vector<double> conditional_;
    std::vector<double> symmetric_;
};

inline StrengthMatrix build_strength_matrix(const ActivationTable& t) {
    const std::size_t n = t.variables();
    if (n == 0) throw data_error("build_strength_matrix: no variables");
    if (t.active.size() != n) throw data_error("build_strength_matrix: active set count mismatch");
    for (const auto& bits : t.active)
        if (bits.size() != t.total_nodes) throw data_error("build_strength_matrix: active set size mismatch");

    std::vector<double> freq(n), cond(n * n), sym(n * n);
    for (std::size_t a = 0; a < n; ++a) {
        freq[a] = t.total_nodes == 0 ? 0.0
                                     : static_cast<double>(t.active_count(a)) / static_cast<double>(t.total_nodes);
        for (std::size_t b = 0; b < n; ++b) {
            cond[a * n + b] = pair_conditional(t, a, b);
            sym[a * n + b] = b < a ? sym[b * n + a] : pair_symmetric(t, a, b);
        }
    }
    return StrengthMatrix(t.variable_names, std::move(freq), std::move(cond), std::move(sym));
}

// --- CSV export ------------------------------------------------------------
// Three blocks separated by blank lines, values with 6 decimals:
//   variable,frequency        conditional,<names>        symmetric,<names>
//   <name>,<f>                <name>,<row of n>          <name>,<row of n>

inline void write_strength_matrix(std::ostream& out, const StrengthMatrix& sm) {
    const auto& names = sm.names();
    const std::size_t n = sm.size();
    out << "variable,frequency\n";
    for (std::size_t v = 0; v < n; ++v) out << names[v] << ',' << numfmt::fixed(sm.frequency(v), 6) << '\n';

    auto square = [&](const char* title, auto get) {
        out << '\n' << title;
        for (const auto& name : names) out << ',' << name;
        out << '\n';
        for (std::size_t a = 0; a < n; ++a) {
            out << names[a];
            for (std::size_t b = 0; b < n; ++b) out << ',' << numfmt::fixed(get(a, b), 6);
            out << '\n';
        }
    };
    square("conditional", [&](std::size_t a, std::size_t b) { return sm.conditional(a, b); });
    square("symmetric", [&](std::size_t a, std::size_t b) { return sm.symmetric(a, b); });
}

inline StrengthMatrix read_strength_matrix(std::istream& in, std::string_view source = "<matrix>") {
    const std::string where(source);
    std::vector<std::vector<std::vector<std::string_view>>> blocks;
    std::vector<std::string> lines;
    {
        std::string line;
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            lines.push_back(std::move(line));
        }
    }
    blocks.emplace_back();
    for (const auto& line : lines) {
        if (numfmt::trim(line).empty()) {
            if (!blocks.back().empty()) blocks.emplace_back();
            continue;
        }
        blocks.back().push_back(detail::split_fields(line));
    }
    if (blocks.back().empty()) blocks.pop_back();
    if (blocks.size() != 3) throw data_error(where + ": expected 3 blocks, found " + std::to_string(blocks.size()));

    auto number = [&](std::string_view tok) {
        const auto v = numfmt::parse_double(tok);
        if (!v) throw data_error(where + ": bad number '" + std::string(tok) + "'");
        return *v;
    };

    const auto& fb = blocks[0];
    if (fb.front().size() != 2 || fb.front()[0] != "variable" || fb.front()[1] != "frequency")
        throw data_error(where + ": first block must start with 'variable,frequency'");
    std::vector<std::string> names;
    std::vector<double> freq;
    for (std::size_t i = 1; i < fb.size(); ++i) {
        if (fb[i].size() != 2) throw data_error(where + ": frequency rows need 2 fields");
        names.emplace_back(fb[i][0]);
        freq.push_back(number(fb[i][1]));
    }
    const std::size_t n = names.size();

    auto square = [&](const std::vector<std::vector<std::string_view>>& block, std::string_view title) {
        if (block.size() != n + 1 || block.front().size() != n + 1 || block.front()[0] != title)
            throw data_error(where + ": malformed '" + std::string(title) + "' block");
        for (std::size_t i = 0; i < n; ++i)
            if (block.front()[i + 1] != names[i] || block[i + 1][0] != names[i])
                throw data_error(where + ": variable names in '" + std::string(title) + "' block do not match");
        std::vector<double> out;
        out.reserve(n * n);
        for (std::size_t a = 0; a < n; ++a) {
            if (block[a + 1].size() != n + 1) throw data_error(where + ": ragged '" + std::string(title) + "' row");
            for (std::size_t b = 0; b < n; ++b) out.push_back(number(block[a + 1][b + 1]));
        }
        return out;
    };
    auto cond = square(blocks[1], "conditional");
    auto sym = square(blocks[2], "symmetric");
    return StrengthMatrix(std::move(names), std::move(freq), std::move(cond), std::move(sym));
}

inline void save_strength_matrix(const std::filesystem::path& path, const StrengthMatrix& sm) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot write strength matrix '" + path.string() + "'");
    write_strength_matrix(out, sm);
    if (!out) throw io_error("failed writing strength matrix '" + path.string() + "'");
}

inline StrengthMatrix load_strength_matrix(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open strength matrix '" + path.string() + "'");
    return read_strength_matrix(in, path.string());
}

}  // namespace spidersom
