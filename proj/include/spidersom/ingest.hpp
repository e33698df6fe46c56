#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <variant>
#include <vector>

#include "error.hpp"
#include "numfmt.hpp"
#include "rng.hpp"

namespace spidersom {

enum class Normalization { raw, minmax };

/**
 * @brief Numeric sample table: one row per sample, one column per named variable.
 *
 * Values are stored row-major. Every entry is finite; under minmax
 * normalization every entry lies in [0,1].
 */
class DataMatrix {
public:
    DataMatrix() = default;

    DataMatrix(std::vector<std::string> names, std::vector<double> values,
               Normalization normalization = Normalization::raw)
        : names_(std::move(names)), values_(std::move(values)), normalization_(normalization) {
        validate();
    }

    /// Builds from nested rows; convenient in tests.
    static DataMatrix from_rows(std::vector<std::string> names,
                                const std::vector<std::vector<double>>& rows,
                                Normalization normalization = Normalization::raw) {
        std::vector<double> flat;
        flat.reserve(rows.size() * names.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].size() != names.size())
                throw data_error("row " + std::to_string(i + 1) + " has " +
                                 std::to_string(rows[i].size()) + " entries, expected " +
                                 std::to_string(names.size()));
            flat.insert(flat.end(), rows[i].begin(), rows[i].end());
        }
        return DataMatrix(std::move(names), std::move(flat), normalization);
    }

    std::size_t rows() const { return names_.empty() ? 0 : values_.size() / names_.size(); }
    std::size_t cols() const { return names_.size(); }
    bool empty() const { return values_.empty(); }

    std::span<const double> row(std::size_t i) const {
        return {values_.data() + i * cols(), cols()};
    }
    double at(std::size_t r, std::size_t c) const { return values_[r * cols() + c]; }

    const std::vector<std::string>& names() const { return names_; }
    const std::vector<double>& values() const { return values_; }
    Normalization normalization() const { return normalization_; }

    std::optional<std::size_t> index_of(std::string_view name) const {
        const auto it = std::find(names_.begin(), names_.end(), name);
        if (it == names_.end()) return std::nullopt;
        return static_cast<std::size_t>(it - names_.begin());
    }

    std::vector<double> column(std::size_t c) const {
        std::vector<double> out(rows());
        for (std::size_t r = 0; r < rows(); ++r) out[r] = at(r, c);
        return out;
    }

    friend bool operator==(const DataMatrix&, const DataMatrix&) = default;

private:
    void validate() const {
        std::unordered_set<std::string_view> seen;
        for (const auto& n : names_) {
            if (n.empty()) throw data_error("variable names must be non-empty");
            if (!seen.insert(n).second) throw data_error("duplicate variable name '" + n + "'");
        }
        if (names_.empty()) {
            if (!values_.empty()) throw data_error("values given without any variables");
            return;
        }
        if (values_.size() % names_.size() != 0)
            throw data_error("value count is not a multiple of the variable count");
        for (double v : values_) {
            if (!std::isfinite(v)) throw data_error("non-finite value in data matrix");
            if (normalization_ == Normalization::minmax && (v < 0.0 || v > 1.0))
                throw data_error("normalized value outside [0,1]");
        }
    }

    std::vector<std::string> names_;
    std::vector<double> values_;
    Normalization normalization_ = Normalization::raw;
};

namespace detail {

inline std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.push_back(numfmt::trim(line.substr(start, comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

}  // namespace detail

/**
 * @brief Parses comma-separated numeric text.
 *
 * Blank lines and lines starting with '#' are skipped; CR before LF is
 * tolerated. Without a header, columns are named col_0..col_{n-1}. The
 * named label column, if any, is dropped. Rows are numbered from 1 in
 * error messages, counting data rows only.
 */
inline DataMatrix parse_matrix(std::istream& in, bool has_header,
                               const std::optional<std::string>& label_column = std::nullopt,
                               std::string_view source = "<input>") {
    std::vector<std::string> names;
    std::vector<double> values;
    std::optional<std::size_t> width;
    std::optional<std::size_t> label_index;
    std::size_t data_row = 0;
    bool header_pending = has_header;

    std::string line;
    std::size_t line_no = 0;
    const std::string where(source);
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto trimmed = numfmt::trim(line);
        if (trimmed.empty() || trimmed.front() == '#') continue;
        const auto fields = detail::split_fields(trimmed);

        if (header_pending) {
            header_pending = false;
            for (auto f : fields) names.emplace_back(f);
            width = names.size();
            continue;
        }
        if (!width) {
            width = fields.size();
            for (std::size_t c = 0; c < fields.size(); ++c) names.push_back("col_" + std::to_string(c));
        }
        ++data_row;
        if (fields.size() != *width)
            throw data_error(where + ": row " + std::to_string(data_row) + " (line " +
                             std::to_string(line_no) + ") has " + std::to_string(fields.size()) +
                             " fields, expected " + std::to_string(*width));
        for (std::size_t c = 0; c < fields.size(); ++c) {
            const auto v = numfmt::parse_double(fields[c]);
            if (!v || !std::isfinite(*v))
                throw data_error(where + ": non-numeric cell '" + std::string(fields[c]) + "' at row " +
                                 std::to_string(data_row) + ", column " + std::to_string(c + 1));
            values.push_back(*v);
        }
    }

    {
        std::unordered_set<std::string_view> seen;
        for (const auto& n : names)
            if (!seen.insert(n).second) throw data_error(where + ": duplicate header name '" + n + "'");
    }

    if (label_column) {
        const auto it = std::find(names.begin(), names.end(), *label_column);
        if (it == names.end()) throw data_error(where + ": label column '" + *label_column + "' not found");
        label_index = static_cast<std::size_t>(it - names.begin());
    }
    if (!label_index) return DataMatrix(std::move(names), std::move(values));

    const std::size_t n = names.size();
    std::vector<double> kept;
    kept.reserve(values.size() - values.size() / n);
    for (std::size_t i = 0; i < values.size(); ++i)
        if (i % n != *label_index) kept.push_back(values[i]);
    names.erase(names.begin() + static_cast<std::ptrdiff_t>(*label_index));
    return DataMatrix(std::move(names), std::move(kept));
}

/// Loads a CSV file as a raw (unnormalized) matrix.
inline DataMatrix load_matrix(const std::filesystem::path& path, bool has_header,
                              const std::optional<std::string>& label_column = std::nullopt) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open input file '" + path.string() + "'");
    return parse_matrix(in, has_header, label_column, path.string());
}

/// Per-column (x - min) / (max - min); constant columns map to 0.
inline DataMatrix normalize_minmax(const DataMatrix& m) {
    if (m.empty()) throw data_error("cannot normalize an empty matrix");
    const std::size_t n = m.cols();
    std::vector<double> lo(n), hi(n);
    for (std::size_t c = 0; c < n; ++c) lo[c] = hi[c] = m.at(0, c);
    for (std::size_t r = 1; r < m.rows(); ++r)
        for (std::size_t c = 0; c < n; ++c) {
            lo[c] = std::min(lo[c], m.at(r, c));
            hi[c] = std::max(hi[c], m.at(r, c));
        }
    std::vector<double> out(m.values().size());
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < n; ++c) {
            const double span = hi[c] - lo[c];
            out[r * n + c] = span > 0.0 ? (m.at(r, c) - lo[c]) / span : 0.0;
        }
    return DataMatrix(m.names(), std::move(out), Normalization::minmax);
}

/// Uniform sample of k variables without replacement.
struct SampleVariables {
    std::size_t k = 0;
    std::uint64_t seed = 0;
};

using VariableSelection = std::variant<std::vector<std::string>, SampleVariables>;

/**
 * Restricts the matrix to a subset of columns. An explicit name list also
 * fixes the column order; a sample keeps the original relative order.
 */
inline DataMatrix select_variables(const DataMatrix& m, const VariableSelection& selection) {
    std::vector<std::size_t> picked;
    if (const auto* names = std::get_if<std::vector<std::string>>(&selection)) {
        for (const auto& name : *names) {
            const auto idx = m.index_of(name);
            if (!idx) throw data_error("unknown variable '" + name + "'");
            picked.push_back(*idx);
        }
    } else {
        const auto& s = std::get<SampleVariables>(selection);
        if (s.k > m.cols())
            throw data_error("cannot sample " + std::to_string(s.k) + " of " +
                             std::to_string(m.cols()) + " variables");
        std::vector<std::size_t> order(m.cols());
        std::iota(order.begin(), order.end(), std::size_t{0});
        Rng rng(s.seed);
        // partial Fisher-Yates: the first k slots become the sample
        for (std::size_t i = 0; i < s.k; ++i) {
            const auto j = i + static_cast<std::size_t>(rng.below(order.size() - i));
            std::swap(order[i], order[j]);
        }
        picked.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(s.k));
        std::sort(picked.begin(), picked.end());
    }

    std::vector<std::string> names;
    for (auto c : picked) names.push_back(m.names()[c]);
    std::vector<double> values;
    values.reserve(m.rows() * picked.size());
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (auto c : picked) values.push_back(m.at(r, c));
    return DataMatrix(std::move(names), std::move(values), m.normalization());
}

}  // namespace spidersom
