#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "error.hpp"
#include "ingest.hpp"
#include "rng.hpp"
#include "som.hpp"
#include "spider.hpp"
#include "strength.hpp"

namespace spidersom {

/// Everything the end-to-end workflow needs; one seed drives every random stage.
struct PipelineConfig {
    std::filesystem::path input;
    bool has_header = true;
    std::optional<std::string> label_column;
    std::vector<std::string> vars;
    std::optional<std::size_t> sample_k;
    TrainConfig train;
    double quantile = 0.5;
    PlotStyle style;
    std::filesystem::path codebook_path;
    std::filesystem::path matrix_path;
    std::filesystem::path svg_path;

    void validate() const {
        train.validate();
        style.validate();
        if (!(quantile >= 0.0 && quantile <= 1.0)) throw std::invalid_argument("quantile must lie in [0,1]");
        if (!vars.empty() && sample_k) throw std::invalid_argument("--vars and --sample-k are mutually exclusive");
    }

    /// Style with the jitter stream derived from the shared seed.
    PlotStyle plot_style() const {
        PlotStyle s = style;
        s.jitter_seed = derive_seed(train.seed, SeedStream::jitter);
        return s;
    }
};

/// Load, select and min-max normalize the configured input.
inline DataMatrix prepare_data(const PipelineConfig& cfg) {
    if (cfg.input.empty()) throw std::invalid_argument("an input file is required (--input)");
    DataMatrix m = load_matrix(cfg.input, cfg.has_header, cfg.label_column);
    if (m.empty()) throw data_error(cfg.input.string() + ": no data rows");
    if (!cfg.vars.empty())
        m = select_variables(m, cfg.vars);
    else if (cfg.sample_k)
        m = select_variables(m, SampleVariables{*cfg.sample_k, derive_seed(cfg.train.seed, SeedStream::sampling)});
    return normalize_minmax(m);
}

struct TrainReport {
    std::size_t rows = 0;
    std::size_t variables = 0;
    double initial_qe = 0.0;
    double final_qe = 0.0;
    double final_te = 0.0;
    Codebook codebook;
};

inline TrainReport train_stage(const DataMatrix& data, const TrainConfig& cfg) {
    TrainReport r;
    r.rows = data.rows();
    r.variables = data.cols();
    r.initial_qe = quantization_error(init_codebook(data, cfg), data);
    r.codebook = train(data, cfg);
    r.final_qe = quantization_error(r.codebook, data);
    r.final_te = r.codebook.size() >= 2 ? topographic_error(r.codebook, data) : 0.0;
    return r;
}

inline StrengthMatrix strengths_stage(const Codebook& cb, const std::vector<std::string>& names, double quantile) {
    return build_strength_matrix(filter_codebook(cb, names, quantile));
}

struct SpiderPlot {
    SpiderLayout layout;
    std::vector<Segment> segments;
    std::vector<Thread> threads;
    std::string svg;

    std::size_t thread_total() const {
        std::size_t n = 0;
        for (const auto& t : threads) n += t.count;
        return n;
    }
};

/// Full render of a strength matrix; radius 1 is the maximum of min-max normalized data.
inline SpiderPlot render_spider(const StrengthMatrix& sm, const PlotStyle& style, double radius = 1.0) {
    style.validate();
    if (sm.size() < 3)
        throw data_error("a spider plot needs at least 3 variables, the matrix has " + std::to_string(sm.size()));
    SpiderPlot p;
    p.layout = polygon_layout(sm.size(), radius, style);
    p.segments = build_segments(p.layout, sm, style);
    p.threads = build_threads(p.layout, sm, style);
    p.svg = render_svg(p.layout, p.segments, p.threads, style, sm.names());
    return p;
}

// --- file-backed stages ----------------------------------------------------

namespace detail {

inline void require_path(const std::filesystem::path& p, const char* flag) {
    if (p.empty()) throw std::invalid_argument(std::string("missing required path ") + flag);
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw io_error("failed writing '" + path.string() + "'");
}

}  // namespace detail

/// Variable names for a codebook: from the configured input when given, else col_0..col_{D-1}.
inline std::vector<std::string> codebook_names(const PipelineConfig& cfg, std::size_t dim) {
    std::vector<std::string> names;
    if (!cfg.input.empty()) {
        names = prepare_data(cfg).names();
    } else if (!cfg.vars.empty()) {
        names = cfg.vars;
    } else {
        for (std::size_t i = 0; i < dim; ++i) names.push_back("col_" + std::to_string(i));
    }
    if (names.size() != dim)
        throw data_error("codebook has dimension " + std::to_string(dim) + " but " + std::to_string(names.size()) +
                         " variables were selected");
    return names;
}

inline TrainReport run_train(const PipelineConfig& cfg) {
    cfg.validate();
    detail::require_path(cfg.codebook_path, "--out-codebook");
    auto report = train_stage(prepare_data(cfg), cfg.train);
    save_codebook(cfg.codebook_path, report.codebook);
    return report;
}

inline StrengthMatrix run_strengths(const PipelineConfig& cfg) {
    cfg.validate();
    detail::require_path(cfg.codebook_path, "--out-codebook");
    detail::require_path(cfg.matrix_path, "--out-matrix");
    const Codebook cb = load_codebook(cfg.codebook_path);
    auto sm = strengths_stage(cb, codebook_names(cfg, cb.dim()), cfg.quantile);
    save_strength_matrix(cfg.matrix_path, sm);
    return sm;
}

inline SpiderPlot run_plot(const PipelineConfig& cfg) {
    cfg.validate();
    detail::require_path(cfg.matrix_path, "--out-matrix");
    detail::require_path(cfg.svg_path, "--out-svg");
    auto plot = render_spider(load_strength_matrix(cfg.matrix_path), cfg.plot_style());
    detail::write_text(cfg.svg_path, plot.svg);
    return plot;
}

}  // namespace spidersom
