// spidersom: train a SOM on CSV data and draw its inter-variable spider plot.
//
// Exit status: 0 ok, 1 usage error, 2 data error, 3 I/O error.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "spidersom/spidersom.hpp"

namespace {

enum ExitCode : int { ok = 0, usage = 1, data = 2, io = 3 };

void parse_grid(const std::string& text, spidersom::TrainConfig& cfg) {
    const auto x = text.find_first_of("xX");
    auto dim = [&](std::string_view s) -> std::size_t {
        std::size_t v = 0;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc{} || p != s.data() + s.size() || v == 0)
            throw std::invalid_argument("--grid expects RxC with positive integers, got '" + text + "'");
        return v;
    };
    if (x == std::string::npos) throw std::invalid_argument("--grid expects RxC, got '" + text + "'");
    cfg.grid_rows = dim(std::string_view(text).substr(0, x));
    cfg.grid_cols = dim(std::string_view(text).substr(x + 1));
}

void report_train(const spidersom::PipelineConfig& cfg, const spidersom::TrainReport& r) {
    using spidersom::numfmt::fixed;
    std::cout << "train: rows=" << r.rows << " vars=" << r.variables << " grid=" << cfg.train.grid_rows << 'x'
              << cfg.train.grid_cols << " epochs=" << cfg.train.epochs
              << " mode=" << (cfg.train.mode == spidersom::TrainMode::online ? "online" : "batch")
              << " qe_initial=" << fixed(r.initial_qe, 6) << " qe_final=" << fixed(r.final_qe, 6)
              << " te_final=" << fixed(r.final_te, 6) << " -> " << cfg.codebook_path.string() << '\n';
}

void report_strengths(const spidersom::PipelineConfig& cfg, const spidersom::StrengthMatrix& sm) {
    std::cout << "strengths: vars=" << sm.size() << " quantile=" << spidersom::numfmt::fixed(cfg.quantile, 6)
              << " -> " << cfg.matrix_path.string() << '\n';
}

void report_plot(const spidersom::PipelineConfig& cfg, const spidersom::SpiderPlot& p) {
    std::cout << "plot: vars=" << p.layout.n << " segments=" << p.segments.size()
              << " threads=" << p.thread_total() << " -> " << cfg.svg_path.string() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Self-organizing map spider plots for tabular data"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Flat key=value file with flag defaults; command-line flags win");

    spidersom::PipelineConfig cfg;
    std::string input, grid = "10x10", mode = "online", label;
    std::string codebook, matrix, svg;
    std::size_t sample_k = 0;
    bool no_header = false;

    app.add_option("--input", input, "Input CSV file");
    app.add_flag("--no-header", no_header, "Input has no header row (columns become col_0..)");
    app.add_option("--label", label, "Label column to drop before training");
    app.add_option("--vars", cfg.vars, "Comma-separated variables to analyse, in plot order")->delimiter(',');
    app.add_option("--sample-k", sample_k, "Analyse k variables sampled uniformly (seeded)");
    app.add_option("--grid", grid, "Lattice size RxC")->capture_default_str();
    app.add_option("--epochs", cfg.train.epochs, "Training epochs")->capture_default_str();
    app.add_option("--alpha", cfg.train.alpha0, "Initial learning rate in (0,1]")->capture_default_str();
    app.add_option("--sigma", cfg.train.sigma0, "Initial neighbourhood radius (default: half the larger grid side)");
    app.add_option("--seed", cfg.train.seed, "Reproducibility seed")->capture_default_str();
    app.add_option("--mode", mode, "Training mode")->check(CLI::IsMember({"online", "batch"}))->capture_default_str();
    app.add_option("--workers", cfg.train.workers, "Worker threads for batch mode")->capture_default_str();
    app.add_option("--quantile", cfg.quantile, "Activation cut quantile")->capture_default_str();
    app.add_option("--threshold", cfg.style.threshold, "Segment strength threshold")->capture_default_str();
    app.add_option("--max-threads", cfg.style.max_threads, "Threads drawn for probability 1")->capture_default_str();
    app.add_option("--rings", cfg.style.ring_count, "Grid ring count")->capture_default_str();
    app.add_option("--out-codebook,--codebook", codebook, "Codebook file (written by train, read by strengths)");
    app.add_option("--out-matrix,--matrix", matrix, "Strength matrix file (written by strengths, read by plot)");
    app.add_option("--out-svg", svg, "SVG output file");

    auto* train_cmd = app.add_subcommand("train", "Train a codebook from --input")->fallthrough();
    auto* strengths_cmd = app.add_subcommand("strengths", "Codebook -> strength matrix")->fallthrough();
    auto* plot_cmd = app.add_subcommand("plot", "Strength matrix -> SVG")->fallthrough();
    auto* spider_cmd = app.add_subcommand("spider", "train, strengths and plot in one go")->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        std::cout << app.help();
        return ok;
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help();
        return usage;
    }

    try {
        parse_grid(grid, cfg.train);
        if (!app.count("--sigma"))
            cfg.train.sigma0 = static_cast<double>(std::max(cfg.train.grid_rows, cfg.train.grid_cols)) / 2.0;
        cfg.train.mode = mode == "batch" ? spidersom::TrainMode::batch : spidersom::TrainMode::online;
        cfg.input = input;
        cfg.has_header = !no_header;
        if (!label.empty()) cfg.label_column = label;
        if (app.count("--sample-k")) cfg.sample_k = sample_k;
        cfg.codebook_path = codebook;
        cfg.matrix_path = matrix;
        cfg.svg_path = svg;
        cfg.validate();

        const bool all = spider_cmd->parsed();
        if (all || train_cmd->parsed()) report_train(cfg, spidersom::run_train(cfg));
        if (all || strengths_cmd->parsed()) report_strengths(cfg, spidersom::run_strengths(cfg));
        if (all || plot_cmd->parsed()) report_plot(cfg, spidersom::run_plot(cfg));
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help();
        return usage;
    } catch (const spidersom::io_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return io;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return data;
    }
    return ok;
}
