#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "error.hpp"
#include "ingest.hpp"
#include "numfmt.hpp"
#include "rng.hpp"

namespace spidersom {

/// Lattice position of a node.
struct GridPos {
    std::size_t row = 0;
    std::size_t col = 0;
};

/**
 * @brief Rectangular Kohonen lattice of weight vectors.
 *
 * Node j sits at (j / cols, j % cols). Weights are stored node-major, so
 * node j occupies [j*dim, (j+1)*dim).
 */
class Codebook {
public:
    Codebook() = default;

    Codebook(std::size_t grid_rows, std::size_t grid_cols, std::size_t dim)
        : rows_(grid_rows), cols_(grid_cols), dim_(dim), weights_(grid_rows * grid_cols * dim, 0.0) {
        if (grid_rows == 0 || grid_cols == 0 || dim == 0)
            throw std::invalid_argument("codebook dimensions must be positive");
    }

    Codebook(std::size_t grid_rows, std::size_t grid_cols, std::size_t dim, std::vector<double> weights)
        : Codebook(grid_rows, grid_cols, dim) {
        if (weights.size() != weights_.size())
            throw data_error("codebook expects " + std::to_string(weights_.size()) + " weights, got " +
                             std::to_string(weights.size()));
        for (double w : weights)
            if (!std::isfinite(w)) throw data_error("non-finite codebook weight");
        weights_ = std::move(weights);
    }

    std::size_t grid_rows() const { return rows_; }
    std::size_t grid_cols() const { return cols_; }
    std::size_t dim() const { return dim_; }
    std::size_t size() const { return rows_ * cols_; }

    std::span<const double> node(std::size_t j) const { return {weights_.data() + j * dim_, dim_}; }
    std::span<double> node(std::size_t j) { return {weights_.data() + j * dim_, dim_}; }

    GridPos position(std::size_t j) const { return {j / cols_, j % cols_}; }

    const std::vector<double>& weights() const { return weights_; }

    friend bool operator==(const Codebook&, const Codebook&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::size_t dim_ = 0;
    std::vector<double> weights_;
};

enum class TrainMode { online, batch };

struct TrainConfig {
    std::size_t grid_rows = 10;
    std::size_t grid_cols = 10;
    std::size_t epochs = 100;
    double alpha0 = 0.5;
    double sigma0 = 5.0;
    std::uint64_t seed = 0;
    TrainMode mode = TrainMode::online;
    std::size_t workers = 1;

    void validate() const {
        if (grid_rows == 0 || grid_cols == 0) throw std::invalid_argument("grid dimensions must be positive");
        if (!(alpha0 > 0.0 && alpha0 <= 1.0)) throw std::invalid_argument("alpha0 must lie in (0,1]");
        if (!(sigma0 > 0.0) || !std::isfinite(sigma0)) throw std::invalid_argument("sigma0 must be positive");
        if (workers == 0) throw std::invalid_argument("workers must be at least 1");
    }
};

/// Lower bound on the decayed neighbourhood radius.
inline constexpr double sigma_floor = 0.1;

/// Squared Euclidean distance, the competition criterion.
inline double discriminant(std::span<const double> x, std::span<const double> w) {
    if (x.size() != w.size())
        throw data_error("discriminant: length mismatch (" + std::to_string(x.size()) + " vs " +
                         std::to_string(w.size()) + ")");
    double sum = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - w[i];
        sum += d * d;
    }
    return sum;
}

namespace detail {

inline void check_dim(const Codebook& cb, std::size_t n, const char* what) {
    if (n != cb.dim())
        throw data_error(std::string(what) + ": input has " + std::to_string(n) +
                         " components, codebook has " + std::to_string(cb.dim()));
}

// Unchecked BMU scan; strict < keeps the lowest index on ties.
inline std::size_t bmu_scan(const Codebook& cb, std::span<const double> x, double* best_dist = nullptr) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < cb.size(); ++j) {
        const auto w = cb.node(j);
        double d = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double diff = x[i] - w[i];
            d += diff * diff;
        }
        if (d < best_d) {
            best_d = d;
            best = j;
        }
    }
    if (best_dist) *best_dist = best_d;
    return best;
}

/// Runs fn(begin, end) over [0, count) split into contiguous chunks, one per worker.
template <typename Fn>
void parallel_chunks(std::size_t count, std::size_t workers, Fn&& fn) {
    workers = std::max<std::size_t>(1, std::min(workers, count));
    if (workers == 1) {
        fn(std::size_t{0}, count);
        return;
    }
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (count + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(count, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&fn, begin, end] { fn(begin, end); });
    }
}

/// Gaussian kernel indexed by |Δrow|, |Δcol|; matches neighborhood_weight bit for bit.
class LatticeKernel {
public:
    LatticeKernel(const Codebook& cb, double sigma) : cols_(cb.grid_cols()), table_(cb.grid_rows() * cb.grid_cols()) {
        const double denom = 2.0 * sigma * sigma;
        for (std::size_t dr = 0; dr < cb.grid_rows(); ++dr)
            for (std::size_t dc = 0; dc < cb.grid_cols(); ++dc)
                table_[dr * cols_ + dc] = std::exp(-static_cast<double>(dr * dr + dc * dc) / denom);
    }

    double operator()(GridPos a, GridPos b) const {
        const std::size_t dr = a.row > b.row ? a.row - b.row : b.row - a.row;
        const std::size_t dc = a.col > b.col ? a.col - b.col : b.col - a.col;
        return table_[dr * cols_ + dc];
    }

private:
    std::size_t cols_;
    std::vector<double> table_;
};

}  // namespace detail

/// Index of the node closest to x; ties go to the lowest row-major index.
inline std::size_t best_matching_unit(const Codebook& cb, std::span<const double> x) {
    detail::check_dim(cb, x.size(), "best_matching_unit");
    return detail::bmu_scan(cb, x);
}

/**
 * Cooperation kernel exp(-d^2 / (2 sigma^2)), d being the Euclidean
 * distance between the two nodes' lattice coordinates.
 */
inline double neighborhood_weight(std::size_t winner, std::size_t j, double sigma, const Codebook& cb) {
    if (winner >= cb.size() || j >= cb.size()) throw std::out_of_range("neighborhood_weight: node index out of range");
    if (!(sigma > 0.0)) throw std::invalid_argument("neighborhood_weight: sigma must be positive");
    const auto a = cb.position(winner);
    const auto b = cb.position(j);
    const std::size_t dr = a.row > b.row ? a.row - b.row : b.row - a.row;
    const std::size_t dc = a.col > b.col ? a.col - b.col : b.col - a.col;
    return std::exp(-static_cast<double>(dr * dr + dc * dc) / (2.0 * sigma * sigma));
}

/// Random codebook, each component uniform within its column's data range.
inline Codebook init_codebook(const DataMatrix& m, const TrainConfig& cfg) {
    if (m.empty()) throw data_error("init_codebook: empty data matrix");
    cfg.validate();
    const std::size_t dim = m.cols();
    std::vector<double> lo(dim), hi(dim);
    for (std::size_t c = 0; c < dim; ++c) lo[c] = hi[c] = m.at(0, c);
    for (std::size_t r = 1; r < m.rows(); ++r)
        for (std::size_t c = 0; c < dim; ++c) {
            lo[c] = std::min(lo[c], m.at(r, c));
            hi[c] = std::max(hi[c], m.at(r, c));
        }

    Codebook cb(cfg.grid_rows, cfg.grid_cols, dim);
    Rng rng(derive_seed(cfg.seed, SeedStream::init));
    for (std::size_t j = 0; j < cb.size(); ++j) {
        auto w = cb.node(j);
        for (std::size_t c = 0; c < dim; ++c) w[c] = lo[c] + (hi[c] - lo[c]) * rng.uniform();
    }
    return cb;
}

/// BMU of every row. The split across workers never changes the result.
inline std::vector<std::size_t> map_samples(const Codebook& cb, const DataMatrix& m, std::size_t workers = 1) {
    if (workers == 0) throw std::invalid_argument("map_samples: workers must be at least 1");
    if (!m.empty()) detail::check_dim(cb, m.cols(), "map_samples");
    std::vector<std::size_t> out(m.rows());
    detail::parallel_chunks(m.rows(), workers, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) out[i] = detail::bmu_scan(cb, m.row(i));
    });
    return out;
}

/// Learning rate and neighbourhood radius at epoch t of T.
struct EpochSchedule {
    double alpha;
    double sigma;
};

inline EpochSchedule schedule_at(const TrainConfig& cfg, std::size_t epoch) {
    const double decay = std::exp(-static_cast<double>(epoch) / static_cast<double>(cfg.epochs));
    return {cfg.alpha0 * decay, std::max(sigma_floor, cfg.sigma0 * decay)};
}

namespace detail {

inline void train_online_epoch(Codebook& cb, const DataMatrix& m, const EpochSchedule& s,
                               std::vector<std::size_t>& order, Rng& rng) {
    for (std::size_t i = order.size(); i > 1; --i)
        std::swap(order[i - 1], order[static_cast<std::size_t>(rng.below(i))]);

    const LatticeKernel kernel(cb, s.sigma);
    for (std::size_t idx : order) {
        const auto x = m.row(idx);
        const auto win = cb.position(bmu_scan(cb, x));
        for (std::size_t j = 0; j < cb.size(); ++j) {
            const double rate = s.alpha * kernel(win, cb.position(j));
            if (rate == 0.0) continue;
            auto w = cb.node(j);
            for (std::size_t c = 0; c < w.size(); ++c) w[c] += rate * (x[c] - w[c]);
        }
    }
}

inline void train_batch_epoch(Codebook& cb, const DataMatrix& m, const EpochSchedule& s, std::size_t workers) {
    const auto bmus = map_samples(cb, m, workers);
    std::vector<GridPos> winners(bmus.size());
    for (std::size_t i = 0; i < bmus.size(); ++i) winners[i] = cb.position(bmus[i]);

    const LatticeKernel kernel(cb, s.sigma);
    const std::size_t dim = cb.dim();
    // Each node sums its contributions in ascending sample order, so the
    // node partition across workers cannot affect the bits.
    parallel_chunks(cb.size(), workers, [&](std::size_t begin, std::size_t end) {
        std::vector<double> num(dim);
        for (std::size_t j = begin; j < end; ++j) {
            std::fill(num.begin(), num.end(), 0.0);
            double den = 0.0;
            const auto pos = cb.position(j);
            for (std::size_t i = 0; i < winners.size(); ++i) {
                const double h = kernel(winners[i], pos);
                if (h == 0.0) continue;
                const auto x = m.row(i);
                for (std::size_t c = 0; c < dim; ++c) num[c] += h * x[c];
                den += h;
            }
            if (den > 0.0) {
                auto w = cb.node(j);
                for (std::size_t c = 0; c < dim; ++c) w[c] = num[c] / den;
            }
        }
    });
}

}  // namespace detail

/**
 * @brief Self-organizing training.
 *
 * Online mode visits the samples in a fresh seeded permutation each epoch and
 * pulls every node toward the sample by alpha(t)*h. Batch mode replaces each
 * node by the kernel-weighted mean of all samples; nodes with no weight keep
 * their vectors. Output depends only on (m, cfg), never on cfg.workers.
 *
 * refine() continues from a given codebook; train() starts from
 * init_codebook(m, cfg).
 */
inline Codebook refine(Codebook cb, const DataMatrix& m, const TrainConfig& cfg) {
    cfg.validate();
    if (m.empty()) throw data_error("train: empty data matrix");
    detail::check_dim(cb, m.cols(), "train");
    if (cfg.epochs == 0) return cb;

    std::vector<std::size_t> order(m.rows());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffle(derive_seed(cfg.seed, SeedStream::shuffle));

    for (std::size_t t = 0; t < cfg.epochs; ++t) {
        const auto s = schedule_at(cfg, t);
        if (cfg.mode == TrainMode::online)
            detail::train_online_epoch(cb, m, s, order, shuffle);
        else
            detail::train_batch_epoch(cb, m, s, cfg.workers);
    }
    return cb;
}

inline Codebook train(const DataMatrix& m, const TrainConfig& cfg) { return refine(init_codebook(m, cfg), m, cfg); }

/// Mean over samples of the squared distance to the BMU.
inline double quantization_error(const Codebook& cb, const DataMatrix& m) {
    if (m.empty()) throw data_error("quantization_error: empty data matrix");
    detail::check_dim(cb, m.cols(), "quantization_error");
    double sum = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i) {
        double d = 0.0;
        detail::bmu_scan(cb, m.row(i), &d);
        sum += d;
    }
    return sum / static_cast<double>(m.rows());
}

/// Best and second-best node for x, both with lowest-index tie-breaking.
inline std::pair<std::size_t, std::size_t> best_two_units(const Codebook& cb, std::span<const double> x) {
    if (cb.size() < 2) throw std::invalid_argument("best_two_units: codebook needs at least 2 nodes");
    detail::check_dim(cb, x.size(), "best_two_units");
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::size_t first = 0, second = 0;
    double d1 = inf, d2 = inf;
    for (std::size_t j = 0; j < cb.size(); ++j) {
        const double d = discriminant(x, cb.node(j));
        if (d < d1) {
            second = first;
            d2 = d1;
            first = j;
            d1 = d;
        } else if (d < d2) {
            second = j;
            d2 = d;
        }
    }
    return {first, second};
}

/// Fraction of samples whose two best nodes are not 4-neighbours on the lattice.
inline double topographic_error(const Codebook& cb, const DataMatrix& m) {
    if (cb.size() < 2) throw std::invalid_argument("topographic_error: codebook needs at least 2 nodes");
    if (m.empty()) throw data_error("topographic_error: empty data matrix");
    detail::check_dim(cb, m.cols(), "topographic_error");
    std::size_t errors = 0;
    for (std::size_t i = 0; i < m.rows(); ++i) {
        const auto [a, b] = best_two_units(cb, m.row(i));
        const auto pa = cb.position(a);
        const auto pb = cb.position(b);
        const std::size_t dr = pa.row > pb.row ? pa.row - pb.row : pb.row - pa.row;
        const std::size_t dc = pa.col > pb.col ? pa.col - pb.col : pb.col - pa.col;
        if (dr + dc != 1) ++errors;
    }
    return static_cast<double>(errors) / static_cast<double>(m.rows());
}

// --- persistence -----------------------------------------------------------
// "som <rows> <cols> <dim>" then one node per line, 17 significant digits.

inline void write_codebook(std::ostream& out, const Codebook& cb) {
    out << "som " << cb.grid_rows() << ' ' << cb.grid_cols() << ' ' << cb.dim() << '\n';
    for (std::size_t j = 0; j < cb.size(); ++j) {
        const auto w = cb.node(j);
        for (std::size_t c = 0; c < w.size(); ++c) {
            if (c) out << ' ';
            out << numfmt::exact(w[c]);
        }
        out << '\n';
    }
}

inline Codebook read_codebook(std::istream& in, std::string_view source = "<codebook>") {
    const std::string where(source);
    std::string line;
    if (!std::getline(in, line)) throw data_error(where + ": missing 'som' header line");
    std::istringstream header(line);
    std::string magic;
    long long rows = 0, cols = 0, dim = 0;
    std::string extra;
    if (!(header >> magic >> rows >> cols >> dim) || magic != "som" || (header >> extra) || rows <= 0 ||
        cols <= 0 || dim <= 0)
        throw data_error(where + ": malformed header '" + line + "'");

    const auto nodes = static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
    std::vector<double> weights;
    weights.reserve(nodes * static_cast<std::size_t>(dim));
    for (std::size_t j = 0; j < nodes; ++j) {
        if (!std::getline(in, line))
            throw data_error(where + ": expected " + std::to_string(nodes) + " node lines, got " + std::to_string(j));
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::size_t count = 0;
        std::string_view rest(line);
        while (!rest.empty()) {
            const auto sp = rest.find(' ');
            const auto tok = rest.substr(0, sp);
            rest = sp == std::string_view::npos ? std::string_view{} : rest.substr(sp + 1);
            if (tok.empty()) continue;
            const auto v = numfmt::parse_double(tok);
            if (!v) throw data_error(where + ": bad number '" + std::string(tok) + "' on node line " + std::to_string(j + 1));
            weights.push_back(*v);
            ++count;
        }
        if (count != static_cast<std::size_t>(dim))
            throw data_error(where + ": node line " + std::to_string(j + 1) + " has " + std::to_string(count) +
                             " values, expected " + std::to_string(dim));
    }
    return Codebook(static_cast<std::size_t>(rows), static_cast<std::size_t>(cols), static_cast<std::size_t>(dim),
                    std::move(weights));
}

inline void save_codebook(const std::filesystem::path& path, const Codebook& cb) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot write codebook '" + path.string() + "'");
    write_codebook(out, cb);
    if (!out) throw io_error("failed writing codebook '" + path.string() + "'");
}

inline Codebook load_codebook(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open codebook '" + path.string() + "'");
    return read_codebook(in, path.string());
}

}  // namespace spidersom
