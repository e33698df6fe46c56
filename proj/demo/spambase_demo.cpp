// Trains a map on four spam-vocabulary words and prints how strongly each
// pair co-activates on the codebook, then writes the spider plot.
//
//   spambase_demo [path/to/spambase.csv] [out.svg]

#include <filesystem>
#include <fstream>
#include <iostream>

#include "spidersom/spidersom.hpp"

int main(int argc, char** argv) {
    namespace ss = spidersom;
    const std::filesystem::path csv = argc > 1 ? argv[1] : SPIDERSOM_DATA_DIR "/spambase.csv";
    const std::filesystem::path svg = argc > 2 ? argv[2] : "spambase_spider.svg";

    try {
        const auto raw = ss::load_matrix(csv, /*has_header=*/true, std::string("spam"));
        const std::vector<std::string> words{"order", "credit", "free", "money"};
        const auto data = ss::normalize_minmax(ss::select_variables(raw, words));

        for (std::uint64_t seed = 1; seed <= 10; ++seed) {
            ss::TrainConfig cfg;
            cfg.seed = seed;
            const auto cb = ss::train(data, cfg);
            const auto sm = ss::strengths_stage(cb, data.names(), 0.5);
            std::cout << "seed " << seed << "  qe=" << ss::numfmt::fixed(ss::quantization_error(cb, data), 6)
                      << "  jaccard(credit,money)=" << ss::numfmt::fixed(sm.symmetric(1, 3), 3)
                      << "  jaccard(free,order)=" << ss::numfmt::fixed(sm.symmetric(2, 0), 3) << '\n';
            if (seed == 1) {
                ss::PlotStyle style;
                style.jitter_seed = ss::derive_seed(seed, ss::SeedStream::jitter);
                std::ofstream(svg, std::ios::binary) << ss::render_spider(sm, style).svg;
            }
        }
        std::cout << "wrote " << svg.string() << '\n';
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
