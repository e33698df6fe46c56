#include <gtest/gtest.h>

#include <sys/wait.h>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "spidersom/spidersom.hpp"

using namespace spidersom;
namespace fs = std::filesystem;

namespace {

const std::string spambase = SPIDERSOM_DATA_DIR "/spambase.csv";

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir_ = fs::temp_directory_path() / (std::string("spidersom_") + info->test_suite_name() + "_" + info->name());
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override {
        if (!HasFailure()) fs::remove_all(dir_);
    }

    fs::path path(const std::string& name) const { return dir_ / name; }

    // Runs the CLI and returns its exit status; stdout and stderr land in out_/err_.
    int run(const std::string& args) {
        const std::string cmd = std::string("\"") + SPIDERSOM_CLI + "\" " + args + " >\"" + path("stdout").string() +
                                "\" 2>\"" + path("stderr").string() + "\"";
        const int status = std::system(cmd.c_str());
        out_ = slurp(path("stdout"));
        err_ = slurp(path("stderr"));
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    }

    // Small spambase run: four words, 4x4 lattice, 10 epochs.
    std::string small_args(const std::string& tag, std::uint64_t seed = 42) const {
        return "--input \"" + spambase + "\" --label spam --vars order,credit,free,money --grid 4x4 --epochs 10 --seed " +
               std::to_string(seed) + " --out-codebook \"" + path(tag + ".som").string() + "\" --out-matrix \"" +
               path(tag + ".csv").string() + "\" --out-svg \"" + path(tag + ".svg").string() + "\"";
    }

    fs::path dir_;
    std::string out_, err_;
};

}  // namespace

TEST_F(CliTest, UnknownFlagIsUsageError) {
    EXPECT_EQ(run("spider --definitely-not-a-flag"), 1);
    EXPECT_NE(err_.find("Usage"), std::string::npos) << err_;
}

TEST_F(CliTest, MissingSubcommandIsUsageError) { EXPECT_EQ(run("--input x.csv"), 1); }

TEST_F(CliTest, BadOptionValuesAreUsageErrors) {
    EXPECT_EQ(run("spider " + small_args("a") + " --grid 4by4"), 1);
    EXPECT_EQ(run("spider " + small_args("a") + " --threshold 1.5"), 1);
    EXPECT_EQ(run("spider " + small_args("a") + " --mode sideways"), 1);
    EXPECT_EQ(run("spider " + small_args("a") + " --sample-k 5"), 1);  // exclusive with --vars
    EXPECT_EQ(run("train --input \"" + spambase + "\""), 1);           // no codebook path
}

TEST_F(CliTest, HelpExitsZero) {
    EXPECT_EQ(run("--help"), 0);
    EXPECT_NE(out_.find("spider"), std::string::npos);
}

TEST_F(CliTest, MissingInputIsIoError) {
    EXPECT_EQ(run("train --input \"" + path("nope.csv").string() + "\" --out-codebook \"" + path("c.som").string() + "\""),
              3);
    EXPECT_NE(err_.find("nope.csv"), std::string::npos) << err_;
}

TEST_F(CliTest, MalformedDataIsDataError) {
    std::ofstream(path("bad.csv")) << "a,b,c\n1,2,3\n4,oops,6\n";
    EXPECT_EQ(run("train --input \"" + path("bad.csv").string() + "\" --out-codebook \"" + path("c.som").string() + "\""),
              2);
    EXPECT_NE(err_.find("oops"), std::string::npos) << err_;
    EXPECT_NE(err_.find("row 2"), std::string::npos) << err_;
    EXPECT_FALSE(fs::exists(path("c.som")));
}

TEST_F(CliTest, UnknownVariableIsDataError) {
    EXPECT_EQ(run("train --input \"" + spambase + "\" --vars order,nonsense,free --out-codebook \"" +
                  path("c.som").string() + "\""),
              2);
}

TEST_F(CliTest, TooFewVariablesToPlotIsDataError) {
    EXPECT_EQ(run("spider --input \"" + spambase + "\" --label spam --vars order,credit --grid 3x3 --epochs 2 " +
                  "--out-codebook \"" + path("c.som").string() + "\" --out-matrix \"" + path("m.csv").string() +
                  "\" --out-svg \"" + path("p.svg").string() + "\""),
              2);
}

TEST_F(CliTest, SpiderWritesThreeArtifacts) {
    const auto before = fs::last_write_time(spambase);
    const auto size = fs::file_size(spambase);
    ASSERT_EQ(run("spider " + small_args("a")), 0) << err_;
    for (const char* f : {"a.som", "a.csv", "a.svg"}) EXPECT_GT(fs::file_size(path(f)), 0u) << f;
    EXPECT_NE(out_.find("train: rows=4597 vars=4 grid=4x4 epochs=10 mode=online"), std::string::npos) << out_;
    EXPECT_NE(out_.find("strengths: vars=4"), std::string::npos) << out_;
    EXPECT_NE(out_.find("plot: vars=4"), std::string::npos) << out_;

    // inputs are read-only to the pipeline
    EXPECT_EQ(fs::last_write_time(spambase), before);
    EXPECT_EQ(fs::file_size(spambase), size);

    const auto sm = load_strength_matrix(path("a.csv"));
    EXPECT_EQ(sm.names(), (std::vector<std::string>{"order", "credit", "free", "money"}));
    std::istringstream svg(slurp(path("a.svg")));
    boost::property_tree::ptree tree;
    EXPECT_NO_THROW(boost::property_tree::read_xml(svg, tree));
}

TEST_F(CliTest, RepeatedRunsAreBitIdentical) {
    ASSERT_EQ(run("spider " + small_args("a")), 0) << err_;
    ASSERT_EQ(run("spider " + small_args("b")), 0) << err_;
    EXPECT_EQ(slurp(path("a.som")), slurp(path("b.som")));
    EXPECT_EQ(slurp(path("a.csv")), slurp(path("b.csv")));
    EXPECT_EQ(slurp(path("a.svg")), slurp(path("b.svg")));

    ASSERT_EQ(run("spider " + small_args("c", 43)), 0) << err_;
    EXPECT_NE(slurp(path("a.som")), slurp(path("c.som")));
}

TEST_F(CliTest, StagewiseEqualsSpider) {
    ASSERT_EQ(run("spider " + small_args("all")), 0) << err_;
    ASSERT_EQ(run("train " + small_args("step")), 0) << err_;
    ASSERT_EQ(run("strengths " + small_args("step")), 0) << err_;
    ASSERT_EQ(run("plot " + small_args("step")), 0) << err_;
    for (const char* ext : {".som", ".csv", ".svg"})
        EXPECT_EQ(slurp(path(std::string("all") + ext)), slurp(path(std::string("step") + ext))) << ext;
}

TEST_F(CliTest, StrengthsWithoutInputUsesVarsForNames) {
    ASSERT_EQ(run("train " + small_args("a")), 0) << err_;
    ASSERT_EQ(run("strengths --vars order,credit,free,money --codebook \"" + path("a.som").string() +
                  "\" --out-matrix \"" + path("b.csv").string() + "\""),
              0)
        << err_;
    ASSERT_EQ(run("strengths " + small_args("a")), 0) << err_;
    EXPECT_EQ(slurp(path("a.csv")), slurp(path("b.csv")));
}

TEST_F(CliTest, MatchesInMemoryPipeline) {
    ASSERT_EQ(run("spider " + small_args("a")), 0) << err_;

    PipelineConfig cfg;
    cfg.input = spambase;
    cfg.label_column = "spam";
    cfg.vars = {"order", "credit", "free", "money"};
    cfg.train.grid_rows = cfg.train.grid_cols = 4;
    cfg.train.sigma0 = 2.0;
    cfg.train.epochs = 10;
    cfg.train.seed = 42;

    const auto report = train_stage(prepare_data(cfg), cfg.train);
    std::ostringstream cb;
    write_codebook(cb, report.codebook);
    EXPECT_EQ(cb.str(), slurp(path("a.som")));

    const auto sm = strengths_stage(report.codebook, cfg.vars, cfg.quantile);
    std::stringstream csv;
    write_strength_matrix(csv, sm);
    EXPECT_EQ(csv.str(), slurp(path("a.csv")));

    // the plot stage draws from the persisted matrix, so go through the same text
    EXPECT_EQ(render_spider(read_strength_matrix(csv), cfg.plot_style()).svg, slurp(path("a.svg")));
}

TEST_F(CliTest, ConfigFileSuppliesDefaults) {
    ASSERT_EQ(run("spider " + small_args("flags")), 0) << err_;
    std::ofstream(path("run.ini")) << "input=\"" << spambase << "\"\n"
                                   << "label=spam\n"
                                   << "vars=[\"order\",\"credit\",\"free\",\"money\"]\n"
                                   << "grid=4x4\nepochs=10\nseed=42\n"
                                   << "out-codebook=\"" << path("cfg.som").string() << "\"\n"
                                   << "out-matrix=\"" << path("cfg.csv").string() << "\"\n"
                                   << "out-svg=\"" << path("cfg.svg").string() << "\"\n";
    ASSERT_EQ(run("spider --config \"" + path("run.ini").string() + "\""), 0) << err_;
    for (const char* ext : {".som", ".csv", ".svg"})
        EXPECT_EQ(slurp(path(std::string("flags") + ext)), slurp(path(std::string("cfg") + ext))) << ext;

    // command line overrides the file
    ASSERT_EQ(run("spider --config \"" + path("run.ini").string() + "\" --seed 43"), 0) << err_;
    EXPECT_NE(slurp(path("flags.som")), slurp(path("cfg.som")));
}

TEST_F(CliTest, BatchModeAndWorkersAgree) {
    ASSERT_EQ(run("train " + small_args("w1") + " --mode batch --workers 1"), 0) << err_;
    ASSERT_EQ(run("train " + small_args("w4") + " --mode batch --workers 4"), 0) << err_;
    EXPECT_EQ(slurp(path("w1.som")), slurp(path("w4.som")));
    EXPECT_NE(out_.find("mode=batch"), std::string::npos);
}

TEST_F(CliTest, SampledVariablesRender) {
    ASSERT_EQ(run("spider --input \"" + spambase + "\" --label spam --sample-k 6 --grid 4x4 --epochs 5 --seed 3 " +
                  "--out-codebook \"" + path("c.som").string() + "\" --out-matrix \"" + path("m.csv").string() +
                  "\" --out-svg \"" + path("p.svg").string() + "\""),
              0)
        << err_;
    EXPECT_EQ(load_strength_matrix(path("m.csv")).size(), 6u);
    EXPECT_EQ(load_codebook(path("c.som")).dim(), 6u);
}

TEST_F(CliTest, ReproducesGoldenFiles) {
    // same pinned config as the acceptance suite; sigma defaults to 2 on a 4x4 grid
    ASSERT_EQ(run("spider " + small_args("golden")), 0) << err_;
    for (const char* ext : {".som", ".csv", ".svg"})
        EXPECT_EQ(slurp(path(std::string("golden") + ext)), slurp(fs::path(SPIDERSOM_GOLDEN_DIR) / (std::string("golden") + ext)))
            << ext;
}
