#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "mlgc/cli.hpp"
#include "mlgc/io.hpp"
#include "temp_dir.hpp"

namespace {

using testing_support::TempDir;

const std::string kConfig = std::string(MLGC_CONFIG_DIR) + "/standard.json";
const std::string kGenSpec = std::string(MLGC_CONFIG_DIR) + "/standard_gen.json";

int run(const std::vector<std::string>& args, std::string* err_text = nullptr) {
    std::ostringstream out, err;
    const int code = mlgc::cli::run(args, out, err);
    if (err_text) *err_text = err.str();
    return code;
}

void write_file(const std::string& path, const std::string& text) { std::ofstream(path) << text; }

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

TEST(Cli, RefineOnEmptyCandidatesWritesEmptyOutput) {
    TempDir dir("cli_empty");
    write_file(dir / "c.jsonl", "");
    mlgc::MetricModel m;
    m.feature_dim = 6;
    m.weights.assign(6, 0.0);
    m.standardize_mean.assign(6, 0.0);
    m.standardize_std.assign(6, 1.0);
    mlgc::io::write_model(m, dir / "m.json");
    EXPECT_EQ(run({"refine", "--candidates", dir / "c.jsonl", "--model", dir / "m.json", "--config", kConfig, "--out",
                   dir / "r.jsonl"}),
              0);
    EXPECT_TRUE(std::filesystem::exists(dir / "r.jsonl"));
    EXPECT_TRUE(read_file(dir / "r.jsonl").empty());
}

TEST(Cli, TrainWithoutUsablePairsIsInputError) {
    TempDir dir("cli_train");
    write_file(dir / "c.jsonl",
               R"({"image_id":"a","image_w":10,"image_h":10,"candidates":[{"x":0,"y":0,"w":1,"h":1,"score":0.5,"features":[1]}]})"
               "\n");
    std::string err;
    EXPECT_EQ(run({"train", "--candidates", dir / "c.jsonl", "--config", kConfig, "--model-out", dir / "m.json"}, &err),
              1);
    EXPECT_FALSE(err.empty());
}

TEST(Cli, UnknownFlagAndMissingSubcommandAreInputErrors) {
    std::string err;
    EXPECT_EQ(run({"refine", "--bogus"}, &err), 1);
    EXPECT_NE(err.find("Usage"), std::string::npos) << err;
    EXPECT_EQ(run({}), 1);
}

TEST(Cli, MissingInputFileIsInputError) {
    TempDir dir("cli_missing");
    std::string err;
    EXPECT_EQ(run({"train", "--candidates", dir / "nope.jsonl", "--config", kConfig, "--model-out", dir / "m.json"},
                  &err),
              1);
    EXPECT_NE(err.find("nope.jsonl"), std::string::npos) << err;
}

TEST(Cli, FullPipelineProducesReportWithDelta) {
    TempDir dir("cli_pipeline");
    ASSERT_EQ(run({"generate", "--spec", kGenSpec, "--out-dir", dir / "corpus"}), 0);
    for (const char* f : {"candidates.jsonl", "gt.jsonl", "labels.jsonl"})
        EXPECT_TRUE(std::filesystem::exists(dir.path() / "corpus" / f)) << f;
    const std::string cands = (dir.path() / "corpus" / "candidates.jsonl").string();
    ASSERT_EQ(run({"train", "--candidates", cands, "--config", kConfig, "--model-out", dir / "model.json",
                   "--dump-pairs", dir / "pairs.jsonl"}),
              0);
    ASSERT_EQ(run({"refine", "--candidates", cands, "--model", dir / "model.json", "--config", kConfig, "--out",
                   dir / "refined.jsonl", "--dump-eigvals", dir / "eig.jsonl", "--dump-matrices", dir / "mats",
                   "--jobs", "2"}),
              0);
    ASSERT_EQ(run({"eval", "--baseline", cands, "--refined", dir / "refined.jsonl", "--gt",
                   (dir.path() / "corpus" / "gt.jsonl").string(), "--config", kConfig, "--report", dir / "report.json",
                   "--pr-csv", dir / "pr.csv"}),
              0);
    const auto report = mlgc::io::read_json_file(dir / "report.json");
    EXPECT_TRUE(report.contains("delta"));
    EXPECT_TRUE(report.contains("ap_baseline"));
    EXPECT_TRUE(report.contains("ap_refined"));
    EXPECT_EQ(read_file(dir / "pr.csv").rfind("threshold,recall,precision\n", 0), 0u);
    EXPECT_TRUE(std::filesystem::exists(dir.path() / "mats" / "synth_0000.L.txt"));

    std::istringstream refined(read_file(dir / "refined.jsonl"));
    std::size_t lines = 0;
    for (std::string line; std::getline(refined, line);) {
        const auto j = mlgc::io::json::parse(line);
        EXPECT_TRUE(j.contains("image_id") && j.contains("detections") && j.contains("groups"));
        ++lines;
    }
    EXPECT_EQ(lines, 20u);
}

}  // namespace
