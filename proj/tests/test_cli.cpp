#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "csfbench/cli.hpp"
#include "csfbench/io.hpp"

namespace fs = std::filesystem;
using csfbench::cli::dispatch;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = dispatch(args, out, err);
    return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("csfbench-cli-" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string path(const std::string& rel) const { return (dir_ / rel).string(); }

    std::string small_config() const {
        const std::string p = path("run.json");
        std::ofstream(p) << R"({"schema": "csfbench-run-v1", "seed": 3,
            "families": [{"family": "csf", "n_windows": 1200, "calibration_n": 1000},
                         {"family": "random", "n_windows": 800}],
            "mlp": {"epochs": 3}, "svm": {"epochs": 3}, "baseline_trials": 20})";
        return p;
    }

    fs::path dir_;
};

std::vector<std::string> listing(const fs::path& root) {
    std::vector<std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(root)) out.push_back(fs::relative(e.path(), root).string());
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace

TEST_F(CliTest, GenerateWritesDatasetAndRule) {
    const auto r = run({"generate", "--family", "csf", "--n", "2000", "--seed", "42", "--out-dir", path("a")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(fs::exists(path("a/dataset.jsonl")));
    EXPECT_TRUE(fs::exists(path("a/rule.json")));
    EXPECT_EQ(csfbench::read_dataset(fs::path(path("a/dataset.jsonl"))).size(), 2000u);
    EXPECT_TRUE(r.out.empty());
}

TEST_F(CliTest, SeedChangesOutput) {
    ASSERT_EQ(run({"generate", "--family", "random", "--n", "300", "--seed", "1", "--out-dir", path("a")}).code, 0);
    ASSERT_EQ(run({"generate", "--family", "random", "--n", "300", "--seed", "1", "--out-dir", path("b")}).code, 0);
    ASSERT_EQ(run({"generate", "--family", "random", "--n", "300", "--seed", "2", "--out-dir", path("c")}).code, 0);
    const auto a = csfbench::read_text(path("a/dataset.jsonl"));
    EXPECT_EQ(a, csfbench::read_text(path("b/dataset.jsonl")));
    EXPECT_NE(a, csfbench::read_text(path("c/dataset.jsonl")));
}

TEST_F(CliTest, UnknownFlagIsUsageError) {
    const auto r = run({"generate", "--family", "csf", "--bogus", "1"});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("--family"), std::string::npos) << r.err;
}

TEST_F(CliTest, MissingSubcommandIsUsageError) {
    EXPECT_EQ(run({}).code, 1);
    EXPECT_EQ(run({"frobnicate"}).code, 1);
    EXPECT_EQ(run({"generate", "--family", "weird"}).code, 1);
    EXPECT_EQ(run({"evaluate", "--dataset", "x.jsonl"}).code, 1);
}

TEST_F(CliTest, HelpSucceeds) {
    const auto r = run({"--help"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("generate"), std::string::npos);
}

TEST_F(CliTest, MissingConfigIsRuntimeError) {
    const auto r = run({"run", "--config", path("missing.json"), "--out-dir", path("o")});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("not found"), std::string::npos) << r.err;
}

TEST_F(CliTest, BadDataIsRuntimeError) {
    std::ofstream(path("bad.jsonl")) << "{\"schema\":\"csfbench-v9\"}\n";
    const auto r = run({"train", "--model", "nb", "--dataset", path("bad.jsonl"), "--out-dir", path("o")});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("schema"), std::string::npos) << r.err;
}

TEST_F(CliTest, TrainEvaluatePipeline) {
    ASSERT_EQ(run({"generate", "--family", "csf", "--n", "1500", "--calibration-n", "1000", "--out-dir", path("g"),
                   "--quiet"}).code, 0);
    for (const std::string model : {"smcsf", "nb", "svm", "mlp"}) {
        const auto t = run({"--config", small_config(), "train", "--model", model, "--dataset", path("g/dataset.jsonl"),
                            "--out-dir", path("t")});
        ASSERT_EQ(t.code, 0) << t.err;
        ASSERT_TRUE(fs::exists(path("t/model-" + model + ".json")));
        const auto e = run({"evaluate", "--dataset", path("g/dataset.jsonl"), "--split", path("t/split.json"),
                            "--model", path("t/model-" + model + ".json"), "--oracle", path("g/rule.json"),
                            "--out-dir", path("e-" + model)});
        ASSERT_EQ(e.code, 0) << e.err;
        const auto reports = csfbench::reports_from_json(csfbench::read_text(path("e-" + model + "/report.json")));
        ASSERT_EQ(reports.size(), 3u);
        for (const auto& rep : reports) {
            EXPECT_EQ(rep.n_test, 450u);
            EXPECT_TRUE(rep.oracle_precision);
        }
    }
}

TEST_F(CliTest, EvaluateExternalPredictions) {
    ASSERT_EQ(run({"generate", "--family", "random", "--n", "500", "--out-dir", path("g")}).code, 0);
    ASSERT_EQ(run({"train", "--model", "nb", "--dataset", path("g/dataset.jsonl"), "--out-dir", path("t")}).code, 0);
    const auto split = csfbench::split_from_json(csfbench::read_text(path("t/split.json")));
    std::ofstream out(path("zoo.jsonl"));
    out << "{\"schema\":\"pred-v1\",\"model\":\"random-forest\"}\n";
    for (std::size_t i = 0; i < split.test.size(); ++i) {
        out << "{\"id\":\"" << split.test[i] << "\",\"score\":" << (i % 7) * 0.1 << ",\"selected\":0}\n";
    }
    out.close();
    const auto e = run({"evaluate", "--dataset", path("g/dataset.jsonl"), "--split", path("t/split.json"),
                        "--predictions", path("zoo.jsonl"), "--out-dir", path("e")});
    ASSERT_EQ(e.code, 0) << e.err;
    const auto reports = csfbench::reports_from_json(csfbench::read_text(path("e/report.json")));
    ASSERT_EQ(reports.size(), 2u);
    for (const auto& rep : reports) EXPECT_EQ(rep.n_selected, 30u);
}

TEST_F(CliTest, IngestAndAcf) {
    const std::string csv = (fs::path(CSFBENCH_DATA_DIR) / "goog_daily.csv").string();
    const auto i = run({"ingest", "--csv", csv, "--out-dir", path("i")});
    ASSERT_EQ(i.code, 0) << i.err;
    EXPECT_GT(csfbench::read_dataset(fs::path(path("i/dataset.jsonl"))).size(), 480u);
    const auto a = run({"acf", "--csv", csv, "--max-lag", "10", "--out-dir", path("a")});
    ASSERT_EQ(a.code, 0) << a.err;
    const auto text = csfbench::read_text(path("a/acf.csv"));
    EXPECT_EQ(text.rfind("lag,acf\n0,1\n", 0), 0u) << text.substr(0, 40);
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 12);
}

TEST_F(CliTest, RunIsDeterministicAndConfined) {
    const std::string config = small_config();
    const fs::path cwd = fs::current_path();
    fs::create_directories(path("cwd"));
    fs::current_path(path("cwd"));
    const auto a = run({"run", "--config", config, "--out-dir", "one", "--quiet"});
    const auto b = run({"run", "--config", config, "--out-dir", "two", "--quiet"});
    fs::current_path(cwd);
    ASSERT_EQ(a.code, 0) << a.err;
    ASSERT_EQ(b.code, 0) << b.err;
    EXPECT_TRUE(a.err.empty());
    EXPECT_EQ(listing(path("cwd")).front(), "one");
    const auto files = listing(path("cwd/one"));
    EXPECT_EQ(files, listing(path("cwd/two")));
    for (const auto& f : files) {
        if (fs::is_regular_file(path("cwd/one/" + f))) {
            EXPECT_EQ(csfbench::read_text(path("cwd/one/" + f)), csfbench::read_text(path("cwd/two/" + f))) << f;
        }
    }
    for (const auto& f : listing(path("cwd"))) {
        EXPECT_TRUE(f.rfind("one", 0) == 0 || f.rfind("two", 0) == 0) << f;
    }
}

TEST_F(CliTest, SeedOverridesConfig) {
    const std::string config = small_config();
    ASSERT_EQ(run({"run", "--config", config, "--out-dir", path("a"), "--quiet"}).code, 0);
    ASSERT_EQ(run({"run", "--config", config, "--seed", "4", "--out-dir", path("b"), "--quiet"}).code, 0);
    EXPECT_NE(csfbench::read_text(path("a/csf/dataset.jsonl")), csfbench::read_text(path("b/csf/dataset.jsonl")));
    EXPECT_NE(csfbench::read_text(path("b/config.json")).find("\"seed\": 4"), std::string::npos);
}

TEST_F(CliTest, RunWithFolds) {
    const std::string config = small_config();
    const auto r = run({"run", "--config", config, "--folds", "3", "--out-dir", path("k"), "--quiet"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(fs::exists(path("k/csf/split-fold2.json")));
    EXPECT_FALSE(fs::exists(path("k/csf/split.json")));
    EXPECT_NE(csfbench::read_text(path("k/config.json")).find("\"folds\": 3"), std::string::npos);
    EXPECT_EQ(run({"run", "--config", config, "--folds", "0", "--out-dir", path("z")}).code, 1);
}
