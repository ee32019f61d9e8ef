#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <spdlog/spdlog.h>

#include "lie_reach/cli.hpp"

using namespace lie_reach;
namespace fs = std::filesystem;

namespace {

class CliTest : public ::testing::Test {
protected:
    void SetUp() override
    {
        spdlog::set_level(spdlog::level::off);
        const auto *info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir_ = fs::temp_directory_path() / (std::string("lie_reach_cli_") + info->name());
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string path(const std::string &name) const { return (dir_ / name).string(); }

    std::string write(const std::string &name, const std::string &text) const
    {
        std::ofstream(path(name)) << text;
        return path(name);
    }

    static std::vector<std::string> lines(const std::string &file)
    {
        std::ifstream in(file);
        std::vector<std::string> out;
        for (std::string l; std::getline(in, l);) out.push_back(l);
        return out;
    }

    fs::path dir_;
};

const std::string kConfigs = LIE_REACH_CONFIG_DIR;

} // namespace

TEST_F(CliTest, RunTorus)
{
    EXPECT_EQ(cli::cmd_run(kConfigs + "/torus.json", path("t.jsonl")), cli::kOk);
    const auto l = lines(path("t.jsonl"));
    ASSERT_EQ(l.size(), 301u);
    const auto last = io::json::parse(l.back());
    EXPECT_EQ(last["n"], 300);
    EXPECT_DOUBLE_EQ(last["t"].get<double>(), 3.0);
}

TEST_F(CliTest, RunZeroSteps)
{
    const auto cfg = write("zero.json", R"({"system": "so3", "T": 0})");
    EXPECT_EQ(cli::cmd_run(cfg, path("z.jsonl")), cli::kOk);
    const auto l = lines(path("z.jsonl"));
    ASSERT_EQ(l.size(), 1u);
    const auto rec = io::json::parse(l[0]);
    EXPECT_EQ(rec["theta_lower"], io::json::array({-0.01, -0.01, -0.01}));
    EXPECT_EQ(rec["recentered"], false);

    EXPECT_EQ(cli::cmd_validate(path("z.jsonl"), cfg, ValidationOptions{20, 2, 10, 1, 1e-6, 10}, path("r.json")),
              cli::kOk);
}

TEST_F(CliTest, EngineAbortWritesTruncatedTube)
{
    const auto cfg = write("spin.json", R"({"system": "so3", "control": {"kind": "constant", "value": [3, 0, 0],
                                            "disturbance": 0.5}, "recenter": "never", "T": 2})");
    EXPECT_EQ(cli::cmd_run(cfg, path("s.jsonl")), cli::kEngineAbort);
    const auto l = lines(path("s.jsonl"));
    ASSERT_GE(l.size(), 2u);
    const auto tail = io::json::parse(l.back());
    EXPECT_EQ(tail["truncated"], true);
    EXPECT_EQ(tail["error_kind"], "InjectivityExceeded");
    EXPECT_EQ(tail["failed_step"].get<std::size_t>(), l.size() - 2);
}

TEST_F(CliTest, ValidateTorus)
{
    ASSERT_EQ(cli::cmd_run(kConfigs + "/torus.json", path("t.jsonl")), cli::kOk);
    ValidationOptions opts;
    opts.uniform_samples = 50;
    EXPECT_EQ(cli::cmd_validate(path("t.jsonl"), kConfigs + "/torus.json", opts, path("r.json")), cli::kOk);
    std::ifstream in(path("r.json"));
    const auto rep = io::json::parse(in);
    EXPECT_EQ(rep["passed"], true);
    EXPECT_EQ(rep["samples"], 50);
    EXPECT_EQ(rep["checkpoints"].size(), 10u);
}

TEST_F(CliTest, ValidateReportsViolation)
{
    ASSERT_EQ(cli::cmd_run(kConfigs + "/torus.json", path("t.jsonl")), cli::kOk);
    // Shrink every box after the first record.
    auto l = lines(path("t.jsonl"));
    std::ofstream out(path("bad.jsonl"));
    for (std::size_t i = 0; i < l.size(); ++i) {
        auto rec = io::json::parse(l[i]);
        if (i > 0) {
            for (auto &v : rec["theta_lower"]) v = 0.5 * v.get<double>();
            for (auto &v : rec["theta_upper"]) v = 0.5 * v.get<double>();
        }
        out << rec.dump() << '\n';
    }
    out.close();
    ValidationOptions opts;
    opts.uniform_samples = 50;
    EXPECT_EQ(cli::cmd_validate(path("bad.jsonl"), kConfigs + "/torus.json", opts, path("r.json")),
              cli::kContainmentViolation);
    std::ifstream in(path("r.json"));
    const auto rep = io::json::parse(in);
    EXPECT_EQ(rep["passed"], false);
    EXPECT_EQ(rep["first_violation"]["n"], 1);
}

TEST_F(CliTest, UsageErrors)
{
    const auto bad = write("bad.json", R"({"system": "torus", "omega1": 5})");
    EXPECT_EQ(cli::cmd_run(bad, path("x.jsonl")), cli::kUsage);
    EXPECT_EQ(cli::cmd_run(path("missing.json"), path("x.jsonl")), cli::kUsage);
    EXPECT_EQ(cli::cmd_validate(path("missing.jsonl"), kConfigs + "/torus.json", {}, path("r.json")), cli::kUsage);

    ASSERT_EQ(cli::cmd_run(kConfigs + "/torus.json", path("t.jsonl")), cli::kOk);
    EXPECT_EQ(cli::cmd_validate(path("t.jsonl"), kConfigs + "/so3.json", {}, path("r.json")), cli::kUsage);
}

TEST_F(CliTest, Bench)
{
    std::ostringstream out;
    EXPECT_EQ(cli::cmd_bench(kConfigs + "/torus.json", 3, out), cli::kOk);
    EXPECT_NE(out.str().find("mean"), std::string::npos);
    std::ostringstream none;
    EXPECT_EQ(cli::cmd_bench(kConfigs + "/torus.json", 2, none), cli::kUsage);

    const auto s = cli::bench_experiment(io::load_config(kConfigs + "/torus.json"), 5);
    EXPECT_EQ(s.repeats, 5);
    EXPECT_GT(s.mean, 0.0);
    EXPECT_LE(s.min, s.mean);
    EXPECT_GE(s.max, s.mean);
    EXPECT_FALSE(s.truncated);
}

TEST(CliLog, LevelFromEnv)
{
    setenv("REACH_LOG", "debug", 1);
    EXPECT_EQ(cli::log_level_from_env(), spdlog::level::debug);
    setenv("REACH_LOG", "error", 1);
    EXPECT_EQ(cli::log_level_from_env(), spdlog::level::err);
    unsetenv("REACH_LOG");
    EXPECT_EQ(cli::log_level_from_env(), spdlog::level::info);
}
