#include <cstdlib>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "resilient/cli.hpp"

namespace {

using namespace resilient;
namespace fs = std::filesystem;

// Fresh scratch directory per test, removed afterwards.
class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir_ = fs::temp_directory_path() / (std::string("resilient_cli_") + info->name());
        fs::remove_all(dir_);
        fs::create_directories(dir_);
        unsetenv(cli::kOutputDirEnv);
    }
    void TearDown() override {
        unsetenv(cli::kOutputDirEnv);
        fs::remove_all(dir_);
    }

    fs::path write(const std::string& name, const std::string& text) const {
        const auto p = dir_ / name;
        fs::create_directories(p.parent_path());
        std::ofstream(p) << text;
        return p;
    }

    static std::string slurp(const fs::path& p) {
        std::ifstream in(p);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    fs::path dir_;
};

const char* kSyntheticSystem = R"({
    "name": "synthetic",
    "A": [[0, 0], [0, 0]],
    "Bc": [[1, 0], [0, 1]],
    "Buc": [[0.05], [0.025]],
    "drift_terms": [
        {"kind": "sin", "coeff": 0.05, "state_index": 0},
        {"kind": "sin", "coeff": 0.05, "state_index": 1}
    ],
    "Df": 0.05, "Dg": 0.0,
    "x0": [0.5, -0.3], "xtg": [0, 0]
})";

std::string run_config(const fs::path& out, const std::string& strategy, double epsilon = 0.01) {
    nlohmann::json j;
    j["system"] = "synthetic_system.json";
    j["t_f"] = 10.0;
    j["epsilon"] = epsilon;
    j["strategy"] = nlohmann::json::parse(strategy);
    j["steps_per_interval"] = 64;
    j["output_dir"] = out.string();
    return j.dump();
}

TEST_F(CliTest, MalformedJsonIsConfigError) {
    const auto path = write("bad.json", "{\"t_f\": 10, ");
    EXPECT_THROW(cli::load_config_file(path), ConfigError);
    EXPECT_THROW(cli::load_config_file(dir_ / "missing.json"), ConfigError);
}

TEST_F(CliTest, FieldValidation) {
    EXPECT_THROW(cli::config_from_json(nlohmann::json::parse(R"({"t_f": -1, "epsilon": 0.1})")), ConfigError);
    EXPECT_THROW(cli::config_from_json(nlohmann::json::parse(R"({"t_f": 1, "epsilon": 0})")), ConfigError);
    EXPECT_THROW(cli::config_from_json(nlohmann::json::parse(R"({"t_f": 1, "epsilon": 0.1, "n_bar": 51})")),
                 ConfigError);
    EXPECT_THROW(cli::config_from_json(nlohmann::json::parse(R"({"epsilon": 0.1})")), ConfigError);
    EXPECT_THROW(cli::config_from_json(nlohmann::json::parse("[1, 2]")), ConfigError);
    const auto c = cli::config_from_json(nlohmann::json::parse(R"({"t_f": 1, "epsilon": 0.1, "strategy": {"kind": "warp"}})"));
    EXPECT_THROW(cli::resolve(c), ConfigError);
}

TEST_F(CliTest, StrategyAliasesAndScalars) {
    const auto g = cli::strategy_from_json(nlohmann::json::parse(R"({"kind": "greedy_adversary"})"), 2, 0);
    EXPECT_TRUE(std::holds_alternative<strategy::Greedy>(g));
    const auto c = cli::strategy_from_json(nlohmann::json::parse(R"({"kind": "constant", "value": -0.5})"), 3, 0);
    EXPECT_EQ(std::get<strategy::Constant>(c).value, Vector::Constant(3, -0.5));
    const auto b = cli::strategy_from_json(nlohmann::json::parse(R"({"kind": "bang_bang"})"), 1, 42);
    EXPECT_EQ(std::get<strategy::BangBang>(b).seed, 42u);
    EXPECT_THROW(cli::strategy_from_json(nlohmann::json::parse(R"({"kind": "constant", "value": [1, 2]})"), 3, 0),
                 ConfigError);
}

TEST_F(CliTest, AdmireFeasibilityIsAdvisory) {
    cli::RunConfig c;
    c.t_f = 20.0;
    c.epsilon = 0.1;
    c.output_dir = (dir_ / "out").string();
    std::ostringstream log;
    const auto out = cli::cmd_feasibility(c, log);
    EXPECT_EQ(out.exit_code, cli::kAdvisory);
    EXPECT_NE(log.str().find("warning:"), std::string::npos);
    const auto j = nlohmann::json::parse(slurp(dir_ / "out" / "feasibility.json"));
    EXPECT_FALSE(j.at("conditions_hold").get<bool>());
}

TEST_F(CliTest, SyntheticFeasibilityAndSimulationSucceed) {
    write("synthetic_system.json", kSyntheticSystem);
    const auto cfg = write("run.json", run_config(dir_ / "out", R"({"kind": "greedy"})"));
    const auto config = cli::load_config_file(cfg);
    std::ostringstream log;
    EXPECT_EQ(cli::cmd_feasibility(config, log).exit_code, cli::kOk);
    const auto out = cli::cmd_simulate(config, log);
    EXPECT_EQ(out.exit_code, cli::kOk) << log.str();
    EXPECT_TRUE(out.diagnostics.clean());
    for (const char* f : {"trace.csv", "nodes.csv", "schedule.json", "feasibility.json", "summary.json"}) {
        EXPECT_TRUE(fs::exists(dir_ / "out" / f)) << f;
    }
    const auto summary = nlohmann::json::parse(slurp(dir_ / "out" / "summary.json"));
    EXPECT_EQ(summary.at("exit_code").get<int>(), 0);
    EXPECT_EQ(summary.at("n_bar").get<int>(), out.schedule.n_bar);
    const std::string header = slurp(dir_ / "out" / "trace.csv").substr(0, 24);
    EXPECT_EQ(header.rfind("t,x1,x2,uc1,uc2,uuc1", 0), 0u);
}

TEST_F(CliTest, CancellationConfigReachesTargetExactly) {
    const auto config = cli::config_from_json(nlohmann::json::parse(R"({
        "system": {"A": [[0, 0], [0, 0]], "Bc": [[2, 0, 1], [0, 1, 0]], "Buc": [[0.3], [-0.2]],
                   "Df": 0.0, "Dg": 0.0},
        "x0": [0.4, -0.6], "xtg": [0.1, 0.2], "t_f": 8, "epsilon": 0.1, "n_bar": 5,
        "strategy": {"kind": "cancellation_probe"}, "steps_per_interval": 32
    })"));
    std::ostringstream log;
    const auto out = cli::simulate(config, log);
    EXPECT_EQ(out.exit_code, cli::kOk);
    EXPECT_LE(out.trace.final_error, 1e-9);
}

TEST_F(CliTest, OverTightEpsilonIsCapError) {
    write("synthetic_system.json", kSyntheticSystem);
    const auto config = cli::config_from_json(
        nlohmann::json::parse(run_config(dir_ / "out", R"({"kind": "constant"})", 1e-40)), dir_);
    std::ostringstream log;
    try {
        cli::simulate(config, log);
        FAIL() << "expected CapError";
    } catch (const CapError& e) {
        EXPECT_NE(std::string(e.what()).find("epsilon"), std::string::npos);
    }
}

TEST_F(CliTest, TargetMissedExitCode) {
    // Terminal index 1 on ADMIRE cannot reach 1e-6.
    cli::RunConfig c = cli::admire_demo_config(1, "constant");
    c.n_bar_override = 1;
    c.epsilon = 1e-6;
    c.steps_per_interval = 64;
    std::ostringstream log;
    EXPECT_EQ(cli::simulate(c, log).exit_code, cli::kTargetMissed);
}

TEST_F(CliTest, DivergenceExitCode) {
    const auto config = cli::config_from_json(nlohmann::json::parse(R"({
        "system": {"A": [[4000]], "Bc": [[1]], "Buc": [[0]], "Df": 4000, "Dg": 0},
        "x0": [1], "xtg": [0], "t_f": 10, "epsilon": 0.1, "n_bar": 2, "steps_per_interval": 16
    })"));
    std::ostringstream log;
    const auto out = cli::simulate(config, log);
    EXPECT_EQ(out.exit_code, cli::kDiverged);
    EXPECT_TRUE(out.trace.diverged);
}

TEST_F(CliTest, SummaryConfigReproducesTraceBitwise) {
    write("synthetic_system.json", kSyntheticSystem);
    const auto cfg = write("run.json", run_config(dir_ / "first", R"({"kind": "bang_bang", "switch_period": 0.3, "seed": 5})"));
    std::ostringstream log;
    cli::cmd_simulate(cli::load_config_file(cfg), log);
    const auto summary = nlohmann::json::parse(slurp(dir_ / "first" / "summary.json"));
    auto again = cli::config_from_json(summary.at("config"), dir_);
    again.output_dir = (dir_ / "second").string();
    cli::cmd_simulate(again, log);
    EXPECT_EQ(slurp(dir_ / "first" / "trace.csv"), slurp(dir_ / "second" / "trace.csv"));
    EXPECT_FALSE(slurp(dir_ / "first" / "trace.csv").empty());
}

TEST_F(CliTest, OutputDirEnvOverride) {
    write("synthetic_system.json", kSyntheticSystem);
    const auto cfg = write("run.json", run_config(dir_ / "configured", R"({"kind": "constant", "value": 1})"));
    setenv(cli::kOutputDirEnv, (dir_ / "override").c_str(), 1);
    std::ostringstream log;
    cli::cmd_simulate(cli::load_config_file(cfg), log);
    EXPECT_TRUE(fs::exists(dir_ / "override" / "summary.json"));
    EXPECT_FALSE(fs::exists(dir_ / "configured"));
}

TEST_F(CliTest, BatchRunsEveryConfig) {
    write("systems/synthetic_system.json", kSyntheticSystem);
    auto make = [&](const std::string& strategy) {
        auto j = nlohmann::json::parse(run_config(dir_ / "batch_out", strategy));
        j["system"] = "../systems/synthetic_system.json";
        return j.dump();
    };
    write("runs/a.json", make(R"({"kind": "constant", "value": -1})"));
    write("runs/b.json", make(R"({"kind": "sinusoid", "amplitude": 1, "frequency": 0.2})"));
    write("runs/c.json", "{ not json");
    std::ostringstream log;
    const int code = cli::run_batch(dir_ / "runs", log);
    EXPECT_EQ(code, cli::kConfigError);
    EXPECT_TRUE(fs::exists(dir_ / "batch_out" / "a" / "summary.json"));
    EXPECT_TRUE(fs::exists(dir_ / "batch_out" / "b" / "summary.json"));
    EXPECT_NE(log.str().find("[c.json] exit 1"), std::string::npos);
    EXPECT_THROW(cli::run_batch(dir_ / "nope", log), ConfigError);
}

TEST_F(CliTest, DemoAdmireMatchesReferenceRun) {
    setenv(cli::kOutputDirEnv, (dir_ / "demo").c_str(), 1);
    std::ostringstream log;
    const auto out = cli::cmd_demo_admire(cli::kDemoSeed, "bang_bang", log);
    EXPECT_EQ(out.exit_code, cli::kOk);
    EXPECT_LE(out.trace.final_error, 0.1);
    EXPECT_LE(out.trace.constraint_max, 1.0);
    EXPECT_TRUE(out.diagnostics.constraint_violations.empty());
    const std::vector<double> expected{0, 10, 15, 17.5, 18.75, 19.375, 19.6875, 19.84375, 20};
    EXPECT_EQ(out.schedule.partition.boundaries(), expected);
    EXPECT_EQ(static_cast<int>(out.schedule.inputs.size()), 8);
    const auto schedule = nlohmann::json::parse(slurp(dir_ / "demo" / "schedule.json"));
    EXPECT_EQ(schedule.at("intervals").size(), 8u);
    EXPECT_EQ(schedule.at("boundaries").get<std::vector<double>>(), expected);
}

}  // namespace
