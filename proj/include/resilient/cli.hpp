#pragma once

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "resilient/controller.hpp"
#include "resilient/errors.hpp"
#include "resilient/feasibility.hpp"
#include "resilient/io.hpp"
#include "resilient/simulator.hpp"
#include "resilient/system.hpp"
#include "resilient/system_json.hpp"

namespace resilient::cli {

namespace fs = std::filesystem;

enum ExitCode : int {
    kOk = 0,
    kConfigError = 1,
    kAdvisory = 2,
    kTargetMissed = 3,
    kDiverged = 4,
};

inline constexpr const char* kOutputDirEnv = "RESILIENT_OUTPUT_DIR";

// Demo canard signal: fast seeded bang-bang.
inline constexpr double kDemoSwitchPeriod = 0.002;
inline constexpr std::uint64_t kDemoSeed = 7;
inline constexpr int kDemoStepsPerInterval = 1024;
inline constexpr double kDemoEpsilon = 0.1;

struct RunConfig {
    nlohmann::json system_spec = "admire";  // builtin name, path, or inline object
    std::optional<Vector> x0;
    std::optional<Vector> xtg;
    double t_f = 0.0;
    double epsilon = 0.0;
    std::optional<int> n_bar_override;
    nlohmann::json strategy_spec = {{"kind", "constant"}, {"value", 0.0}};
    int steps_per_interval = kDefaultStepsPerInterval;
    std::uint64_t seed = 0;
    std::string output_dir = "out";
    fs::path base_dir = ".";
};

/// A config resolved against its system: dimensions checked, defaults filled.
struct ResolvedRun {
    RunConfig config;
    ControlSystem system;
    Vector x0;
    Vector xtg;
    UncontrolledStrategy strategy;
};

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

inline RunConfig config_from_json(const nlohmann::json& j, const fs::path& base_dir = ".") {
    if (!j.is_object()) throw ConfigError("config: top level must be a JSON object");
    RunConfig c;
    c.base_dir = base_dir;
    if (j.contains("system")) c.system_spec = j.at("system");
    if (j.contains("x0")) c.x0 = detail::json_vector(j.at("x0"), "x0");
    if (j.contains("xtg")) c.xtg = detail::json_vector(j.at("xtg"), "xtg");
    c.t_f = detail::json_number(j, "t_f");
    c.epsilon = detail::json_number(j, "epsilon");
    if (!(c.t_f > 0.0)) throw ConfigError("config field 't_f': must be > 0");
    if (!(c.epsilon > 0.0)) throw ConfigError("config field 'epsilon': must be > 0");
    if (j.contains("n_bar") && !j.at("n_bar").is_null()) {
        if (!j.at("n_bar").is_number_integer()) throw ConfigError("config field 'n_bar': expected an integer");
        c.n_bar_override = j.at("n_bar").get<int>();
        if (*c.n_bar_override < 1 || *c.n_bar_override > kMaxTerminalIndex) {
            throw ConfigError("config field 'n_bar': must be in [1, " + std::to_string(kMaxTerminalIndex) + "]");
        }
    }
    if (j.contains("strategy")) c.strategy_spec = j.at("strategy");
    if (j.contains("steps_per_interval")) {
        if (!j.at("steps_per_interval").is_number_integer()) {
            throw ConfigError("config field 'steps_per_interval': expected an integer");
        }
        c.steps_per_interval = j.at("steps_per_interval").get<int>();
        if (c.steps_per_interval < kMinStepsPerInterval) {
            throw ConfigError("config field 'steps_per_interval': must be >= " + std::to_string(kMinStepsPerInterval));
        }
    }
    if (j.contains("seed")) {
        if (!j.at("seed").is_number_integer()) throw ConfigError("config field 'seed': expected an integer");
        c.seed = j.at("seed").get<std::uint64_t>();
    }
    if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
    return c;
}

inline nlohmann::json config_to_json(const RunConfig& c) {
    nlohmann::json j;
    j["system"] = c.system_spec;
    auto vec = [](const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
    if (c.x0) j["x0"] = vec(*c.x0);
    if (c.xtg) j["xtg"] = vec(*c.xtg);
    j["t_f"] = c.t_f;
    j["epsilon"] = c.epsilon;
    j["n_bar"] = c.n_bar_override ? nlohmann::json(*c.n_bar_override) : nlohmann::json(nullptr);
    j["strategy"] = c.strategy_spec;
    j["steps_per_interval"] = c.steps_per_interval;
    j["seed"] = c.seed;
    j["output_dir"] = c.output_dir;
    return j;
}

inline RunConfig load_config_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config '" + path.string() + "': " + e.what());
    }
    return config_from_json(j, path.parent_path().empty() ? fs::path(".") : path.parent_path());
}

namespace detail {

inline Vector vector_or_scalar(const nlohmann::json& j, const std::string& field, int p) {
    if (j.is_number()) return Vector::Constant(p, j.get<double>());
    Vector v = resilient::detail::json_vector(j, field);
    if (v.size() != p) throw ConfigError("strategy field '" + field + "': expected " + std::to_string(p) + " entries");
    return v;
}

}  // namespace detail

inline UncontrolledStrategy strategy_from_json(const nlohmann::json& j, int p, std::uint64_t default_seed) {
    if (!j.is_object() || !j.contains("kind")) throw ConfigError("config field 'strategy': expected {\"kind\": ...}");
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "constant") {
        return strategy::Constant{detail::vector_or_scalar(j.value("value", nlohmann::json(0.0)), "value", p)};
    }
    if (kind == "sinusoid") {
        return strategy::Sinusoid{detail::vector_or_scalar(j.value("amplitude", nlohmann::json(1.0)), "amplitude", p),
                                  j.value("frequency", 1.0), j.value("phase", 0.0)};
    }
    if (kind == "bang_bang") {
        return strategy::BangBang{j.value("switch_period", 1.0), j.value("seed", default_seed)};
    }
    if (kind == "greedy" || kind == "greedy_adversary") return strategy::Greedy{j.value("resolution", 2)};
    if (kind == "cancellation" || kind == "cancellation_probe") return strategy::CancellationProbe{};
    throw ConfigError("config field 'strategy.kind': unknown strategy '" + kind +
                      "' (expected constant, sinusoid, bang_bang, greedy or cancellation)");
}

inline ResolvedRun resolve(const RunConfig& config) {
    std::optional<Vector> def_x0;
    std::optional<Vector> def_xtg;
    ControlSystem sys;
    const auto& spec = config.system_spec;
    if (spec.is_string() && spec.get<std::string>() == "admire") {
        sys = build_admire();
        def_x0 = admire::initial_state();
        def_xtg = admire::target_state();
    } else if (spec.is_string()) {
        fs::path path = spec.get<std::string>();
        if (path.is_relative()) path = config.base_dir / path;
        auto def = load_system_file(path.string());
        sys = std::move(def.system);
        def_x0 = def.x0;
        def_xtg = def.xtg;
    } else if (spec.is_object()) {
        auto def = system_from_json(spec);
        sys = std::move(def.system);
        def_x0 = def.x0;
        def_xtg = def.xtg;
    } else {
        throw ConfigError("config field 'system': expected \"admire\", a path, or an inline object");
    }

    ResolvedRun run{config, std::move(sys), {}, {}, strategy::CancellationProbe{}};
    if (config.x0) {
        run.x0 = *config.x0;
    } else if (def_x0) {
        run.x0 = *def_x0;
    } else {
        throw ConfigError("config: 'x0' missing and the system defines none");
    }
    if (config.xtg) {
        run.xtg = *config.xtg;
    } else if (def_xtg) {
        run.xtg = *def_xtg;
    } else {
        throw ConfigError("config: 'xtg' missing and the system defines none");
    }
    const int d = run.system.state_dim;
    if (run.x0.size() != d || run.xtg.size() != d) {
        throw ConfigError("config: x0 and xtg must have dimension " + std::to_string(d));
    }
    run.strategy = strategy_from_json(config.strategy_spec, run.system.uncontrolled_dim, config.seed);
    return run;
}

inline fs::path output_dir(const RunConfig& config) {
    if (const char* env = std::getenv(kOutputDirEnv); env != nullptr && *env != '\0') return fs::path(env);
    return fs::path(config.output_dir);
}

// ---------------------------------------------------------------------------
// Workflows
// ---------------------------------------------------------------------------

struct FeasibilityOutcome {
    FeasibilityReport report;
    int exit_code = kOk;
};

struct SimulationOutcome {
    FeasibilityReport report;
    ControlSchedule schedule;
    SimulationTrace trace;
    TraceDiagnostics diagnostics;
    double runtime_seconds = 0.0;
    int exit_code = kOk;
};

inline FeasibilityReport feasibility_for(const ResolvedRun& run) {
    const auto approx = linearize_at_origin(run.system, run.x0);
    return analyze_feasibility(run.system, approx, run.xtg, run.config.t_f);
}

inline void print_report(std::ostream& os, const FeasibilityReport& r) {
    os << "c = " << r.constants.c << ", c1 = " << r.constants.c1 << ", c2 = " << r.constants.c2
       << ", D_S = " << r.constants.lipschitz_sum << '\n';
    os << "conditions hold: " << (r.conditions_hold ? "yes" : "no") << '\n';
    if (r.feasible_interval) {
        os << "feasible t_f interval: [" << r.feasible_interval->lower << ", " << r.feasible_interval->upper << "]\n";
    }
    os << "t_f lower bound: " << r.tf_lower_bound << '\n';
    os << "t_f = " << r.t_f << " valid: " << (r.tf_valid ? "yes" : "no") << '\n';
    for (const auto& note : r.notes) os << "warning: " << note << '\n';
}

/// Writes <out>/feasibility.json; exit 0 when t_f validates, 2 otherwise.
inline FeasibilityOutcome cmd_feasibility(const RunConfig& config, std::ostream& os) {
    const auto run = resolve(config);
    FeasibilityOutcome out;
    out.report = feasibility_for(run);
    print_report(os, out.report);
    const auto dir = output_dir(config);
    fs::create_directories(dir);
    io::write_json_file((dir / "feasibility.json").string(), to_json(out.report));
    out.exit_code = out.report.tf_valid ? kOk : kAdvisory;
    return out;
}

inline void write_outputs(const fs::path& dir, const RunConfig& config, const SimulationOutcome& out) {
    fs::create_directories(dir);
    io::write_file((dir / "trace.csv").string(), [&](std::ostream& os) { io::write_trace_csv(os, out.trace); });
    io::write_file((dir / "nodes.csv").string(), [&](std::ostream& os) { io::write_node_csv(os, out.trace); });
    io::write_json_file((dir / "schedule.json").string(), to_json(out.schedule));
    io::write_json_file((dir / "feasibility.json").string(), to_json(out.report));
    auto summary = io::summary_json(out.trace, out.diagnostics, out.runtime_seconds);
    summary["n1"] = out.schedule.n1;
    summary["n_bar"] = out.schedule.n_bar;
    summary["epsilon"] = out.schedule.epsilon;
    summary["tf_valid"] = out.report.tf_valid;
    summary["exit_code"] = out.exit_code;
    summary["config"] = config_to_json(config);
    io::write_json_file((dir / "summary.json").string(), summary);
}

/// Feasibility (advisory), schedule and closed loop, without writing files.
/// Exit 0 when the final error is within epsilon, 3 when not, 4 on divergence.
inline SimulationOutcome simulate(const RunConfig& config, std::ostream& os) {
    const auto started = std::chrono::steady_clock::now();
    const auto run = resolve(config);
    const auto prob = make_problem(run.system, run.x0, run.xtg);

    SimulationOutcome out{analyze_feasibility(run.system, prob.approx, run.xtg, config.t_f),
                          config.n_bar_override
                              ? make_schedule_with_terminal_index(*config.n_bar_override, config.epsilon,
                                                                  prob.constants, config.t_f,
                                                                  run.system.uncontrolled_dim)
                              : make_schedule(config.epsilon, prob.constants, config.t_f, run.system.uncontrolled_dim),
                          {}, {}, 0.0, kOk};
    for (const auto& note : out.report.notes) os << "warning: " << note << '\n';

    const UncontrolledSignal signal(run.strategy, prob.approx, run.xtg, config.t_f);
    try {
        out.trace = run_closed_loop(prob, out.schedule, signal, config.steps_per_interval);
        out.diagnostics = verify_trace(out.trace, out.report, out.schedule);
        out.exit_code = out.diagnostics.final_error_ok ? kOk : kTargetMissed;
    } catch (const ClosedLoopDivergence& e) {
        out.trace = e.partial_trace();
        out.diagnostics.notes.push_back(e.what());
        out.exit_code = kDiverged;
        os << "error: closed loop diverged: " << e.what() << '\n';
    }
    out.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    os << "n_bar = " << out.schedule.n_bar << ", final error = " << out.trace.final_error
       << ", constraint max = " << out.trace.constraint_max << ", runtime = " << out.runtime_seconds << " s\n";
    for (const auto& note : out.diagnostics.notes) os << "note: " << note << '\n';
    return out;
}

/// simulate() plus trace.csv, nodes.csv, schedule.json, feasibility.json and
/// summary.json in the output directory.
inline SimulationOutcome cmd_simulate(const RunConfig& config, std::ostream& os) {
    auto out = simulate(config, os);
    write_outputs(output_dir(config), config, out);
    return out;
}

/// Strategy presets for the demo, keyed by kind name.
inline nlohmann::json demo_strategy(const std::string& kind, std::uint64_t seed) {
    if (kind == "bang_bang") return {{"kind", "bang_bang"}, {"switch_period", kDemoSwitchPeriod}, {"seed", seed}};
    if (kind == "constant") return {{"kind", "constant"}, {"value", 0.5}};
    if (kind == "sinusoid") return {{"kind", "sinusoid"}, {"amplitude", 1.0}, {"frequency", 0.5}, {"phase", 0.0}};
    if (kind == "greedy") return {{"kind", "greedy"}, {"resolution", 2}};
    if (kind == "cancellation") return {{"kind", "cancellation"}};
    throw ConfigError("demo-admire: unknown strategy '" + kind + "'");
}

/// The fighter-jet run: t_f = 20, canard uncontrolled, fixed terminal index 8.
inline RunConfig admire_demo_config(std::uint64_t seed = kDemoSeed, const std::string& strategy_kind = "bang_bang") {
    RunConfig c;
    c.system_spec = "admire";
    c.x0 = admire::initial_state();
    c.xtg = admire::target_state();
    c.t_f = admire::kFinalTime;
    c.epsilon = kDemoEpsilon;
    c.n_bar_override = admire::kTerminalIndex;
    c.strategy_spec = demo_strategy(strategy_kind, seed);
    c.steps_per_interval = kDemoStepsPerInterval;
    c.seed = seed;
    c.output_dir = "out/demo-admire";
    return c;
}

inline SimulationOutcome cmd_demo_admire(std::uint64_t seed, const std::string& strategy_kind, std::ostream& os) {
    return cmd_simulate(admire_demo_config(seed, strategy_kind), os);
}

/// Runs every *.json config in `dir` concurrently, each writing into
/// <output>/<config stem>. Returns the largest exit code.
inline int run_batch(const fs::path& dir, std::ostream& os) {
    if (!fs::is_directory(dir)) throw ConfigError("batch: '" + dir.string() + "' is not a directory");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());

    std::mutex os_mutex;
    std::vector<std::future<int>> jobs;
    jobs.reserve(files.size());
    for (const auto& file : files) {
        jobs.push_back(std::async(std::launch::async, [&os, &os_mutex, file] {
            std::ostringstream log;
            int code = kOk;
            try {
                const auto config = load_config_file(file);
                const auto out = simulate(config, log);
                write_outputs(output_dir(config) / file.stem(), config, out);
                code = out.exit_code;
            } catch (const Error& e) {
                log << "error: " << e.what() << '\n';
                code = kConfigError;
            } catch (const nlohmann::json::exception& e) {
                log << "error: " << e.what() << '\n';
                code = kConfigError;
            }
            std::lock_guard lock(os_mutex);
            os << "[" << file.filename().string() << "] exit " << code << '\n' << log.str();
            return code;
        }));
    }
    int worst = kOk;
    for (auto& job : jobs) worst = std::max(worst, job.get());
    return worst;
}

}  // namespace resilient::cli
