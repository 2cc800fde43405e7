#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "resilient/cli.hpp"

namespace cli = resilient::cli;

int main(int argc, char** argv) {
    CLI::App app{"Resilient control synthesis and closed-loop simulation"};
    app.require_subcommand(0, 1);

    std::string batch_dir;
    app.add_option("--batch", batch_dir, "Run every *.json config in a directory concurrently");

    std::string feasibility_config;
    auto* feasibility = app.add_subcommand("feasibility", "Evaluate the horizon feasibility conditions");
    feasibility->add_option("config", feasibility_config, "Run config (JSON)")->required();

    std::string simulate_config;
    auto* simulate = app.add_subcommand("simulate", "Synthesize the control schedule and run the closed loop");
    simulate->add_option("config", simulate_config, "Run config (JSON)")->required();

    std::uint64_t demo_seed = cli::kDemoSeed;
    std::string demo_strategy = "bang_bang";
    auto* demo = app.add_subcommand("demo-admire", "Fighter-jet demonstration with the canard uncontrolled");
    demo->add_option("--seed", demo_seed, "Seed of the uncontrolled signal");
    demo->add_option("--strategy", demo_strategy, "Uncontrolled strategy")
        ->check(CLI::IsMember({"bang_bang", "constant", "sinusoid", "greedy", "cancellation"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : cli::kConfigError;
    }

    try {
        if (!batch_dir.empty()) return cli::run_batch(batch_dir, std::cout);
        if (*feasibility) return cli::cmd_feasibility(cli::load_config_file(feasibility_config), std::cout).exit_code;
        if (*simulate) return cli::cmd_simulate(cli::load_config_file(simulate_config), std::cout).exit_code;
        if (*demo) return cli::cmd_demo_admire(demo_seed, demo_strategy, std::cout).exit_code;
    } catch (const resilient::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return cli::kConfigError;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return cli::kConfigError;
    }
    std::cout << app.help();
    return cli::kConfigError;
}
