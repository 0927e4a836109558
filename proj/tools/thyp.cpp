#include "thyp/app.hpp"
#include "thyp/errors.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>

int main(int argc, char** argv) {
    CLI::App app{"Strongly hyperbolic quasilinear systems on the torus"};
    app.require_subcommand(1, 1);

    std::string config_path;
    std::string out_dir = "out";
    std::optional<std::uint64_t> seed;

    for (const char* name : {"scan", "solve", "probe", "speeds"}) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "config file")->required();
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--seed", seed, "sampling seed (overrides the config)");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : thyp::cli::kConfig;
    }
    const std::string command = app.get_subcommands().front()->get_name();

    thyp::cli::RunConfig cfg;
    try {
        cfg = thyp::cli::load_config(config_path);
    } catch (const thyp::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return thyp::cli::kConfig;
    } catch (const thyp::IoError& e) {
        std::cerr << "i/o error: " << e.what() << '\n';
        return thyp::cli::kConfig;
    }
    if (!cfg.command.empty() && cfg.command != command) {
        std::cerr << "config error: config is for '" << cfg.command << "', not '" << command
                  << "'\n";
        return thyp::cli::kConfig;
    }
    cfg.command = command;
    if (seed) cfg.seed = *seed;

    const auto report = thyp::cli::run(cfg, out_dir);
    (report.exit_code == 0 ? std::cout : std::cerr) << command << ": " << report.message << '\n';
    return report.exit_code;
}
