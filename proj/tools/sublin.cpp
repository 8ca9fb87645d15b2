#include "sublin/cli.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Sublinear-expectation laboratory"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> mc;
    std::optional<double> guard;
    bool quiet = false;

    for (const auto& name : sublin::command_names()) {
        auto* sub = app.add_subcommand(name, sublin::command_summary(name));
        sub->add_option("--config", config_path, "Experiment config (JSON)")->required();
        sub->add_option("--out", out_dir, "Output directory (default: $SUBLIN_OUT_DIR or ./sublin-out)");
        sub->add_option("--seed", seed, "Seed override (unsigned 64-bit)");
        sub->add_option("--mc", mc, "Monte-Carlo sample budget used when exact enumeration exceeds the guard");
        sub->add_option("--guard", guard, "Enumeration guard in work units");
        sub->add_flag("--quiet", quiet, "Suppress the summary line");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : sublin::exit_error;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    sublin::ExperimentConfig config;
    try {
        config = sublin::load_config(config_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return sublin::exit_error;
    }
    if (!out_dir.empty()) config.output = out_dir;
    if (seed) config.seed = *seed;
    if (mc) config.mc_samples = *mc;
    if (guard) config.guard = *guard;

    auto res = sublin::run(command, config);
    if (res.exit_code == sublin::exit_error)
        std::cerr << "error: " << res.message << '\n';
    else if (!quiet)
        std::cout << res.message << " (" << res.csv_path.string() << ")\n";
    return res.exit_code;
}
