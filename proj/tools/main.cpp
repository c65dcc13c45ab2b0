#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include "stmca/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Space-time Markov chain approximation of one-dimensional diffusions"};
    app.require_subcommand(1);
    std::string config_path;
    std::uint64_t seed = 0;
    int threads = 1;
    std::string out_dir;

    for (const auto& name : stmca::command_names()) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "JSON run configuration")->required()->check(CLI::ExistingFile);
        sub->add_option("--seed", seed, "master seed (overrides run.master_seed)");
        sub->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
        sub->add_option("--out", out_dir, "output directory (overrides output.directory)");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    const CLI::App* sub = app.get_subcommands().front();
    try {
        const stmca::RunConfig config = stmca::load_config(config_path);
        stmca::CommandOptions options;
        options.threads = threads;
        if (sub->count("--seed")) options.seed = seed;
        if (sub->count("--out")) options.out_dir = out_dir;
        const auto result = stmca::run_command(command, config, options);
        for (const auto& f : result.files) std::cout << f << "\n";
        return 0;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "stmca %s: %s\n", command.c_str(), e.what());
        switch (stmca::categorize(e)) {
            case stmca::ErrorCategory::config: return 2;
            case stmca::ErrorCategory::numerical: return 3;
            case stmca::ErrorCategory::other: return 1;
        }
        return 1;
    }
}
