// emq - run a scenario config and write its artifacts.

#include "emq/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

int main(int argc, char** argv)
{
    CLI::App app{"Simulate electromechanical quantum protocols from a scenario config"};
    std::string config_path;
    std::string format = "both";
    std::vector<std::string> truncations;
    std::uint64_t seed = 0;
    emq::cli::RunOptions options;
    std::string scenario;

    app.add_option("--config", config_path, "scenario config file")->required()->check(CLI::ExistingFile);
    app.add_option("--out", options.out, "output directory")->default_str(".");
    auto* seed_opt = app.add_option("--seed", seed, "RNG seed (overrides the config)");
    app.add_option("--truncation", truncations, "mode truncation NAME=DIM (repeatable)");
    app.add_option("--format", format, "artifact format")->check(CLI::IsMember({"json", "csv", "both"}));
    app.add_option("--jobs", options.jobs, "OpenMP threads for the kernels")->check(CLI::PositiveNumber);
    auto* scenario_opt = app.add_option("--scenario", scenario, "scenario (overrides the config)");
    CLI11_PARSE(app, argc, argv);

    if (*seed_opt) options.seed = seed;
    if (*scenario_opt) options.scenario = scenario;
    options.format = format == "json" ? emq::cli::Format::json
                     : format == "csv" ? emq::cli::Format::csv
                                       : emq::cli::Format::both;
    for (const auto& t : truncations) {
        const auto eq = t.find('=');
        long dim = 0;
        try {
            if (eq == std::string::npos) throw std::invalid_argument(t);
            std::size_t used = 0;
            dim = std::stol(t.substr(eq + 1), &used);
            if (used != t.size() - eq - 1) throw std::invalid_argument(t);
        } catch (const std::exception&) {
            std::cerr << "config error: --truncation expects NAME=DIM, got '" << t << "'\n";
            return emq::cli::kConfigError;
        }
        options.truncations.emplace_back(t.substr(0, eq), static_cast<emq::Index>(dim));
    }

    std::ifstream in(config_path);
    std::ostringstream text;
    text << in.rdbuf();
    return emq::cli::run(text.str(), options, std::cout, std::cerr);
}
