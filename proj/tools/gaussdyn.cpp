#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "gaussdyn/scenario.hpp"

namespace {

std::map<std::string, std::string> parse_sets(const std::vector<std::string>& sets) {
    std::map<std::string, std::string> out;
    for (const auto& s : sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos)
            throw gaussdyn::ConfigError("--set expects key=value, got '" + s + "'");
        out[s.substr(0, eq)] = s.substr(eq + 1);
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Covariance-matrix dynamics and entanglement of two oscillators "
                 "in a Markovian environment"};
    app.require_subcommand(1);

    auto* scenario = app.add_subcommand("scenario", "Reproduce a figure preset as CSV");
    std::string scenario_name, scenario_out;
    std::vector<std::string> sets;
    scenario->add_option("name", scenario_name, "fig1 | fig2 | fig3")->required();
    scenario->add_option("--set", sets, "Override, key=value (repeatable)");
    scenario->add_option("--out", scenario_out, "Output CSV path")->required();

    auto* run = app.add_subcommand("run", "Single-shot evaluation from a config file");
    std::string run_config;
    bool allow_unphysical = false;
    run->add_option("--config", run_config, "Config file")->required();
    run->add_flag("--allow-unphysical", allow_unphysical,
                  "Accept initial covariances violating the uncertainty relation");

    auto* sweep = app.add_subcommand("sweep", "Parameter sweep from a config file");
    std::string sweep_config;
    int jobs = 0;
    sweep->add_option("--config", sweep_config, "Config file")->required();
    sweep->add_option("--jobs", jobs, "Worker threads (default: GAUSSDYN_JOBS or all cores)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*scenario) {
            const auto out = gaussdyn::run_scenario(scenario_name, parse_sets(sets),
                                                    &std::cerr);
            gaussdyn::write_scenario(out, scenario_out);
            std::cout << "wrote " << scenario_out;
            if (!out.events_csv.empty())
                std::cout << " and " << gaussdyn::events_path_for(scenario_out);
            std::cout << "\n";
        } else if (*run) {
            gaussdyn::RunConfig cfg = gaussdyn::parse_config_file(run_config);
            if (allow_unphysical) cfg.allow_unphysical = true;
            gaussdyn::run_single(cfg, std::cout);
        } else if (*sweep) {
            const gaussdyn::RunConfig cfg = gaussdyn::parse_config_file(sweep_config);
            const std::string csv = gaussdyn::run_sweep(cfg, jobs);
            if (cfg.out_path.empty())
                std::cout << csv;
            else
                std::cout << "wrote " << cfg.out_path << "\n";
        }
    } catch (const gaussdyn::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return gaussdyn::ConfigError::exit_code;
    } catch (const gaussdyn::EnvironmentError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return gaussdyn::EnvironmentError::exit_code;
    } catch (const gaussdyn::UnphysicalStateError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return gaussdyn::UnphysicalStateError::exit_code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return gaussdyn::NumericalError::exit_code;
    }
    return 0;
}
