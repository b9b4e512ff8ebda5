/// @file dgbo_lab.cpp
/// @brief Command-line front end for the simulation laboratory.
///
/// One subcommand per experiment kind, each taking --config (a JSON file) and
/// --out (a directory that will receive series.csv, manifest.json,
/// verdicts.txt, report.txt and, for pair-match, certificate.txt).
///
/// Exit codes: 0 all verdicts pass, 2 at least one numerical verdict failed,
/// 3 configuration problem, 4 the integrator aborted.

#include "dgbo/errors.hpp"
#include "dgbo/lab.hpp"

#include "CLI11.hpp"

#include <iostream>
#include <string>
#include <vector>

int main(int argc, char** argv) {
    CLI::App app{"pseudo-spectral laboratory for the dispersion-generalized "
                 "Benjamin-Ono family"};
    app.require_subcommand(1);

    const std::vector<std::pair<std::string, std::string>> kinds = {
        {"evolve", "integrate one datum and record the requested probes"},
        {"identities", "verify the exact moment and conservation identities along a run"},
        {"tstar", "locate the predicted first-moment and antiderivative crossings"},
        {"pair-match", "construct a moment-matched pair and write its certificate"},
        {"diff-decay", "co-evolve a matched pair and track the decay of the difference"},
        {"stein-suite", "model-profile asymptotics and phase-envelope checks"},
        {"expansion-suite", "derivative-expansion remainder checks on the free propagator"},
    };

    std::string config_path, out_dir;
    for (const auto& [name, help] : kinds) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--config", config_path, "JSON experiment description")->required();
        sub->add_option("--out", out_dir, "output directory")->required();
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // Treat command-line misuse the same as a bad config file.
        const int code = app.exit(e);
        return code == 0 ? 0 : 3;
    }

    const std::string kind = app.get_subcommands().front()->get_name();
    try {
        return dgbo::run_lab(kind, config_path, out_dir);
    } catch (const dgbo::config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 3;
    } catch (const dgbo::solver_abort& e) {
        std::cerr << "solver abort: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
