#pragma once

/// @file lab.hpp
/// @brief Experiment drivers behind the command-line laboratory.
///
/// A LabConfig describes one experiment: a grid, a dispersion exponent, solver
/// controls, initial data (a named profile, an explicit second profile, or a
/// matched pair), and the quantities to record. run_experiment dispatches on
/// the experiment kind and returns a LabReport holding the recorded series,
/// the pass/fail verdicts, and any free-form recorded values. write_outputs
/// persists the report as series.csv, manifest.json, verdicts.txt and
/// report.txt (plus certificate.txt for pair matching) under an output
/// directory.
///
/// Configs are JSON documents with one fixed schema; emit_config_text and
/// parse_config_text round-trip exactly, and the emitted form is echoed into
/// manifest.json next to the grid conventions so every run is reproducible
/// from its own output directory.

#include "dgbo/field.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace dgbo {

/// Named initial-data profile.
///
/// "gaussian_sum": params hold (coefficient, width, center) triples and the
/// profile is amplitude * sum_i c_i exp(-((x - x0_i)/w_i)^2).
/// "polynomial_gaussian_sum": params hold (coefficient, width, center,
/// degree) quadruples and each term is c_i x^{d_i} exp(-((x - x0_i)/w_i)^2),
/// degree a small non-negative integer.
/// "odd_gaussian": params hold a single width w and the profile is
/// amplitude * x * exp(-(x/w)^2).
/// The zero_mean / zero_first_moment flags post-process the samples with
/// make_zero_mean so the stated moments vanish to quadrature accuracy.
struct ProfileSpec {
    std::string name = "gaussian_sum";
    std::vector<double> params = {1.0, 1.0, 0.0};
    double amplitude = 1.0;
    bool zero_mean = false;
    bool zero_first_moment = false;

    bool operator==(const ProfileSpec&) const = default;
};

/// Matched-pair controls for pair-match and diff-decay experiments.
///
/// preset selects the constraint set ("dgbo" for mass, first moment and L2;
/// "bo" for the full six-functional set). The basis is a Hermite family of
/// size basis_size and width basis_width built over the base profile. When
/// certificate names a file, diff-decay rebuilds the pair from that file
/// instead of re-solving, and refuses to run unless the recomputed residuals
/// stay below 1e-8. null_pair evolves the base against itself.
struct PairSpec {
    std::string preset = "dgbo";
    std::size_t basis_size = 5;
    double basis_width = 1.5;
    double separation = 0.1;
    double tolerance = 1e-12;
    std::string certificate;
    bool null_pair = false;

    bool operator==(const PairSpec&) const = default;
};

/// Parameter grids for the stein-suite and expansion-suite kinds. Empty
/// vectors mean "no checks of that flavor"; a suite with nothing to do
/// reports zero verdicts and exits successfully.
struct SuiteSpec {
    // expansion-suite: derivative orders, evaluation times, dispersion values.
    std::vector<int> orders;
    std::vector<double> times;
    std::vector<double> a_values;
    // stein-suite: (alpha, theta) pairs for the model-profile asymptotics.
    std::vector<double> alphas;
    std::vector<double> thetas;
    bool signed_profile = false;
    // stein-suite: times for the pointwise oscillatory-decay envelope check.
    std::vector<double> phase_times;
    double phase_a = 0.5;
    double phase_b = 0.5;

    bool operator==(const SuiteSpec&) const = default;
};

/// One experiment, fully described. kind is one of "evolve", "identities",
/// "tstar", "pair-match", "diff-decay", "stein-suite", "expansion-suite".
struct LabConfig {
    std::string kind = "evolve";
    std::size_t grid_n = 1024;
    double box_length = 100.0;
    double dispersion_a = 0.0;
    double dt = 1e-3;
    double t_final = 1.0;
    int record_every = 1;
    std::string integrator = "if_rk4";
    double dealias_fraction = 2.0 / 3.0;
    ProfileSpec initial_data;
    // Second datum for pair identities (x^2-weighted difference law).
    std::optional<ProfileSpec> initial_data_2;
    PairSpec pair;
    SuiteSpec suite;
    std::vector<std::string> probes;
    // diff-decay only: rerun on the doubled grid (2n, 2L) and compare the
    // weighted norm of the difference and the low-frequency indicator.
    bool refinement = false;

    bool operator==(const LabConfig&) const = default;
};

/// Parse a JSON config document. Unknown keys, malformed values, and
/// unrecognized kinds raise config_error.
LabConfig parse_config_text(const std::string& text);

/// Emit the config as JSON. parse_config_text(emit_config_text(cfg)) == cfg.
std::string emit_config_text(const LabConfig& cfg);

/// One checked statement: measured deviation against a pinned tolerance.
/// status is "PASS", "FAIL", or "SKIP" (x-weighted identities are skipped
/// when boundary mass contaminates the window).
struct LabVerdict {
    std::string name;
    double deviation = 0.0;
    double tolerance = 0.0;
    std::string status = "PASS";
};

/// Everything an experiment leaves behind. columns/series describe the CSV
/// (one vector per column, all of length times.size()); notes are free-form
/// recorded values for report.txt; certificate_text is non-empty only for
/// pair-match runs.
struct LabReport {
    std::vector<double> times;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> series;
    std::vector<LabVerdict> verdicts;
    std::vector<std::pair<std::string, std::string>> notes;
    std::string certificate_text;
};

/// Build the initial datum described by a profile spec on a grid. reflect
/// evaluates the profile at -x, which is how negative-time experiments are
/// mapped onto forward runs.
Field build_profile(const ProfileSpec& ps, const GridPtr& g, bool reflect = false);

/// Run one experiment. Throws config_error for bad setups and solver_abort
/// when the underlying integrator gives up.
LabReport run_experiment(const LabConfig& cfg);

/// Write series.csv, manifest.json, verdicts.txt, report.txt (and
/// certificate.txt when present) into out_dir, creating it if needed.
/// Returns 0 when no verdict failed and 2 otherwise.
int write_outputs(const LabConfig& cfg, const LabReport& rep, const std::string& out_dir);

/// Full pipeline for the CLI: load the config file, check it against the
/// subcommand kind, run, persist. Returns the process exit code (0 pass,
/// 2 verdict failure); config_error and solver_abort propagate to the caller
/// for mapping onto exit codes 3 and 4.
int run_lab(const std::string& kind, const std::string& config_path, const std::string& out_dir);

} // namespace dgbo
