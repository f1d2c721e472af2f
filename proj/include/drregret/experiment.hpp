#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "drregret/adversary.hpp"
#include "drregret/baselines.hpp"
#include "drregret/synthesis.hpp"

namespace drregret {

// Raised on malformed configuration files; the message carries the offending
// field path.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
    std::string preset;  // "boeing747" when the system comes from the preset
    StateSpace system;
    int horizon = 10;
    std::vector<double> radii;               // sorted ascending after load
    std::vector<std::string> controllers;    // subset of DR-RO-MF, LQG, HINF, RO-MF
    Mat nominal_covariance;                  // empty means identity
    std::uint64_t seed = 0;
    std::string output_path = "results.csv";
    std::string output_format = "csv";       // csv | json
    double solver_tol = 1e-8;
    double gamma_rel_tol = 1e-4;
    double bracket_growth = 2.0;
    int workers = 1;
};

struct ResultRow {
    double radius = 0.0;
    std::string controller;
    double regret_under_dr_wc = 0.0;  // expected regret under the DR worst case
    double own_wc_regret = 0.0;       // expected regret under its own worst case
    double gamma_star = 0.0;
    double wall_ms = 0.0;             // excluded from json output (reproducibility)
    int solver_iterations = 0;
    std::string status = "ok";
};

// Longitudinal flight model of a Boeing 747 (level flight, 0.1 s sampling),
// with identity cost weights.
StateSpace boeing747();

ExperimentConfig load_config(const std::string& path);
ExperimentConfig config_from_json_text(const std::string& text);
std::string config_to_json_text(const ExperimentConfig& cfg);

// Shared plant-level artifacts for one configuration.
struct PlantContext {
    LiftedSystem sys;
    FactorizationSet fs;
    ControllerOperators benchmark;  // noncausal reference
    Mat M0;
};

PlantContext make_context(const ExperimentConfig& cfg);

// One named, fully synthesized controller plus its regret operator.
struct SynthesizedController {
    std::string name;
    ControllerOperators ops;
    RegretOperator regret;
    double gamma_star = 0.0;       // DR synthesis level or own worst-case level
    double objective = 0.0;        // DR objective (worst-case expected regret)
    int solver_iterations = 0;
    double wall_ms = 0.0;
    bool ok = true;
    std::string status = "ok";
};

// Synthesizes one controller by canonical name at the given radius (the
// radius only matters for DR-RO-MF; r = 0 maps to the LQG closed form).
SynthesizedController synthesize_by_name(const PlantContext& ctx, const std::string& name,
                                         double radius, const ExperimentConfig& cfg);

// Full sweep: for each radius, synthesize the requested controllers, build
// the DR worst-case distribution, evaluate everything under it, and record
// per-controller rows. Failures are recorded per row; the run continues.
std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg);

std::string results_to_csv(const std::vector<ResultRow>& rows);
std::string results_to_json(const std::vector<ResultRow>& rows);
void emit_results(const std::vector<ResultRow>& rows, const std::string& path,
                  const std::string& format);

}  // namespace drregret
