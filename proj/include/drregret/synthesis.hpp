#pragma once

#include <vector>

#include "drregret/benchmark.hpp"
#include "drregret/factorization.hpp"
#include "drregret/sdp.hpp"

namespace drregret {

struct SynthesisConfig {
    double radius = 1.0;              // Wasserstein-2 budget r >= 0
    double gamma_rel_tol = 1e-4;      // outer search tolerance (relative)
    double bracket_growth = 2.0;      // gamma bracket expansion factor
    double solver_tol = 1e-8;         // SDP feasibility / gap tolerance
    int presample_points = 8;         // log-spaced samples before the search
    bool verbose = false;
};

struct GammaTracePoint {
    double gamma = 0.0;
    double value = 0.0;  // +inf marker for infeasible / failed solves
    bool feasible = false;
};

struct SynthesisResult {
    double gamma_star = 0.0;
    Mat Y_star;                 // causal Nehari variable at the optimum
    Mat X_star;                 // auxiliary PSD variable at the optimum
    ControllerOperators controller;
    double objective = 0.0;     // worst-case expected regret
    RegretOperator regret;
    std::vector<GammaTracePoint> trace;
    int solver_iterations = 0;  // total inner-SDP iterations
    bool via_lqg_closed_form = false;  // r = 0 route
};

// Minimal operator-norm error over causal completions of the strictly
// anticausal part: max over split points of the norm of the fully
// determined off-diagonal submatrices. Decides Nehari feasibility exactly.
double hankel_norm(const Mat& strictly_anticausal, int row_block, int col_block);

// Smallest gamma whose Nehari condition ||Y - W_minus_gamma|| <= 1 is
// achievable; equals the regret-optimal level for this plant.
double nehari_gamma_threshold(const FactorizationSet& fs, double rel_tol = 1e-9);

// Fixed-gamma semidefinite program: variables X (symmetric, N(n+p)) and
// Y (block-lower-triangular with m x p blocks); the large LMI, the Nehari
// LMI and X PSD; objective gamma (r^2 - N(n+p)) + Tr(X).
struct DrProgram {
    sdp::SemidefiniteProgram program;
    sdp::MatrixHandle X;
    sdp::MatrixHandle Y;
};

DrProgram assemble_dr_lmi(const GammaOperators& gops, const FactorizationSet& fs, double radius,
                          const Dims& dims);

struct InnerSolve {
    bool feasible = false;
    double value = 0.0;  // objective including the constant term
    Mat Y;
    Mat X;
    int iterations = 0;
    sdp::SolveStatus status = sdp::SolveStatus::NumericalFailure;
};

// Solves the fixed-gamma program. Infeasible gamma (Nehari bound > 1)
// returns feasible = false with value = +infinity.
InnerSolve inner_value(double gamma, const FactorizationSet& fs, double radius,
                       const SynthesisConfig& cfg);

// E = T^{-1/2} M_gamma^{-1} (Y + W_plus_gamma) U^{-1/2}. Verifies the result
// is block-lower-triangular (relative residue above 1e-6 raises) and zeros
// the roundoff in the upper blocks.
Mat youla_from_nehari(const Mat& Y, const GammaOperators& gops, const FactorizationSet& fs);

// Full synthesis: feasibility threshold by bisection, log-spaced presample
// with unimodality check, golden-section refinement, controller recovery.
SynthesisResult minimize_over_gamma(const LiftedSystem& sys, const FactorizationSet& fs,
                                    const SynthesisConfig& cfg);

}  // namespace drregret
