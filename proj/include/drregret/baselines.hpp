#pragma once

#include "drregret/benchmark.hpp"
#include "drregret/factorization.hpp"
#include "drregret/lifting.hpp"
#include "drregret/sdp.hpp"

namespace drregret {

enum class BaselineKind { LQG, HINF, ROMF };

const char* to_string(BaselineKind k);

// Minimizes the expected nominal cost E||T_K||^2 under unit covariance over
// causal controllers. Closed form: the causal part of W in the Youla-like
// coordinates, E = T^{-1/2} W_plus U^{-1/2}.
ControllerOperators lqg_controller(const FactorizationSet& fs, const LiftedSystem& sys);

struct HinfProgram {
    sdp::SemidefiniteProgram program;
    sdp::ScalarHandle delta;
    sdp::MatrixHandle E;
};

// min delta s.t. [[delta I, T_K^T],[T_K, delta I]] PSD, T_K affine in a
// causal E.
HinfProgram assemble_hinf_lmi(const LiftedSystem& sys);

struct HinfResult {
    ControllerOperators controller;
    double operator_norm = 0.0;   // optimal ||T_K||_2 from the level SDP
    double achieved_norm = 0.0;   // ||T_K||_2 of the returned central controller
    double level = 0.0;           // gain bound used for the central solution
    int solver_iterations = 0;
};

// Minimizes the closed-loop operator norm ||T_K||_2 over causal controllers
// via a single SDP in (delta, E), then returns the central (minimum-entropy)
// controller at level (1 + entropy_margin) * delta*: the analytic center of
// the gain-bound LMI, which is the classical H-infinity design. The raw norm
// minimizer is highly non-unique and behaves poorly on average.
HinfResult hinf_controller(const LiftedSystem& sys, double solver_tol = 1e-8,
                           double entropy_margin = 0.25);

struct RomfProgram {
    sdp::SemidefiniteProgram program;
    sdp::ScalarHandle gamma;
    sdp::MatrixHandle Zc;
};

// min gamma s.t. [[gI, -PZ, 0],[-Z'P', gI, Z'],[0, Z, I]] PSD with
// Z = Zc - W over causal Zc.
RomfProgram assemble_romf_lmi(const FactorizationSet& fs);

struct RomfResult {
    ControllerOperators controller;
    double gamma_ro = 0.0;  // minimal achievable worst-case regret level
    int solver_iterations = 0;
};

// Minimizes gamma with C_K <= gamma I over causal controllers as one SDP in
// (gamma, causal Z). gamma_ro equals the Nehari feasibility threshold of the
// distributionally robust program. The returned controller is the canonical
// (minimal trace of the resolvent) point at level gamma_ro (1 + margin);
// the raw level minimizer is non-unique.
RomfResult ro_mf_controller(const FactorizationSet& fs, const LiftedSystem& sys,
                            double solver_tol = 1e-8, double level_margin = 0.005);

// Cross-check route for gamma_ro: bisection on the exact Nehari bound
// (no SDP involved).
double ro_mf_gamma_by_bisection(const FactorizationSet& fs, double rel_tol = 1e-9);

}  // namespace drregret
