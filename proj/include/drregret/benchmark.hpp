#pragma once

#include "drregret/factorization.hpp"
#include "drregret/lifting.hpp"
#include "drregret/types.hpp"

namespace drregret {

// A controller in Youla coordinates together with its feedback form and
// closed-loop transfer operator
//
//   T_K = [[F E L + G, F E],
//          [E L,        E ]]
//
// mapping stacked disturbances (w, v) to weighted (x, u).
struct ControllerOperators {
    Mat E;    // Nm x Np Youla parameter
    Mat K;    // Nm x Np feedback law u = K y
    Mat T_K;  // N(n+m) x N(n+p)
    bool causal = false;
};

// Symmetric excess-cost operator C_K = T_K^T T_K - T_K0^T T_K0 with its
// spectrum cached (the worst-case machinery queries it repeatedly).
struct RegretOperator {
    Mat C_K;
    Vec eigenvalues;   // ascending
    Mat eigenvectors;  // columns match eigenvalues
    double lambda_max = 0.0;
};

Mat transfer_operator(const Mat& E, const LiftedSystem& sys);

// K = (I + E J)^{-1} E. Throws ConsistencyError when I + E J is singular
// (only possible for noncausal E; for causal E the matrix is block
// unitriangular).
Mat controller_from_youla(const Mat& E, const LiftedSystem& sys);

// E = K (I - J K)^{-1}.
Mat youla_from_controller(const Mat& K, const LiftedSystem& sys);

ControllerOperators controller_from_youla_full(const Mat& E, const LiftedSystem& sys);

// The noncausal benchmark minimizing ||T_K||_F over all (not necessarily
// causal) Youla parameters: E0 = -T^{-1} F^T G L^T U^{-1}.
ControllerOperators noncausal_benchmark(const LiftedSystem& sys, const FactorizationSet& fs);

RegretOperator regret_operator(const Mat& T_K, const Mat& T_K0);

}  // namespace drregret
