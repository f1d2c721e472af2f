#pragma once

#include <utility>

#include "drregret/lifting.hpp"
#include "drregret/types.hpp"

namespace drregret {

// Lower-triangular L with L L^T = M (forward orientation). Throws
// FactorizationError with the failing pivot index when M is not PD, and
// with pivot -1 when M is not symmetric to 1e-10 (relative).
Mat cholesky_forward(const Mat& M);

// Lower-triangular L with L^T L = M (reverse orientation), computed by
// exchange-permuting M, factoring forward, and exchanging back.
Mat cholesky_reverse(const Mat& M);

// Splits M into (causal, strictly anticausal) parts on a block grid:
// causal keeps block (i,j) for j <= i, strictly anticausal keeps j > i.
std::pair<Mat, Mat> causal_split(const Mat& M, int row_block, int col_block);

// Gram operators of the lifted plant, their oriented triangular square
// roots, the orthogonal transforms Theta / Psi, and the core operators
// W and P. Orientations:
//   S = S_half S_half^T,  U = U_half U_half^T   (forward)
//   T = T_half^T T_half,  V = V_half^T V_half   (reverse)
// with all four factors block-lower-triangular.
struct FactorizationSet {
    Mat T;       // I + F^T F   (Nm x Nm)
    Mat U;       // I + L L^T   (Np x Np)
    Mat S;       // I + F F^T   (Nn x Nn)
    Mat V;       // I + L^T L   (Nn x Nn)
    Mat T_half;
    Mat U_half;
    Mat S_half;
    Mat V_half;
    Mat Theta;   // N(n+m) orthogonal
    Mat Psi;     // N(n+p) orthogonal
    Mat W;       // Nm x Np
    Mat P;       // Nn x Nm
    Dims dims;
};

// Populates every field and verifies Theta^T Theta = I and Psi^T Psi = I
// to 1e-8; a larger residual signals a square-root orientation bug and
// raises ConsistencyError.
FactorizationSet build_factorizations(const LiftedSystem& sys);

// Gamma-dependent operators:
//   M_gamma^T M_gamma = gamma^-1 I + gamma^-2 P^T P, M_gamma lower PD
//   W_gamma = M_gamma W = W_plus + W_minus  (causal / strictly anticausal)
//   H_gamma = M_gamma^-1 W_plus - W
struct GammaOperators {
    double gamma = 0.0;
    Mat M_gamma;
    Mat W_gamma;
    Mat W_plus;
    Mat W_minus;
    Mat H_gamma;
};

// Throws DomainError for gamma <= 0. The causal split of W_gamma uses
// m x p blocks (measurement channel in, input channel out).
GammaOperators gamma_operators(const FactorizationSet& fs, double gamma);

}  // namespace drregret
