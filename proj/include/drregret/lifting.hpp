#pragma once

#include "drregret/state_space.hpp"
#include "drregret/types.hpp"

namespace drregret {

// Finite-horizon operator form of the plant over N steps with x0 = 0:
//
//   x = F u + G w,    y = J u + L w + v
//
// All four operators are strictly block-lower-triangular block-Toeplitz.
// The stored operators absorb the cost weights: F and G carry a left factor
// Q_blk^{1/2}, F and J carry a right factor R_blk^{-1/2}, so that the stage
// cost becomes ||x||^2 + ||u||^2 in the transformed coordinates. The
// disturbances (w, v) are kept in physical coordinates; the ambiguity set
// always acts on the raw disturbances.
struct LiftedSystem {
    Mat F;  // Nn x Nm
    Mat G;  // Nn x Nn
    Mat J;  // Np x Nm
    Mat L;  // Np x Nn
    Dims dims;
};

// Builds the weighted lifted operators. Throws DomainError for N < 1 and
// FactorizationError when Q or R is not positive definite.
LiftedSystem lift_system(const StateSpace& ss, int horizon);

}  // namespace drregret
