#pragma once

#include "drregret/types.hpp"

namespace drregret {

// Discrete-time LTI plant x' = Ax + Bu + w, y = Cx + v with quadratic
// stage weights Q (state) and R (input), both symmetric positive definite.
struct StateSpace {
    Mat A;  // n x n
    Mat B;  // n x m
    Mat C;  // p x n
    Mat Q;  // n x n, SPD
    Mat R;  // m x m, SPD

    int n() const { return static_cast<int>(A.rows()); }
    int m() const { return static_cast<int>(B.cols()); }
    int p() const { return static_cast<int>(C.rows()); }
};

// Checks dimension consistency and positive definiteness of Q and R
// (via Cholesky success). Throws DimensionError / FactorizationError.
void validate(const StateSpace& ss);

// Convenience constructor that validates. Q, R default to identity.
StateSpace make_state_space(const Mat& A, const Mat& B, const Mat& C,
                            const Mat& Q = Mat(), const Mat& R = Mat());

}  // namespace drregret
