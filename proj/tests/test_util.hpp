#pragma once

#include <random>

#include "drregret/lifting.hpp"

namespace testutil {

using drregret::Mat;
using drregret::StateSpace;
using drregret::Vec;

inline Mat random_matrix(std::mt19937_64& rng, int rows, int cols, double scale = 1.0) {
    std::normal_distribution<double> g(0.0, 1.0);
    Mat M(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) M(r, c) = scale * g(rng);
    return M;
}

inline Mat random_spd(std::mt19937_64& rng, int dim, double ridge = 0.5) {
    Mat A = random_matrix(rng, dim, dim);
    return Mat(A * A.transpose() / dim + ridge * Mat::Identity(dim, dim));
}

// Random block-lower-triangular matrix (including the block diagonal).
inline Mat random_causal(std::mt19937_64& rng, int N, int row_block, int col_block,
                         double scale = 1.0) {
    Mat M = random_matrix(rng, N * row_block, N * col_block, scale);
    return drregret::block_lower_part(M, row_block, col_block);
}

inline StateSpace random_system(std::mt19937_64& rng, int n, int m, int p,
                                bool identity_weights = true) {
    Mat A = random_matrix(rng, n, n);
    A *= 0.9 / std::max(1.0, A.cwiseAbs().rowwise().sum().maxCoeff());
    Mat B = random_matrix(rng, n, m);
    Mat C = random_matrix(rng, p, n);
    Mat Q, R;
    if (!identity_weights) {
        Q = random_spd(rng, n);
        R = random_spd(rng, m);
    }
    return drregret::make_state_space(A, B, C, Q, R);
}

}  // namespace testutil
