#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace drregret {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// Stacked-horizon dimensions: n states, m inputs, p measurements, N steps.
struct Dims {
    int n = 0;
    int m = 0;
    int p = 0;
    int N = 0;

    int nx() const { return N * n; }  // stacked state / process-noise length
    int nu() const { return N * m; }  // stacked input length
    int ny() const { return N * p; }  // stacked measurement length
    int nd() const { return nx() + ny(); }  // stacked disturbance (w, v) length
};

struct DimensionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct DomainError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Non-PD input to a Cholesky-type factorization. pivot is the first failing
// diagonal index, or -1 when the failure is a symmetry violation.
struct FactorizationError : std::runtime_error {
    int pivot;
    explicit FactorizationError(const std::string& msg, int pivot_index = -1)
        : std::runtime_error(msg), pivot(pivot_index) {}
};

// Raised when an internally-verified identity (orthogonality, causality of a
// recovered operator, ...) fails beyond tolerance.
struct ConsistencyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw DimensionError(msg);
}

// Keeps block (i,j) iff j <= i (or j < i when strict). Row blocks of size
// row_block, column blocks of size col_block; both grids must have the same
// number of blocks.
inline Mat block_lower_part(const Mat& M, int row_block, int col_block, bool strict = false) {
    require(row_block > 0 && col_block > 0, "block sizes must be positive");
    require(M.rows() % row_block == 0, "rows not divisible by row block size");
    require(M.cols() % col_block == 0, "cols not divisible by col block size");
    const int nr = static_cast<int>(M.rows()) / row_block;
    const int nc = static_cast<int>(M.cols()) / col_block;
    require(nr == nc, "row and column block grids differ");
    Mat out = Mat::Zero(M.rows(), M.cols());
    for (int i = 0; i < nr; ++i) {
        const int jmax = strict ? i - 1 : i;
        for (int j = 0; j <= jmax; ++j) {
            out.block(i * row_block, j * col_block, row_block, col_block) =
                M.block(i * row_block, j * col_block, row_block, col_block);
        }
    }
    return out;
}

inline bool is_block_lower(const Mat& M, int row_block, int col_block, bool strict = false,
                           double tol = 0.0) {
    Mat upper = M - block_lower_part(M, row_block, col_block, strict);
    return upper.cwiseAbs().maxCoeff() <= tol;
}

inline Mat symmetrized(const Mat& M) { return 0.5 * (M + M.transpose()); }

}  // namespace drregret
