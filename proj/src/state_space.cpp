#include "drregret/state_space.hpp"

#include "drregret/factorization.hpp"

namespace drregret {

void validate(const StateSpace& ss) {
    const int n = ss.n();
    const int m = ss.m();
    const int p = ss.p();
    require(n > 0 && m > 0 && p > 0, "state space matrices must be nonempty");
    require(ss.A.rows() == n && ss.A.cols() == n, "A must be n x n");
    require(ss.B.rows() == n, "B must have n rows");
    require(ss.C.cols() == n, "C must have n columns");
    require(ss.Q.rows() == n && ss.Q.cols() == n, "Q must be n x n");
    require(ss.R.rows() == m && ss.R.cols() == m, "R must be m x m");
    cholesky_forward(ss.Q);  // throws FactorizationError if not SPD
    cholesky_forward(ss.R);
}

StateSpace make_state_space(const Mat& A, const Mat& B, const Mat& C,
                            const Mat& Q, const Mat& R) {
    StateSpace ss;
    ss.A = A;
    ss.B = B;
    ss.C = C;
    ss.Q = Q.size() > 0 ? Q : Mat::Identity(A.rows(), A.rows());
    ss.R = R.size() > 0 ? R : Mat::Identity(B.cols(), B.cols());
    validate(ss);
    return ss;
}

}  // namespace drregret
