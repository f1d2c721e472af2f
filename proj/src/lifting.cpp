#include "drregret/lifting.hpp"

#include <vector>

#include "drregret/factorization.hpp"

namespace drregret {

LiftedSystem lift_system(const StateSpace& ss, int horizon) {
    if (horizon < 1) throw DomainError("horizon must be at least 1");
    validate(ss);

    const int n = ss.n();
    const int m = ss.m();
    const int p = ss.p();
    const int N = horizon;

    // Powers A^0 .. A^{N-2} for the Toeplitz block diagonals.
    std::vector<Mat> Apow(std::max(1, N - 1));
    if (N > 1) {
        Apow[0] = Mat::Identity(n, n);
        for (int k = 1; k < N - 1; ++k) Apow[k] = ss.A * Apow[k - 1];
    }

    Mat F = Mat::Zero(N * n, N * m);
    Mat G = Mat::Zero(N * n, N * n);
    // x_t = sum_{k<t} A^{t-1-k} (B u_k + w_k); row block 0 stays zero (x0 = 0).
    for (int t = 1; t < N; ++t) {
        for (int k = 0; k < t; ++k) {
            const Mat& Ap = Apow[t - 1 - k];
            G.block(t * n, k * n, n, n) = Ap;
            F.block(t * n, k * m, n, m) = Ap * ss.B;
        }
    }

    Mat C_blk = Mat::Zero(N * p, N * n);
    for (int t = 0; t < N; ++t) C_blk.block(t * p, t * n, p, n) = ss.C;

    Mat J = C_blk * F;
    Mat L = C_blk * G;

    // Cost absorption: x <- Q^{1/2} x, u <- R^{1/2} u with Q^{1/2} = chol(Q)^T
    // so that ||Q^{1/2} x||^2 = x^T Q x. Disturbances stay untransformed.
    const Mat Qh = cholesky_forward(ss.Q).transpose();   // Q = Qh^T Qh
    const Mat Rh_inv = cholesky_forward(ss.R).transpose().inverse();

    Mat Qh_blk = Mat::Zero(N * n, N * n);
    Mat Rhi_blk = Mat::Zero(N * m, N * m);
    for (int t = 0; t < N; ++t) {
        Qh_blk.block(t * n, t * n, n, n) = Qh;
        Rhi_blk.block(t * m, t * m, m, m) = Rh_inv;
    }

    LiftedSystem sys;
    sys.F = Qh_blk * F * Rhi_blk;
    sys.G = Qh_blk * G;
    sys.J = J * Rhi_blk;
    sys.L = L;
    sys.dims = Dims{n, m, p, N};
    return sys;
}

}  // namespace drregret
