#include "drregret/factorization.hpp"

#include <cmath>
#include <string>

namespace drregret {

namespace {

void check_symmetric(const Mat& M) {
    const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
    const double asym = (M - M.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-10 * scale) {
        throw FactorizationError("matrix is not symmetric (asymmetry " +
                                     std::to_string(asym) + ")",
                                 -1);
    }
}

Mat exchange_flip(const Mat& M) {
    // E M E with E the anti-diagonal permutation: reverses rows and columns.
    return M.rowwise().reverse().colwise().reverse().eval();
}

}  // namespace

Mat cholesky_forward(const Mat& M) {
    require(M.rows() == M.cols(), "cholesky input must be square");
    check_symmetric(M);
    const Mat A = symmetrized(M);  // absorb roundoff before factoring
    const int d = static_cast<int>(A.rows());
    Mat L = Mat::Zero(d, d);
    for (int j = 0; j < d; ++j) {
        double diag = A(j, j) - L.row(j).head(j).squaredNorm();
        if (diag <= 0.0 || !std::isfinite(diag)) {
            throw FactorizationError(
                "matrix is not positive definite (pivot " + std::to_string(j) + ")", j);
        }
        L(j, j) = std::sqrt(diag);
        if (j + 1 < d) {
            L.col(j).tail(d - j - 1) =
                (A.col(j).tail(d - j - 1) -
                 L.bottomLeftCorner(d - j - 1, j) * L.row(j).head(j).transpose()) /
                L(j, j);
        }
    }
    return L;
}

Mat cholesky_reverse(const Mat& M) {
    require(M.rows() == M.cols(), "cholesky input must be square");
    check_symmetric(M);
    const Mat L0 = cholesky_forward(exchange_flip(M));
    return exchange_flip(Mat(L0.transpose()));
}

std::pair<Mat, Mat> causal_split(const Mat& M, int row_block, int col_block) {
    Mat causal = block_lower_part(M, row_block, col_block, /*strict=*/false);
    return {causal, M - causal};
}

FactorizationSet build_factorizations(const LiftedSystem& sys) {
    const Dims d = sys.dims;
    const int nx = d.nx();
    const int nu = d.nu();
    const int ny = d.ny();

    FactorizationSet fs;
    fs.dims = d;
    fs.T = Mat::Identity(nu, nu) + sys.F.transpose() * sys.F;
    fs.U = Mat::Identity(ny, ny) + sys.L * sys.L.transpose();
    fs.S = Mat::Identity(nx, nx) + sys.F * sys.F.transpose();
    fs.V = Mat::Identity(nx, nx) + sys.L.transpose() * sys.L;

    fs.S_half = cholesky_forward(fs.S);
    fs.U_half = cholesky_forward(fs.U);
    fs.T_half = cholesky_reverse(fs.T);
    fs.V_half = cholesky_reverse(fs.V);

    // Theta = blkdiag(S^{-1/2}, T^{-T/2}) [[I, -F],[F^T, I]]
    Mat pre = Mat::Zero(nx + nu, nx + nu);
    pre.topLeftCorner(nx, nx) = Mat::Identity(nx, nx);
    pre.topRightCorner(nx, nu) = -sys.F;
    pre.bottomLeftCorner(nu, nx) = sys.F.transpose();
    pre.bottomRightCorner(nu, nu) = Mat::Identity(nu, nu);

    fs.Theta = Mat::Zero(nx + nu, nx + nu);
    fs.Theta.topRows(nx) =
        fs.S_half.triangularView<Eigen::Lower>().solve(Mat(pre.topRows(nx)));
    fs.Theta.bottomRows(nu) = fs.T_half.transpose()
                                  .triangularView<Eigen::Upper>()
                                  .solve(Mat(pre.bottomRows(nu)));

    // Psi = [[I, L^T],[-L, I]] blkdiag(V^{-1/2}, U^{-T/2})
    Mat post = Mat::Zero(nx + ny, nx + ny);
    post.topLeftCorner(nx, nx) = Mat::Identity(nx, nx);
    post.topRightCorner(nx, ny) = sys.L.transpose();
    post.bottomLeftCorner(ny, nx) = -sys.L;
    post.bottomRightCorner(ny, ny) = Mat::Identity(ny, ny);

    fs.Psi = Mat::Zero(nx + ny, nx + ny);
    // right-multiplication by V^{-1/2} / U^{-T/2} via transposed solves
    fs.Psi.leftCols(nx) = fs.V_half.transpose()
                              .triangularView<Eigen::Upper>()
                              .solve(Mat(post.leftCols(nx).transpose()))
                              .transpose();
    fs.Psi.rightCols(ny) = fs.U_half.triangularView<Eigen::Lower>()
                               .solve(Mat(post.rightCols(ny).transpose()))
                               .transpose();

    const double theta_err =
        (fs.Theta.transpose() * fs.Theta - Mat::Identity(nx + nu, nx + nu))
            .cwiseAbs()
            .maxCoeff();
    const double psi_err =
        (fs.Psi.transpose() * fs.Psi - Mat::Identity(nx + ny, nx + ny))
            .cwiseAbs()
            .maxCoeff();
    if (theta_err > 1e-8 || psi_err > 1e-8) {
        throw ConsistencyError("Theta/Psi failed the orthogonality check (residuals " +
                               std::to_string(theta_err) + ", " + std::to_string(psi_err) +
                               "); square-root orientation is wrong");
    }

    // W = -T^{-T/2} F^T G L^T U^{-T/2},  P = V^{-T/2} G^T F T^{-1/2}
    Mat core = sys.F.transpose() * sys.G * sys.L.transpose();  // Nm x Np
    Mat W_left = fs.T_half.transpose().triangularView<Eigen::Upper>().solve(core);
    fs.W = -fs.U_half.triangularView<Eigen::Lower>()
                .solve(Mat(W_left.transpose()))
                .transpose();

    Mat Pcore = sys.G.transpose() * sys.F;  // Nn x Nm
    Mat P_left = fs.V_half.transpose().triangularView<Eigen::Upper>().solve(Pcore);
    fs.P = fs.T_half.transpose()
               .triangularView<Eigen::Upper>()
               .solve(Mat(P_left.transpose()))
               .transpose();

    return fs;
}

GammaOperators gamma_operators(const FactorizationSet& fs, double gamma) {
    if (!(gamma > 0.0)) throw DomainError("gamma must be positive");
    const int nu = fs.dims.nu();

    GammaOperators g;
    g.gamma = gamma;
    Mat Msq = (1.0 / gamma) * Mat::Identity(nu, nu) +
              (1.0 / (gamma * gamma)) * (fs.P.transpose() * fs.P);
    g.M_gamma = cholesky_reverse(Msq);
    g.W_gamma = g.M_gamma * fs.W;
    auto parts = causal_split(g.W_gamma, fs.dims.m, fs.dims.p);
    g.W_plus = parts.first;
    g.W_minus = parts.second;
    g.H_gamma =
        g.M_gamma.triangularView<Eigen::Lower>().solve(g.W_plus) - fs.W;
    return g;
}

}  // namespace drregret
