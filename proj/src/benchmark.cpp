#include "drregret/benchmark.hpp"

#include <Eigen/Eigenvalues>
#include <string>

namespace drregret {

namespace {

// Solves (I + M) X = B by LU with a conditioning check; M strictly causal
// products keep I + M block-unitriangular, but noncausal inputs can make it
// singular.
Mat solve_plus_identity(const Mat& M, const Mat& B, const char* what) {
    const int d = static_cast<int>(M.rows());
    Mat A = Mat::Identity(d, d) + M;
    Eigen::FullPivLU<Mat> lu(A);
    if (!lu.isInvertible()) {
        throw ConsistencyError(std::string(what) +
                               ": matrix I + product is singular (rcond ~ " +
                               std::to_string(lu.rcond()) + ")");
    }
    return lu.solve(B);
}

}  // namespace

Mat transfer_operator(const Mat& E, const LiftedSystem& sys) {
    const Dims d = sys.dims;
    require(E.rows() == d.nu() && E.cols() == d.ny(), "E must be Nm x Np");
    Mat T_K(d.nx() + d.nu(), d.nx() + d.ny());
    Mat EL = E * sys.L;
    T_K.topLeftCorner(d.nx(), d.nx()) = sys.F * EL + sys.G;
    T_K.topRightCorner(d.nx(), d.ny()) = sys.F * E;
    T_K.bottomLeftCorner(d.nu(), d.nx()) = EL;
    T_K.bottomRightCorner(d.nu(), d.ny()) = E;
    return T_K;
}

Mat controller_from_youla(const Mat& E, const LiftedSystem& sys) {
    require(E.rows() == sys.dims.nu() && E.cols() == sys.dims.ny(), "E must be Nm x Np");
    return solve_plus_identity(E * sys.J, E, "controller recovery");
}

Mat youla_from_controller(const Mat& K, const LiftedSystem& sys) {
    require(K.rows() == sys.dims.nu() && K.cols() == sys.dims.ny(), "K must be Nm x Np");
    // E = K (I - J K)^{-1}, taken through the transposed system.
    Mat M = (-sys.J * K).transpose();
    return solve_plus_identity(M, K.transpose(), "youla recovery").transpose();
}

ControllerOperators controller_from_youla_full(const Mat& E, const LiftedSystem& sys) {
    ControllerOperators c;
    c.E = E;
    c.K = controller_from_youla(E, sys);
    c.T_K = transfer_operator(E, sys);
    c.causal = is_block_lower(E, sys.dims.m, sys.dims.p, false, 1e-9 * std::max(1.0, E.cwiseAbs().maxCoeff()));
    return c;
}

ControllerOperators noncausal_benchmark(const LiftedSystem& sys, const FactorizationSet& fs) {
    // E0 = -T^{-1} F^T G L^T U^{-1}
    Mat core = sys.F.transpose() * sys.G * sys.L.transpose();
    Mat E0 = -fs.U.llt().solve(fs.T.llt().solve(core).transpose()).transpose();
    ControllerOperators c = controller_from_youla_full(E0, sys);
    c.causal = false;
    return c;
}

RegretOperator regret_operator(const Mat& T_K, const Mat& T_K0) {
    require(T_K.rows() == T_K0.rows() && T_K.cols() == T_K0.cols(),
            "transfer operators must have matching shapes");
    RegretOperator r;
    r.C_K = symmetrized(T_K.transpose() * T_K - T_K0.transpose() * T_K0);
    Eigen::SelfAdjointEigenSolver<Mat> es(r.C_K);
    r.eigenvalues = es.eigenvalues();
    r.eigenvectors = es.eigenvectors();
    r.lambda_max = r.eigenvalues(r.eigenvalues.size() - 1);
    return r;
}

}  // namespace drregret
