#include <doctest.h>

#include <Eigen/QR>

#include "drregret/benchmark.hpp"
#include "test_util.hpp"

using namespace drregret;
using testutil::random_matrix;

namespace {

// Linear map E -> vec(T_K(E)) for the unconstrained least-squares oracle.
Mat transfer_linear_map(const LiftedSystem& sys) {
    const Dims d = sys.dims;
    const int ne = d.nu() * d.ny();
    Mat M(transfer_operator(Mat::Zero(d.nu(), d.ny()), sys).size(), ne);
    Mat zero = Mat::Zero(d.nu(), d.ny());
    Mat base = transfer_operator(zero, sys);
    for (int k = 0; k < d.nu(); ++k)
        for (int l = 0; l < d.ny(); ++l) {
            Mat basis = zero;
            basis(k, l) = 1.0;
            Mat col = transfer_operator(basis, sys) - base;
            M.col(k * d.ny() + l) = Eigen::Map<Vec>(col.data(), col.size());
        }
    return M;
}

double closed_loop_cost(const StateSpace& ss, const Mat& K_weighted, int N, const Vec& w,
                        const Vec& v) {
    const int n = ss.n(), m = ss.m(), p = ss.p();
    Mat Rh = Mat(Eigen::LLT<Mat>(ss.R).matrixL()).transpose();
    Mat Rh_inv = Rh.inverse();
    Vec x = Vec::Zero(n);
    Vec ys = Vec::Zero(N * p);
    double cost = 0.0;
    for (int t = 0; t < N; ++t) {
        ys.segment(t * p, p) = ss.C * x + v.segment(t * p, p);
        // u depends on measurements up to and including time t
        Vec u_w = K_weighted.block(t * m, 0, m, (t + 1) * p) * ys.head((t + 1) * p);
        Vec u = Rh_inv * u_w;
        cost += x.dot(ss.Q * x) + u.dot(ss.R * u);
        x = ss.A * x + ss.B * u + w.segment(t * n, n);
    }
    return cost;
}

}  // namespace

TEST_CASE("transfer operator blocks") {
    std::mt19937_64 rng(17);
    StateSpace ss = testutil::random_system(rng, 2, 1, 1);
    LiftedSystem sys = lift_system(ss, 4);
    Mat E0 = Mat::Zero(4, 4);
    Mat T0 = transfer_operator(E0, sys);
    CHECK((T0.topLeftCorner(8, 8) - sys.G).norm() == 0.0);
    CHECK(T0.topRightCorner(8, 4).norm() == 0.0);
    CHECK(T0.bottomRows(4).norm() == 0.0);
}

TEST_CASE("noncausal benchmark minimizes the Frobenius norm over all E") {
    Mat A(1, 1), B(1, 1), C(1, 1);
    A << 0.5;
    B << 1.0;
    C << 1.0;
    LiftedSystem sys = lift_system(make_state_space(A, B, C), 3);
    FactorizationSet fs = build_factorizations(sys);
    ControllerOperators k0 = noncausal_benchmark(sys, fs);

    Mat M = transfer_linear_map(sys);
    Mat base = transfer_operator(Mat::Zero(3, 3), sys);
    Vec b = -Eigen::Map<Vec>(base.data(), base.size());
    Vec e_star = M.colPivHouseholderQr().solve(b);
    // the linear map used (k,l) -> k*ny + l; rebuild the matrix accordingly
    Mat E_expect(3, 3);
    for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) E_expect(k, l) = e_star[k * 3 + l];
    CHECK((k0.E - E_expect).cwiseAbs().maxCoeff() < 1e-8);
    CHECK_FALSE(k0.causal);
}

TEST_CASE("degenerate plant gives zero benchmark") {
    // Zero C wipes out L and J, so the optimal noncausal parameter is zero.
    Mat A(1, 1), B(1, 1), C(1, 1);
    A << 0.4;
    B << 1.0;
    C << 0.0;
    LiftedSystem sys = lift_system(make_state_space(A, B, C), 3);
    FactorizationSet fs = build_factorizations(sys);
    ControllerOperators k0 = noncausal_benchmark(sys, fs);
    CHECK(k0.E.norm() == 0.0);
    CHECK(k0.K.norm() == 0.0);
    Mat T0 = transfer_operator(Mat::Zero(3, 3), sys);
    CHECK((k0.T_K - T0).norm() == 0.0);
}

TEST_CASE("closed-loop simulation matches the quadratic form") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 4; ++trial) {
        StateSpace ss = testutil::random_system(rng, 2, 2, 2, trial % 2 == 0);
        const int N = 5;
        LiftedSystem sys = lift_system(ss, N);
        Mat E = testutil::random_causal(rng, N, ss.m(), ss.p(), 0.4);
        ControllerOperators ops = controller_from_youla_full(E, sys);
        CHECK(ops.causal);

        Vec w = random_matrix(rng, N * ss.n(), 1);
        Vec v = random_matrix(rng, N * ss.p(), 1);
        const double sim = closed_loop_cost(ss, ops.K, N, w, v);
        Vec wv(N * (ss.n() + ss.p()));
        wv << w, v;
        const double quad = wv.dot(ops.T_K.transpose() * ops.T_K * wv);
        CHECK(sim == doctest::Approx(quad).epsilon(1e-9));
    }
}

TEST_CASE("youla round trips") {
    std::mt19937_64 rng(29);
    StateSpace ss = testutil::random_system(rng, 3, 2, 2);
    const int N = 4;
    LiftedSystem sys = lift_system(ss, N);

    Mat E = Mat::Zero(N * 2, N * 2);
    CHECK(controller_from_youla(E, sys).norm() == 0.0);

    Mat K = testutil::random_causal(rng, N, 2, 2, 0.6);
    Mat E2 = youla_from_controller(K, sys);
    Mat K2 = controller_from_youla(E2, sys);
    CHECK((K2 - K).cwiseAbs().maxCoeff() < 1e-10);

    Mat Ec = testutil::random_causal(rng, N, 2, 2, 0.6);
    Mat Kc = controller_from_youla(Ec, sys);
    Mat Ec2 = youla_from_controller(Kc, sys);
    CHECK((Ec2 - Ec).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(is_block_lower(Kc, 2, 2, false, 1e-12));
}

TEST_CASE("regret operator and the rotated-coordinates identity") {
    std::mt19937_64 rng(31);
    StateSpace ss = testutil::random_system(rng, 2, 1, 2);
    const int N = 5;
    LiftedSystem sys = lift_system(ss, N);
    FactorizationSet fs = build_factorizations(sys);
    ControllerOperators k0 = noncausal_benchmark(sys, fs);

    SUBCASE("zero regret against itself") {
        RegretOperator r = regret_operator(k0.T_K, k0.T_K);
        CHECK(r.C_K.norm() == 0.0);
        CHECK(r.lambda_max == 0.0);
    }

    SUBCASE("identity in rotated coordinates for random causal controllers") {
        for (int trial = 0; trial < 3; ++trial) {
            Mat E = testutil::random_causal(rng, N, ss.m(), ss.p(), 0.5);
            ControllerOperators ops = controller_from_youla_full(E, sys);
            RegretOperator r = regret_operator(ops.T_K, k0.T_K);

            Mat Z = fs.T_half * E * fs.U_half - fs.W;
            Mat Cbar = fs.Psi.transpose() * r.C_K * fs.Psi;
            const int nx = sys.dims.nx(), ny = sys.dims.ny();
            Mat expect = Mat::Zero(nx + ny, nx + ny);
            expect.topRightCorner(nx, ny) = fs.P * Z;
            expect.bottomLeftCorner(ny, nx) = Z.transpose() * fs.P.transpose();
            expect.bottomRightCorner(ny, ny) = Z.transpose() * Z;
            const double scale = std::max(1.0, expect.cwiseAbs().maxCoeff());
            CHECK((Cbar - expect).cwiseAbs().maxCoeff() / scale < 1e-8);

            // trace of the regret operator is the squared size of Z
            CHECK(r.C_K.trace() ==
                  doctest::Approx(Z.squaredNorm()).epsilon(1e-8));
            CHECK(r.C_K.trace() >= 0.0);

            // Frobenius decomposition of the closed-loop norm
            CHECK(ops.T_K.squaredNorm() ==
                  doctest::Approx(k0.T_K.squaredNorm() + Z.squaredNorm()).epsilon(1e-8));
        }
    }

    SUBCASE("eigen decomposition is cached consistently") {
        Mat E = testutil::random_causal(rng, N, ss.m(), ss.p(), 0.5);
        ControllerOperators ops = controller_from_youla_full(E, sys);
        RegretOperator r = regret_operator(ops.T_K, k0.T_K);
        Mat recon = r.eigenvectors * r.eigenvalues.asDiagonal() * r.eigenvectors.transpose();
        CHECK((recon - r.C_K).cwiseAbs().maxCoeff() < 1e-9);
        CHECK(r.lambda_max == doctest::Approx(r.eigenvalues.maxCoeff()));
        CHECK(r.lambda_max > 0.0);
    }
}
