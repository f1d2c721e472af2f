#include <doctest.h>

#include "drregret/experiment.hpp"
#include "drregret/lifting.hpp"
#include "test_util.hpp"

using namespace drregret;
using testutil::random_matrix;

namespace {

// Stacks x_1..x_N from the raw recursion with x_0 = 0 and returns the
// weighted coordinates for comparison against the lifted operators.
struct SimOut {
    Vec x_weighted;
    Vec y;
};

SimOut simulate(const StateSpace& ss, int N, const Vec& u_raw, const Vec& w) {
    const int n = ss.n(), m = ss.m(), p = ss.p();
    Mat Qh = Mat(Eigen::LLT<Mat>(ss.Q).matrixL()).transpose();
    SimOut out;
    out.x_weighted = Vec::Zero(N * n);
    out.y = Vec::Zero(N * p);
    Vec x = Vec::Zero(n);
    for (int t = 0; t < N; ++t) {
        out.x_weighted.segment(t * n, n) = Qh * x;
        out.y.segment(t * p, p) = ss.C * x;
        x = ss.A * x + ss.B * u_raw.segment(t * m, m) + w.segment(t * n, n);
    }
    return out;
}

}  // namespace

TEST_CASE("single-step horizon leaves no propagation") {
    std::mt19937_64 rng(1);
    StateSpace ss = testutil::random_system(rng, 3, 2, 2);
    LiftedSystem sys = lift_system(ss, 1);
    CHECK(sys.F.cwiseAbs().maxCoeff() == 0.0);
    CHECK(sys.G.cwiseAbs().maxCoeff() == 0.0);
    CHECK(sys.J.cwiseAbs().maxCoeff() == 0.0);
    CHECK(sys.L.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("scalar three-step system unrolls by hand") {
    Mat A(1, 1), B(1, 1), C(1, 1);
    A << 0.5;
    B << 1.0;
    C << 1.0;
    LiftedSystem sys = lift_system(make_state_space(A, B, C), 3);
    Mat G(3, 3);
    G << 0, 0, 0,
        1, 0, 0,
        0.5, 1, 0;
    CHECK((sys.G - G).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((sys.F - G).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((sys.J - G).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((sys.L - G).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("boeing preset dimensions and leading block") {
    StateSpace ss = boeing747();
    LiftedSystem sys = lift_system(ss, 10);
    CHECK(sys.F.rows() == 40);
    CHECK(sys.F.cols() == 20);
    CHECK(sys.G.rows() == 40);
    CHECK(sys.G.cols() == 40);
    CHECK(sys.J.rows() == 20);
    CHECK(sys.J.cols() == 20);
    CHECK(sys.L.rows() == 20);
    CHECK(sys.L.cols() == 40);
    // With Q = R = I the first subdiagonal block of F is B itself.
    CHECK((sys.F.block(4, 0, 4, 2) - ss.B).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("lifted operators reproduce the stacked recursion") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 5; ++trial) {
        const bool idw = trial % 2 == 0;
        StateSpace ss = testutil::random_system(rng, 3, 2, 2, idw);
        const int N = 6;
        LiftedSystem sys = lift_system(ss, N);

        Vec u = random_matrix(rng, N * ss.m(), 1);
        Vec w = random_matrix(rng, N * ss.n(), 1);
        Mat Rh = Mat(Eigen::LLT<Mat>(ss.R).matrixL()).transpose();
        Vec u_weighted(N * ss.m());
        for (int t = 0; t < N; ++t)
            u_weighted.segment(t * ss.m(), ss.m()) = Rh * u.segment(t * ss.m(), ss.m());

        SimOut sim = simulate(ss, N, u, w);
        Vec x_op = sys.F * u_weighted + sys.G * w;
        Vec y_op = sys.J * u_weighted + sys.L * w;
        const double xscale = std::max(1.0, sim.x_weighted.norm());
        CHECK((x_op - sim.x_weighted).norm() / xscale < 1e-10);
        CHECK((y_op - sim.y).norm() / std::max(1.0, sim.y.norm()) < 1e-10);
    }
}

TEST_CASE("block toeplitz structure and strict causality") {
    std::mt19937_64 rng(11);
    StateSpace ss = testutil::random_system(rng, 2, 2, 1);
    const int N = 5;
    LiftedSystem sys = lift_system(ss, N);
    const int n = 2, m = 2;
    for (int t = 0; t + 1 < N; ++t)
        for (int k = 0; k + 1 < N; ++k) {
            Mat d = sys.F.block(t * n, k * m, n, m) - sys.F.block((t + 1) * n, (k + 1) * m, n, m);
            CHECK(d.cwiseAbs().maxCoeff() < 1e-13);
            Mat dg = sys.G.block(t * n, k * n, n, n) - sys.G.block((t + 1) * n, (k + 1) * n, n, n);
            CHECK(dg.cwiseAbs().maxCoeff() < 1e-13);
        }
    CHECK(sys.F.topRows(n).cwiseAbs().maxCoeff() == 0.0);
    CHECK(sys.G.topRows(n).cwiseAbs().maxCoeff() == 0.0);
    CHECK(sys.J.topRows(1).cwiseAbs().maxCoeff() == 0.0);
    CHECK(sys.L.topRows(1).cwiseAbs().maxCoeff() == 0.0);
    CHECK(is_block_lower(sys.F, n, m, /*strict=*/true));
    CHECK(is_block_lower(sys.G, n, n, /*strict=*/true));
}

TEST_CASE("invalid inputs are rejected") {
    std::mt19937_64 rng(3);
    StateSpace ss = testutil::random_system(rng, 2, 1, 1);
    CHECK_THROWS_AS(lift_system(ss, 0), DomainError);
    StateSpace bad = ss;
    bad.Q(0, 1) = 5.0;
    bad.Q(1, 0) = 5.0;  // symmetric but indefinite
    CHECK_THROWS_AS(lift_system(bad, 3), FactorizationError);
}
