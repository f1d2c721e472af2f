#include <doctest.h>

#include <Eigen/SVD>

#include "drregret/baselines.hpp"
#include "drregret/synthesis.hpp"
#include "test_util.hpp"

using namespace drregret;

namespace {

// Least-squares oracle: minimize ||T_K(E)||_F over causal E directly in the
// free lower-triangular entries.
Mat lqg_by_least_squares(const LiftedSystem& sys) {
    const Dims d = sys.dims;
    std::vector<std::pair<int, int>> free_entries;
    for (int k = 0; k < d.nu(); ++k)
        for (int l = 0; l < d.ny(); ++l)
            if (l / d.p <= k / d.m) free_entries.emplace_back(k, l);
    Mat zero = Mat::Zero(d.nu(), d.ny());
    Mat base = transfer_operator(zero, sys);
    Mat M(base.size(), free_entries.size());
    for (size_t i = 0; i < free_entries.size(); ++i) {
        Mat basis = zero;
        basis(free_entries[i].first, free_entries[i].second) = 1.0;
        Mat col = transfer_operator(basis, sys) - base;
        M.col(i) = Eigen::Map<Vec>(col.data(), col.size());
    }
    Vec b = -Eigen::Map<Vec>(base.data(), base.size());
    Vec sol = M.colPivHouseholderQr().solve(b);
    Mat E = zero;
    for (size_t i = 0; i < free_entries.size(); ++i)
        E(free_entries[i].first, free_entries[i].second) = sol[i];
    return E;
}

}  // namespace

TEST_CASE("lqg closed form matches the least-squares oracle") {
    Mat A(1, 1), B(1, 1), C(1, 1);
    A << 0.5;
    B << 1.0;
    C << 1.0;
    LiftedSystem sys = lift_system(make_state_space(A, B, C), 3);
    FactorizationSet fs = build_factorizations(sys);
    ControllerOperators lqg = lqg_controller(fs, sys);
    Mat E_oracle = lqg_by_least_squares(sys);
    CHECK((lqg.E - E_oracle).cwiseAbs().maxCoeff() < 1e-9);

    std::mt19937_64 rng(101);
    for (int trial = 0; trial < 3; ++trial) {
        StateSpace ss = testutil::random_system(rng, 2, 1, 2, trial != 1);
        LiftedSystem sys2 = lift_system(ss, 4);
        FactorizationSet fs2 = build_factorizations(sys2);
        ControllerOperators lqg2 = lqg_controller(fs2, sys2);
        Mat E2 = lqg_by_least_squares(sys2);
        CHECK((lqg2.E - E2).cwiseAbs().maxCoeff() < 1e-8);
        CHECK(lqg2.causal);
    }
}

TEST_CASE("anticausal W makes open loop optimal") {
    // With C = 0 the coupling W vanishes, so the causal part is zero and the
    // stochastically optimal controller is open loop.
    Mat A(1, 1), B(1, 1), C(1, 1);
    A << 0.6;
    B << 1.0;
    C << 0.0;
    LiftedSystem sys = lift_system(make_state_space(A, B, C), 4);
    FactorizationSet fs = build_factorizations(sys);
    CHECK(fs.W.cwiseAbs().maxCoeff() < 1e-14);
    ControllerOperators lqg = lqg_controller(fs, sys);
    CHECK(lqg.E.norm() == 0.0);
    CHECK(lqg.K.norm() == 0.0);
}

TEST_CASE("lqg expected nominal cost decomposition") {
    std::mt19937_64 rng(103);
    StateSpace ss = testutil::random_system(rng, 3, 2, 2);
    LiftedSystem sys = lift_system(ss, 5);
    FactorizationSet fs = build_factorizations(sys);
    ControllerOperators k0 = noncausal_benchmark(sys, fs);
    ControllerOperators lqg = lqg_controller(fs, sys);
    auto parts = causal_split(fs.W, sys.dims.m, sys.dims.p);
    const double expect = k0.T_K.squaredNorm() + parts.second.squaredNorm();
    CHECK(lqg.T_K.squaredNorm() == doctest::Approx(expect).epsilon(1e-9));
}

TEST_CASE("hinf on a plant without actuation or sensing") {
    Mat A(1, 1), B(1, 1), C(1, 1);
    A << 0.5;
    B << 0.0;
    C << 0.0;
    LiftedSystem sys = lift_system(make_state_space(A, B, C), 3);
    HinfResult h = hinf_controller(sys);
    CHECK(h.controller.E.cwiseAbs().maxCoeff() < 1e-5);
    Eigen::JacobiSVD<Mat> svd(sys.G);
    CHECK(h.operator_norm == doctest::Approx(svd.singularValues()(0)).epsilon(1e-6));
}

TEST_CASE("hinf level matches a grid oracle on a scalar two-step plant") {
    Mat A(1, 1), B(1, 1), C(1, 1);
    A << 0.8;
    B << 1.0;
    C << 1.0;
    LiftedSystem sys = lift_system(make_state_space(A, B, C), 2);
    HinfResult h = hinf_controller(sys);

    // brute force over the three free entries of E
    auto opnorm = [&](double e00, double e10, double e11) {
        Mat E(2, 2);
        E << e00, 0.0, e10, e11;
        Eigen::JacobiSVD<Mat> svd(transfer_operator(E, sys));
        return svd.singularValues()(0);
    };
    double best = 1e100;
    Vec bestv(3);
    for (double a = -1.0; a <= 1.0; a += 0.05)
        for (double b = -1.0; b <= 1.0; b += 0.05)
            for (double c = -1.0; c <= 1.0; c += 0.05)
                if (opnorm(a, b, c) < best) {
                    best = opnorm(a, b, c);
                    bestv << a, b, c;
                }
    // local refinement
    double step = 0.05;
    while (step > 1e-6) {
        bool improved = false;
        for (int i = 0; i < 3; ++i)
            for (double sgn : {-1.0, 1.0}) {
                Vec cand = bestv;
                cand[i] += sgn * step;
                const double val = opnorm(cand[0], cand[1], cand[2]);
                if (val < best) {
                    best = val;
                    bestv = cand;
                    improved = true;
                }
            }
        if (!improved) step *= 0.5;
    }
    CHECK(h.operator_norm == doctest::Approx(best).epsilon(1e-4));

    FactorizationSet fs = build_factorizations(sys);
    ControllerOperators lqg = lqg_controller(fs, sys);
    Eigen::JacobiSVD<Mat> svd_lqg(lqg.T_K);
    CHECK(h.operator_norm <= svd_lqg.singularValues()(0) + 1e-6);
    // the central controller stays within the declared level
    CHECK(h.achieved_norm <= h.level * (1.0 + 1e-9));
}

TEST_CASE("regret-level synthesis agrees with the bisection route") {
    std::mt19937_64 rng(107);
    for (int trial = 0; trial < 3; ++trial) {
        StateSpace ss = testutil::random_system(rng, 2, 1, 1);
        LiftedSystem sys = lift_system(ss, 5);
        FactorizationSet fs = build_factorizations(sys);
        RomfResult r = ro_mf_controller(fs, sys);
        const double by_bisection = ro_mf_gamma_by_bisection(fs);
        CHECK(r.gamma_ro == doctest::Approx(by_bisection).epsilon(1e-4));
        CHECK(r.controller.causal);
        // the synthesized controller attains the level it reports
        ControllerOperators k0 = noncausal_benchmark(sys, fs);
        RegretOperator reg = regret_operator(r.controller.T_K, k0.T_K);
        CHECK(reg.lambda_max <= r.gamma_ro * (1.0 + 1e-5) + 1e-7);
    }
}

TEST_CASE("zero-coupling plant has zero regret level") {
    Mat A(1, 1), B(1, 1), C(1, 1);
    A << 0.6;
    B << 1.0;
    C << 0.0;
    LiftedSystem sys = lift_system(make_state_space(A, B, C), 3);
    FactorizationSet fs = build_factorizations(sys);
    CHECK(fs.W.norm() == 0.0);
    RomfResult r = ro_mf_controller(fs, sys);
    CHECK(r.gamma_ro < 1e-5);
    CHECK(r.controller.E.cwiseAbs().maxCoeff() < 1e-4);
    CHECK(ro_mf_gamma_by_bisection(fs) == 0.0);
}

TEST_CASE("regret-level optimum beats other causal controllers") {
    std::mt19937_64 rng(109);
    StateSpace ss = testutil::random_system(rng, 2, 1, 2);
    LiftedSystem sys = lift_system(ss, 4);
    FactorizationSet fs = build_factorizations(sys);
    ControllerOperators k0 = noncausal_benchmark(sys, fs);
    RomfResult romf = ro_mf_controller(fs, sys);
    const double lam_romf = regret_operator(romf.controller.T_K, k0.T_K).lambda_max;

    ControllerOperators lqg = lqg_controller(fs, sys);
    CHECK(lam_romf <= regret_operator(lqg.T_K, k0.T_K).lambda_max + 1e-6);
    HinfResult h = hinf_controller(sys);
    CHECK(lam_romf <= regret_operator(h.controller.T_K, k0.T_K).lambda_max + 1e-6);
    for (int t = 0; t < 3; ++t) {
        Mat E = testutil::random_causal(rng, 4, 1, 2, 0.5);
        ControllerOperators ops = controller_from_youla_full(E, sys);
        CHECK(lam_romf <= regret_operator(ops.T_K, k0.T_K).lambda_max + 1e-6);
    }
}
