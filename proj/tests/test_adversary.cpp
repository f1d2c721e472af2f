#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "drregret/adversary.hpp"
#include "test_util.hpp"

using namespace drregret;

namespace {

RegretOperator make_regret(const Mat& C) {
    RegretOperator r;
    r.C_K = symmetrized(C);
    Eigen::SelfAdjointEigenSolver<Mat> es(r.C_K);
    r.eigenvalues = es.eigenvalues();
    r.eigenvectors = es.eigenvectors();
    r.lambda_max = r.eigenvalues(r.eigenvalues.size() - 1);
    return r;
}

}  // namespace

TEST_CASE("two-eigenvalue closed form") {
    Mat C = Mat::Zero(2, 2);
    C(0, 0) = 1.0;
    C(1, 1) = -1.0;
    RegretOperator r = make_regret(C);
    AmbiguitySet amb = AmbiguitySet::identity(2, 0.5590169943749474);
    // at gamma = 3: (1/2)^2 + (1/4)^2 = 0.3125 = r^2
    CHECK(worst_case_gamma(r, amb) == doctest::Approx(3.0).epsilon(1e-9));
}

TEST_CASE("scalar closed form gamma = c (1 + 1/r)") {
    for (double c : {0.3, 1.0, 7.5}) {
        for (double radius : {0.1, 1.0, 4.0}) {
            Mat C = c * Mat::Ones(1, 1);
            AmbiguitySet amb = AmbiguitySet::identity(1, radius);
            const double g = worst_case_gamma(make_regret(C), amb);
            CHECK(g == doctest::Approx(c * (1.0 + 1.0 / radius)).epsilon(1e-10));
        }
    }
}

TEST_CASE("isotropic operator gives the closed-form distortion") {
    const double c = 2.0, radius = 1.5;
    const int d = 6;
    RegretOperator r = make_regret(Mat(c * Mat::Identity(d, d)));
    AmbiguitySet amb = AmbiguitySet::identity(d, radius);
    WorstCaseDistribution wc = worst_case_distribution(r, amb);
    const double factor = 1.0 + radius / std::sqrt(double(d));
    CHECK((wc.D - (wc.gamma_star / (wc.gamma_star - c)) * Mat::Identity(d, d)).norm() < 1e-9);
    CHECK((wc.M_star - factor * factor * Mat::Identity(d, d)).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("degenerate and edge cases") {
    RegretOperator zero = make_regret(Mat::Zero(3, 3));
    AmbiguitySet amb = AmbiguitySet::identity(3, 1.0);
    CHECK_THROWS_AS(worst_case_gamma(zero, amb), DomainError);
    CHECK_THROWS_AS(worst_case_distribution(zero, amb), DomainError);

    // r = 0 collapses to the nominal sentinel.
    std::mt19937_64 rng(3);
    Mat C0 = testutil::random_matrix(rng, 4, 4);
    RegretOperator r = make_regret(Mat(C0 + C0.transpose()));
    AmbiguitySet amb0 = AmbiguitySet::identity(4, 0.0);
    WorstCaseDistribution wc = worst_case_distribution(r, amb0);
    CHECK(wc.nominal);
    CHECK((wc.D - Mat::Identity(4, 4)).norm() == 0.0);
    CHECK(wc.expected_regret == doctest::Approx(r.C_K.trace()));
}

TEST_CASE("trace equation, duality and budget tightness on random operators") {
    std::mt19937_64 rng(57);
    for (int trial = 0; trial < 50; ++trial) {
        const int d = 4 + static_cast<int>(rng() % 17);
        Mat C0 = testutil::random_matrix(rng, d, d);
        RegretOperator r = make_regret(Mat(0.5 * (C0 + C0.transpose())));
        if (std::abs(r.lambda_max) < 1e-12) continue;
        AmbiguitySet amb;
        amb.M0 = testutil::random_spd(rng, d, 0.1);
        amb.radius = 0.05 + 3.0 * static_cast<double>(rng() % 1000) / 1000.0;

        const double g = worst_case_gamma(r, amb);
        CHECK(g > std::max(0.0, r.lambda_max));

        WorstCaseDistribution wc = worst_case_distribution(r, amb);
        // trace equation (budget tightness on the ball boundary)
        Mat DmI = wc.D - Mat::Identity(d, d);
        const double budget = (DmI * amb.M0 * DmI.transpose()).trace();
        CHECK(budget == doctest::Approx(amb.radius * amb.radius).epsilon(1e-8));
        // dual value equals the attained expected regret
        CHECK(wc.dual_value ==
              doctest::Approx(wc.expected_regret)
                  .epsilon(1e-6 * std::max(1.0, std::abs(wc.expected_regret))));
    }
}

TEST_CASE("h is strictly decreasing past lambda_max") {
    std::mt19937_64 rng(61);
    Mat C0 = testutil::random_matrix(rng, 8, 8);
    RegretOperator r = make_regret(Mat(0.5 * (C0 + C0.transpose())));
    AmbiguitySet amb = AmbiguitySet::identity(8, 1.0);
    auto h = [&](double g) {
        Mat D = g * (g * Mat::Identity(8, 8) - r.C_K).inverse();
        Mat DmI = D - Mat::Identity(8, 8);
        return (DmI * DmI).trace();
    };
    double prev = h(r.lambda_max * 1.0001 + 0.001);
    for (double f : {1.01, 1.1, 1.5, 3.0, 10.0}) {
        const double cur = h((r.lambda_max + 0.001) * f + 0.1);
        CHECK(cur < prev);
        prev = cur;
    }
}

TEST_CASE("monotone worst-case regret in the radius") {
    std::mt19937_64 rng(67);
    Mat C0 = testutil::random_matrix(rng, 6, 6);
    RegretOperator r = make_regret(Mat(0.5 * (C0 + C0.transpose()) + 0.2 * Mat::Identity(6, 6)));
    double prev = -1e100;
    for (double radius : {0.1, 0.5, 1.0, 2.0, 5.0}) {
        AmbiguitySet amb = AmbiguitySet::identity(6, radius);
        WorstCaseDistribution wc = worst_case_distribution(r, amb);
        CHECK(wc.expected_regret >= prev);
        prev = wc.expected_regret;
    }
}

TEST_CASE("expected regret and cost helpers") {
    std::mt19937_64 rng(71);
    Mat C0 = testutil::random_matrix(rng, 5, 5);
    RegretOperator r = make_regret(Mat(C0 + C0.transpose()));
    CHECK(expected_regret(r, Mat::Zero(5, 5)) == 0.0);
    CHECK(expected_regret(r, Mat::Identity(5, 5)) == doctest::Approx(r.C_K.trace()));

    Mat T = testutil::random_matrix(rng, 4, 5);
    Mat Sigma = testutil::random_spd(rng, 5);
    const double direct = (T.transpose() * T * Sigma).trace();
    CHECK(expected_cost(T, Sigma) == doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("monte carlo agreement with the quadratic-form expectation") {
    std::mt19937_64 rng(73);
    Mat C0 = testutil::random_matrix(rng, 4, 4);
    RegretOperator r = make_regret(Mat(C0 + C0.transpose()));
    Mat Sigma = testutil::random_spd(rng, 4);
    const int count = 100000;
    Mat samples = sample_disturbances(Sigma, count, 12345);
    double acc = 0.0, acc2 = 0.0;
    for (int j = 0; j < count; ++j) {
        const double q = samples.col(j).dot(r.C_K * samples.col(j));
        acc += q;
        acc2 += q * q;
    }
    const double mean = acc / count;
    const double se = std::sqrt((acc2 / count - mean * mean) / count);
    const double expect = expected_regret(r, Sigma);
    CHECK(std::abs(mean - expect) < 3.0 * se + 1e-12);
}

TEST_CASE("sampler determinism and degenerate covariance") {
    Mat Sigma = Mat::Zero(3, 3);
    Mat z = sample_disturbances(Sigma, 10, 9);
    CHECK(z.norm() == 0.0);

    std::mt19937_64 rng(79);
    Mat S = testutil::random_spd(rng, 3);
    Mat a = sample_disturbances(S, 1000, 42);
    Mat b = sample_disturbances(S, 1000, 42);
    CHECK((a - b).norm() == 0.0);
    Mat c = sample_disturbances(S, 1000, 43);
    CHECK((a - c).norm() > 0.0);

    Mat emp = a * a.transpose() / 1000.0;
    CHECK((emp - S).cwiseAbs().maxCoeff() < 0.4);

    Mat notpsd = -Mat::Identity(2, 2);
    CHECK_THROWS_AS(sample_disturbances(notpsd, 5, 1), DomainError);
}

TEST_CASE("cross evaluation table") {
    std::mt19937_64 rng(83);
    std::vector<NamedController> menu;
    for (int i = 0; i < 3; ++i) {
        Mat C0 = testutil::random_matrix(rng, 5, 5);
        NamedController c;
        c.name = "K" + std::to_string(i);
        c.regret = make_regret(Mat(0.5 * (C0 + C0.transpose()) + 0.3 * Mat::Identity(5, 5)));
        menu.push_back(c);
    }
    AmbiguitySet amb = AmbiguitySet::identity(5, 1.2);
    auto rows = cross_evaluate(menu, amb, 1);
    REQUIRE(rows.size() == 3);
    CHECK(rows[1].reduction_percent == doctest::Approx(0.0).epsilon(1e-10));
    for (const auto& row : rows) CHECK(row.own_wc_regret > 0.0);
    // the reference's own row evaluates itself under its own worst case
    CHECK(rows[1].own_wc_regret ==
          doctest::Approx(rows[1].regret_under_reference_wc).epsilon(1e-9));
}
