#include "drregret/adversary.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <future>
#include <limits>
#include <random>

namespace drregret {

AmbiguitySet AmbiguitySet::identity(int dim, double radius) {
    AmbiguitySet a;
    a.M0 = Mat::Identity(dim, dim);
    a.radius = radius;
    return a;
}

namespace {

void check_ambiguity(const RegretOperator& C_K, const AmbiguitySet& amb) {
    require(amb.M0.rows() == amb.M0.cols(), "M0 must be square");
    require(amb.M0.rows() == C_K.C_K.rows(), "M0 and C_K dimensions differ");
    require(amb.radius >= 0.0, "radius must be nonnegative");
}

// Weights m_i = (V^T M0 V)_ii in the eigenbasis of C_K.
Vec eigenbasis_weights(const RegretOperator& C_K, const Mat& M0) {
    Mat MV = M0.selfadjointView<Eigen::Lower>() * C_K.eigenvectors;
    Vec w(C_K.eigenvalues.size());
    for (int i = 0; i < w.size(); ++i) w[i] = C_K.eigenvectors.col(i).dot(MV.col(i));
    return w.cwiseMax(0.0);
}

double h_of_gamma(const Vec& lam, const Vec& w, double gamma) {
    double acc = 0.0;
    for (int i = 0; i < lam.size(); ++i) {
        const double q = lam[i] / (gamma - lam[i]);
        acc += q * q * w[i];
    }
    return acc;
}

double h_prime(const Vec& lam, const Vec& w, double gamma) {
    double acc = 0.0;
    for (int i = 0; i < lam.size(); ++i) {
        const double d = gamma - lam[i];
        acc += -2.0 * lam[i] * lam[i] * w[i] / (d * d * d);
    }
    return acc;
}

}  // namespace

double worst_case_gamma(const RegretOperator& C_K, const AmbiguitySet& amb, double tol) {
    check_ambiguity(C_K, amb);
    const double r = amb.radius;
    if (!(r > 0.0)) throw DomainError("worst_case_gamma requires a positive radius");
    const Vec& lam = C_K.eigenvalues;
    const double lmax = C_K.lambda_max;
    const double scale = lam.cwiseAbs().maxCoeff();
    if (scale == 0.0 || std::abs(lmax) <= 1e-14 * scale)
        throw DomainError("degenerate regret operator: lambda_max is zero");

    const Vec w = eigenbasis_weights(C_K, amb.M0);
    const double r2 = r * r;

    double lo = std::max(0.0, lmax) + 1e-10 * std::max(1.0, std::abs(lmax));
    // Upper bound: h(gamma) <= sum(lam_i^2 w_i) / (gamma - lmax)^2.
    const double wsum = (lam.array().square() * w.array()).sum();
    double hi = std::max(0.0, lmax) + std::sqrt(wsum) / r + 1e-8;
    int guard = 0;
    while (h_of_gamma(lam, w, hi) > r2) {
        hi = std::max(0.0, lmax) + 2.0 * (hi - std::max(0.0, lmax));
        if (++guard > 200) throw ConsistencyError("worst-case bracket expansion diverged");
    }
    if (h_of_gamma(lam, w, lo) < r2) {
        // Only possible when lambda_max < 0 or the directional weight at the
        // top eigenvalue vanishes: the ball cannot reach this distortion.
        throw DomainError("ambiguity radius exceeds the reachable distortion for this operator");
    }

    for (int it = 0; it < 200 && hi - lo > 1e-3 * tol * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (h_of_gamma(lam, w, mid) > r2 ? lo : hi) = mid;
    }
    // Newton polish on h(gamma) - r^2 = 0, safeguarded by the bracket.
    double g = 0.5 * (lo + hi);
    for (int it = 0; it < 60; ++it) {
        const double f = h_of_gamma(lam, w, g) - r2;
        const double fp = h_prime(lam, w, g);
        if (fp == 0.0) break;
        double gn = g - f / fp;
        if (!(gn > lo && gn < hi)) gn = 0.5 * (lo + hi);
        (f > 0.0 ? lo : hi) = g;
        if (std::abs(gn - g) <= tol * std::max(1.0, g)) {
            g = gn;
            break;
        }
        g = gn;
    }
    return g;
}

WorstCaseDistribution worst_case_distribution(const RegretOperator& C_K,
                                              const AmbiguitySet& amb) {
    check_ambiguity(C_K, amb);
    WorstCaseDistribution out;
    const int d = static_cast<int>(amb.M0.rows());
    if (amb.radius == 0.0) {
        out.nominal = true;
        out.gamma_star = std::numeric_limits<double>::infinity();
        out.D = Mat::Identity(d, d);
        out.M_star = amb.M0;
        out.expected_regret = expected_regret(C_K, amb.M0);
        out.dual_value = out.expected_regret;
        return out;
    }
    out.gamma_star = worst_case_gamma(C_K, amb);
    const double g = out.gamma_star;
    const Vec& lam = C_K.eigenvalues;
    const Mat& V = C_K.eigenvectors;
    Vec dscale(lam.size());
    for (int i = 0; i < lam.size(); ++i) dscale[i] = g / (g - lam[i]);
    out.D = V * dscale.asDiagonal() * V.transpose();
    out.M_star = out.D * amb.M0.selfadjointView<Eigen::Lower>() * out.D.transpose();
    out.M_star = symmetrized(out.M_star);
    out.expected_regret = expected_regret(C_K, out.M_star);

    const Vec w = eigenbasis_weights(C_K, amb.M0);
    double trinv = 0.0;
    for (int i = 0; i < lam.size(); ++i) trinv += w[i] / (g - lam[i]);
    out.dual_value = g * (amb.radius * amb.radius - amb.M0.trace()) + g * g * trinv;

    const double rel = std::abs(out.dual_value - out.expected_regret) /
                       std::max(1.0, std::abs(out.expected_regret));
    if (rel > 1e-6)
        throw ConsistencyError("worst-case dual value does not match Tr(C_K M*): rel err " +
                               std::to_string(rel));
    return out;
}

double expected_regret(const RegretOperator& C_K, const Mat& covariance) {
    require(covariance.rows() == C_K.C_K.rows() && covariance.cols() == C_K.C_K.cols(),
            "covariance shape mismatch");
    return C_K.C_K.cwiseProduct(covariance).sum();
}

double expected_cost(const Mat& T_K, const Mat& covariance) {
    require(covariance.rows() == T_K.cols() && covariance.cols() == T_K.cols(),
            "covariance shape mismatch");
    return (T_K.transpose() * T_K).cwiseProduct(covariance).sum();
}

std::vector<CrossEvalRow> cross_evaluate(const std::vector<NamedController>& controllers,
                                         const AmbiguitySet& amb, int reference_index) {
    require(reference_index >= 0 && reference_index < static_cast<int>(controllers.size()),
            "reference controller must be part of the list");

    std::vector<std::future<WorstCaseDistribution>> futs;
    futs.reserve(controllers.size());
    for (const auto& c : controllers) {
        futs.push_back(std::async(std::launch::async, [&c, &amb]() {
            return worst_case_distribution(c.regret, amb);
        }));
    }
    std::vector<WorstCaseDistribution> wcs;
    wcs.reserve(controllers.size());
    for (auto& f : futs) wcs.push_back(f.get());

    const auto& ref = controllers[reference_index];
    const auto& ref_wc = wcs[reference_index];
    std::vector<CrossEvalRow> rows;
    for (size_t i = 0; i < controllers.size(); ++i) {
        CrossEvalRow row;
        row.name = controllers[i].name;
        row.gamma_star = wcs[i].gamma_star;
        row.own_wc_regret = wcs[i].expected_regret;
        row.reference_regret = expected_regret(ref.regret, wcs[i].M_star);
        row.reduction_percent =
            (row.own_wc_regret - row.reference_regret) / row.own_wc_regret * 100.0;
        row.regret_under_reference_wc = expected_regret(controllers[i].regret, ref_wc.M_star);
        rows.push_back(row);
    }
    return rows;
}

Mat sample_disturbances(const Mat& covariance, int count, std::uint64_t seed) {
    require(count >= 1, "sample count must be at least 1");
    require(covariance.rows() == covariance.cols(), "covariance must be square");
    const int d = static_cast<int>(covariance.rows());
    Eigen::SelfAdjointEigenSolver<Mat> es(symmetrized(covariance));
    const double top = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
    if (es.eigenvalues()(0) < -1e-10 * top)
        throw DomainError("covariance is not positive semidefinite");
    Mat A = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();

    // Box-Muller on a fixed-width generator keeps the stream identical
    // across platforms (std::normal_distribution is not pinned down).
    std::mt19937_64 rng(seed);
    auto uniform = [&rng]() {
        return (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
    };
    Mat Zs(d, count);
    double spare = 0.0;
    bool have_spare = false;
    for (int j = 0; j < count; ++j)
        for (int i = 0; i < d; ++i) {
            if (have_spare) {
                Zs(i, j) = spare;
                have_spare = false;
            } else {
                const double u1 = uniform();
                const double u2 = uniform();
                const double mag = std::sqrt(-2.0 * std::log(u1));
                Zs(i, j) = mag * std::cos(2.0 * M_PI * u2);
                spare = mag * std::sin(2.0 * M_PI * u2);
                have_spare = true;
            }
        }
    return A * Zs;
}

}  // namespace drregret
