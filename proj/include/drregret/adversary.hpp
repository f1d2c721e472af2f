#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "drregret/benchmark.hpp"
#include "drregret/types.hpp"

namespace drregret {

// Wasserstein-2 ball of radius r around a zero-mean nominal distribution
// with covariance M0.
struct AmbiguitySet {
    Mat M0;
    double radius = 0.0;

    static AmbiguitySet identity(int dim, double radius);
};

// Worst-case disturbance distribution for a fixed controller: the linear
// distortion D = gamma (gamma I - C_K)^{-1} of the nominal, sitting on the
// boundary of the ball. Gaussian nominal implies Gaussian worst case.
struct WorstCaseDistribution {
    double gamma_star = 0.0;
    Mat D;
    Mat M_star;
    double expected_regret = 0.0;
    double dual_value = 0.0;
    bool nominal = false;  // r = 0 sentinel: D = I, M_star = M0
};

// Unique gamma > max(0, lambda_max(C_K)) solving
//   Tr((gamma (gamma I - C_K)^{-1} - I)^2 M0) = r^2.
// Throws DomainError when lambda_max = 0 (degenerate operator) or when the
// ambiguity set cannot reach the requested radius.
double worst_case_gamma(const RegretOperator& C_K, const AmbiguitySet& amb, double tol = 1e-12);

WorstCaseDistribution worst_case_distribution(const RegretOperator& C_K, const AmbiguitySet& amb);

double expected_regret(const RegretOperator& C_K, const Mat& covariance);
double expected_cost(const Mat& T_K, const Mat& covariance);

struct CrossEvalRow {
    std::string name;
    double own_wc_regret = 0.0;        // E_{P_c} R(K_c)
    double reference_regret = 0.0;     // E_{P_c} R(K_ref)
    double reduction_percent = 0.0;    // (own - ref) / own * 100
    double regret_under_reference_wc = 0.0;  // E_{P_ref} R(K_c)
    double gamma_star = 0.0;
};

struct NamedController {
    std::string name;
    RegretOperator regret;
};

// For each controller: its own worst case, the reference's performance under
// it, the relative reduction, and its regret under the reference's worst
// case. The reference must be one of the entries.
std::vector<CrossEvalRow> cross_evaluate(const std::vector<NamedController>& controllers,
                                         const AmbiguitySet& amb, int reference_index);

// Deterministic zero-mean Gaussian sampler (one column per sample).
Mat sample_disturbances(const Mat& covariance, int count, std::uint64_t seed);

}  // namespace drregret
