#include "drregret/synthesis.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>

#include "drregret/baselines.hpp"

namespace drregret {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

double hankel_norm(const Mat& strictly_anticausal, int row_block, int col_block) {
    const Mat& M = strictly_anticausal;
    require(M.rows() % row_block == 0 && M.cols() % col_block == 0,
            "hankel_norm: dimensions not divisible by block sizes");
    const int N = static_cast<int>(M.rows()) / row_block;
    require(N == static_cast<int>(M.cols()) / col_block, "hankel_norm: block grids differ");
    double best = 0.0;
    for (int t = 1; t < N; ++t) {
        Mat sub = M.block(0, t * col_block, t * row_block, (N - t) * col_block);
        if (sub.size() == 0) continue;
        Eigen::JacobiSVD<Mat> svd(sub);
        best = std::max(best, svd.singularValues()(0));
    }
    return best;
}

namespace {

// Nehari bound at a given gamma: achievable iff <= 1.
double nehari_bound(const FactorizationSet& fs, double gamma) {
    GammaOperators g = gamma_operators(fs, gamma);
    return hankel_norm(g.W_minus, fs.dims.m, fs.dims.p);
}

}  // namespace

double nehari_gamma_threshold(const FactorizationSet& fs, double rel_tol) {
    double hi = 1.0;
    int guard = 0;
    while (nehari_bound(fs, hi) > 1.0) {
        hi *= 2.0;
        if (++guard > 200) throw ConsistencyError("Nehari threshold bracketing diverged");
    }
    double lo = hi * 0.5;
    guard = 0;
    while (nehari_bound(fs, lo) <= 1.0) {
        lo *= 0.5;
        if (lo < 1e-14) return 0.0;  // constraint never binds
        if (++guard > 200) return 0.0;
    }
    while (hi - lo > rel_tol * hi) {
        const double mid = 0.5 * (lo + hi);
        (nehari_bound(fs, mid) <= 1.0 ? hi : lo) = mid;
    }
    return hi;
}

DrProgram assemble_dr_lmi(const GammaOperators& gops, const FactorizationSet& fs, double radius,
                          const Dims& dims) {
    const int nx = dims.nx();
    const int ny = dims.ny();
    const int nu = dims.nu();
    const int nd = nx + ny;
    const double gamma = gops.gamma;

    DrProgram out;
    auto& prog = out.program;
    out.X = prog.add_matrix("X", nd, nd, sdp::Structure::Symmetric);
    out.Y = prog.add_matrix("Y", nu, ny, sdp::Structure::BlockLowerTriangular, dims.m, dims.p);

    const Mat Minv =
        gops.M_gamma.triangularView<Eigen::Lower>().solve(Mat::Identity(nu, nu));
    const Mat PMinv = fs.P * Minv;

    // Large LMI, block rows [X11 | X22 | gamma-row | gamma-row | identity]:
    //   [ X11   X12   gI    0         0      ]
    //   [ X12'  X22   0     gI        0      ]
    //   [ gI    0     gI    -P(*)     0      ]
    //   [ 0     gI   -(*)'P' gI       (*)'   ]
    //   [ 0     0     0     (*)       I      ]
    // with (*) = Minv Y + H_gamma.
    const int o3 = nd, o4 = nd + nx, o5 = nd + nx + ny;
    const int b1 = prog.add_psd_block(nd + nx + ny + nu);
    prog.add_constant_with_mirror(b1, 0, o3, gamma * Mat::Identity(nx, nx));
    prog.add_constant_with_mirror(b1, nx, o4, gamma * Mat::Identity(ny, ny));
    prog.add_constant(b1, o3, o3, gamma * Mat::Identity(nx, nx));
    prog.add_constant(b1, o4, o4, gamma * Mat::Identity(ny, ny));
    prog.add_constant(b1, o5, o5, Mat::Identity(nu, nu));
    prog.add_constant_with_mirror(b1, o3, o4, Mat(-fs.P * gops.H_gamma));
    prog.add_constant_with_mirror(b1, o4, o5, Mat(gops.H_gamma.transpose()));
    prog.add_matrix_term(b1, out.X, 0, 0, Mat(), Mat());
    prog.add_matrix_term_with_mirror(b1, out.Y, o3, o4, Mat(-PMinv), Mat());
    prog.add_matrix_term_with_mirror(b1, out.Y, o4, o5, Mat(), Mat(Minv.transpose()),
                                     /*transpose=*/true);

    // Nehari LMI [[I, (Y - W_minus)'],[Y - W_minus, I]].
    const int b2 = prog.add_psd_block(ny + nu);
    prog.add_constant(b2, 0, 0, Mat::Identity(ny, ny));
    prog.add_constant(b2, ny, ny, Mat::Identity(nu, nu));
    prog.add_constant_with_mirror(b2, ny, 0, Mat(-gops.W_minus));
    prog.add_matrix_term_with_mirror(b2, out.Y, ny, 0, Mat(), Mat());

    // X itself PSD.
    const int b3 = prog.add_psd_block(nd);
    prog.add_matrix_term(b3, out.X, 0, 0, Mat(), Mat());

    prog.add_objective_constant(gamma * (radius * radius - nd));
    prog.add_objective_trace(out.X, Mat::Identity(nd, nd));
    return out;
}

InnerSolve inner_value(double gamma, const FactorizationSet& fs, double radius,
                       const SynthesisConfig& cfg) {
    InnerSolve out;
    GammaOperators gops = gamma_operators(fs, gamma);
    const double bound = hankel_norm(gops.W_minus, fs.dims.m, fs.dims.p);
    if (bound > 1.0) {
        out.feasible = false;
        out.value = kInf;
        return out;
    }
    out.feasible = true;

    DrProgram dr = assemble_dr_lmi(gops, fs, radius, fs.dims);
    sdp::SolveOptions opts;
    opts.feas_tol = cfg.solver_tol;
    opts.gap_tol = cfg.solver_tol;
    sdp::SdpSolution sol = sdp::solve(dr.program, opts);
    out.status = sol.status;
    out.iterations = sol.iterations;
    if (sol.status != sdp::SolveStatus::Optimal) {
        out.value = kInf;
        return out;
    }
    out.value = sol.objective;
    out.Y = dr.program.matrix_value(sol, dr.Y);
    out.X = dr.program.matrix_value(sol, dr.X);
    return out;
}

Mat youla_from_nehari(const Mat& Y, const GammaOperators& gops, const FactorizationSet& fs) {
    Mat inner = gops.M_gamma.triangularView<Eigen::Lower>().solve(Mat(Y + gops.W_plus));
    Mat left = fs.T_half.triangularView<Eigen::Lower>().solve(inner);
    Mat E = fs.U_half.transpose()
                .triangularView<Eigen::Upper>()
                .solve(left.transpose())
                .transpose();
    const double scale = std::max(1.0, E.cwiseAbs().maxCoeff());
    Mat upper = E - block_lower_part(E, fs.dims.m, fs.dims.p);
    if (upper.cwiseAbs().maxCoeff() > 1e-6 * scale) {
        throw ConsistencyError("recovered Youla parameter has noncausal residue " +
                               std::to_string(upper.cwiseAbs().maxCoeff() / scale));
    }
    return block_lower_part(E, fs.dims.m, fs.dims.p);
}

SynthesisResult minimize_over_gamma(const LiftedSystem& sys, const FactorizationSet& fs,
                                    const SynthesisConfig& cfg) {
    require(cfg.radius >= 0.0, "radius must be nonnegative");
    SynthesisResult res;

    ControllerOperators bench = noncausal_benchmark(sys, fs);

    if (cfg.radius == 0.0) {
        // Singleton ambiguity set: stochastic-optimal (LQG) closed form.
        res.controller = lqg_controller(fs, sys);
        res.regret = regret_operator(res.controller.T_K, bench.T_K);
        res.objective = res.regret.C_K.trace();  // expected regret under the nominal
        res.gamma_star = kInf;
        res.via_lqg_closed_form = true;
        return res;
    }

    const double gamma_lo = nehari_gamma_threshold(fs);
    const double edge = gamma_lo > 0.0 ? gamma_lo : 1.0;
    const double radius = cfg.radius;

    std::map<double, InnerSolve> memo;
    auto eval = [&](double delta) -> const InnerSolve& {
        auto it = memo.find(delta);
        if (it == memo.end()) {
            InnerSolve s = inner_value(gamma_lo + delta, fs, radius, cfg);
            if (cfg.verbose) {
                std::printf("  gamma %.9e  value %.9e  (%s)\n", gamma_lo + delta, s.value,
                            s.feasible ? "feasible" : "infeasible");
            }
            res.solver_iterations += s.iterations;
            it = memo.emplace(delta, std::move(s)).first;
        }
        return it->second;
    };

    // Log-spaced presample, then extend the grid in whichever direction
    // still descends until the minimum is interior.
    std::vector<double> deltas;
    {
        const double d0 = 1e-3 * edge;
        const double d1 = 8.0 * edge;
        const int k = std::max(2, cfg.presample_points);
        const double rho = std::pow(d1 / d0, 1.0 / (k - 1));
        for (int i = 0; i < k; ++i) deltas.push_back(d0 * std::pow(rho, i));
    }
    for (double d : deltas) eval(d);

    auto argmin_delta = [&]() {
        double best = kInf, arg = deltas.front();
        for (double d : deltas)
            if (memo.at(d).value < best) {
                best = memo.at(d).value;
                arg = d;
            }
        return arg;
    };

    int guard = 0;
    while (true) {
        std::sort(deltas.begin(), deltas.end());
        const double arg = argmin_delta();
        if (!std::isfinite(memo.at(arg).value)) {
            if (++guard > 80) throw ConsistencyError("no feasible gamma found in the search");
            deltas.push_back(deltas.back() * cfg.bracket_growth);
            eval(deltas.back());
            continue;
        }
        if (arg == deltas.back()) {
            if (++guard > 80) break;  // value keeps descending; accept the edge
            deltas.push_back(deltas.back() * cfg.bracket_growth);
            eval(deltas.back());
            continue;
        }
        if (arg == deltas.front()) {
            if (deltas.front() < 1e-9 * edge) break;  // pinned at the boundary
            if (++guard > 80) break;
            deltas.insert(deltas.begin(), deltas.front() / cfg.bracket_growth);
            eval(deltas.front());
            continue;
        }
        break;
    }
    std::sort(deltas.begin(), deltas.end());

    // Unimodality check over the sampled values; refine on a finer grid when
    // the pattern is not descent-then-ascent.
    {
        int direction_changes = 0;
        double prev = kInf;
        bool ascending = false;
        for (double d : deltas) {
            const double v = memo.at(d).value;
            if (!std::isfinite(v)) continue;
            if (v > prev && !ascending) {
                ascending = true;
            } else if (v < prev && ascending) {
                ++direction_changes;
                ascending = false;
            }
            prev = v;
        }
        if (direction_changes > 0) {
            std::fprintf(stderr,
                         "warning: inner value not unimodal over the gamma presample; "
                         "falling back to grid refinement\n");
            const double lo = deltas.front(), hi = deltas.back();
            for (int i = 0; i < 32; ++i)
                eval(lo * std::pow(hi / lo, (i + 0.5) / 32.0));
            for (const auto& [d, s] : memo)
                if (std::find(deltas.begin(), deltas.end(), d) == deltas.end())
                    deltas.push_back(d);
            std::sort(deltas.begin(), deltas.end());
        }
    }

    // Golden-section in log(delta) around the sampled minimum.
    double a, b;
    {
        const double arg = argmin_delta();
        auto it = std::find(deltas.begin(), deltas.end(), arg);
        a = it == deltas.begin() ? arg * 0.25 : *(it - 1);
        b = (it + 1) == deltas.end() ? arg * 4.0 : *(it + 1);
    }
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double la = std::log(a), lb = std::log(b);
    double l1 = lb - invphi * (lb - la);
    double l2 = la + invphi * (lb - la);
    double f1 = eval(std::exp(l1)).value;
    double f2 = eval(std::exp(l2)).value;
    while (true) {
        const double mid_gamma = gamma_lo + std::exp(0.5 * (la + lb));
        if (std::exp(lb) - std::exp(la) <= cfg.gamma_rel_tol * mid_gamma) break;
        if (f1 <= f2) {
            lb = l2;
            l2 = l1;
            f2 = f1;
            l1 = lb - invphi * (lb - la);
            f1 = eval(std::exp(l1)).value;
        } else {
            la = l1;
            l1 = l2;
            f1 = f2;
            l2 = la + invphi * (lb - la);
            f2 = eval(std::exp(l2)).value;
        }
    }

    // Best evaluated point wins.
    double best_delta = 0.0;
    double best_value = kInf;
    for (const auto& [d, s] : memo) {
        if (s.value < best_value) {
            best_value = s.value;
            best_delta = d;
        }
    }
    if (!std::isfinite(best_value))
        throw ConsistencyError("gamma search found no finite inner value");

    const InnerSolve& best = memo.at(best_delta);
    res.gamma_star = gamma_lo + best_delta;
    res.objective = best.value;
    res.Y_star = best.Y;
    res.X_star = best.X;

    GammaOperators gstar = gamma_operators(fs, res.gamma_star);
    Mat E = youla_from_nehari(best.Y, gstar, fs);
    res.controller = controller_from_youla_full(E, sys);
    res.regret = regret_operator(res.controller.T_K, bench.T_K);

    for (const auto& [d, s] : memo)
        res.trace.push_back({gamma_lo + d, s.value, s.feasible});

    return res;
}

}  // namespace drregret
