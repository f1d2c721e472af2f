#include "drregret/baselines.hpp"

#include <string>

#include <Eigen/SVD>

#include "drregret/synthesis.hpp"

namespace drregret {

const char* to_string(BaselineKind k) {
    switch (k) {
        case BaselineKind::LQG: return "LQG";
        case BaselineKind::HINF: return "HINF";
        case BaselineKind::ROMF: return "RO-MF";
    }
    return "?";
}

ControllerOperators lqg_controller(const FactorizationSet& fs, const LiftedSystem& sys) {
    // min ||T_K||_F over causal E: the causal projection of W.
    auto parts = causal_split(fs.W, fs.dims.m, fs.dims.p);
    Mat inner = fs.T_half.triangularView<Eigen::Lower>().solve(parts.first);
    Mat E = fs.U_half.transpose()
                .triangularView<Eigen::Upper>()
                .solve(inner.transpose())
                .transpose();
    E = block_lower_part(E, fs.dims.m, fs.dims.p);  // remove roundoff residue
    return controller_from_youla_full(E, sys);
}

HinfProgram assemble_hinf_lmi(const LiftedSystem& sys) {
    const Dims d = sys.dims;
    const int q = d.nd();           // disturbance length (columns of T_K)
    const int s = d.nx() + d.nu();  // output length (rows of T_K)

    HinfProgram out;
    auto& prog = out.program;
    out.delta = prog.add_scalar("delta");
    out.E = prog.add_matrix("E", d.nu(), d.ny(), sdp::Structure::BlockLowerTriangular, d.m,
                            d.p);

    // [[delta I, T_K^T],[T_K, delta I]] with T_K affine in E.
    const int b = prog.add_psd_block(q + s);
    prog.add_scalar_term(b, out.delta, 0, 0, Mat::Identity(q, q));
    prog.add_scalar_term(b, out.delta, q, q, Mat::Identity(s, s));
    prog.add_constant_with_mirror(b, q, 0, sys.G);                           // (1,1) of T_K
    prog.add_matrix_term_with_mirror(b, out.E, q, 0, sys.F, sys.L);          // F E L
    prog.add_matrix_term_with_mirror(b, out.E, q, d.nx(), sys.F, Mat());     // F E
    prog.add_matrix_term_with_mirror(b, out.E, q + d.nx(), 0, Mat(), sys.L);  // E L
    prog.add_matrix_term_with_mirror(b, out.E, q + d.nx(), d.nx(), Mat(), Mat());  // E
    prog.add_objective_term(out.delta, 1.0);
    return out;
}

namespace {

// Analytic center of {E causal : [[level I, T_K^T],[T_K, level I]] PD}, i.e.
// the minimum-entropy controller at the given gain level. Damped Newton on
// -log det of the affine LMI; E0 must be strictly feasible.
Mat entropy_center(const LiftedSystem& sys, double level, const Mat& E0) {
    const Dims d = sys.dims;
    const int q = d.nd();
    const int s = d.nx() + d.nu();
    const int dim = q + s;
    const int nu = d.nu(), ny = d.ny();

    // Slot factors: dT_K/dE(k,l) = u_k v_l^T with u_k = [F e_k; e_k] placed
    // in the bottom rows, v_l = [L^T e_l; e_l] in the leading columns.
    Mat U = Mat::Zero(dim, nu);
    Mat V = Mat::Zero(dim, ny);
    for (int k = 0; k < nu; ++k) {
        U.block(q, k, d.nx(), 1) = sys.F.col(k);
        U(q + d.nx() + k, k) = 1.0;
    }
    for (int l = 0; l < ny; ++l) {
        V.block(0, l, d.nx(), 1) = sys.L.transpose().col(l);
        V(d.nx() + l, l) = 1.0;
    }

    std::vector<std::pair<int, int>> slots;
    for (int k = 0; k < nu; ++k)
        for (int l = 0; l < ny; ++l)
            if (l / d.p <= k / d.m) slots.emplace_back(k, l);
    const int ns = static_cast<int>(slots.size());

    auto assemble = [&](const Mat& E) {
        Mat M = Mat::Zero(dim, dim);
        M.topLeftCorner(q, q) = level * Mat::Identity(q, q);
        M.bottomRightCorner(s, s) = level * Mat::Identity(s, s);
        Mat T_K = transfer_operator(E, sys);
        M.block(q, 0, s, q) = T_K;
        M.block(0, q, q, s) = T_K.transpose();
        return M;
    };

    Mat E = E0;
    for (int it = 0; it < 60; ++it) {
        Mat M = assemble(E);
        Eigen::LLT<Mat> llt(M);
        if (llt.info() != Eigen::Success)
            throw ConsistencyError("entropy center lost strict feasibility");
        Mat K = llt.solve(Mat::Identity(dim, dim));
        Mat KU = K * U;
        Mat KV = K * V;
        Mat UKU = U.transpose() * KU;
        Mat VKV = V.transpose() * KV;
        Mat UKV = U.transpose() * KV;

        Vec g(ns);
        Mat H(ns, ns);
        for (int i = 0; i < ns; ++i) {
            auto [ki, li] = slots[i];
            g[i] = -2.0 * UKV(ki, li);
            for (int j = i; j < ns; ++j) {
                auto [kj, lj] = slots[j];
                const double hij = 2.0 * (UKU(ki, kj) * VKV(li, lj) +
                                          UKV(ki, lj) * UKV(kj, li));
                H(i, j) = hij;
                H(j, i) = hij;
            }
        }
        Vec step = H.ldlt().solve(-g);
        const double decrement2 = -g.dot(step);
        double alpha = 1.0;
        Mat Enew = E;
        for (int ls = 0; ls < 60; ++ls) {
            Enew = E;
            for (int i = 0; i < ns; ++i) Enew(slots[i].first, slots[i].second) += alpha * step[i];
            if (Eigen::LLT<Mat>(assemble(Enew)).info() == Eigen::Success) break;
            alpha *= 0.5;
        }
        E = Enew;
        if (decrement2 < 1e-18 || alpha * std::sqrt(std::max(0.0, decrement2)) < 1e-11) break;
    }
    return E;
}

}  // namespace

HinfResult hinf_controller(const LiftedSystem& sys, double solver_tol, double entropy_margin) {
    HinfProgram hp = assemble_hinf_lmi(sys);
    sdp::SolveOptions opts;
    opts.feas_tol = solver_tol;
    opts.gap_tol = solver_tol;
    auto sol = sdp::solve(hp.program, opts);
    if (sol.status != sdp::SolveStatus::Optimal)
        throw ConsistencyError("H-infinity synthesis SDP failed: " + sol.message);

    HinfResult out;
    out.operator_norm = hp.program.scalar_value(sol, hp.delta);
    out.level = out.operator_norm * (1.0 + entropy_margin);
    Mat E = entropy_center(sys, out.level, hp.program.matrix_value(sol, hp.E));
    out.controller = controller_from_youla_full(E, sys);
    Eigen::JacobiSVD<Mat> svd(out.controller.T_K);
    out.achieved_norm = svd.singularValues()(0);
    out.solver_iterations = sol.iterations;
    return out;
}

RomfProgram assemble_romf_lmi(const FactorizationSet& fs) {
    const Dims d = fs.dims;
    const int nx = d.nx(), ny = d.ny(), nu = d.nu();

    RomfProgram out;
    auto& prog = out.program;
    out.gamma = prog.add_scalar("gamma");
    out.Zc = prog.add_matrix("Zc", nu, ny, sdp::Structure::BlockLowerTriangular, d.m, d.p);

    // [[gI, -PZ, 0],[-Z'P', gI, Z'],[0, Z, I]] with Z = Zc - W.
    const int b = prog.add_psd_block(nx + ny + nu);
    prog.add_scalar_term(b, out.gamma, 0, 0, Mat::Identity(nx + ny, nx + ny));
    prog.add_constant(b, nx + ny, nx + ny, Mat::Identity(nu, nu));
    prog.add_matrix_term_with_mirror(b, out.Zc, 0, nx, Mat(-fs.P), Mat());
    prog.add_constant_with_mirror(b, 0, nx, Mat(fs.P * fs.W));
    prog.add_matrix_term_with_mirror(b, out.Zc, nx + ny, nx, Mat(), Mat());
    prog.add_constant_with_mirror(b, nx + ny, nx, Mat(-fs.W));
    prog.add_objective_term(out.gamma, 1.0);
    return out;
}

RomfResult ro_mf_controller(const FactorizationSet& fs, const LiftedSystem& sys,
                            double solver_tol, double level_margin) {
    RomfProgram rp = assemble_romf_lmi(fs);
    sdp::SolveOptions opts;
    opts.feas_tol = solver_tol;
    opts.gap_tol = solver_tol;
    auto sol = sdp::solve(rp.program, opts);
    if (sol.status != sdp::SolveStatus::Optimal)
        throw ConsistencyError("regret-level synthesis SDP failed: " + sol.message);

    RomfResult out;
    out.gamma_ro = rp.program.scalar_value(sol, rp.gamma);
    out.solver_iterations = sol.iterations;

    // The level minimizer is far from unique; return the canonical point of
    // the near-optimal set, the minimal-trace-resolvent solution of the
    // level-1 Nehari problem at gamma_ro (1 + margin). This is also the
    // controller the distributionally robust synthesis converges to as the
    // ambiguity radius grows.
    const double level = out.gamma_ro * (1.0 + level_margin);
    SynthesisConfig cfg;
    cfg.solver_tol = solver_tol;
    InnerSolve nehari = inner_value(level, fs, 0.0, cfg);
    if (!nehari.feasible || nehari.status != sdp::SolveStatus::Optimal)
        throw ConsistencyError("canonical regret-level solve failed at the reported level");
    out.solver_iterations += nehari.iterations;
    GammaOperators gops = gamma_operators(fs, level);
    Mat E = youla_from_nehari(nehari.Y, gops, fs);
    out.controller = controller_from_youla_full(E, sys);
    return out;
}

double ro_mf_gamma_by_bisection(const FactorizationSet& fs, double rel_tol) {
    return nehari_gamma_threshold(fs, rel_tol);
}

}  // namespace drregret
