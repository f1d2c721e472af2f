#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>
#include <cstdio>
#include <limits>

#include "drregret/sdp.hpp"
#include "sdp_internal.hpp"

namespace drregret::sdp {

namespace detail {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Any square factor L with L L^T = M, preferring Cholesky and falling back
// to an eigenvalue square root with clamped spectrum.
Mat robust_factor(const Mat& M) {
    Eigen::LLT<Mat> llt(M);
    if (llt.info() == Eigen::Success) return llt.matrixL();
    Eigen::SelfAdjointEigenSolver<Mat> es(symmetrized(M));
    Vec ev = es.eigenvalues().cwiseMax(1e-14 * std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff()));
    return es.eigenvectors() * ev.cwiseSqrt().asDiagonal();
}

// Largest alpha (capped at 1e30) with M + alpha D PSD; M assumed PD.
double max_step(const Mat& M, const Mat& D) {
    Mat L = robust_factor(M);
    Mat X = L.lu().solve(D);
    Mat A = L.lu().solve(X.transpose()).transpose();  // L^{-1} D L^{-T}
    Eigen::SelfAdjointEigenSolver<Mat> es(symmetrized(A), Eigen::EigenvaluesOnly);
    const double lmin = es.eigenvalues()(0);
    if (lmin >= 0.0) return 1e30;
    return 1.0 / (-lmin);
}

struct BlockWork {
    Mat R, Rinv;  // NT scaling: W = R R^T
    Vec lam;      // scaled point (diagonal)
    Mat K;        // W^{-1}
    Mat KFac;     // K * factors
    Mat Phi;      // factors^T K factors
};

struct ElimWork {
    bool active = false;
    int d = 0;
    // Hat transform: C(i,j) = <hat(M_i), hat(M_j)>, solveVV for the Newton
    // sub-block (see run_interior_point).
    bool two_blocks = false;
    Mat Vb;    // congruence basis (two-block case)
    Vec dvec;  // generalized eigenvalues
    Mat L;     // Cholesky factor of K_sub (one-block case)
    Mat denom;        // 1 + d d^T elementwise (two-block case)
    Mat denom_sqrt;   // sqrt of denom

    Mat hat(const Mat& Rm) const {
        if (two_blocks) return (Vb.transpose() * Rm * Vb).cwiseQuotient(denom_sqrt);
        Mat X = L.triangularView<Eigen::Lower>().solve(Rm);
        return L.triangularView<Eigen::Lower>().solve(X.transpose()).transpose();
    }
    Mat solveVV(const Mat& Rm) const {
        if (two_blocks) {
            Mat Xi = (Vb.transpose() * Rm * Vb).cwiseQuotient(denom);
            return Vb * Xi * Vb.transpose();
        }
        Mat X = L.triangularView<Eigen::Lower>().solve(Rm);
        X = L.triangularView<Eigen::Lower>().solve(X.transpose()).transpose();
        Mat Y = L.transpose().triangularView<Eigen::Upper>().solve(X);
        return L.transpose().triangularView<Eigen::Upper>().solve(Y.transpose()).transpose();
    }
};

}  // namespace

SdpSolution run_interior_point(const CompiledProgram& cp, const SolveOptions& opts) {
    const int m = cp.m;
    const int nb = static_cast<int>(cp.blocks.size());
    SdpSolution sol;

    {
        std::vector<bool> seen(m, false);
        for (const auto& blk : cp.blocks) {
            for (const auto& e : blk.entries) seen[e.slot] = true;
            for (const auto& lr : blk.lowrank) seen[lr.slot] = true;
        }
        for (int s = 0; s < m; ++s) {
            if (!seen[s]) {
                sol.message = "variable without constraint coefficients";
                return sol;
            }
        }
    }

    int n_tot = 0;
    for (const auto& blk : cp.blocks) n_tot += blk.dim;

    // Initial iterates: x = 0, S and Z scaled multiples of the identity.
    Vec x = Vec::Zero(m);
    std::vector<Mat> S(nb), Z(nb);
    const double cnorm = cp.c.norm();
    for (int b = 0; b < nb; ++b) {
        const auto& blk = cp.blocks[b];
        double s0 = std::max(opts.init_scale, 2.0 * blk.F0.cwiseAbs().maxCoeff());
        double z0 = std::max(opts.init_scale, cnorm / std::sqrt(std::max(1, m)));
        S[b] = s0 * Mat::Identity(blk.dim, blk.dim);
        Z[b] = z0 * Mat::Identity(blk.dim, blk.dim);
    }

    const bool elim = cp.elim.has_value();
    const int mr = static_cast<int>(cp.reduced_slots.size());
    const int md = elim ? cp.elim->slot_count : 0;
    const int ed = elim ? cp.elim->dim : 0;

    // Reduced-slot indices of slots carrying coupling to the eliminated
    // variable (those active in the eliminated blocks).
    std::vector<int> coupled;
    if (elim) {
        std::vector<bool> mark(mr, false);
        for (const auto& em : cp.elim->embeds) {
            const auto& blk = cp.blocks[em.block];
            for (int a : blk.active_slots) mark[cp.slot_to_reduced[a]] = true;
        }
        for (int i = 0; i < mr; ++i)
            if (mark[i]) coupled.push_back(i);
    }

    auto unpack_sym = [&](const Vec& slots_v) {
        // slots -> symmetric matrix with halved off-diagonal weights
        Mat Rm = Mat::Zero(ed, ed);
        int idx = 0;
        for (int r = 0; r < ed; ++r)
            for (int c = 0; c <= r; ++c, ++idx) {
                const double v = slots_v[idx];
                if (r == c) Rm(r, r) = v;
                else { Rm(r, c) = 0.5 * v; Rm(c, r) = 0.5 * v; }
            }
        return Rm;
    };
    auto pack_sym = [&](const Mat& X) {
        Vec out(md);
        int idx = 0;
        for (int r = 0; r < ed; ++r)
            for (int c = 0; c <= r; ++c, ++idx) out[idx] = X(r, c);
        return out;
    };

    std::vector<BlockWork> wk(nb);
    ElimWork ew;
    Mat H;            // reduced Schur complement
    Eigen::LLT<Mat> Hfac;
    std::vector<Mat> Mi;  // coupling matrices, indexed by position in `coupled`
    Mat What;             // rows: hat(M_i) flattened

    double mu = 0.0;
    double best_gap = kInf;
    int stall = 0;
    // Best iterate so far by worst-of-three quality; returned on stall.
    double best_quality = kInf;
    Vec best_x;
    double best_pobj = 0.0, best_relgap = kInf, best_resp = kInf, best_resd = kInf;

    auto slot_read_all = [&](const std::vector<Mat>& Ms) {
        Vec out = Vec::Zero(m);
        for (int b = 0; b < nb; ++b) cp.accumulate_slot_reads(b, Ms[b], out);
        return out;
    };

    auto original_slots = [&](const Vec& xv) {
        Vec xo = cp.has_equality_transform ? Vec(cp.eq_particular + cp.eq_nullspace * xv) : xv;
        return std::vector<double>(xo.data(), xo.data() + xo.size());
    };

    for (int iter = 0; iter < opts.max_iterations; ++iter) {
        // Residuals.
        std::vector<Mat> Rp(nb);
        double resp = 0.0;
        for (int b = 0; b < nb; ++b) {
            Rp[b] = cp.eval_block(b, x, true) - S[b];
            resp = std::max(resp, Rp[b].norm() / (1.0 + cp.blocks[b].F0.norm()));
        }
        Vec rd = cp.c - slot_read_all(Z);
        const double resd = rd.norm() / (1.0 + cnorm);

        double gap = 0.0;
        for (int b = 0; b < nb; ++b) gap += (S[b].cwiseProduct(Z[b])).sum();
        mu = gap / n_tot;

        const double pobj = cp.c.dot(x) + cp.c0;
        double dobj = cp.c0;
        for (int b = 0; b < nb; ++b) dobj -= (cp.blocks[b].F0.cwiseProduct(Z[b])).sum();
        const double relgap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));

        if (opts.verbose) {
            std::printf("it %3d  mu %9.2e  gap %9.2e  resp %9.2e  resd %9.2e  pobj %+.9e\n",
                        iter, mu, relgap, resp, resd, pobj);
        }

        sol.iterations = iter;
        const double quality =
            std::max({resp / opts.feas_tol, resd / opts.feas_tol, relgap / opts.gap_tol});
        if (quality < best_quality) {
            best_quality = quality;
            best_x = x;
            best_pobj = pobj;
            best_relgap = relgap;
            best_resp = resp;
            best_resd = resd;
        }
        if (quality <= 1.0) {
            sol.status = SolveStatus::Optimal;
            sol.objective = pobj;
            sol.duality_gap = relgap;
            break;
        }
        if (opts.stop_callback && opts.stop_callback(original_slots(x), pobj)) {
            sol.status = SolveStatus::NumericalFailure;
            sol.message = "stopped by callback";
            sol.objective = pobj;
            break;
        }
        if (quality < best_gap * 0.9999) {
            best_gap = quality;
            stall = 0;
        } else if (++stall > 25) {
            sol.message = "no progress over 25 iterations";
            break;
        }

        // NT scalings.
        for (int b = 0; b < nb; ++b) {
            auto& w = wk[b];
            Mat LS = robust_factor(S[b]);
            Mat LZ = robust_factor(Z[b]);
            Eigen::BDCSVD<Mat> svd(LS.transpose() * LZ,
                                   Eigen::ComputeThinU | Eigen::ComputeThinV);
            Vec sig = svd.singularValues().cwiseMax(1e-300);
            w.lam = sig;
            Vec si = sig.cwiseSqrt();
            w.R.noalias() = LS * svd.matrixU() * si.cwiseInverse().asDiagonal();
            // Rinv = diag(sqrt(sig)) U^T LS^{-1}
            Mat LSinvT = LS.lu().solve(Mat::Identity(LS.rows(), LS.cols()));
            w.Rinv.noalias() = si.asDiagonal() * svd.matrixU().transpose() * LSinvT;
            w.K.noalias() = w.Rinv.transpose() * w.Rinv;
            w.K = symmetrized(w.K);
            const auto& blk = cp.blocks[b];
            if (blk.factors.cols() > 0) {
                w.KFac.noalias() = w.K * blk.factors;
                w.Phi.noalias() = blk.factors.transpose() * w.KFac;
            }
        }

        // Elimination work for this iteration.
        if (elim) {
            ew.active = true;
            ew.d = ed;
            const auto& embeds = cp.elim->embeds;
            Mat A1 = wk[embeds[0].block].K.block(embeds[0].offset, embeds[0].offset, ed, ed);
            if (embeds.size() == 2) {
                ew.two_blocks = true;
                Mat A2 = wk[embeds[1].block].K.block(embeds[1].offset, embeds[1].offset, ed, ed);
                Mat L2 = robust_factor(A2);
                Mat Mid = L2.lu().solve(A1);
                Mid = L2.lu().solve(Mid.transpose()).transpose();
                Eigen::SelfAdjointEigenSolver<Mat> es(symmetrized(Mid));
                ew.dvec = es.eigenvalues();
                ew.Vb = L2.transpose().lu().solve(es.eigenvectors());
                ew.denom = Mat::Ones(ed, ed) + ew.dvec * ew.dvec.transpose();
                ew.denom_sqrt = ew.denom.cwiseSqrt();
            } else {
                ew.two_blocks = false;
                ew.L = robust_factor(A1);
            }

            // Coupling matrices M_i = restriction of K A_i K for coupled slots.
            Mi.assign(coupled.size(), Mat());
            std::vector<int> pos_of_reduced(mr, -1);
            for (size_t i = 0; i < coupled.size(); ++i) pos_of_reduced[coupled[i]] = (int)i;
            for (auto& Mcur : Mi) Mcur = Mat::Zero(ed, ed);
            for (const auto& em : embeds) {
                const auto& blk = cp.blocks[em.block];
                const auto& w = wk[em.block];
                for (size_t a = 0; a < blk.active_slots.size(); ++a) {
                    const int slot = blk.active_slots[a];
                    const int pos = pos_of_reduced[cp.slot_to_reduced[slot]];
                    Mat& Mcur = Mi[pos];
                    for (int ie = blk.entry_range[a].first; ie < blk.entry_range[a].second; ++ie) {
                        const auto& e = blk.entries[ie];
                        Mcur.noalias() += e.v * w.K.block(em.offset, e.r, ed, 1) *
                                          w.K.block(e.c, em.offset, 1, ed);
                    }
                    for (int il = blk.lowrank_range[a].first; il < blk.lowrank_range[a].second;
                         ++il) {
                        const auto& lr = blk.lowrank[il];
                        Mcur.noalias() += lr.w * w.KFac.block(em.offset, lr.fi, ed, 1) *
                                          w.KFac.block(em.offset, lr.fj, ed, 1).transpose();
                    }
                }
            }
            What.resize(static_cast<long>(coupled.size()), static_cast<long>(ed) * ed);
            for (size_t i = 0; i < coupled.size(); ++i) {
                Mat hi = ew.hat(Mi[i]);
                What.row(static_cast<long>(i)) =
                    Eigen::Map<const Vec>(hi.data(), hi.size()).transpose();
            }
        }

        // Schur complement over reduced slots.
        H = Mat::Zero(mr, mr);
        for (int b = 0; b < nb; ++b) {
            const auto& blk = cp.blocks[b];
            const auto& w = wk[b];
            const int na = static_cast<int>(blk.active_slots.size());
            for (int ai = 0; ai < na; ++ai) {
                const int ri = cp.slot_to_reduced[blk.active_slots[ai]];
                for (int aj = ai; aj < na; ++aj) {
                    const int rj = cp.slot_to_reduced[blk.active_slots[aj]];
                    double acc = 0.0;
                    for (int ie = blk.entry_range[ai].first; ie < blk.entry_range[ai].second;
                         ++ie) {
                        const auto& e = blk.entries[ie];
                        for (int je = blk.entry_range[aj].first;
                             je < blk.entry_range[aj].second; ++je) {
                            const auto& f = blk.entries[je];
                            acc += e.v * f.v * w.K(e.c, f.r) * w.K(f.c, e.r);
                        }
                        for (int jl = blk.lowrank_range[aj].first;
                             jl < blk.lowrank_range[aj].second; ++jl) {
                            const auto& lr = blk.lowrank[jl];
                            acc += e.v * lr.w * w.KFac(e.c, lr.fi) * w.KFac(e.r, lr.fj);
                        }
                    }
                    for (int il = blk.lowrank_range[ai].first;
                         il < blk.lowrank_range[ai].second; ++il) {
                        const auto& lr = blk.lowrank[il];
                        for (int je = blk.entry_range[aj].first;
                             je < blk.entry_range[aj].second; ++je) {
                            const auto& f = blk.entries[je];
                            acc += lr.w * f.v * w.KFac(f.r, lr.fj) * w.KFac(f.c, lr.fi);
                        }
                        for (int jl = blk.lowrank_range[aj].first;
                             jl < blk.lowrank_range[aj].second; ++jl) {
                            const auto& ls = blk.lowrank[jl];
                            acc += lr.w * ls.w * w.Phi(lr.fj, ls.fi) * w.Phi(ls.fj, lr.fi);
                        }
                    }
                    H(ri, rj) += acc;
                    if (ri != rj) H(rj, ri) += acc;
                }
            }
        }
        if (elim && !coupled.empty()) {
            Mat corr = What * What.transpose();
            for (size_t i = 0; i < coupled.size(); ++i)
                for (size_t j = 0; j < coupled.size(); ++j)
                    H(coupled[i], coupled[j]) -= corr(i, j);
        }

        bool factored = false;
        double jitter = 0.0;
        for (int attempt = 0; attempt < 4 && mr > 0; ++attempt) {
            Mat Hj = H;
            if (jitter > 0.0) Hj += jitter * Mat::Identity(mr, mr);
            Hfac.compute(Hj);
            if (Hfac.info() == Eigen::Success) {
                factored = true;
                break;
            }
            jitter = jitter == 0.0 ? 1e-13 * std::max(1.0, H.trace() / mr) : jitter * 100;
        }
        if (mr > 0 && !factored) {
            sol.status = SolveStatus::NumericalFailure;
            sol.message = "Schur complement factorization failed";
            break;
        }

        // H dx as slot reads of K (sum_j F_j dx_j) K; exact for every slot,
        // eliminated ones included. Used for iterative refinement.
        auto apply_schur = [&](const Vec& dx) {
            Vec out = Vec::Zero(m);
            for (int b = 0; b < nb; ++b) {
                Mat D = cp.eval_block(b, dx, false);
                Mat Q = wk[b].K * D * wk[b].K;
                cp.accumulate_slot_reads(b, symmetrized(Q), out);
            }
            return out;
        };

        auto solve_linear_once = [&](const Vec& rhs) {
            Vec dx = Vec::Zero(m);
            if (elim) {
                Vec rV(md);
                for (int s = 0; s < md; ++s) rV[s] = rhs[cp.elim->slot_base + s];
                Mat RtV = unpack_sym(rV);
                Mat X0 = ew.solveVV(RtV);
                Vec g = Vec::Zero(mr);
                for (int i = 0; i < mr; ++i) g[i] = rhs[cp.reduced_slots[i]];
                for (size_t i = 0; i < coupled.size(); ++i)
                    g[coupled[i]] -= (Mi[i].cwiseProduct(X0)).sum();
                Vec dR = mr > 0 ? Vec(Hfac.solve(g)) : Vec();
                Mat Rcorr = RtV;
                for (size_t i = 0; i < coupled.size(); ++i) Rcorr -= dR[coupled[i]] * Mi[i];
                Mat XV = ew.solveVV(Rcorr);
                Vec dV = pack_sym(XV);
                for (int i = 0; i < mr; ++i) dx[cp.reduced_slots[i]] = dR[i];
                for (int s = 0; s < md; ++s) dx[cp.elim->slot_base + s] = dV[s];
            } else {
                Vec g(mr);
                for (int i = 0; i < mr; ++i) g[i] = rhs[cp.reduced_slots[i]];
                Vec dR = mr > 0 ? Vec(Hfac.solve(g)) : Vec();
                for (int i = 0; i < mr; ++i) dx[cp.reduced_slots[i]] = dR[i];
            }
            return dx;
        };

        auto solve_linear = [&](const Vec& rhs) {
            Vec dx = solve_linear_once(rhs);
            const double rhs_scale = std::max(1e-300, rhs.norm());
            for (int round = 0; round < 3; ++round) {
                Vec resid = rhs - apply_schur(dx);
                if (resid.norm() <= 1e-14 * rhs_scale) break;
                dx += solve_linear_once(resid);
            }
            return dx;
        };

        // Newton solve, with the complementarity right-hand side G given in
        // the scaled space (R3 = R G R^T). The dual step is formed in scaled
        // coordinates: a single R^{-1} application instead of W^{-1} twice,
        // which keeps cancellation in the well-conditioned regime.
        auto newton = [&](const std::vector<Mat>& G) {
            // rhs_i = Tr(A_i [R^{-T} G R^{-1} - K Rp K]) - rd_i
            Vec rhs = -rd;
            for (int b = 0; b < nb; ++b) {
                Mat Q = wk[b].Rinv.transpose() * G[b] * wk[b].Rinv -
                        wk[b].K * Rp[b] * wk[b].K;
                cp.accumulate_slot_reads(b, symmetrized(Q), rhs);
            }

            Vec dx = solve_linear(rhs);

            std::vector<Mat> dS(nb), dZ(nb);
            for (int b = 0; b < nb; ++b) {
                dS[b] = cp.eval_block(b, dx, false) + Rp[b];
                Mat ds_scaled = wk[b].Rinv * dS[b] * wk[b].Rinv.transpose();
                Mat dz_scaled = G[b] - ds_scaled;
                Mat t = wk[b].Rinv.transpose() * dz_scaled * wk[b].Rinv;
                dZ[b] = symmetrized(t);
            }
            return std::make_tuple(dx, dS, dZ);
        };

        // Predictor (affine direction): G = -Lambda, i.e. R3 = -S.
        std::vector<Mat> G(nb);
        for (int b = 0; b < nb; ++b) G[b] = Mat(Vec(-wk[b].lam).asDiagonal());
        auto [dx_a, dS_a, dZ_a] = newton(G);

        double ap = 1.0, ad = 1.0;
        for (int b = 0; b < nb; ++b) {
            ap = std::min(ap, max_step(S[b], dS_a[b]));
            ad = std::min(ad, max_step(Z[b], dZ_a[b]));
        }
        double mu_aff = 0.0;
        for (int b = 0; b < nb; ++b)
            mu_aff += ((S[b] + ap * dS_a[b]).cwiseProduct(Z[b] + ad * dZ_a[b])).sum();
        mu_aff /= n_tot;
        double sigma = std::pow(std::max(0.0, std::min(1.0, mu_aff / mu)), 3.0);
        sigma = std::max(sigma, 1e-10);
        // Keep mu from dropping far below what the gap tolerance requires;
        // the Schur system turns noisy there and the residuals stall.
        const double mu_floor =
            0.05 * opts.gap_tol * (1.0 + std::abs(pobj) + std::abs(dobj)) / n_tot;
        if (mu > mu_floor) sigma = std::max(sigma, std::min(1.0, mu_floor / mu));
        // Once the gap is in, spend centering steps on the lagging residuals.
        if (relgap <= opts.gap_tol && (resp > opts.feas_tol || resd > opts.feas_tol))
            sigma = 1.0;

        // Corrector:
        //   G_ij = 2 (sigma mu I - Lam^2 - Hsym(ds~ dz~))_ij / (lam_i + lam_j)
        for (int b = 0; b < nb; ++b) {
            const auto& w = wk[b];
            Mat ds = w.Rinv * dS_a[b] * w.Rinv.transpose();
            Mat dz = w.R.transpose() * dZ_a[b] * w.R;
            Mat corr = symmetrized(Mat(ds * dz));
            const int d = cp.blocks[b].dim;
            Mat Gm(d, d);
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) {
                    double num = -corr(i, j);
                    if (i == j) num += sigma * mu - w.lam[i] * w.lam[i];
                    Gm(i, j) = 2.0 * num / (w.lam[i] + w.lam[j]);
                }
            G[b] = Gm;
        }
        auto [dx, dS, dZ] = newton(G);

        ap = 1.0;
        ad = 1.0;
        const double tau = 0.98;
        for (int b = 0; b < nb; ++b) {
            ap = std::min(ap, tau * max_step(S[b], dS[b]));
            ad = std::min(ad, tau * max_step(Z[b], dZ[b]));
        }
        ap = std::min(ap, 1.0);
        ad = std::min(ad, 1.0);
        if (ap < 1e-9 && ad < 1e-9) {
            sol.status = SolveStatus::NumericalFailure;
            sol.message = "step length collapsed";
            sol.objective = pobj;
            break;
        }

        if (opts.verbose)
            std::printf("      sigma %8.2e  ap %8.2e  ad %8.2e\n", sigma, ap, ad);

        x += ap * dx;
        for (int b = 0; b < nb; ++b) {
            S[b] = symmetrized(S[b] + ap * dS[b]);
            Z[b] = symmetrized(Z[b] + ad * dZ[b]);
        }
    }

    if (sol.status != SolveStatus::Optimal && sol.message != "stopped by callback") {
        // Fall back to the best iterate; it may still satisfy the request.
        if (best_x.size() == static_cast<long>(m)) {
            x = best_x;
            sol.objective = best_pobj;
            sol.duality_gap = best_relgap;
            if (best_resp <= opts.feas_tol && best_resd <= opts.feas_tol &&
                best_relgap <= opts.gap_tol) {
                sol.status = SolveStatus::Optimal;
                sol.message.clear();
            }
        }
        if (sol.status != SolveStatus::Optimal && sol.message.empty()) {
            sol.status = SolveStatus::NumericalFailure;
            sol.message = "iteration limit reached";
        }
    }

    // Report in the original variable space.
    sol.slot_values = original_slots(x);
    if (cp.has_equality_transform) {
        Eigen::Map<const Vec> xo(sol.slot_values.data(),
                                 static_cast<long>(sol.slot_values.size()));
        sol.objective = cp.original_c.dot(xo) + cp.original_c0;
    } else if (sol.status == SolveStatus::Optimal) {
        sol.objective = cp.c.dot(x) + cp.c0;
    }
    double viol = 0.0;
    for (int b = 0; b < nb; ++b) {
        Mat Fb = cp.eval_block(b, x, true);
        Eigen::SelfAdjointEigenSolver<Mat> es(symmetrized(Fb), Eigen::EigenvaluesOnly);
        viol = std::max(viol, std::max(0.0, -es.eigenvalues()(0)));
    }
    sol.max_psd_violation = viol;
    return sol;
}

}  // namespace detail

SdpSolution solve(const SemidefiniteProgram& prog, const SolveOptions& opts) {
    auto cp = detail::compile(prog, /*allow_elimination=*/true);
    return detail::run_interior_point(cp, opts);
}

bool phase1_feasible(const SemidefiniteProgram& prog, const SolveOptions& opts) {
    SemidefiniteProgram p2 = prog;
    p2.clear_objective();
    ScalarHandle t = p2.add_scalar("_phase1_t");
    p2.add_objective_term(t, -1.0);  // maximize t
    const int tslot = p2.scalar_slot(t);
    for (int b = 0; b < p2.num_blocks(); ++b) {
        const int d = p2.block_dim(b);
        p2.add_scalar_term(b, t, 0, 0, Mat(-Mat::Identity(d, d)));
    }

    const double margin = std::max(1e-10, opts.feas_tol);
    SolveOptions o2 = opts;
    // Early exit as soon as the iterate certifies a strictly feasible point:
    // t above the margin and every augmented block PD at the current slots
    // (the latter guards against large primal residuals early on).
    o2.stop_callback = [&](const std::vector<double>& slots, double) {
        if (slots.at(static_cast<size_t>(tslot)) <= margin) return false;
        for (int b = 0; b < p2.num_blocks(); ++b) {
            Mat Fb = p2.assemble_block(b, slots);
            Eigen::SelfAdjointEigenSolver<Mat> es(symmetrized(Fb), Eigen::EigenvaluesOnly);
            if (es.eigenvalues()(0) <= 0.0) return false;
        }
        return true;
    };
    SdpSolution s = solve(p2, o2);
    if (s.message == "stopped by callback") return true;
    if (s.status == SolveStatus::Optimal)
        return s.slot_values.at(static_cast<size_t>(tslot)) > margin;
    return false;
}

}  // namespace drregret::sdp
