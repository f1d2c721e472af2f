#include "drregret/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "sdp_internal.hpp"

namespace drregret::sdp {

namespace detail {

// Grants the compiler/solver access to the builder's records.
struct Access {
    static const SemidefiniteProgram& p(const SemidefiniteProgram& prog) { return prog; }

    template <typename F>
    static void for_each_scalar(const SemidefiniteProgram& prog, F&& f) {
        for (const auto& s : prog.scalars_) f(s.name, s.slot);
    }
    static const auto& scalars(const SemidefiniteProgram& prog) { return prog.scalars_; }
    static const auto& matrices(const SemidefiniteProgram& prog) { return prog.matrices_; }
    static const auto& blocks(const SemidefiniteProgram& prog) { return prog.blocks_; }
    static const auto& constants(const SemidefiniteProgram& prog) { return prog.constants_; }
    static const auto& scalar_terms(const SemidefiniteProgram& prog) { return prog.scalar_terms_; }
    static const auto& matrix_terms(const SemidefiniteProgram& prog) { return prog.matrix_terms_; }
    static const auto& equalities(const SemidefiniteProgram& prog) { return prog.equalities_; }
    static const auto& objective(const SemidefiniteProgram& prog) { return prog.objective_; }
    static double objective_constant(const SemidefiniteProgram& prog) {
        return prog.objective_constant_;
    }
};

}  // namespace detail

using detail::Access;

// ---------------------------------------------------------------------------
// Builder
// ---------------------------------------------------------------------------

ScalarHandle SemidefiniteProgram::add_scalar(const std::string& name) {
    ScalarVar v;
    v.name = name;
    v.slot = num_slots_++;
    scalars_.push_back(v);
    return ScalarHandle{static_cast<int>(scalars_.size()) - 1};
}

MatrixHandle SemidefiniteProgram::add_matrix(const std::string& name, int rows, int cols,
                                             Structure structure, int block_rows,
                                             int block_cols) {
    require(rows > 0 && cols > 0, "matrix variable must be nonempty");
    if (structure == Structure::Symmetric) {
        require(rows == cols, "symmetric variable must be square");
    }
    if (structure == Structure::BlockLowerTriangular) {
        require(block_rows > 0 && block_cols > 0, "block sizes must be positive");
        require(rows % block_rows == 0 && cols % block_cols == 0,
                "variable shape not divisible by block sizes");
        require(rows / block_rows == cols / block_cols,
                "block grid must be square for a causal variable");
    }
    MatrixVar v;
    v.name = name;
    v.rows = rows;
    v.cols = cols;
    v.structure = structure;
    v.block_rows = block_rows;
    v.block_cols = block_cols;
    v.slot_base = num_slots_;
    switch (structure) {
        case Structure::Free:
            v.slot_count = rows * cols;
            break;
        case Structure::Symmetric:
            v.slot_count = rows * (rows + 1) / 2;
            break;
        case Structure::BlockLowerTriangular: {
            int count = 0;
            for (int k = 0; k < rows; ++k)
                for (int l = 0; l < cols; ++l)
                    if (l / block_cols <= k / block_rows) ++count;
            v.slot_count = count;
            break;
        }
    }
    num_slots_ += v.slot_count;
    matrices_.push_back(v);
    return MatrixHandle{static_cast<int>(matrices_.size()) - 1};
}

int SemidefiniteProgram::scalar_slot(ScalarHandle s) const {
    require(s.id >= 0 && s.id < static_cast<int>(scalars_.size()), "bad scalar handle");
    return scalars_[s.id].slot;
}

int SemidefiniteProgram::matrix_slot(MatrixHandle h, int r, int c) const {
    require(h.id >= 0 && h.id < static_cast<int>(matrices_.size()), "bad matrix handle");
    const MatrixVar& v = matrices_[h.id];
    require(r >= 0 && r < v.rows && c >= 0 && c < v.cols, "matrix entry out of range");
    switch (v.structure) {
        case Structure::Free:
            return v.slot_base + r * v.cols + c;
        case Structure::Symmetric: {
            if (c > r) std::swap(r, c);
            return v.slot_base + r * (r + 1) / 2 + c;
        }
        case Structure::BlockLowerTriangular: {
            if (c / v.block_cols > r / v.block_rows)
                throw DomainError("entry " + std::to_string(r) + "," + std::to_string(c) +
                                  " of " + v.name + " is structurally zero");
            int idx = 0;
            for (int k = 0; k < v.rows; ++k)
                for (int l = 0; l < v.cols; ++l) {
                    if (l / v.block_cols > k / v.block_rows) continue;
                    if (k == r && l == c) return v.slot_base + idx;
                    ++idx;
                }
            throw DomainError("internal slot enumeration error");
        }
    }
    throw DomainError("unreachable");
}

void SemidefiniteProgram::add_objective_constant(double c) { objective_constant_ += c; }

void SemidefiniteProgram::add_objective_term(ScalarHandle s, double coeff) {
    objective_.emplace_back(scalar_slot(s), coeff);
}

void SemidefiniteProgram::add_objective_trace(MatrixHandle h, const Mat& C) {
    const MatrixVar& v = matrices_[h.id];
    require(C.rows() == v.rows && C.cols() == v.cols, "objective weight shape mismatch");
    for (int r = 0; r < v.rows; ++r)
        for (int c = 0; c < v.cols; ++c) {
            if (C(r, c) == 0.0) continue;
            if (v.structure == Structure::BlockLowerTriangular &&
                c / v.block_cols > r / v.block_rows)
                continue;  // structurally zero entries do not contribute
            objective_.emplace_back(matrix_slot(h, r, c), C(r, c));
        }
}

void SemidefiniteProgram::clear_objective() {
    objective_.clear();
    objective_constant_ = 0.0;
}

int SemidefiniteProgram::add_psd_block(int dim) {
    require(dim > 0, "block dimension must be positive");
    blocks_.push_back(dim);
    return static_cast<int>(blocks_.size()) - 1;
}

int SemidefiniteProgram::block_dim(int b) const {
    require(b >= 0 && b < static_cast<int>(blocks_.size()), "bad block index");
    return blocks_[b];
}

namespace {
void check_embed(int dim, int row, int col, long h, long w, const char* what) {
    require(row >= 0 && col >= 0 && row + h <= dim && col + w <= dim,
            std::string(what) + ": placement exceeds block bounds");
}
}  // namespace

void SemidefiniteProgram::add_constant(int block, int row, int col, const Mat& M) {
    check_embed(block_dim(block), row, col, M.rows(), M.cols(), "add_constant");
    constants_.push_back({block, row, col, M});
}

void SemidefiniteProgram::add_constant_with_mirror(int block, int row, int col, const Mat& M) {
    add_constant(block, row, col, M);
    add_constant(block, col, row, M.transpose());
}

void SemidefiniteProgram::add_scalar_term(int block, ScalarHandle s, int row, int col,
                                          const Mat& M) {
    require(s.id >= 0 && s.id < static_cast<int>(scalars_.size()), "bad scalar handle");
    check_embed(block_dim(block), row, col, M.rows(), M.cols(), "add_scalar_term");
    scalar_terms_.push_back({block, row, col, s.id, M});
}

void SemidefiniteProgram::add_matrix_term(int block, MatrixHandle h, int row, int col,
                                          const Mat& A, const Mat& B, bool transpose,
                                          double sign) {
    require(h.id >= 0 && h.id < static_cast<int>(matrices_.size()), "bad matrix handle");
    const MatrixVar& v = matrices_[h.id];
    const long vr = transpose ? v.cols : v.rows;
    const long vc = transpose ? v.rows : v.cols;
    const long hgt = A.size() > 0 ? A.rows() : vr;
    const long wid = B.size() > 0 ? B.cols() : vc;
    if (A.size() > 0) require(A.cols() == vr, "A has wrong inner dimension");
    if (B.size() > 0) require(B.rows() == vc, "B has wrong inner dimension");
    check_embed(block_dim(block), row, col, hgt, wid, "add_matrix_term");
    matrix_terms_.push_back({block, row, col, h.id, A, B, transpose, sign});
}

void SemidefiniteProgram::add_matrix_term_with_mirror(int block, MatrixHandle h, int row,
                                                      int col, const Mat& A, const Mat& B,
                                                      bool transpose, double sign) {
    add_matrix_term(block, h, row, col, A, B, transpose, sign);
    // (A op(V) B)^T = B^T op(V)^T A^T placed at the mirrored offset
    Mat At = A.size() > 0 ? Mat(A.transpose()) : Mat();
    Mat Bt = B.size() > 0 ? Mat(B.transpose()) : Mat();
    add_matrix_term(block, h, col, row, Bt, At, !transpose, sign);
}

void SemidefiniteProgram::add_equality(std::vector<EqualityTerm> terms, double rhs) {
    for (const auto& t : terms)
        require(t.slot >= 0 && t.slot < num_slots_, "equality references unknown slot");
    equalities_.push_back({std::move(terms), rhs});
}

std::string SemidefiniteProgram::slot_name(int slot) const {
    for (const auto& s : scalars_)
        if (s.slot == slot) return s.name;
    for (const auto& v : matrices_) {
        if (slot < v.slot_base || slot >= v.slot_base + v.slot_count) continue;
        // Invert the slot enumeration for display purposes.
        for (int r = 0; r < v.rows; ++r)
            for (int c = 0; c < v.cols; ++c) {
                bool free_entry = true;
                if (v.structure == Structure::Symmetric && c > r) free_entry = false;
                if (v.structure == Structure::BlockLowerTriangular &&
                    c / v.block_cols > r / v.block_rows)
                    free_entry = false;
                if (!free_entry) continue;
                if (matrix_slot(MatrixHandle{(int)(&v - matrices_.data())}, r, c) == slot)
                    return v.name + "[" + std::to_string(r) + "," + std::to_string(c) + "]";
            }
    }
    return "slot" + std::to_string(slot);
}

double SemidefiniteProgram::scalar_value(const SdpSolution& sol, ScalarHandle s) const {
    return sol.slot_values.at(static_cast<size_t>(scalar_slot(s)));
}

Mat SemidefiniteProgram::matrix_value(const SdpSolution& sol, MatrixHandle h) const {
    const MatrixVar& v = matrices_.at(h.id);
    Mat out = Mat::Zero(v.rows, v.cols);
    for (int r = 0; r < v.rows; ++r)
        for (int c = 0; c < v.cols; ++c) {
            if (v.structure == Structure::Symmetric && c > r) continue;
            if (v.structure == Structure::BlockLowerTriangular &&
                c / v.block_cols > r / v.block_rows)
                continue;
            double x = sol.slot_values.at(static_cast<size_t>(matrix_slot(h, r, c)));
            out(r, c) = x;
            if (v.structure == Structure::Symmetric) out(c, r) = x;
        }
    return out;
}

Mat SemidefiniteProgram::assemble_block(int b, const std::vector<double>& slots,
                                        bool include_constant) const {
    require(static_cast<int>(slots.size()) == num_slots_, "slot vector has wrong length");
    const int d = block_dim(b);
    Mat out = Mat::Zero(d, d);
    if (include_constant) {
        for (const auto& t : constants_)
            if (t.block == b) out.block(t.row, t.col, t.M.rows(), t.M.cols()) += t.M;
    }
    for (const auto& t : scalar_terms_)
        if (t.block == b)
            out.block(t.row, t.col, t.M.rows(), t.M.cols()) +=
                slots[scalars_[t.var].slot] * t.M;
    for (const auto& t : matrix_terms_) {
        if (t.block != b) continue;
        const MatrixVar& v = matrices_[t.var];
        Mat V = Mat::Zero(v.rows, v.cols);
        MatrixHandle h{t.var};
        for (int r = 0; r < v.rows; ++r)
            for (int c = 0; c < v.cols; ++c) {
                if (v.structure == Structure::Symmetric && c > r) continue;
                if (v.structure == Structure::BlockLowerTriangular &&
                    c / v.block_cols > r / v.block_rows)
                    continue;
                double x = slots[matrix_slot(h, r, c)];
                V(r, c) = x;
                if (v.structure == Structure::Symmetric) V(c, r) = x;
            }
        Mat Vop = t.transpose ? Mat(V.transpose()) : V;
        Mat term = Vop;
        if (t.A.size() > 0) term = t.A * term;
        if (t.B.size() > 0) term = term * t.B;
        out.block(t.row, t.col, term.rows(), term.cols()) += t.sign * term;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Compilation
// ---------------------------------------------------------------------------

namespace detail {

namespace {

// Deterministic slot weights for the symmetry assertion.
double hash_weight(int slot) {
    uint64_t z = static_cast<uint64_t>(slot) + 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    z = z ^ (z >> 31);
    return 0.5 + static_cast<double>(z % 1000003) / 1000003.0;
}

struct BlockScratch {
    std::vector<Entry> entries;
    std::vector<LowRank> lowrank;
    std::vector<Vec> factors;
};

int push_factor(std::vector<Vec>& pool, const Vec& f) {
    pool.push_back(f);
    return static_cast<int>(pool.size()) - 1;
}

}  // namespace

Mat CompiledProgram::eval_block(int b, const Vec& x, bool include_constant) const {
    const CompiledBlock& blk = blocks[b];
    Mat out = include_constant ? Mat(blk.F0) : Mat(Mat::Zero(blk.dim, blk.dim));
    for (const auto& e : blk.entries) out(e.r, e.c) += e.v * x[e.slot];
    if (!blk.lowrank.empty()) {
        const int nf = static_cast<int>(blk.factors.cols());
        Mat comb = Mat::Zero(nf, nf);
        for (const auto& lr : blk.lowrank) comb(lr.fi, lr.fj) += lr.w * x[lr.slot];
        out.noalias() += blk.factors * comb * blk.factors.transpose();
    }
    return out;
}

void CompiledProgram::accumulate_slot_reads(int b, const Mat& M, Vec& out) const {
    const CompiledBlock& blk = blocks[b];
    for (const auto& e : blk.entries) out[e.slot] += e.v * M(e.r, e.c);
    if (!blk.lowrank.empty()) {
        Mat G = blk.factors.transpose() * M * blk.factors;  // nf x nf
        for (const auto& lr : blk.lowrank) out[lr.slot] += lr.w * G(lr.fi, lr.fj);
    }
}

CompiledProgram compile(const SemidefiniteProgram& prog, bool allow_elimination,
                        bool apply_equalities) {
    const auto& matrices = Access::matrices(prog);
    const auto& scalars = Access::scalars(prog);

    CompiledProgram cp;
    cp.m = prog.num_slots();
    cp.c = Vec::Zero(cp.m);
    for (const auto& [slot, coeff] : Access::objective(prog)) cp.c[slot] += coeff;
    cp.c0 = Access::objective_constant(prog);

    cp.blocks.resize(Access::blocks(prog).size());
    std::vector<BlockScratch> scratch(cp.blocks.size());
    for (size_t b = 0; b < cp.blocks.size(); ++b) {
        cp.blocks[b].dim = Access::blocks(prog)[b];
        cp.blocks[b].F0 = Mat::Zero(cp.blocks[b].dim, cp.blocks[b].dim);
    }

    for (const auto& t : Access::constants(prog))
        cp.blocks[t.block].F0.block(t.row, t.col, t.M.rows(), t.M.cols()) += t.M;

    for (const auto& t : Access::scalar_terms(prog)) {
        const int slot = scalars[t.var].slot;
        for (int r = 0; r < t.M.rows(); ++r)
            for (int c = 0; c < t.M.cols(); ++c)
                if (t.M(r, c) != 0.0)
                    scratch[t.block].entries.push_back(
                        {slot, t.row + r, t.col + c, t.M(r, c)});
    }

    // Tracks eliminability of symmetric matrix variables: every appearance
    // must be an identity embedding at a diagonal offset.
    std::vector<bool> pure_embed(matrices.size(), true);
    std::vector<std::vector<Elimination::Embed>> embeds(matrices.size());

    for (const auto& t : Access::matrix_terms(prog)) {
        const auto& v = matrices[t.var];
        MatrixHandle h{t.var};
        const bool identity = t.A.size() == 0 && t.B.size() == 0;
        if (identity && v.structure == Structure::Symmetric && t.row == t.col &&
            t.sign == 1.0) {
            embeds[t.var].push_back({t.block, t.row});
        } else {
            pure_embed[t.var] = false;
        }

        if (identity) {
            // plain (possibly transposed/mirrored) embedding -> elementary entries
            for (int r = 0; r < v.rows; ++r)
                for (int c = 0; c < v.cols; ++c) {
                    if (v.structure == Structure::Symmetric && c > r) continue;
                    if (v.structure == Structure::BlockLowerTriangular &&
                        c / v.block_cols > r / v.block_rows)
                        continue;
                    const int slot = prog.matrix_slot(h, r, c);
                    auto place = [&](int kr, int kc) {
                        scratch[t.block].entries.push_back(
                            {slot, t.row + kr, t.col + kc, t.sign});
                    };
                    if (v.structure == Structure::Symmetric) {
                        place(r, c);
                        if (r != c) place(c, r);
                    } else if (!t.transpose) {
                        place(r, c);
                    } else {
                        place(c, r);
                    }
                }
            continue;
        }

        // General product term: coefficient of V(k,l) is (A col a)(B row b)^T.
        const long vr = t.transpose ? v.cols : v.rows;
        const long vc = t.transpose ? v.rows : v.cols;
        const int d = cp.blocks[t.block].dim;
        std::vector<int> rowfac(vr, -1), colfac(vc, -1);
        auto row_factor = [&](int a) {
            if (rowfac[a] < 0) {
                Vec f = Vec::Zero(d);
                if (t.A.size() > 0)
                    f.segment(t.row, t.A.rows()) = t.A.col(a);
                else
                    f[t.row + a] = 1.0;
                rowfac[a] = push_factor(scratch[t.block].factors, f);
            }
            return rowfac[a];
        };
        auto col_factor = [&](int b2) {
            if (colfac[b2] < 0) {
                Vec f = Vec::Zero(d);
                if (t.B.size() > 0)
                    f.segment(t.col, t.B.cols()) = t.B.row(b2).transpose();
                else
                    f[t.col + b2] = 1.0;
                colfac[b2] = push_factor(scratch[t.block].factors, f);
            }
            return colfac[b2];
        };
        for (int r = 0; r < v.rows; ++r)
            for (int c = 0; c < v.cols; ++c) {
                if (v.structure == Structure::Symmetric && c > r) continue;
                if (v.structure == Structure::BlockLowerTriangular &&
                    c / v.block_cols > r / v.block_rows)
                    continue;
                const int slot = prog.matrix_slot(h, r, c);
                auto add_pair = [&](int kr, int kc) {
                    scratch[t.block].lowrank.push_back(
                        {slot, row_factor(kr), col_factor(kc), t.sign});
                };
                if (v.structure == Structure::Symmetric) {
                    add_pair(r, c);
                    if (r != c) add_pair(c, r);
                } else if (!t.transpose) {
                    add_pair(r, c);
                } else {
                    add_pair(c, r);
                }
            }
    }

    for (size_t b = 0; b < cp.blocks.size(); ++b) {
        auto& blk = cp.blocks[b];
        std::stable_sort(scratch[b].entries.begin(), scratch[b].entries.end(),
                         [](const Entry& x, const Entry& y) { return x.slot < y.slot; });
        std::stable_sort(scratch[b].lowrank.begin(), scratch[b].lowrank.end(),
                         [](const LowRank& x, const LowRank& y) { return x.slot < y.slot; });
        blk.entries = std::move(scratch[b].entries);
        blk.lowrank = std::move(scratch[b].lowrank);
        blk.factors = Mat::Zero(blk.dim, static_cast<long>(scratch[b].factors.size()));
        for (size_t f = 0; f < scratch[b].factors.size(); ++f)
            blk.factors.col(f) = scratch[b].factors[f];
    }

    // Symmetry assertion: F0 exactly, coefficients via a deterministic
    // random combination.
    for (size_t b = 0; b < cp.blocks.size(); ++b) {
        const auto& blk = cp.blocks[b];
        const double f0scale = std::max(1.0, blk.F0.cwiseAbs().maxCoeff());
        require((blk.F0 - blk.F0.transpose()).cwiseAbs().maxCoeff() <= 1e-9 * f0scale,
                "constraint block " + std::to_string(b) + " has asymmetric constant");
        Vec probe = Vec::Zero(cp.m);
        for (int s = 0; s < cp.m; ++s) probe[s] = hash_weight(s);
        Mat combo = cp.eval_block(static_cast<int>(b), probe, false);
        const double cscale = std::max(1.0, combo.cwiseAbs().maxCoeff());
        require((combo - combo.transpose()).cwiseAbs().maxCoeff() <= 1e-9 * cscale,
                "constraint block " + std::to_string(b) + " assembles asymmetrically");
    }

    // Equality constraints: reduce to the affine subspace x = x0 + N z.
    const auto& eqs = Access::equalities(prog);
    if (!eqs.empty() && apply_equalities) {
        const int neq = static_cast<int>(eqs.size());
        Mat Aeq = Mat::Zero(neq, cp.m);
        Vec beq = Vec::Zero(neq);
        for (int i = 0; i < neq; ++i) {
            for (const auto& term : eqs[i].terms) Aeq(i, term.slot) += term.coeff;
            beq[i] = eqs[i].rhs;
        }
        Eigen::CompleteOrthogonalDecomposition<Mat> cod(Aeq);
        Vec x0 = cod.solve(beq);
        if ((Aeq * x0 - beq).cwiseAbs().maxCoeff() > 1e-8 * (1.0 + beq.cwiseAbs().maxCoeff()))
            throw DomainError("inconsistent equality constraints");
        Eigen::FullPivLU<Mat> lu(Aeq);
        Mat N = lu.kernel();
        const int mz = static_cast<int>(N.cols());

        CompiledProgram red;
        red.m = mz;
        red.original_c = cp.c;
        red.original_c0 = cp.c0;
        red.has_equality_transform = true;
        red.eq_nullspace = N;
        red.eq_particular = x0;
        red.c = N.transpose() * cp.c;
        red.c0 = cp.c0 + cp.c.dot(x0);
        red.blocks.resize(cp.blocks.size());
        for (size_t b = 0; b < cp.blocks.size(); ++b) {
            const auto& blk = cp.blocks[b];
            auto& rb = red.blocks[b];
            rb.dim = blk.dim;
            rb.F0 = cp.eval_block(static_cast<int>(b), x0, true);
            // Expand every coefficient to elementary entries in z space.
            std::map<std::tuple<int, int, int>, double> acc;  // (slot, r, c) -> v
            auto add = [&](int slot, int r, int c, double v) {
                if (v != 0.0) acc[{slot, r, c}] += v;
            };
            for (const auto& e : blk.entries)
                for (int k = 0; k < mz; ++k) add(k, e.r, e.c, e.v * N(e.slot, k));
            for (const auto& lr : blk.lowrank) {
                const Vec& fi = blk.factors.col(lr.fi);
                const Vec& fj = blk.factors.col(lr.fj);
                for (int r = 0; r < blk.dim; ++r) {
                    if (fi[r] == 0.0) continue;
                    for (int c = 0; c < blk.dim; ++c) {
                        if (fj[c] == 0.0) continue;
                        for (int k = 0; k < mz; ++k)
                            add(k, r, c, lr.w * fi[r] * fj[c] * N(lr.slot, k));
                    }
                }
            }
            for (const auto& [key, v] : acc) {
                auto [slot, r, c] = key;
                rb.entries.push_back({slot, r, c, v});
            }
            rb.factors = Mat::Zero(rb.dim, 0);
        }
        cp = std::move(red);
        allow_elimination = false;
    }

    // Elimination detection.
    if (allow_elimination) {
        for (size_t vi = 0; vi < matrices.size(); ++vi) {
            const auto& v = matrices[vi];
            if (v.structure != Structure::Symmetric) continue;
            if (!pure_embed[vi]) continue;
            const auto& em = embeds[vi];
            if (em.empty() || em.size() > 2) continue;
            if (em.size() == 2 && em[0].block == em[1].block) continue;
            bool in_equality = false;  // equalities already handled above
            if (in_equality) continue;
            Elimination e;
            e.dim = v.rows;
            e.slot_base = v.slot_base;
            e.slot_count = v.slot_count;
            for (const auto& x : em) e.embeds.push_back({x.block, x.offset});
            cp.elim = e;
            break;  // one elimination is enough for the target problems
        }
    }

    cp.slot_to_reduced.assign(cp.m, -1);
    for (int s = 0; s < cp.m; ++s) {
        if (cp.slot_in_elim(s)) continue;
        cp.slot_to_reduced[s] = static_cast<int>(cp.reduced_slots.size());
        cp.reduced_slots.push_back(s);
    }

    // Active slot CSR per block (reduced slots only).
    for (auto& blk : cp.blocks) {
        blk.active_slots.clear();
        blk.entry_range.clear();
        blk.lowrank_range.clear();
        size_t ie = 0, il = 0;
        while (ie < blk.entries.size() || il < blk.lowrank.size()) {
            int slot = INT32_MAX;
            if (ie < blk.entries.size()) slot = std::min(slot, blk.entries[ie].slot);
            if (il < blk.lowrank.size()) slot = std::min(slot, blk.lowrank[il].slot);
            size_t ee = ie, ll = il;
            while (ee < blk.entries.size() && blk.entries[ee].slot == slot) ++ee;
            while (ll < blk.lowrank.size() && blk.lowrank[ll].slot == slot) ++ll;
            if (!cp.slot_in_elim(slot)) {
                blk.active_slots.push_back(slot);
                blk.entry_range.emplace_back(static_cast<int>(ie), static_cast<int>(ee));
                blk.lowrank_range.emplace_back(static_cast<int>(il), static_cast<int>(ll));
            }
            ie = ee;
            il = ll;
        }
    }

    return cp;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Standard-form export / parse (format documented in docs/sdp_standard_form.md)
// ---------------------------------------------------------------------------

namespace {

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

std::string SemidefiniteProgram::export_standard_form() const {
    auto cp = detail::compile(*this, /*allow_elimination=*/false, /*apply_equalities=*/false);
    std::ostringstream os;
    os << "sdpsf 1\n";
    os << "vars " << cp.m << "\n";
    for (int s = 0; s < cp.m; ++s) os << "var " << s << " " << slot_name(s) << "\n";
    os << "objconst " << fmt_double(cp.c0) << "\n";
    std::vector<std::pair<int, double>> obj;
    for (int s = 0; s < cp.m; ++s)
        if (cp.c[s] != 0.0) obj.emplace_back(s, cp.c[s]);
    os << "obj " << obj.size() << "\n";
    for (const auto& [s, v] : obj) os << s << " " << fmt_double(v) << "\n";
    os << "blocks " << cp.blocks.size() << "\n";
    for (size_t b = 0; b < cp.blocks.size(); ++b) {
        const auto& blk = cp.blocks[b];
        os << "block " << b << " " << blk.dim << "\n";
        std::vector<std::tuple<int, int, double>> f0;
        for (int r = 0; r < blk.dim; ++r)
            for (int c = 0; c <= r; ++c)
                if (blk.F0(r, c) != 0.0) f0.emplace_back(r, c, blk.F0(r, c));
        os << "f0 " << f0.size() << "\n";
        for (const auto& [r, c, v] : f0) os << r << " " << c << " " << fmt_double(v) << "\n";

        // Accumulate per-slot coefficient matrices (lower triangle).
        std::map<int, std::map<std::pair<int, int>, double>> per_slot;
        for (const auto& e : blk.entries) per_slot[e.slot][{e.r, e.c}] += e.v;
        for (const auto& lr : blk.lowrank) {
            const Vec& fi = blk.factors.col(lr.fi);
            const Vec& fj = blk.factors.col(lr.fj);
            for (int r = 0; r < blk.dim; ++r) {
                if (fi[r] == 0.0) continue;
                for (int c = 0; c < blk.dim; ++c)
                    if (fj[c] != 0.0) per_slot[lr.slot][{r, c}] += lr.w * fi[r] * fj[c];
            }
        }
        for (const auto& [slot, entries] : per_slot) {
            std::vector<std::tuple<int, int, double>> lower;
            for (const auto& [rc, v] : entries) {
                if (rc.first >= rc.second && v != 0.0) lower.emplace_back(rc.first, rc.second, v);
            }
            if (lower.empty()) continue;
            os << "f " << slot << " " << lower.size() << "\n";
            for (const auto& [r, c, v] : lower)
                os << r << " " << c << " " << fmt_double(v) << "\n";
        }
    }
    const auto& eqs = detail::Access::equalities(*this);
    os << "eq " << eqs.size() << "\n";
    for (const auto& e : eqs) {
        std::map<int, double> coeffs;
        for (const auto& t : e.terms) coeffs[t.slot] += t.coeff;
        os << "eqrow " << coeffs.size() << " " << fmt_double(e.rhs) << "\n";
        for (const auto& [s, v] : coeffs) os << s << " " << fmt_double(v) << "\n";
    }
    os << "end\n";
    return os.str();
}

SemidefiniteProgram SemidefiniteProgram::parse_standard_form(const std::string& text) {
    std::istringstream is(text);
    std::string tok;
    auto expect = [&](const char* what) {
        if (!(is >> tok) || tok != what)
            throw DomainError(std::string("sdp parse: expected '") + what + "', got '" + tok +
                              "'");
    };
    expect("sdpsf");
    int version;
    is >> version;
    require(version == 1, "sdp parse: unsupported version");
    expect("vars");
    int m;
    is >> m;
    SemidefiniteProgram prog;
    std::vector<ScalarHandle> handles(m);
    std::vector<std::string> names(m);
    for (int i = 0; i < m; ++i) {
        expect("var");
        int idx;
        is >> idx >> names[i];
        require(idx == i, "sdp parse: variables out of order");
    }
    for (int i = 0; i < m; ++i) handles[i] = prog.add_scalar(names[i]);
    expect("objconst");
    double c0;
    is >> c0;
    prog.add_objective_constant(c0);
    expect("obj");
    int nobj;
    is >> nobj;
    for (int i = 0; i < nobj; ++i) {
        int s;
        double v;
        is >> s >> v;
        prog.add_objective_term(handles.at(s), v);
    }
    expect("blocks");
    int nblocks;
    is >> nblocks;
    const Mat one = Mat::Ones(1, 1);
    int cur = -1;
    bool saw_eq = false, saw_end = false;
    while (is >> tok) {
        if (tok == "block") {
            int idx, dim;
            is >> idx >> dim;
            require(idx == cur + 1, "sdp parse: blocks out of order");
            cur = prog.add_psd_block(dim);
        } else if (tok == "f0") {
            require(cur >= 0, "sdp parse: f0 before any block");
            int nnz;
            is >> nnz;
            const int dim = prog.block_dim(cur);
            Mat F0 = Mat::Zero(dim, dim);
            for (int i = 0; i < nnz; ++i) {
                int r, c;
                double v;
                is >> r >> c >> v;
                F0(r, c) = v;
                F0(c, r) = v;
            }
            if (nnz > 0) prog.add_constant(cur, 0, 0, F0);
        } else if (tok == "f") {
            require(cur >= 0, "sdp parse: coefficient before any block");
            int slot, n;
            is >> slot >> n;
            for (int i = 0; i < n; ++i) {
                int r, c;
                double v;
                is >> r >> c >> v;
                prog.add_scalar_term(cur, handles.at(slot), r, c, v * one);
                if (r != c) prog.add_scalar_term(cur, handles.at(slot), c, r, v * one);
            }
        } else if (tok == "eq") {
            int neq;
            is >> neq;
            for (int i = 0; i < neq; ++i) {
                expect("eqrow");
                int n;
                double rhs;
                is >> n >> rhs;
                std::vector<EqualityTerm> terms;
                for (int k = 0; k < n; ++k) {
                    int s;
                    double v;
                    is >> s >> v;
                    terms.push_back({prog.scalar_slot(handles.at(s)), v});
                }
                prog.add_equality(std::move(terms), rhs);
            }
            saw_eq = true;
        } else if (tok == "end") {
            saw_end = true;
            break;
        } else {
            throw DomainError("sdp parse: unexpected token '" + tok + "'");
        }
    }
    require(cur + 1 == nblocks, "sdp parse: block count mismatch");
    require(saw_eq && saw_end, "sdp parse: truncated file");
    return prog;
}

}  // namespace drregret::sdp
