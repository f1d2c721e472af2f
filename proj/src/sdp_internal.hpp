#pragma once

// Internal compiled form of a SemidefiniteProgram. Coefficient matrices are
// kept in two complementary sparse shapes:
//   - elementary entries   A_slot += v * E(r,c)
//   - rank-one factor pairs A_slot += w * f_i f_j^T
// Both lists store ordered (non-symmetrized) contributions; a well-formed
// program sums to a symmetric coefficient matrix per slot, which is asserted
// when compiling. The solver exploits the factor form to assemble the Schur
// complement from small Gram matrices instead of dense d x d products.

#include <optional>
#include <vector>

#include "drregret/sdp.hpp"

namespace drregret::sdp::detail {

struct Entry {
    int slot, r, c;
    double v;
};

struct LowRank {
    int slot, fi, fj;
    double w;
};

struct CompiledBlock {
    int dim = 0;
    Mat F0;
    std::vector<Entry> entries;    // sorted by slot
    std::vector<LowRank> lowrank;  // sorted by slot
    Mat factors;                   // dim x nfac

    // Active (non-eliminated) slots with coefficients in this block and the
    // half-open ranges of their entries in the two lists above.
    std::vector<int> active_slots;
    std::vector<std::pair<int, int>> entry_range;
    std::vector<std::pair<int, int>> lowrank_range;
};

// A symmetric matrix variable embedded with identity coefficients at a
// diagonal offset of one or two blocks. Its slots are solved for in closed
// form inside the Newton step instead of entering the Schur matrix.
struct Elimination {
    int dim = 0;
    int slot_base = 0;
    int slot_count = 0;
    struct Embed {
        int block;
        int offset;
    };
    std::vector<Embed> embeds;
};

struct CompiledProgram {
    int m = 0;  // number of slots
    Vec c;
    double c0 = 0.0;
    std::vector<CompiledBlock> blocks;
    std::optional<Elimination> elim;

    std::vector<int> reduced_slots;    // slots outside the elimination range
    std::vector<int> slot_to_reduced;  // -1 for eliminated slots

    // When equalities were eliminated: original = x0 + N * reduced.
    bool has_equality_transform = false;
    Mat eq_nullspace;  // m_original x m
    Vec eq_particular;
    double original_c0 = 0.0;
    Vec original_c;

    bool slot_in_elim(int s) const {
        return elim && s >= elim->slot_base && s < elim->slot_base + elim->slot_count;
    }

    Mat eval_block(int b, const Vec& x, bool include_constant) const;
    // out[slot] += sum_b Tr(A_slot M_b); M_b must be symmetric.
    void accumulate_slot_reads(int b, const Mat& M, Vec& out) const;
};

// apply_equalities substitutes the affine equality subspace (required for
// solving); exports keep the original slot space and list the equalities.
CompiledProgram compile(const SemidefiniteProgram& prog, bool allow_elimination,
                        bool apply_equalities = true);

SdpSolution run_interior_point(const CompiledProgram& cp, const SolveOptions& opts);

}  // namespace drregret::sdp::detail
