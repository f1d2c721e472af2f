#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "drregret/types.hpp"

namespace drregret::sdp {

using drregret::Mat;
using drregret::Vec;

// Structure tag of a matrix decision variable. A BlockLowerTriangular
// variable only exposes its lower block-triangle (including the block
// diagonal) as free scalars; a Symmetric variable exposes its lower
// triangle and mirrors it.
enum class Structure { Free, Symmetric, BlockLowerTriangular };

struct ScalarHandle {
    int id = -1;
};
struct MatrixHandle {
    int id = -1;
};

enum class SolveStatus { Optimal, Infeasible, NumericalFailure };

namespace detail {
struct Access;
}

struct SolveOptions {
    double feas_tol = 1e-8;      // primal/dual residual tolerance (relative)
    double gap_tol = 1e-8;       // duality gap tolerance (relative)
    int max_iterations = 200;
    double init_scale = 100.0;  // initial multiple of the identity for S and Z
    bool verbose = false;
    // Optional per-iteration hook (slot values, primal objective); returning
    // true stops the solve with a "stopped by callback" message. Used by the
    // phase-1 feasibility oracle for early exit.
    std::function<bool(const std::vector<double>&, double)> stop_callback;
};

struct SdpSolution {
    SolveStatus status = SolveStatus::NumericalFailure;
    double objective = 0.0;
    std::vector<double> slot_values;
    double max_psd_violation = 0.0;  // most negative eigenvalue across blocks, clamped at 0
    double duality_gap = 0.0;        // relative gap reported by the solver
    int iterations = 0;
    std::string message;
};

// A linear objective over scalar and structured matrix variables subject to
// affine positive-semidefinite constraints
//
//     minimize   c0 + <c, vars>
//     subject to F_b(vars) = F0_b + sum_i vars_i * F_{b,i}  PSD for each block b,
//                A vars = rhs                                (scalar equalities)
//
// Every constraint block is required to assemble to a symmetric expression;
// this is asserted when the program is compiled for solving or export.
class SemidefiniteProgram {
public:
    ScalarHandle add_scalar(const std::string& name);
    MatrixHandle add_matrix(const std::string& name, int rows, int cols, Structure structure,
                            int block_rows = 1, int block_cols = 1);

    void add_objective_constant(double c);
    void add_objective_term(ScalarHandle s, double coeff);
    // += <C, V> (entrywise inner product with the full matrix variable)
    void add_objective_trace(MatrixHandle v, const Mat& C);
    void clear_objective();

    // Returns the index of a new PSD constraint block of the given size.
    int add_psd_block(int dim);

    // Constant contribution: block += embed(M) at (row, col).
    void add_constant(int block, int row, int col, const Mat& M);
    // Scalar-variable contribution: block += s * embed(M) at (row, col).
    void add_scalar_term(int block, ScalarHandle s, int row, int col, const Mat& M);
    // Matrix-variable contribution: block += sign * A * op(V) * B at (row, col)
    // with op(V) = V^T when transpose is set. Pass empty A/B for identity.
    void add_matrix_term(int block, MatrixHandle v, int row, int col, const Mat& A,
                         const Mat& B, bool transpose = false, double sign = 1.0);
    // Convenience: places the term at (row, col) and its transpose at (col, row).
    void add_matrix_term_with_mirror(int block, MatrixHandle v, int row, int col, const Mat& A,
                                     const Mat& B, bool transpose = false, double sign = 1.0);
    void add_constant_with_mirror(int block, int row, int col, const Mat& M);

    // Scalar linear equality sum_k coeff_k * slot_k = rhs, expressed over
    // scalar handles and individual matrix-variable entries.
    struct EqualityTerm {
        int slot = -1;
        double coeff = 0.0;
    };
    void add_equality(std::vector<EqualityTerm> terms, double rhs);

    int scalar_slot(ScalarHandle s) const;
    // Slot of entry (r, c); throws DomainError for entries that are not free
    // under the variable's structure tag.
    int matrix_slot(MatrixHandle v, int r, int c) const;

    int num_slots() const { return num_slots_; }
    int num_blocks() const { return static_cast<int>(blocks_.size()); }
    int block_dim(int b) const;
    std::string slot_name(int slot) const;

    double scalar_value(const SdpSolution& sol, ScalarHandle s) const;
    Mat matrix_value(const SdpSolution& sol, MatrixHandle v) const;

    // Dense assembly of block b at the given slot values (used by tests and
    // by the solver for residuals).
    Mat assemble_block(int b, const std::vector<double>& slots, bool include_constant = true) const;

    // Line-oriented sparse standard form; see docs/sdp_standard_form.md.
    std::string export_standard_form() const;
    static SemidefiniteProgram parse_standard_form(const std::string& text);

    friend struct detail::Access;

private:
    struct MatrixVar {
        std::string name;
        int rows = 0, cols = 0;
        Structure structure = Structure::Free;
        int block_rows = 1, block_cols = 1;
        int slot_base = 0;
        int slot_count = 0;
    };
    struct ScalarVar {
        std::string name;
        int slot = 0;
    };
    struct ConstantTerm {
        int block, row, col;
        Mat M;
    };
    struct ScalarTerm {
        int block, row, col;
        int var;  // index into scalars_
        Mat M;
    };
    struct MatrixTerm {
        int block, row, col;
        int var;  // index into matrices_
        Mat A, B; // empty means identity
        bool transpose = false;
        double sign = 1.0;
    };
    struct Equality {
        std::vector<EqualityTerm> terms;
        double rhs = 0.0;
    };

    std::vector<ScalarVar> scalars_;
    std::vector<MatrixVar> matrices_;
    std::vector<int> blocks_;  // dims
    std::vector<ConstantTerm> constants_;
    std::vector<ScalarTerm> scalar_terms_;
    std::vector<MatrixTerm> matrix_terms_;
    std::vector<Equality> equalities_;
    std::vector<std::pair<int, double>> objective_;  // (slot, coeff), merged on compile
    double objective_constant_ = 0.0;
    int num_slots_ = 0;
};

// Solves the program with an infeasible-start Nesterov-Todd-scaled
// predictor-corrector interior-point method. status == Optimal guarantees
// the reported objective is within the requested tolerances (gap and
// feasibility) of the true optimum.
SdpSolution solve(const SemidefiniteProgram& prog, const SolveOptions& opts = {});

// Feasibility oracle: maximizes t such that every block satisfies
// F_b(x) - t I PSD. Returns true when a strictly feasible point exists
// (optimal t > tol margin), false when the program is certified infeasible.
bool phase1_feasible(const SemidefiniteProgram& prog, const SolveOptions& opts = {});

}  // namespace drregret::sdp
