#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "drregret/experiment.hpp"

namespace py = pybind11;
using namespace drregret;

namespace {

StateSpace state_space_from(const Mat& A, const Mat& B, const Mat& C, const Mat& Q,
                            const Mat& R) {
    return make_state_space(A, B, C, Q, R);
}

py::dict lift_py(const Mat& A, const Mat& B, const Mat& C, const Mat& Q, const Mat& R, int N) {
    LiftedSystem sys = lift_system(state_space_from(A, B, C, Q, R), N);
    py::dict d;
    d["F"] = sys.F;
    d["G"] = sys.G;
    d["J"] = sys.J;
    d["L"] = sys.L;
    return d;
}

py::dict factorizations_py(const Mat& A, const Mat& B, const Mat& C, const Mat& Q, const Mat& R,
                           int N) {
    LiftedSystem sys = lift_system(state_space_from(A, B, C, Q, R), N);
    FactorizationSet fs = build_factorizations(sys);
    py::dict d;
    d["T"] = fs.T;
    d["U"] = fs.U;
    d["S"] = fs.S;
    d["V"] = fs.V;
    d["T_half"] = fs.T_half;
    d["U_half"] = fs.U_half;
    d["S_half"] = fs.S_half;
    d["V_half"] = fs.V_half;
    d["Theta"] = fs.Theta;
    d["Psi"] = fs.Psi;
    d["W"] = fs.W;
    d["P"] = fs.P;
    return d;
}

py::dict controller_dict(const ControllerOperators& ops, const RegretOperator& reg) {
    py::dict d;
    d["E"] = ops.E;
    d["K"] = ops.K;
    d["T_K"] = ops.T_K;
    d["causal"] = ops.causal;
    d["C_K"] = reg.C_K;
    d["lambda_max"] = reg.lambda_max;
    return d;
}

py::dict synthesize_py(const Mat& A, const Mat& B, const Mat& C, const Mat& Q, const Mat& R,
                       int N, const std::string& controller, double radius, double solver_tol,
                       double gamma_rel_tol) {
    ExperimentConfig cfg;
    cfg.system = state_space_from(A, B, C, Q, R);
    cfg.horizon = N;
    cfg.solver_tol = solver_tol;
    cfg.gamma_rel_tol = gamma_rel_tol;
    PlantContext ctx = make_context(cfg);
    SynthesizedController sc = synthesize_by_name(ctx, controller, radius, cfg);
    if (!sc.ok) throw std::runtime_error(sc.status);
    py::dict d = controller_dict(sc.ops, sc.regret);
    d["controller"] = sc.name;
    d["radius"] = radius;
    d["gamma_star"] = sc.gamma_star;
    d["objective"] = sc.objective;
    d["status"] = sc.status;
    return d;
}

py::dict worst_case_py(const Mat& C_K, const Mat& M0, double radius) {
    RegretOperator reg;
    reg.C_K = symmetrized(C_K);
    Eigen::SelfAdjointEigenSolver<Mat> es(reg.C_K);
    reg.eigenvalues = es.eigenvalues();
    reg.eigenvectors = es.eigenvectors();
    reg.lambda_max = reg.eigenvalues(reg.eigenvalues.size() - 1);
    AmbiguitySet amb;
    amb.M0 = M0;
    amb.radius = radius;
    WorstCaseDistribution wc = worst_case_distribution(reg, amb);
    py::dict d;
    d["gamma_star"] = wc.gamma_star;
    d["D"] = wc.D;
    d["M_star"] = wc.M_star;
    d["expected_regret"] = wc.expected_regret;
    d["dual_value"] = wc.dual_value;
    d["nominal"] = wc.nominal;
    return d;
}

py::list run_experiment_py(const std::string& config_json) {
    ExperimentConfig cfg = config_from_json_text(config_json);
    auto rows = run_experiment(cfg);
    py::list out;
    for (const auto& r : rows) {
        py::dict d;
        d["radius"] = r.radius;
        d["controller"] = r.controller;
        d["regret_under_dr_wc"] = r.regret_under_dr_wc;
        d["own_wc_regret"] = r.own_wc_regret;
        d["gamma_star"] = r.gamma_star;
        d["solver_iterations"] = r.solver_iterations;
        d["status"] = r.status;
        out.append(d);
    }
    return out;
}

py::dict boeing_py() {
    StateSpace ss = boeing747();
    py::dict d;
    d["A"] = ss.A;
    d["B"] = ss.B;
    d["C"] = ss.C;
    d["Q"] = ss.Q;
    d["R"] = ss.R;
    return d;
}

std::string export_dr_sdp_py(const Mat& A, const Mat& B, const Mat& C, const Mat& Q,
                             const Mat& R, int N, double gamma, double radius) {
    LiftedSystem sys = lift_system(state_space_from(A, B, C, Q, R), N);
    FactorizationSet fs = build_factorizations(sys);
    GammaOperators gops = gamma_operators(fs, gamma);
    DrProgram dr = assemble_dr_lmi(gops, fs, radius, fs.dims);
    return dr.program.export_standard_form();
}

double run_fixed_gamma_py(const Mat& A, const Mat& B, const Mat& C, const Mat& Q, const Mat& R,
                          int N, double gamma, double radius) {
    LiftedSystem sys = lift_system(state_space_from(A, B, C, Q, R), N);
    FactorizationSet fs = build_factorizations(sys);
    SynthesisConfig cfg;
    cfg.radius = radius;
    InnerSolve s = inner_value(gamma, fs, radius, cfg);
    if (!s.feasible) throw std::runtime_error("gamma below the feasibility threshold");
    if (s.status != sdp::SolveStatus::Optimal)
        throw std::runtime_error("inner solve did not reach optimality");
    return s.value;
}

}  // namespace

PYBIND11_MODULE(_drregret, m) {
    m.doc() = "Distributionally robust regret-optimal measurement-feedback control";

    m.def("boeing747", &boeing_py, "Boeing 747 longitudinal flight preset");
    m.def("lift", &lift_py, py::arg("A"), py::arg("B"), py::arg("C"), py::arg("Q"),
          py::arg("R"), py::arg("N"), "Finite-horizon operator form of the plant");
    m.def("factorizations", &factorizations_py, py::arg("A"), py::arg("B"), py::arg("C"),
          py::arg("Q"), py::arg("R"), py::arg("N"),
          "Gram operators, triangular square roots and core operators");
    m.def("synthesize", &synthesize_py, py::arg("A"), py::arg("B"), py::arg("C"), py::arg("Q"),
          py::arg("R"), py::arg("N"), py::arg("controller"), py::arg("radius"),
          py::arg("solver_tol") = 1e-8, py::arg("gamma_rel_tol") = 1e-4,
          "Synthesize DR-RO-MF / LQG / HINF / RO-MF at a given radius");
    m.def("worst_case", &worst_case_py, py::arg("C_K"), py::arg("M0"), py::arg("radius"),
          "Worst-case distribution in the Wasserstein ball for a regret operator");
    m.def("run_experiment", &run_experiment_py, py::arg("config_json"),
          "Run a radius sweep from a json config string");
    m.def("export_dr_sdp", &export_dr_sdp_py, py::arg("A"), py::arg("B"), py::arg("C"),
          py::arg("Q"), py::arg("R"), py::arg("N"), py::arg("gamma"), py::arg("radius"),
          "Standard-form text of the fixed-gamma program");
    m.def("run_fixed_gamma", &run_fixed_gamma_py, py::arg("A"), py::arg("B"), py::arg("C"),
          py::arg("Q"), py::arg("R"), py::arg("N"), py::arg("gamma"), py::arg("radius"),
          "Optimal value of the fixed-gamma program (including the constant term)");
}
