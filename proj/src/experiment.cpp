#include "drregret/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace drregret {

using nlohmann::json;

StateSpace boeing747() {
    Mat A(4, 4), B(4, 2), C(2, 4);
    A << 0.9801, 0.0003, -0.0980, 0.0038,
        -0.3868, 0.9071, 0.0471, -0.0008,
        0.1591, -0.0015, 0.9691, 0.0003,
        -0.0198, 0.0958, 0.0021, 1.000;
    B << -0.0001, 0.0058,
        0.0296, 0.0153,
        0.0012, -0.0908,
        0.0015, 0.0008;
    C << 1, 0, 0, 0,
        0, 0, 0, 1;
    return make_state_space(A, B, C);
}

namespace {

Mat parse_matrix(const json& j, const std::string& field) {
    if (!j.is_array() || j.empty())
        throw ConfigError(field + ": expected a nonempty array of rows");
    const size_t cols = j[0].is_array() ? j[0].size() : 0;
    if (cols == 0) throw ConfigError(field + ": rows must be nonempty arrays");
    Mat M(j.size(), cols);
    for (size_t r = 0; r < j.size(); ++r) {
        if (!j[r].is_array() || j[r].size() != cols)
            throw ConfigError(field + ": ragged rows (row " + std::to_string(r) + ")");
        for (size_t c = 0; c < cols; ++c) {
            if (!j[r][c].is_number())
                throw ConfigError(field + ": entry (" + std::to_string(r) + "," +
                                  std::to_string(c) + ") is not a number");
            M(r, c) = j[r][c].get<double>();
        }
    }
    return M;
}

json matrix_to_json(const Mat& M) {
    json rows = json::array();
    for (long r = 0; r < M.rows(); ++r) {
        json row = json::array();
        for (long c = 0; c < M.cols(); ++c) row.push_back(M(r, c));
        rows.push_back(row);
    }
    return rows;
}

std::string canonical_controller(const std::string& name) {
    std::string u;
    for (char ch : name) u.push_back(static_cast<char>(std::toupper(ch)));
    if (u == "DR-RO-MF" || u == "DRROMF" || u == "DR_RO_MF") return "DR-RO-MF";
    if (u == "LQG") return "LQG";
    if (u == "HINF" || u == "H-INF" || u == "H_INF" || u == "HINFINITY") return "HINF";
    if (u == "RO-MF" || u == "ROMF" || u == "RO_MF") return "RO-MF";
    throw ConfigError("controllers: unknown controller '" + name + "'");
}

}  // namespace

ExperimentConfig config_from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: invalid json: ") + e.what());
    }

    ExperimentConfig cfg;
    if (!j.contains("system")) throw ConfigError("system: missing");
    if (j["system"].is_string()) {
        const std::string name = j["system"].get<std::string>();
        if (name != "boeing747") throw ConfigError("system: unknown preset '" + name + "'");
        cfg.preset = name;
        cfg.system = boeing747();
    } else if (j["system"].is_object()) {
        const auto& s = j["system"];
        for (const char* f : {"A", "B", "C"})
            if (!s.contains(f)) throw ConfigError(std::string("system.") + f + ": missing");
        Mat A = parse_matrix(s["A"], "system.A");
        Mat B = parse_matrix(s["B"], "system.B");
        Mat C = parse_matrix(s["C"], "system.C");
        Mat Q = s.contains("Q") ? parse_matrix(s["Q"], "system.Q") : Mat();
        Mat R = s.contains("R") ? parse_matrix(s["R"], "system.R") : Mat();
        try {
            cfg.system = make_state_space(A, B, C, Q, R);
        } catch (const std::exception& e) {
            throw ConfigError(std::string("system: ") + e.what());
        }
    } else {
        throw ConfigError("system: expected preset name or matrix object");
    }

    if (!j.contains("horizon") || !j["horizon"].is_number_integer())
        throw ConfigError("horizon: missing or not an integer");
    cfg.horizon = j["horizon"].get<int>();
    if (cfg.horizon < 1) throw ConfigError("horizon: must be at least 1");

    if (!j.contains("radii") || !j["radii"].is_array() || j["radii"].empty())
        throw ConfigError("radii: missing or empty");
    for (const auto& r : j["radii"]) {
        if (!r.is_number() || r.get<double>() < 0.0)
            throw ConfigError("radii: entries must be nonnegative numbers");
        cfg.radii.push_back(r.get<double>());
    }
    std::sort(cfg.radii.begin(), cfg.radii.end());

    if (!j.contains("controllers") || !j["controllers"].is_array() || j["controllers"].empty())
        throw ConfigError("controllers: missing or empty");
    for (const auto& c : j["controllers"])
        cfg.controllers.push_back(canonical_controller(c.get<std::string>()));

    if (j.contains("nominal_covariance")) {
        const auto& nc = j["nominal_covariance"];
        if (nc.is_string()) {
            if (nc.get<std::string>() != "identity")
                throw ConfigError("nominal_covariance: expected 'identity' or {file|matrix}");
        } else if (nc.is_object() && nc.contains("file")) {
            std::ifstream in(nc["file"].get<std::string>());
            if (!in)
                throw ConfigError("nominal_covariance.file: cannot open '" +
                                  nc["file"].get<std::string>() + "'");
            std::stringstream ss;
            ss << in.rdbuf();
            cfg.nominal_covariance =
                parse_matrix(json::parse(ss.str()), "nominal_covariance.file");
        } else if (nc.is_object() && nc.contains("matrix")) {
            cfg.nominal_covariance = parse_matrix(nc["matrix"], "nominal_covariance.matrix");
        } else {
            throw ConfigError("nominal_covariance: expected 'identity' or {file|matrix}");
        }
    }

    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("output")) {
        const auto& o = j["output"];
        if (o.contains("path")) cfg.output_path = o["path"].get<std::string>();
        if (o.contains("format")) {
            cfg.output_format = o["format"].get<std::string>();
            if (cfg.output_format != "csv" && cfg.output_format != "json")
                throw ConfigError("output.format: expected 'csv' or 'json'");
        }
    }
    if (j.contains("tolerances")) {
        const auto& t = j["tolerances"];
        if (t.contains("solver")) cfg.solver_tol = t["solver"].get<double>();
        if (t.contains("gamma_search")) cfg.gamma_rel_tol = t["gamma_search"].get<double>();
        if (t.contains("bracket_growth")) cfg.bracket_growth = t["bracket_growth"].get<double>();
        if (cfg.solver_tol <= 0 || cfg.gamma_rel_tol <= 0 || cfg.bracket_growth <= 1.0)
            throw ConfigError("tolerances: solver/gamma_search must be positive, "
                              "bracket_growth > 1");
    }
    if (j.contains("workers")) {
        cfg.workers = j["workers"].get<int>();
        if (cfg.workers < 1) throw ConfigError("workers: must be at least 1");
    }
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return config_from_json_text(ss.str());
}

std::string config_to_json_text(const ExperimentConfig& cfg) {
    json j;
    if (!cfg.preset.empty()) {
        j["system"] = cfg.preset;
    } else {
        j["system"] = {{"A", matrix_to_json(cfg.system.A)},
                       {"B", matrix_to_json(cfg.system.B)},
                       {"C", matrix_to_json(cfg.system.C)},
                       {"Q", matrix_to_json(cfg.system.Q)},
                       {"R", matrix_to_json(cfg.system.R)}};
    }
    j["horizon"] = cfg.horizon;
    j["radii"] = cfg.radii;
    j["controllers"] = cfg.controllers;
    if (cfg.nominal_covariance.size() > 0)
        j["nominal_covariance"] = {{"matrix", matrix_to_json(cfg.nominal_covariance)}};
    else
        j["nominal_covariance"] = "identity";
    j["seed"] = cfg.seed;
    j["output"] = {{"path", cfg.output_path}, {"format", cfg.output_format}};
    j["tolerances"] = {{"solver", cfg.solver_tol},
                       {"gamma_search", cfg.gamma_rel_tol},
                       {"bracket_growth", cfg.bracket_growth}};
    j["workers"] = cfg.workers;
    return j.dump(2) + "\n";
}

PlantContext make_context(const ExperimentConfig& cfg) {
    PlantContext ctx;
    ctx.sys = lift_system(cfg.system, cfg.horizon);
    ctx.fs = build_factorizations(ctx.sys);
    ctx.benchmark = noncausal_benchmark(ctx.sys, ctx.fs);
    ctx.M0 = cfg.nominal_covariance.size() > 0
                 ? cfg.nominal_covariance
                 : Mat(Mat::Identity(ctx.sys.dims.nd(), ctx.sys.dims.nd()));
    require(ctx.M0.rows() == ctx.sys.dims.nd(),
            "nominal covariance must be N(n+p) x N(n+p)");
    return ctx;
}

SynthesizedController synthesize_by_name(const PlantContext& ctx, const std::string& name,
                                         double radius, const ExperimentConfig& cfg) {
    SynthesizedController out;
    out.name = name;
    const auto start = std::chrono::steady_clock::now();
    try {
        if (name == "DR-RO-MF") {
            SynthesisConfig scfg;
            scfg.radius = radius;
            scfg.gamma_rel_tol = cfg.gamma_rel_tol;
            scfg.bracket_growth = cfg.bracket_growth;
            scfg.solver_tol = cfg.solver_tol;
            SynthesisResult r = minimize_over_gamma(ctx.sys, ctx.fs, scfg);
            out.ops = r.controller;
            out.regret = r.regret;
            out.gamma_star = r.gamma_star;
            out.objective = r.objective;
            out.solver_iterations = r.solver_iterations;
            if (r.via_lqg_closed_form) out.status = "lqg-closed-form";
        } else if (name == "LQG") {
            out.ops = lqg_controller(ctx.fs, ctx.sys);
            out.regret = regret_operator(out.ops.T_K, ctx.benchmark.T_K);
        } else if (name == "HINF") {
            HinfResult h = hinf_controller(ctx.sys, cfg.solver_tol);
            out.ops = h.controller;
            out.regret = regret_operator(out.ops.T_K, ctx.benchmark.T_K);
            out.solver_iterations = h.solver_iterations;
        } else if (name == "RO-MF") {
            RomfResult r = ro_mf_controller(ctx.fs, ctx.sys, cfg.solver_tol);
            out.ops = r.controller;
            out.regret = regret_operator(out.ops.T_K, ctx.benchmark.T_K);
            out.gamma_star = r.gamma_ro;
            out.solver_iterations = r.solver_iterations;
        } else {
            throw ConfigError("unknown controller '" + name + "'");
        }
    } catch (const std::exception& e) {
        out.ok = false;
        out.status = e.what();
    }
    out.wall_ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - start)
                      .count();
    return out;
}

namespace {

struct RadiusOutcome {
    std::vector<ResultRow> rows;
};

RadiusOutcome evaluate_radius(const PlantContext& ctx, const ExperimentConfig& cfg,
                              double radius,
                              const std::vector<SynthesizedController>& fixed_baselines) {
    RadiusOutcome out;

    // The DR controller defines the reference worst-case distribution for
    // this radius; it is synthesized even when not part of the menu.
    SynthesizedController dr = synthesize_by_name(ctx, "DR-RO-MF", radius, cfg);

    AmbiguitySet amb;
    amb.M0 = ctx.M0;
    amb.radius = radius;

    WorstCaseDistribution dr_wc;
    bool have_wc = false;
    if (dr.ok) {
        try {
            dr_wc = worst_case_distribution(dr.regret, amb);
            have_wc = true;
        } catch (const std::exception& e) {
            dr.ok = false;
            dr.status = e.what();
        }
    }

    for (const std::string& name : cfg.controllers) {
        ResultRow row;
        row.radius = radius;
        row.controller = name;

        const SynthesizedController* sc = nullptr;
        if (name == "DR-RO-MF") {
            sc = &dr;
        } else {
            for (const auto& b : fixed_baselines)
                if (b.name == name) sc = &b;
        }
        if (sc == nullptr || !sc->ok) {
            row.status = sc ? sc->status : "not synthesized";
            out.rows.push_back(row);
            continue;
        }
        row.status = sc->status;
        row.wall_ms = sc->wall_ms;
        row.solver_iterations = sc->solver_iterations;
        try {
            if (have_wc) row.regret_under_dr_wc = expected_regret(sc->regret, dr_wc.M_star);
            WorstCaseDistribution own = worst_case_distribution(sc->regret, amb);
            row.own_wc_regret = own.expected_regret;
            row.gamma_star = name == "DR-RO-MF" ? sc->gamma_star : own.gamma_star;
        } catch (const std::exception& e) {
            row.status = e.what();
        }
        out.rows.push_back(row);
    }
    return out;
}

std::string format_sig9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

}  // namespace

std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg) {
    PlantContext ctx = make_context(cfg);

    // Radius-independent baselines are synthesized once and shared.
    std::vector<SynthesizedController> fixed;
    for (const std::string& name : cfg.controllers)
        if (name != "DR-RO-MF") fixed.push_back(synthesize_by_name(ctx, name, 0.0, cfg));

    std::vector<RadiusOutcome> outcomes(cfg.radii.size());
    std::atomic<size_t> next{0};
    const int nworkers = std::max(1, std::min<int>(cfg.workers, (int)cfg.radii.size()));
    auto worker = [&]() {
        while (true) {
            const size_t i = next.fetch_add(1);
            if (i >= cfg.radii.size()) break;
            outcomes[i] = evaluate_radius(ctx, cfg, cfg.radii[i], fixed);
        }
    };
    if (nworkers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < nworkers; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    std::vector<ResultRow> rows;
    for (const auto& o : outcomes)
        for (const auto& r : o.rows) rows.push_back(r);
    return rows;
}

std::string results_to_csv(const std::vector<ResultRow>& rows) {
    std::ostringstream os;
    os << "radius,controller,regret_under_dr_wc,own_wc_regret,gamma_star,wall_ms,status\n";
    for (const auto& r : rows) {
        os << format_sig9(r.radius) << "," << r.controller << ","
           << format_sig9(r.regret_under_dr_wc) << "," << format_sig9(r.own_wc_regret) << ","
           << format_sig9(r.gamma_star) << "," << format_sig9(r.wall_ms) << "," << r.status
           << "\n";
    }
    return os.str();
}

std::string results_to_json(const std::vector<ResultRow>& rows) {
    // Timing is intentionally omitted: identical configs must produce
    // byte-identical json output.
    json out = json::array();
    for (const auto& r : rows) {
        json jr;
        jr["radius"] = r.radius;
        jr["controller"] = r.controller;
        jr["regret_under_dr_wc"] = r.regret_under_dr_wc;
        jr["own_wc_regret"] = r.own_wc_regret;
        jr["gamma_star"] = std::isfinite(r.gamma_star) ? json(r.gamma_star) : json();
        jr["solver_iterations"] = r.solver_iterations;
        jr["status"] = r.status;
        out.push_back(jr);
    }
    json doc;
    doc["rows"] = out;
    return doc.dump(2) + "\n";
}

void emit_results(const std::vector<ResultRow>& rows, const std::string& path,
                  const std::string& format) {
    std::ofstream outfile(path);
    if (!outfile) throw ConfigError("output: cannot open '" + path + "' for writing");
    outfile << (format == "json" ? results_to_json(rows) : results_to_csv(rows));
}

}  // namespace drregret
