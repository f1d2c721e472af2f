#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "drregret/experiment.hpp"

namespace {

using drregret::Mat;
using nlohmann::json;

json matrix_to_json(const Mat& M) {
    json rows = json::array();
    for (long r = 0; r < M.rows(); ++r) {
        json row = json::array();
        for (long c = 0; c < M.cols(); ++c) row.push_back(M(r, c));
        rows.push_back(row);
    }
    return rows;
}

Mat matrix_from_json(const json& j) {
    Mat M(j.size(), j.at(0).size());
    for (size_t r = 0; r < j.size(); ++r)
        for (size_t c = 0; c < j[r].size(); ++c) M(r, c) = j[r][c].get<double>();
    return M;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << text;
}

int run_synthesize(const std::string& config_path, const std::string& controller,
                   double radius, const std::string& out_path) {
    auto cfg = drregret::load_config(config_path);
    auto ctx = drregret::make_context(cfg);
    auto sc = drregret::synthesize_by_name(ctx, controller, radius, cfg);
    if (!sc.ok) {
        std::cerr << "synthesis failed: " << sc.status << "\n";
        return 1;
    }
    json out;
    out["controller"] = sc.name;
    out["radius"] = radius;
    out["gamma_star"] = std::isfinite(sc.gamma_star) ? json(sc.gamma_star) : json();
    out["objective"] = sc.objective;
    out["status"] = sc.status;
    out["operators"] = {{"F", matrix_to_json(ctx.sys.F)},
                        {"G", matrix_to_json(ctx.sys.G)},
                        {"J", matrix_to_json(ctx.sys.J)},
                        {"L", matrix_to_json(ctx.sys.L)}};
    out["E"] = matrix_to_json(sc.ops.E);
    out["K"] = matrix_to_json(sc.ops.K);
    out["T_K"] = matrix_to_json(sc.ops.T_K);
    out["lambda_max"] = sc.regret.lambda_max;
    write_text(out_path, out.dump(2) + "\n");
    std::printf("%s at r=%g: gamma*=%g objective=%g -> %s\n", sc.name.c_str(), radius,
                sc.gamma_star, sc.objective, out_path.c_str());
    return 0;
}

int run_sweep(const std::string& config_path) {
    auto cfg = drregret::load_config(config_path);
    auto rows = drregret::run_experiment(cfg);
    drregret::emit_results(rows, cfg.output_path, cfg.output_format);
    std::printf("%-8s %-10s %14s %14s %12s %8s\n", "radius", "controller", "regret(dr-wc)",
                "own-wc", "gamma*", "status");
    for (const auto& r : rows)
        std::printf("%-8g %-10s %14.6g %14.6g %12.6g %8s\n", r.radius, r.controller.c_str(),
                    r.regret_under_dr_wc, r.own_wc_regret, r.gamma_star, r.status.c_str());
    std::printf("wrote %s\n", cfg.output_path.c_str());
    return 0;
}

int run_worst_case(const std::string& config_path, const std::string& controller_file,
                   double radius, const std::string& out_path) {
    auto cfg = drregret::load_config(config_path);
    auto ctx = drregret::make_context(cfg);

    std::ifstream in(controller_file);
    if (!in) throw std::runtime_error("cannot open controller file '" + controller_file + "'");
    json cj = json::parse(in);
    drregret::ControllerOperators ops;
    if (cj.contains("K")) {
        Mat K = matrix_from_json(cj["K"]);
        Mat E = drregret::youla_from_controller(K, ctx.sys);
        ops = drregret::controller_from_youla_full(E, ctx.sys);
    } else if (cj.contains("E")) {
        ops = drregret::controller_from_youla_full(matrix_from_json(cj["E"]), ctx.sys);
    } else {
        throw std::runtime_error("controller file must contain a 'K' or 'E' matrix");
    }

    auto regret = drregret::regret_operator(ops.T_K, ctx.benchmark.T_K);
    drregret::AmbiguitySet amb;
    amb.M0 = ctx.M0;
    amb.radius = radius;
    auto wc = drregret::worst_case_distribution(regret, amb);

    json out;
    out["radius"] = radius;
    out["gamma_star"] = std::isfinite(wc.gamma_star) ? json(wc.gamma_star) : json();
    out["expected_regret"] = wc.expected_regret;
    out["dual_value"] = wc.dual_value;
    out["nominal"] = wc.nominal;
    out["D"] = matrix_to_json(wc.D);
    out["M_star"] = matrix_to_json(wc.M_star);
    write_text(out_path, out.dump(2) + "\n");
    std::printf("worst case at r=%g: gamma*=%g expected regret=%g -> %s\n", radius,
                wc.gamma_star, wc.expected_regret, out_path.c_str());
    return 0;
}

int run_export_sdp(const std::string& config_path, double gamma, double radius,
                   const std::string& problem, const std::string& out_path) {
    auto cfg = drregret::load_config(config_path);
    auto ctx = drregret::make_context(cfg);
    std::string text;
    if (problem == "dr") {
        auto gops = drregret::gamma_operators(ctx.fs, gamma);
        auto dr = drregret::assemble_dr_lmi(gops, ctx.fs, radius, ctx.fs.dims);
        text = dr.program.export_standard_form();
    } else if (problem == "hinf") {
        text = drregret::assemble_hinf_lmi(ctx.sys).program.export_standard_form();
    } else if (problem == "romf") {
        text = drregret::assemble_romf_lmi(ctx.fs).program.export_standard_form();
    } else {
        throw std::runtime_error("unknown problem kind '" + problem + "'");
    }
    write_text(out_path, text);
    std::printf("exported %s problem (gamma=%g, r=%g) -> %s\n", problem.c_str(), gamma, radius,
                out_path.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Distributionally robust regret-optimal measurement-feedback control"};
    app.require_subcommand(1);

    std::string config_path, out_path, controller = "DR-RO-MF", problem = "dr";
    std::string controller_file;
    double radius = 1.0, gamma = 1.0;

    auto* synth = app.add_subcommand("synthesize", "synthesize one controller at one radius");
    synth->add_option("--config", config_path, "experiment config (json)")->required();
    synth->add_option("--controller", controller, "DR-RO-MF | LQG | HINF | RO-MF");
    synth->add_option("--radius", radius, "ambiguity radius");
    synth->add_option("--out", out_path, "output json path")->required();

    auto* sweep = app.add_subcommand("sweep", "run the full radius sweep from a config");
    sweep->add_option("--config", config_path, "experiment config (json)")->required();

    auto* wc = app.add_subcommand("worst-case",
                                  "worst-case distribution for a controller file and radius");
    wc->add_option("--config", config_path, "experiment config (json)")->required();
    wc->add_option("--controller-file", controller_file, "json file with K or E")->required();
    wc->add_option("--radius", radius, "ambiguity radius")->required();
    wc->add_option("--out", out_path, "output json path")->required();

    auto* ex = app.add_subcommand("export-sdp", "standard-form dump for external solvers");
    ex->add_option("--config", config_path, "experiment config (json)")->required();
    ex->add_option("--gamma", gamma, "fixed gamma of the inner problem")->required();
    ex->add_option("--radius", radius, "ambiguity radius");
    ex->add_option("--problem", problem, "dr | hinf | romf");
    ex->add_option("--out", out_path, "output path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) return run_synthesize(config_path, controller, radius, out_path);
        if (sweep->parsed()) return run_sweep(config_path);
        if (wc->parsed()) return run_worst_case(config_path, controller_file, radius, out_path);
        if (ex->parsed()) return run_export_sdp(config_path, gamma, radius, problem, out_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
