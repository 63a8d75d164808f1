// Command-line front end: single runs, gamma sweeps, regularity analysis,
// fixed-point computation, and the two figure-reproduction recipes.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "nlads/harness.hpp"

namespace fs = std::filesystem;
using namespace nlads;

namespace {

double resolve_c_nash(const ExperimentConfig& cfg) {
    if (cfg.c_nash) return *cfg.c_nash;
    return calibrate_nash_constant(cfg.grid.L, cfg.grid.M);
}

int cmd_run(const std::string& config_path, const std::string& out_override,
            const std::string& trajectory_path) {
    ExperimentConfig cfg = parse_config(load_json_file(config_path));
    const std::string out_dir = out_override.empty() ? cfg.output_dir : out_override;
    fs::create_directories(out_dir);

    SolverConfig scfg;
    scfg.dt = cfg.grid.dt;
    scfg.cfl = cfg.grid.cfl;
    scfg.dealias = cfg.grid.dealias;
    scfg.t_end = cfg.grid.t_end;
    scfg.blowup_threshold = cfg.grid.blowup_threshold;
    scfg.record_every = cfg.grid.record_every;

    Solver solver(cfg.system, scfg, cfg.grid.L, cfg.grid.M);
    GridState start = solver.init(cfg.initial);

    std::optional<TrajectoryWriter> traj;
    std::function<void(const GridState&)> on_record;
    if (!trajectory_path.empty()) {
        traj.emplace(trajectory_path, static_cast<std::uint64_t>(cfg.system.n),
                     static_cast<std::uint64_t>(cfg.grid.M), cfg.grid.L);
        on_record = [&](const GridState& s) { traj->append(s); };
    }
    RunOutput out = solver.run(start, on_record);
    if (traj) traj->close();

    std::string csv = diagnostics_csv_header(cfg.system.n) + "\n";
    for (const auto& rec : out.records) csv += diagnostics_csv_row(rec) + "\n";
    write_text_file(fs::path(out_dir) / "diagnostics.csv", csv);

    json rep;
    rep["termination"] = termination_name(out.termination);
    rep["converged"] = out.converged;
    rep["steps"] = out.steps;
    rep["t_final"] = out.state.t;
    rep["max_mass_drift"] = out.max_mass_drift;
    rep["final"]["t"] = out.records.empty() ? 0.0 : out.records.back().t;
    if (!out.records.empty()) {
        rep["final"]["mass"] = out.records.back().mass;
        rep["final"]["l2"] = out.records.back().l2_norms;
        rep["final"]["lp"] = out.records.back().lp_norms;
        rep["final"]["rho"] = out.records.back().rho;
        rep["final"]["energy"] = out.records.back().energy;
        rep["final"]["min_value"] = out.records.back().min_value;
    }
    write_text_file(fs::path(out_dir) / "report.json", rep.dump(2) + "\n");
    std::cout << "run: " << termination_name(out.termination) << ", t = " << out.state.t
              << ", outputs in " << out_dir << "\n";
    return out.termination == Termination::Completed ? 0 : 1;
}

int cmd_sweep(const std::string& config_path, const std::string& out_override) {
    ExperimentConfig cfg = parse_config(load_json_file(config_path));
    const std::string out_dir = out_override.empty() ? cfg.output_dir : out_override;
    if (cfg.sweep.ln_values.empty()) {
        std::cerr << "sweep: config has no sweep values\n";
        return 2;
    }
    FigureReport rep = assemble_figure_report(cfg, run_sweep(cfg));
    fs::create_directories(out_dir);
    write_text_file(fs::path(out_dir) / "sweep.csv", sweep_csv(rep.points, cfg.system.n));
    write_text_file(fs::path(out_dir) / "figure.svg", figure_svg(rep));
    write_text_file(fs::path(out_dir) / "report.json", figure_report_json(rep).dump(2) + "\n");
    for (std::size_t i = 0; i < rep.fits.size(); ++i)
        std::cout << "species " << i + 1 << ": fitted slope " << rep.fits[i].slope
                  << " (r^2 = " << rep.fits[i].r_squared << ")\n";
    std::cout << "outputs in " << out_dir << "\n";
    return 0;
}

int cmd_regularity(const std::string& config_path, const std::string& out_override) {
    const json root = load_json_file(config_path);
    const RegularityProblem prob = parse_regularity(root);
    const RegularityReport rep = analyze_regularity(prob);
    const json j = regularity_report_json(rep);
    std::cout << j.dump(2) << "\n";
    if (!out_override.empty()) {
        fs::create_directories(out_override);
        write_text_file(fs::path(out_override) / "report.json", j.dump(2) + "\n");
    }
    return 0;
}

int cmd_fixedpoint(const std::string& config_path, const std::string& out_override) {
    const json root = load_json_file(config_path);
    double default_cn = 0.0;
    if (!root.contains("phi")) {
        ExperimentConfig cfg = parse_config(root);
        default_cn = resolve_c_nash(cfg);
    }
    const PhiModel model = parse_phi(root, default_cn);
    const FixedPointResult res = find_fixed_point(model);
    const json j = fixed_point_json(res);
    std::cout << j.dump(2) << "\n";
    if (!out_override.empty()) {
        fs::create_directories(out_override);
        write_text_file(fs::path(out_override) / "report.json", j.dump(2) + "\n");
    }
    return res.kind == FixedPointKind::NotFound ? 1 : 0;
}

int cmd_reproduce(const std::string& which, const std::string& out_dir) {
    FigureKind kind;
    if (which == "self") kind = FigureKind::SelfPerception;
    else if (which == "cross") kind = FigureKind::CrossPerception;
    else {
        std::cerr << "reproduce: expected 'self' or 'cross'\n";
        return 2;
    }
    const FigureReport rep = reproduce_figure(kind, out_dir);
    for (std::size_t i = 0; i < rep.fits.size(); ++i)
        std::cout << "species " << i + 1 << ": fitted " << rep.fits[i].slope << ", predicted "
                  << rep.predicted[i] << ", |diff| "
                  << std::abs(rep.fits[i].slope - rep.predicted[i])
                  << (rep.species_pass[i] ? "  [ok]" : "  [off]") << "\n";
    std::cout << (rep.pass ? "verdict: pass" : "verdict: fail") << ", outputs in " << out_dir
              << "\n";
    return rep.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"nlads: nonlocal advection-diffusion laboratory"};
    app.require_subcommand(1);

    std::string config_path, out_dir, trajectory_path, which = "self";
    std::string repro_out = "out";

    auto* run = app.add_subcommand("run", "single solver run from a config file");
    run->add_option("config", config_path, "JSON config")->required();
    run->add_option("--out", out_dir, "output directory (overrides config)");
    run->add_option("--trajectory", trajectory_path, "binary trajectory record file");

    auto* sweep = app.add_subcommand("sweep", "gamma sweep from a config file");
    sweep->add_option("config", config_path, "JSON config")->required();
    sweep->add_option("--out", out_dir, "output directory (overrides config)");

    auto* reg = app.add_subcommand("regularity", "cycle-regularity analysis of a Q matrix");
    reg->add_option("config", config_path, "JSON config with a 'regularity' section")->required();
    reg->add_option("--out", out_dir, "also write report.json here");

    auto* fp = app.add_subcommand("fixedpoint", "fixed points of the Phi operator");
    fp->add_option("config", config_path, "JSON config with a 'phi' or 'system' section")
        ->required();
    fp->add_option("--out", out_dir, "also write report.json here");

    auto* repro = app.add_subcommand("reproduce", "reproduce the power-law experiments");
    repro->add_option("which", which, "'self' or 'cross'")->required();
    repro->add_option("--out", repro_out, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(run)) return cmd_run(config_path, out_dir, trajectory_path);
        if (app.got_subcommand(sweep)) return cmd_sweep(config_path, out_dir);
        if (app.got_subcommand(reg)) return cmd_regularity(config_path, out_dir);
        if (app.got_subcommand(fp)) return cmd_fixedpoint(config_path, out_dir);
        if (app.got_subcommand(repro)) return cmd_reproduce(which, repro_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
