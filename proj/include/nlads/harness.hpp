#pragma once

// Experiment orchestration: JSON config ingestion (fail-fast on unknown
// keys), gamma sweeps with steady-state detection, log-log slope fits,
// figure-reproduction recipes, and CSV/SVG/JSON persistence.

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "nlads/cyclegraph.hpp"
#include "nlads/diagnostics.hpp"
#include "nlads/errors.hpp"
#include "nlads/rhodynamics.hpp"
#include "nlads/solver.hpp"
#include "nlads/system.hpp"

namespace nlads {

using json = nlohmann::json;

struct GridConfig {
    double L = 20.0;
    int M = 2048;
    double dt = 1e-3;
    double t_end = 20.0;
    bool dealias = true;
    double cfl = 0.5;
    int record_every = 100;
    double blowup_threshold = 1e6;
};

struct SweepConfig {
    std::string parameter = "gamma";
    std::vector<double> ln_values;  // sweep values as natural logs
};

struct ExperimentConfig {
    InteractionSystem system;
    std::vector<InitialData> initial;
    GridConfig grid;
    SweepConfig sweep;
    std::vector<int> fit_species;  // 0-based; empty = all
    std::optional<double> c_nash;
    long seed = 0;
    std::string output_dir = "out";
};

namespace cfgdetail {

inline void require_keys(const json& obj, const std::string& where,
                         const std::vector<std::string>& allowed) {
    if (!obj.is_object()) throw ConfigError("config: " + where + " must be an object");
    for (const auto& item : obj.items()) {
        bool ok = false;
        for (const auto& k : allowed) ok = ok || item.key() == k;
        if (!ok) throw ConfigError("config: unknown key '" + item.key() + "' in " + where);
    }
}

inline KernelSpec parse_kernel(const json& j, const std::string& where) {
    require_keys(j, where, {"family", "gamma", "s", "radius", "rate"});
    if (!j.contains("family")) throw ConfigError("config: " + where + " needs 'family'");
    const std::string fam = j.at("family").get<std::string>();
    KernelSpec k;
    if (fam == "zero") {
        k = KernelSpec::zero();
    } else {
        const double gamma = j.value("gamma", 1.0);
        if (fam == "ws") {
            if (!j.contains("s")) throw ConfigError("config: " + where + " ws kernel needs 's'");
            k = KernelSpec::ws(gamma, j.at("s").get<double>());
        } else if (fam == "top_hat") {
            k = KernelSpec::top_hat(gamma, j.value("radius", 1.0));
        } else if (fam == "raised_cosine") {
            k = KernelSpec::raised_cosine(gamma, j.value("radius", 1.0));
        } else if (fam == "exponential") {
            k = KernelSpec::exponential(gamma, j.value("rate", 1.0));
        } else {
            throw ConfigError("config: unknown kernel family '" + fam + "' in " + where);
        }
    }
    k.validate();
    return k;
}

inline InitialData parse_initial(const json& j, const std::string& where) {
    if (j.is_string()) {
        const std::string name = j.get<std::string>();
        if (name == "indicator") return InitialData::indicator();
        if (name == "zero") return InitialData::zero();
        if (name == "gaussian") return InitialData::gaussian();
        throw ConfigError("config: unknown initial preset '" + name + "' in " + where);
    }
    require_keys(j, where, {"type", "a", "b", "height", "center", "width", "amplitude"});
    const std::string type = j.value("type", "indicator");
    if (type == "indicator")
        return InitialData::indicator(j.value("a", -1.0), j.value("b", 1.0), j.value("height", 1.0));
    if (type == "gaussian")
        return InitialData::gaussian(j.value("center", 0.0), j.value("width", 1.0),
                                     j.value("amplitude", 1.0));
    if (type == "zero") return InitialData::zero();
    throw ConfigError("config: unknown initial type '" + type + "' in " + where);
}

inline std::vector<std::vector<double>> parse_matrix(const json& j, const std::string& where) {
    if (!j.is_array()) throw ConfigError("config: " + where + " must be a matrix");
    std::vector<std::vector<double>> out;
    for (const auto& row : j) out.push_back(row.get<std::vector<double>>());
    return out;
}

}  // namespace cfgdetail

inline InteractionSystem parse_system(const json& j, std::vector<InitialData>* initial_out) {
    cfgdetail::require_keys(j, "system", {"N", "d", "D", "kernels", "P", "Q", "masses", "initial"});
    InteractionSystem sys;
    sys.n = j.at("N").get<int>();
    sys.d = j.value("d", 1.0);
    sys.diffusion = j.at("D").get<std::vector<double>>();
    if (!j.contains("kernels")) throw ConfigError("config: system needs 'kernels'");
    int i = 0;
    for (const auto& row : j.at("kernels")) {
        std::vector<KernelSpec> krow;
        int jj = 0;
        for (const auto& cell : row)
            krow.push_back(cfgdetail::parse_kernel(
                cell, "kernels[" + std::to_string(i) + "][" + std::to_string(jj++) + "]"));
        sys.kernels.push_back(std::move(krow));
        ++i;
    }
    sys.p = j.contains("P") ? j.at("P").get<std::vector<double>>()
                            : std::vector<double>(sys.n, 2.0);
    if (j.contains("Q")) sys.q_override = cfgdetail::parse_matrix(j.at("Q"), "system.Q");

    std::vector<InitialData> initial(sys.n, InitialData::indicator());
    if (j.contains("initial")) {
        initial.clear();
        int idx = 0;
        for (const auto& item : j.at("initial"))
            initial.push_back(cfgdetail::parse_initial(item, "initial[" + std::to_string(idx++) + "]"));
        if (static_cast<int>(initial.size()) != sys.n)
            throw ConfigError("config: one initial datum per species required");
    }
    if (j.contains("masses")) {
        sys.masses = j.at("masses").get<std::vector<double>>();
    } else {
        sys.masses.resize(sys.n);
        for (int k = 0; k < sys.n; ++k) sys.masses[k] = initial[k].mass();
    }
    sys.validate();
    if (initial_out) *initial_out = initial;
    return sys;
}

inline ExperimentConfig parse_config(const json& j) {
    cfgdetail::require_keys(j, "config",
                            {"system", "grid", "sweep", "fit", "C_N", "seed", "output_dir",
                             "regularity", "phi"});
    ExperimentConfig cfg;
    if (!j.contains("system")) throw ConfigError("config: 'system' section required");
    cfg.system = parse_system(j.at("system"), &cfg.initial);
    if (j.contains("grid")) {
        const json& g = j.at("grid");
        cfgdetail::require_keys(g, "grid",
                                {"L", "M", "dt", "t_end", "dealias", "cfl", "record_every",
                                 "blowup_threshold"});
        cfg.grid.L = g.value("L", cfg.grid.L);
        cfg.grid.M = g.value("M", cfg.grid.M);
        cfg.grid.dt = g.value("dt", cfg.grid.dt);
        cfg.grid.t_end = g.value("t_end", cfg.grid.t_end);
        cfg.grid.dealias = g.value("dealias", cfg.grid.dealias);
        cfg.grid.cfl = g.value("cfl", cfg.grid.cfl);
        cfg.grid.record_every = g.value("record_every", cfg.grid.record_every);
        cfg.grid.blowup_threshold = g.value("blowup_threshold", cfg.grid.blowup_threshold);
    }
    if (j.contains("sweep")) {
        const json& s = j.at("sweep");
        cfgdetail::require_keys(s, "sweep", {"parameter", "ln_values", "values"});
        cfg.sweep.parameter = s.value("parameter", "gamma");
        if (cfg.sweep.parameter != "gamma")
            throw ConfigError("config: only the 'gamma' sweep parameter is supported");
        if (s.contains("ln_values"))
            cfg.sweep.ln_values = s.at("ln_values").get<std::vector<double>>();
        else if (s.contains("values")) {
            for (double v : s.at("values").get<std::vector<double>>()) {
                if (!(v > 0.0)) throw ConfigError("config: sweep values must be positive");
                cfg.sweep.ln_values.push_back(std::log(v));
            }
        }
        for (std::size_t k = 1; k < cfg.sweep.ln_values.size(); ++k)
            if (!(cfg.sweep.ln_values[k] > cfg.sweep.ln_values[k - 1]))
                throw ConfigError("config: sweep values must be strictly increasing");
    }
    if (j.contains("fit")) {
        cfgdetail::require_keys(j.at("fit"), "fit", {"species"});
        if (j.at("fit").contains("species")) {
            for (int s1 : j.at("fit").at("species").get<std::vector<int>>()) {
                if (s1 < 1 || s1 > cfg.system.n)
                    throw ConfigError("config: fit.species entries are 1-based species indices");
                cfg.fit_species.push_back(s1 - 1);
            }
        }
    }
    if (j.contains("C_N")) cfg.c_nash = j.at("C_N").get<double>();
    cfg.seed = j.value("seed", 0L);
    cfg.output_dir = j.value("output_dir", cfg.output_dir);
    return cfg;
}

inline json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json j;
    in >> j;
    return j;
}

inline int worker_count(std::size_t jobs) {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    if (const char* env = std::getenv("NLADS_WORKERS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) hw = static_cast<unsigned>(v);
    }
    return static_cast<int>(std::min<std::size_t>(hw, std::max<std::size_t>(jobs, 1)));
}

struct SweepPoint {
    double ln_gamma = 0.0;
    double gamma = 1.0;
    DiagnosticsRecord final_record;
    bool converged = false;
    Termination termination = Termination::Completed;
    double stabilization_time = -1.0;
    double max_mass_drift = 0.0;
};

// One solver run per gamma, parallel across runs; steady state is declared
// when the relative change of every ||u_i||_{L^2} over the trailing window
// [t-2, t] falls below 1e-5 (else the run ends at t_end, flagged).
inline std::vector<SweepPoint> run_sweep(const ExperimentConfig& cfg) {
    const std::size_t count = cfg.sweep.ln_values.size();
    std::vector<SweepPoint> points(count);
    if (count == 0) return points;
    if (!(cfg.grid.t_end > 2.0))
        throw ConfigError("sweep: t_end must exceed the steady-state window (2 time units)");

    SolverConfig scfg;
    scfg.dt = cfg.grid.dt;
    scfg.cfl = cfg.grid.cfl;
    scfg.dealias = cfg.grid.dealias;
    scfg.t_end = cfg.grid.t_end;
    scfg.blowup_threshold = cfg.grid.blowup_threshold;
    scfg.record_every = cfg.grid.record_every;
    scfg.steady_window = 2.0;
    scfg.steady_rtol = 1e-5;
    {
        // config-wide problems (domain, resolution) must surface here, not
        // inside a worker thread
        Solver probe(cfg.system, scfg, cfg.grid.L, cfg.grid.M);
        (void)probe.init(cfg.initial);
    }

    std::atomic<std::size_t> next{0};
    auto work = [&]() {
        while (true) {
            const std::size_t idx = next.fetch_add(1);
            if (idx >= count) return;
            SweepPoint& pt = points[idx];
            pt.ln_gamma = cfg.sweep.ln_values[idx];
            pt.gamma = std::exp(pt.ln_gamma);
            try {
                const InteractionSystem sys = cfg.system.with_gamma_scaled(pt.gamma);
                Solver solver(sys, scfg, cfg.grid.L, cfg.grid.M);
                const GridState start = solver.init(cfg.initial);
                RunOutput out = solver.run(start);
                pt.final_record =
                    out.records.empty() ? DiagnosticsRecord{} : out.records.back();
                pt.converged = out.converged;
                pt.termination = out.termination;
                pt.stabilization_time = out.stabilization_time;
                pt.max_mass_drift = out.max_mass_drift;
            } catch (const std::exception&) {
                pt.termination = Termination::NonFinite;
            }
        }
    };
    const int workers = worker_count(count);
    std::vector<std::thread> pool;
    for (int w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    for (auto& th : pool) th.join();
    return points;
}

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    std::vector<std::pair<double, double>> points;
};

// Ordinary least squares in (x, y); natural logs throughout the harness.
inline SlopeFit fit_slope(const std::vector<std::pair<double, double>>& points) {
    if (points.size() < 3) throw Underdetermined("fit_slope: at least 3 points required");
    double sx = 0, sy = 0;
    for (const auto& [x, y] : points) {
        sx += x;
        sy += y;
    }
    const double n = static_cast<double>(points.size());
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0, syy = 0;
    for (const auto& [x, y] : points) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    if (sxx == 0.0) throw Underdetermined("fit_slope: degenerate abscissae");
    SlopeFit fit;
    fit.points = points;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss_res = 0.0;
    for (const auto& [x, y] : points) {
        const double e = y - (fit.intercept + fit.slope * x);
        ss_res += e * e;
    }
    fit.r_squared = syy == 0.0 ? 1.0 : 1.0 - ss_res / syy;
    return fit;
}

// Analytic predicted slopes of ln ||u_i||_{L^p} against ln gamma for the
// two coupling patterns studied: decoupled self-perception (s_i / p') and
// the pure 2-cycle (sigma_i / p' with sigma_i = (1+lambda_i)/(1-l1 l2),
// lambda_i = (s_i - 1)/s_i).
inline std::vector<double> predict_slopes(const InteractionSystem& sys, double p) {
    sys.validate();
    if (!(p > 1.0)) throw ConfigError("predict_slopes: p > 1 required");
    const double pprime = p / (p - 1.0);
    auto ws_sharpness = [&](const KernelSpec& k) {
        if (k.family != KernelFamily::Ws || !(k.s > 1.0) || std::isinf(k.s))
            throw UnsupportedPattern("predict_slopes: Ws kernels with s > 1 required");
        return k.s;
    };
    const int n = sys.n;
    bool diag_only = true, cross_only = n == 2;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const bool z = sys.kernels[i][j].is_zero();
            if (i == j && !z) cross_only = false;
            if (i != j && !z) diag_only = false;
        }
    std::vector<double> out(n);
    if (diag_only) {
        for (int i = 0; i < n; ++i) out[i] = ws_sharpness(sys.kernels[i][i]) / pprime;
        return out;
    }
    if (cross_only && n == 2 && !sys.kernels[0][1].is_zero() && !sys.kernels[1][0].is_zero()) {
        const double s1 = ws_sharpness(sys.kernels[0][1]);
        const double s2 = ws_sharpness(sys.kernels[1][0]);
        const double l1 = (s1 - 1.0) / s1;
        const double l2 = (s2 - 1.0) / s2;
        const double denom = 1.0 - l1 * l2;
        if (!(denom > 0.0)) throw UnsupportedPattern("predict_slopes: lambda_1 lambda_2 >= 1");
        out[0] = (1.0 + l1) / denom / pprime;
        out[1] = (1.0 + l2) / denom / pprime;
        return out;
    }
    throw UnsupportedPattern("predict_slopes: coupling must be decoupled or a pure 2-cycle");
}

enum class FigureKind { SelfPerception, CrossPerception };

// Figure recipes: two species, D = 0.1, indicator initial data, sharpness
// 15/4 and 12/5, swept over ln gamma in {0.0, 0.1, ..., 1.3}.
inline ExperimentConfig figure_config(FigureKind kind) {
    ExperimentConfig cfg;
    cfg.system.n = 2;
    cfg.system.d = 1.0;
    cfg.system.diffusion = {0.1, 0.1};
    cfg.system.p = {2.0, 2.0};
    const KernelSpec k1 = KernelSpec::ws(1.0, 15.0 / 4.0);
    const KernelSpec k2 = KernelSpec::ws(1.0, 12.0 / 5.0);
    if (kind == FigureKind::SelfPerception)
        cfg.system.kernels = {{k1, KernelSpec::zero()}, {KernelSpec::zero(), k2}};
    else
        cfg.system.kernels = {{KernelSpec::zero(), k1}, {k2, KernelSpec::zero()}};
    cfg.initial = {InitialData::indicator(), InitialData::indicator()};
    cfg.system.masses = {cfg.initial[0].mass(), cfg.initial[1].mass()};
    for (int k = 0; k <= 13; ++k) cfg.sweep.ln_values.push_back(0.1 * k);
    cfg.output_dir = kind == FigureKind::SelfPerception ? "out_self" : "out_cross";
    return cfg;
}

struct FigureReport {
    ExperimentConfig config;
    std::vector<SweepPoint> points;
    std::vector<SlopeFit> fits;        // per species
    std::vector<double> predicted;     // per species
    std::vector<bool> species_pass;    // |fitted - predicted| <= tolerance
    double tolerance = 0.05;
    bool pass = false;
    std::string note;
};

inline std::string sweep_csv(const std::vector<SweepPoint>& points, int n_species) {
    std::string out = "gamma,ln_gamma";
    for (int i = 1; i <= n_species; ++i) out += ",ln_l2_" + std::to_string(i);
    out += ",converged,termination\n";
    for (const auto& pt : points) {
        out += format_double(pt.gamma) + "," + format_double(pt.ln_gamma);
        for (int i = 0; i < n_species; ++i)
            out += "," + format_double(std::log(pt.final_record.l2_norms.empty()
                                                    ? std::numeric_limits<double>::quiet_NaN()
                                                    : pt.final_record.l2_norms[i]));
        out += std::string(",") + (pt.converged ? "1" : "0") + "," +
               termination_name(pt.termination) + "\n";
    }
    return out;
}

// Minimal standalone SVG log-log chart: scatter per species, fitted solid
// lines, predicted dashed lines.
inline std::string figure_svg(const FigureReport& rep) {
    const double width = 640, height = 480;
    const double ml = 70, mr = 20, mt = 40, mb = 50;
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& fit : rep.fits)
        for (const auto& [x, y] : fit.points) {
            xmin = std::min(xmin, x);
            xmax = std::max(xmax, x);
            ymin = std::min(ymin, y);
            ymax = std::max(ymax, y);
        }
    if (!(xmax > xmin)) {
        xmin = 0;
        xmax = 1;
    }
    const double ypad = 0.1 * std::max(1e-6, ymax - ymin);
    ymin -= ypad;
    ymax += ypad;
    auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (width - ml - mr); };
    auto py = [&](double y) { return height - mb - (y - ymin) / (ymax - ymin) * (height - mt - mb); };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string((int)width) +
           "\" height=\"" + std::to_string((int)height) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg += "<text x=\"" + std::to_string((int)(width / 2)) +
           "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">large-time ln |u_i|_L2 against ln gamma</text>\n";
    // axes
    svg += "<line x1=\"" + format_double(ml) + "\" y1=\"" + format_double(height - mb) +
           "\" x2=\"" + format_double(width - mr) + "\" y2=\"" + format_double(height - mb) +
           "\" stroke=\"black\"/>\n";
    svg += "<line x1=\"" + format_double(ml) + "\" y1=\"" + format_double(mt) + "\" x2=\"" +
           format_double(ml) + "\" y2=\"" + format_double(height - mb) + "\" stroke=\"black\"/>\n";
    char buf[64];
    for (int tck = 0; tck <= 6; ++tck) {
        const double xv = xmin + (xmax - xmin) * tck / 6.0;
        const double yv = ymin + (ymax - ymin) * tck / 6.0;
        std::snprintf(buf, sizeof(buf), "%.2f", xv);
        svg += "<text x=\"" + format_double(px(xv)) + "\" y=\"" + format_double(height - mb + 18) +
               "\" text-anchor=\"middle\" font-size=\"11\">" + buf + "</text>\n";
        std::snprintf(buf, sizeof(buf), "%.2f", yv);
        svg += "<text x=\"" + format_double(ml - 8) + "\" y=\"" + format_double(py(yv) + 4) +
               "\" text-anchor=\"end\" font-size=\"11\">" + buf + "</text>\n";
    }
    svg += "<text x=\"" + std::to_string((int)(width / 2)) + "\" y=\"" +
           std::to_string((int)(height - 12)) +
           "\" text-anchor=\"middle\" font-size=\"12\">ln gamma</text>\n";
    const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};
    for (std::size_t i = 0; i < rep.fits.size(); ++i) {
        const char* col = colors[i % 4];
        for (const auto& [x, y] : rep.fits[i].points)
            svg += "<circle cx=\"" + format_double(px(x)) + "\" cy=\"" + format_double(py(y)) +
                   "\" r=\"3\" fill=\"" + col + "\"/>\n";
        auto line = [&](double slope, double intercept, bool dashed) {
            if (!std::isfinite(slope) || !std::isfinite(intercept)) return;
            const double y0 = intercept + slope * xmin, y1 = intercept + slope * xmax;
            svg += "<line x1=\"" + format_double(px(xmin)) + "\" y1=\"" + format_double(py(y0)) +
                   "\" x2=\"" + format_double(px(xmax)) + "\" y2=\"" + format_double(py(y1)) +
                   "\" stroke=\"" + col + "\"" +
                   (dashed ? " stroke-dasharray=\"6,4\"" : "") + " fill=\"none\"/>\n";
        };
        line(rep.fits[i].slope, rep.fits[i].intercept, false);
        if (i < rep.predicted.size()) {
            // predicted line anchored at the fitted intercept
            line(rep.predicted[i], rep.fits[i].intercept, true);
        }
        std::snprintf(buf, sizeof(buf), "species %zu: fit %.4f / predicted %.4f", i + 1,
                      rep.fits[i].slope, i < rep.predicted.size() ? rep.predicted[i] : 0.0);
        svg += "<text x=\"" + format_double(ml + 10) + "\" y=\"" +
               format_double(mt + 16 + 16 * static_cast<double>(i)) +
               "\" font-size=\"12\" fill=\"" + std::string(col) + "\">" + buf + "</text>\n";
    }
    svg += "</svg>\n";
    return svg;
}

inline json figure_report_json(const FigureReport& rep) {
    json j;
    j["tolerance"] = rep.tolerance;
    j["pass"] = rep.pass;
    if (!rep.note.empty()) j["note"] = rep.note;
    j["ln_gamma"] = json::array();
    for (const auto& pt : rep.points) j["ln_gamma"].push_back(pt.ln_gamma);
    j["points"] = json::array();
    for (const auto& pt : rep.points) {
        json row;
        row["gamma"] = pt.gamma;
        row["ln_gamma"] = pt.ln_gamma;
        row["converged"] = pt.converged;
        row["termination"] = termination_name(pt.termination);
        row["stabilization_time"] = pt.stabilization_time;
        row["max_mass_drift"] = pt.max_mass_drift;
        row["ln_l2"] = json::array();
        for (double v : pt.final_record.l2_norms) row["ln_l2"].push_back(std::log(v));
        j["points"].push_back(row);
    }
    j["fits"] = json::array();
    for (std::size_t i = 0; i < rep.fits.size(); ++i) {
        json f;
        f["species"] = i + 1;
        f["slope"] = rep.fits[i].slope;
        f["intercept"] = rep.fits[i].intercept;
        f["r_squared"] = rep.fits[i].r_squared;
        f["predicted_slope"] = i < rep.predicted.size() ? rep.predicted[i] : 0.0;
        f["pass"] = i < rep.species_pass.size() ? rep.species_pass[i] : false;
        j["fits"].push_back(f);
    }
    return j;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << content;
}

// Build the fits/predictions/verdict for an already-run sweep.
inline FigureReport assemble_figure_report(const ExperimentConfig& cfg,
                                           std::vector<SweepPoint> points) {
    FigureReport rep;
    rep.config = cfg;
    rep.points = std::move(points);
    std::vector<int> species = cfg.fit_species;
    if (species.empty())
        for (int i = 0; i < cfg.system.n; ++i) species.push_back(i);
    for (int i : species) {
        std::vector<std::pair<double, double>> pts;
        for (const auto& pt : rep.points) {
            // only runs that reached their large-time state enter the fit
            if (pt.termination != Termination::Completed) continue;
            if (pt.final_record.l2_norms.empty()) continue;
            pts.emplace_back(pt.ln_gamma, std::log(pt.final_record.l2_norms[i]));
        }
        try {
            rep.fits.push_back(fit_slope(pts));
        } catch (const Underdetermined&) {
            SlopeFit empty;
            empty.slope = std::numeric_limits<double>::quiet_NaN();
            empty.intercept = std::numeric_limits<double>::quiet_NaN();
            empty.r_squared = 0.0;
            empty.points = pts;
            rep.fits.push_back(empty);
        }
    }
    rep.predicted = predict_slopes(cfg.system, 2.0);
    rep.species_pass.resize(rep.fits.size(), false);
    bool all = true;
    for (std::size_t k = 0; k < rep.fits.size(); ++k) {
        const double pred = rep.predicted[species[k]];
        rep.species_pass[k] = std::abs(rep.fits[k].slope - pred) <= rep.tolerance;
        all = all && rep.species_pass[k];
    }
    rep.pass = all;
    return rep;
}

// Full recipe: run the sweep, fit, verdict, and persist sweep.csv,
// figure.svg and report.json under out_dir.
inline FigureReport reproduce_figure(FigureKind kind, const std::string& out_dir,
                                     std::optional<GridConfig> grid_override = {}) {
    ExperimentConfig cfg = figure_config(kind);
    if (grid_override) cfg.grid = *grid_override;
    cfg.output_dir = out_dir;
    FigureReport rep = assemble_figure_report(cfg, run_sweep(cfg));
    rep.note = "source panels extend to ln gamma 1.4-1.5 with unequal point counts per "
               "series; this reproduction uses the common range [0, 1.3]";
    std::filesystem::create_directories(out_dir);
    write_text_file(std::filesystem::path(out_dir) / "sweep.csv",
                    sweep_csv(rep.points, cfg.system.n));
    write_text_file(std::filesystem::path(out_dir) / "figure.svg", figure_svg(rep));
    write_text_file(std::filesystem::path(out_dir) / "report.json",
                    figure_report_json(rep).dump(2) + "\n");
    return rep;
}

// ---- JSON emission for the analysis subcommands ----

inline json regularity_report_json(const RegularityReport& rep) {
    json j;
    j["regular"] = rep.regular;
    j["w"] = rep.w;
    if (rep.witness_cycle) {
        json cyc = json::array();
        for (int v : *rep.witness_cycle) cyc.push_back(v + 1);  // 1-based in reports
        j["witness_cycle"] = cyc;
    }
    if (rep.c) j["c"] = *rep.c;
    if (rep.x) j["x"] = *rep.x;
    if (rep.mu) j["mu"] = *rep.mu;
    if (rep.p) j["P"] = *rep.p;
    return j;
}

inline json fixed_point_json(const FixedPointResult& res) {
    json j;
    switch (res.kind) {
        case FixedPointKind::Explicit1Species: j["kind"] = "explicit_1species"; break;
        case FixedPointKind::Explicit2Cycle: j["kind"] = "explicit_2cycle"; break;
        case FixedPointKind::Bracketed: j["kind"] = "bracketed"; break;
        case FixedPointKind::NotFound: j["kind"] = "not_found"; break;
    }
    if (res.rho_star) j["rho_star"] = *res.rho_star;
    if (res.bracket) j["bracket"] = {res.bracket->first, res.bracket->second};
    j["iterations"] = res.iterations;
    j["residual"] = res.residual;
    switch (res.regime) {
        case Trichotomy::None: break;
        case Trichotomy::AttractingInterval: j["regime"] = "attracting_interval"; break;
        case Trichotomy::ZeroAttractorLocal: j["regime"] = "zero_attractor_in_bracket"; break;
        case Trichotomy::ZeroAttractorGlobal: j["regime"] = "zero_attractor_global"; break;
        case Trichotomy::NoDecay: j["regime"] = "no_decay"; break;
    }
    return j;
}

inline RegularityProblem parse_regularity(const json& root) {
    if (!root.contains("regularity"))
        throw ConfigError("config: 'regularity' section required for this subcommand");
    const json& j = root.at("regularity");
    cfgdetail::require_keys(j, "regularity", {"d", "Q"});
    RegularityProblem prob;
    prob.d = j.value("d", 1.0);
    prob.q = cfgdetail::parse_matrix(j.at("Q"), "regularity.Q");
    prob.n = static_cast<int>(prob.q.size());
    prob.validate();
    return prob;
}

inline PhiModel parse_phi(const json& root, double default_c_nash) {
    if (root.contains("phi")) {
        const json& j = root.at("phi");
        cfgdetail::require_keys(j, "phi", {"a", "lambda", "d", "P", "C", "C_N", "masses", "D"});
        PhiModel m;
        m.a = cfgdetail::parse_matrix(j.at("a"), "phi.a");
        m.lambda = cfgdetail::parse_matrix(j.at("lambda"), "phi.lambda");
        m.n = static_cast<int>(m.a.size());
        m.d = j.value("d", 1.0);
        m.c_nash = j.value("C_N", default_c_nash);
        if (j.contains("P")) m.p = j.at("P").get<std::vector<double>>();
        else m.p.assign(m.n, 2.0);
        if (j.contains("masses")) m.masses = j.at("masses").get<std::vector<double>>();
        if (j.contains("D")) m.diffusion = j.at("D").get<std::vector<double>>();
        if (j.contains("C")) m.c = j.at("C").get<std::vector<double>>();
        else {
            if (m.diffusion.empty())
                throw ConfigError("phi: either C or D must be given");
            m.c.resize(m.n);
            for (int i = 0; i < m.n; ++i)
                m.c[i] = 4.0 * m.diffusion[i] / (m.d * m.p[i] * m.c_nash * m.c_nash);
        }
        m.validate();
        return m;
    }
    // fall back to an InteractionSystem + C_N
    ExperimentConfig cfg = parse_config(root);
    const double cn = cfg.c_nash ? *cfg.c_nash : default_c_nash;
    return coefficients_from_system(cfg.system, cn);
}

}  // namespace nlads
