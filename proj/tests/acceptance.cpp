// Acceptance suite: runs every criterion at its stated tolerance and prints
// one pass/fail line per criterion. Exit code = number of failed criteria.

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "nlads/cyclegraph.hpp"
#include "nlads/diagnostics.hpp"
#include "nlads/harness.hpp"
#include "nlads/rhodynamics.hpp"
#include "nlads/solver.hpp"

using namespace nlads;

namespace {

struct Verdict {
    int id;
    bool pass;
    std::string detail;
};

std::vector<Verdict> verdicts;
double worst_mass_drift = 0.0;

void record(int id, bool pass, const std::string& detail) {
    verdicts.push_back({id, pass, detail});
    std::printf("criterion %2d: %s  %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list args;
    va_start(args, f);
    std::vsnprintf(buf, sizeof(buf), f, args);
    va_end(args);
    return buf;
}

void track_drift(const std::vector<SweepPoint>& pts) {
    for (const auto& pt : pts)
        if (pt.termination == Termination::Completed)
            worst_mass_drift = std::max(worst_mass_drift, pt.max_mass_drift);
}

std::string sweep_health(const std::vector<SweepPoint>& pts) {
    int completed = 0, steadied = 0, blew = 0, nonfinite = 0;
    for (const auto& pt : pts) {
        completed += pt.termination == Termination::Completed ? 1 : 0;
        steadied += pt.converged ? 1 : 0;
        blew += pt.termination == Termination::BlowUp ? 1 : 0;
        nonfinite += pt.termination == Termination::NonFinite ? 1 : 0;
    }
    return fmt("%d completed (%d steadied), %d blow-up, %d non-finite of %zu runs", completed,
               steadied, blew, nonfinite, pts.size());
}

// ---- criteria 1-3, 10: figure sweeps ----------------------------------

void figure_criteria() {
    // criterion 1 + 3: figure (a) at the stated default grid
    const FigureReport rep_a = reproduce_figure(FigureKind::SelfPerception, "out_self");
    track_drift(rep_a.points);
    {
        const bool pass = rep_a.species_pass.size() == 2 && rep_a.pass;
        record(1, pass,
               fmt("figure (a) fitted slopes %.4f / %.4f vs 1.875 / 1.2 (tol 0.05); %s",
                   rep_a.fits[0].slope, rep_a.fits[1].slope,
                   sweep_health(rep_a.points).c_str()));
    }
    {
        const auto& first = rep_a.points.front();
        const double ln_l2 = first.final_record.l2_norms.empty()
                                 ? std::numeric_limits<double>::quiet_NaN()
                                 : std::log(first.final_record.l2_norms[0]);
        const bool pass = std::abs(ln_l2 - 1.529) <= 0.05;
        record(3, pass, fmt("ln |u_1|_L2 at ln gamma = 0: measured %.4f vs 1.529 (tol 0.05)",
                            ln_l2));
    }

    // criterion 2: figure (b)
    const FigureReport rep_b = reproduce_figure(FigureKind::CrossPerception, "out_cross");
    track_drift(rep_b.points);
    record(2, rep_b.pass,
           fmt("figure (b) fitted slopes %.4f / %.4f vs 1.5146 / 1.3835 (tol 0.05); %s",
               rep_b.fits[0].slope, rep_b.fits[1].slope, sweep_health(rep_b.points).c_str()));

    // criterion 10: insensitivity of criterion 1's fit to doubling L and M
    GridConfig big_l;
    big_l.L = 40.0;
    const ExperimentConfig cfg_l = [&] {
        ExperimentConfig c = figure_config(FigureKind::SelfPerception);
        c.grid = big_l;
        return c;
    }();
    const FigureReport rep_l = assemble_figure_report(cfg_l, run_sweep(cfg_l));
    track_drift(rep_l.points);

    GridConfig big_m;
    big_m.M = 4096;
    const ExperimentConfig cfg_m = [&] {
        ExperimentConfig c = figure_config(FigureKind::SelfPerception);
        c.grid = big_m;
        return c;
    }();
    const FigureReport rep_m = assemble_figure_report(cfg_m, run_sweep(cfg_m));
    track_drift(rep_m.points);

    double worst = 0.0;
    bool defined = true;
    for (int i = 0; i < 2; ++i) {
        const double dl = std::abs(rep_l.fits[i].slope - rep_a.fits[i].slope);
        const double dm = std::abs(rep_m.fits[i].slope - rep_a.fits[i].slope);
        defined = defined && std::isfinite(dl) && std::isfinite(dm);
        worst = std::max(worst, dl);
        worst = std::max(worst, dm);
    }
    record(10, defined && worst < 0.01,
           fmt("slope change under 2L: (%+.4f, %+.4f), under 2M: (%+.4f, %+.4f); "
               "worst %.4f vs 0.01; 2L sweep: %s; 2M sweep: %s",
               rep_l.fits[0].slope - rep_a.fits[0].slope,
               rep_l.fits[1].slope - rep_a.fits[1].slope,
               rep_m.fits[0].slope - rep_a.fits[0].slope,
               rep_m.fits[1].slope - rep_a.fits[1].slope, worst,
               sweep_health(rep_l.points).c_str(), sweep_health(rep_m.points).c_str()));
}

// ---- criterion 5: regularity oracle equivalence ------------------------

void regularity_criterion() {
    std::mt19937 rng(101);
    std::uniform_int_distribution<int> n_dist(1, 6);
    std::uniform_int_distribution<int> d_dist(1, 3);
    std::uniform_real_distribution<double> q_dist(1.0001, 10.0);
    int mismatches = 0, p_failures = 0, regular_count = 0;
    for (int trial = 0; trial < 500; ++trial) {
        RegularityProblem prob;
        prob.n = n_dist(rng);
        prob.d = d_dist(rng);
        prob.q.assign(prob.n, std::vector<double>(prob.n));
        for (auto& row : prob.q)
            for (auto& v : row) v = q_dist(rng);
        const auto rep = is_regular(prob);
        bool oracle = true;
        for (const auto& cyc : enumerate_simple_cycles(prob))
            if (cyc.geo_mean < prob.d * (1.0 - 1e-12)) oracle = false;
        if (rep.regular != oracle) {
            ++mismatches;
            continue;
        }
        if (!rep.regular) continue;
        ++regular_count;
        const auto [mu, p] = synthesize_mu_p(rep, prob);
        for (int j = 0; j < prob.n && p_failures == 0; ++j) {
            if (p[j] < 2.0 - 1e-12) ++p_failures;
            for (int i = 0; i < prob.n; ++i) {
                const double qij = prob.q[i][j];
                if (p[j] < qij / (qij - 1.0) - 1e-12) ++p_failures;
                // ratio condition, exact on logs to 1e-12
                const double lhs = std::log(prob.d * (p[i] - 1.0) + 2.0) -
                                   std::log(prob.d * (p[j] - 1.0) + 2.0);
                if (lhs > std::log(prob.q[i][j]) - std::log(prob.d) + 1e-12) ++p_failures;
            }
        }
    }
    record(5, mismatches == 0 && p_failures == 0,
           fmt("500 random problems: %d verdict mismatches, %d P-condition failures "
               "(%d regular instances)",
               mismatches, p_failures, regular_count));
}

// ---- criterion 6: fixed-point cross-validation -------------------------

void fixed_point_criterion() {
    std::mt19937 rng(103);
    std::uniform_real_distribution<double> a_dist(0.2, 3.0);
    std::uniform_real_distribution<double> hi(1.15, 2.5), lo(0.3, 0.9);
    int failures = 0;
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const bool expanding = trial % 2 == 0;
        PhiModel m;
        m.n = 2;
        m.d = 1.0;
        m.a = {{0.0, a_dist(rng)}, {a_dist(rng), 0.0}};
        const double l12 = expanding ? hi(rng) : lo(rng);
        const double l21 = expanding ? hi(rng) : lo(rng);
        m.lambda = {{1.0, l12}, {l21, 1.0}};
        m.c = {1.0, 1.0};
        m.p = {2.0, 2.0};
        const auto closed = fixed_point_2cycle(m);
        const auto iter = fixed_point_bracketed(m);
        if (!iter.rho_star) {
            ++failures;
            continue;
        }
        double scale = 1.0;
        for (double v : *closed.rho_star) scale = std::max(scale, v);
        double gap = 0.0;
        for (int i = 0; i < 2; ++i)
            gap = std::max(gap, std::abs((*iter.rho_star)[i] - (*closed.rho_star)[i]) / scale);
        worst = std::max(worst, gap);
        if (gap > 1e-10) ++failures;
        if (closed.residual > fixed_point_tolerance(*closed.rho_star)) ++failures;
        if (iter.residual > fixed_point_tolerance(*iter.rho_star)) ++failures;
    }
    record(6, failures == 0,
           fmt("100 random 2-cycles: closed form vs iteration worst gap %.2e (tol 1e-10), "
               "%d failures",
               worst, failures));
}

// ---- criterion 7: comparison-ODE trichotomy ----------------------------

void ode_criterion() {
    bool pass = true;
    std::string note;

    // RK4 against the separable solution of d rho/dt = -rho^3
    {
        PhiModel m;
        m.n = 1;
        m.d = 1.0;
        m.a = {{0.0}};
        m.lambda = {{1.0}};
        m.c = {1.0};
        m.p = {2.0};
        const auto traj = comparison_ode_integrate(m, {1.0}, 1.0, 1e-3);
        const double got = traj.back().second[0];
        const double expect = 1.0 / std::sqrt(3.0);
        if (std::abs(got - expect) > 1e-8) {
            pass = false;
            note += fmt(" rk4 gap %.2e;", std::abs(got - expect));
        }
    }

    auto window_decay = [&](const PhiModel& m, double rho0, double target) {
        std::vector<double> r{rho0};
        double window = 1.0;
        for (int seg = 0; seg < 50 && r[0] > target; ++seg) {
            const auto traj = comparison_ode_integrate(m, r, window, window / 400.0, 1 << 30);
            r = traj.back().second;
            window *= 2.0;
        }
        return r[0];
    };

    // lambda < 1: [0, rho*] attracts from everywhere
    {
        PhiModel m;
        m.n = 1;
        m.d = 1.0;
        m.a = {{2.0}};
        m.lambda = {{0.5}};
        m.c = {1.0};
        m.p = {2.0};
        const double star = 4.0;
        for (double rho0 : {0.5, 6.0, 50.0}) {
            std::vector<double> r{rho0};
            for (int seg = 0; seg < 80 && r[0] > star + 1e-6; ++seg)
                r = comparison_ode_integrate(m, r, 0.5, 1e-4, 1 << 30).back().second;
            if (r[0] > star + 1e-6) {
                pass = false;
                note += fmt(" contraction from %.1f stalled at %.6f;", rho0, r[0]);
            }
        }
    }
    // lambda > 1 from inside the bracket: decay below 1e-6
    {
        PhiModel m;
        m.n = 1;
        m.d = 1.0;
        m.a = {{0.25}};
        m.lambda = {{2.0}};
        m.c = {1.0};
        m.p = {2.0};
        const double endv = window_decay(m, 2.0, 1e-6);  // rho* = 4
        if (endv >= 1e-6) {
            pass = false;
            note += fmt(" lambda>1 decay stalled at %.2e;", endv);
        }
    }
    // lambda = 1, a < 1: decay below 1e-6
    {
        PhiModel m;
        m.n = 1;
        m.d = 1.0;
        m.a = {{0.5}};
        m.lambda = {{1.0}};
        m.c = {1.0};
        m.p = {2.0};
        const double endv = window_decay(m, 1.0, 1e-6);
        if (endv >= 1e-6) {
            pass = false;
            note += fmt(" lambda=1 small-mass decay stalled at %.2e;", endv);
        }
    }
    record(7, pass, pass ? "trichotomy limits and RK4-vs-analytic all within tolerance"
                         : ("issues:" + note));
}

// ---- criterion 8: Nash inequality property suite ------------------------

void nash_criterion() {
    const double L = 20.0;
    const int m = 2048;
    const double dx = 2.0 * L / m;
    const double cn = calibrate_nash_constant(L, m);
    std::mt19937 rng(107);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    int negatives = 0;
    double min_res = std::numeric_limits<double>::infinity();
    std::vector<double> f(m);
    auto test_function = [&](auto&& fill) {
        fill();
        for (double p : {2.0, 2.5, 3.0}) {
            const double r = nash_residual(f, dx, p, cn);
            min_res = std::min(min_res, r);
            if (r < 0.0) ++negatives;
        }
    };
    // 200 random nonnegative smooth grid functions (gaussian mixtures)
    for (int trial = 0; trial < 200; ++trial) {
        test_function([&] {
            std::fill(f.begin(), f.end(), 0.0);
            const int bumps = 1 + static_cast<int>(unit(rng) * 4.0);
            for (int b = 0; b < bumps; ++b) {
                const double c = -8.0 + 16.0 * unit(rng);
                const double w = 0.3 + 2.7 * unit(rng);
                const double a = 0.05 + 1.95 * unit(rng);
                for (int i = 0; i < m; ++i) {
                    const double x = -L + (i + 0.5) * dx;
                    f[i] += a * std::exp(-((x - c) / w) * ((x - c) / w));
                }
            }
        });
    }
    // all gaussians and dilations
    for (double w = 0.125; w <= 8.0; w *= 2.0) {
        test_function([&, w] {
            for (int i = 0; i < m; ++i) {
                const double x = -L + (i + 0.5) * dx;
                f[i] = std::exp(-(x / w) * (x / w));
            }
        });
    }
    record(8, negatives == 0,
           fmt("C_N = %.4f; %d negative residuals over 200 random + dilation family "
               "(min residual %.3e)",
               cn, negatives, min_res));
}

// ---- criterion 9: pure-diffusion validation -----------------------------

void diffusion_criterion() {
    InteractionSystem sys;
    sys.n = 1;
    sys.d = 1.0;
    sys.diffusion = {0.1};
    sys.kernels = {{KernelSpec::zero()}};
    sys.masses = {std::sqrt(std::numbers::pi)};
    sys.p = {2.0};

    const double L = 20.0;
    const int m = 2048;
    const double dx = 2.0 * L / m;
    GridState s;
    s.L = L;
    s.M = m;
    s.t = 0.0;
    s.khat.resize(m / 2 + 1);
    for (int j = 0; j <= m / 2; ++j) s.khat[j] = std::numbers::pi * j / L;
    s.u.assign(1, std::vector<double>(m));
    for (int i = 0; i < m; ++i) {
        const double x = -L + (i + 0.5) * dx;
        s.u[0][i] = std::exp(-x * x);
    }
    SolverConfig cfg;
    cfg.dt = 1e-3;
    cfg.t_end = 1.0;
    cfg.record_every = 1 << 30;
    Solver solver(sys, cfg, L, m);
    const auto out = solver.run(s);
    worst_mass_drift = std::max(worst_mass_drift, out.max_mass_drift);
    double err2 = 0.0;
    const double spread = 1.0 + 4.0 * 0.1;
    for (int i = 0; i < m; ++i) {
        const double x = -L + (i + 0.5) * dx;
        const double exact = std::exp(-x * x / spread) / std::sqrt(spread);
        err2 += (out.state.u[0][i] - exact) * (out.state.u[0][i] - exact);
    }
    const double l2_err = std::sqrt(err2 * dx);

    // temporal order on an aggregation run against a fine-dt reference
    InteractionSystem agg = sys;
    agg.kernels = {{KernelSpec::ws(1.0, 2.0)}};
    auto run_to = [&](double dt) {
        SolverConfig c;
        c.dt = dt;
        c.t_end = 0.5;
        c.record_every = 1 << 30;
        Solver sv(agg, c, 10.0, 512);
        const auto o = sv.run(sv.init({InitialData::indicator()}));
        worst_mass_drift = std::max(worst_mass_drift, o.max_mass_drift);
        return o.state.u[0];
    };
    const double dt_ref = 6.25e-5, dt1 = 1e-3, dt2 = 5e-4;
    const auto uref = run_to(dt_ref);
    const auto u1 = run_to(dt1);
    const auto u2 = run_to(dt2);
    auto l2d = [&](const std::vector<double>& a, const std::vector<double>& b) {
        double acc = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
        return std::sqrt(acc * (20.0 / 512));
    };
    const double order =
        std::log(l2d(u1, uref) / l2d(u2, uref)) / std::log((dt1 - dt_ref) / (dt2 - dt_ref));
    const bool pass = l2_err < 1e-6 && order > 0.9 && order < 1.1;
    record(9, pass,
           fmt("heat-evolution L2 error %.2e (tol 1e-6); measured temporal order %.3f "
               "(window [0.9, 1.1])",
               l2_err, order));
}

}  // namespace

int main() {
    std::printf("nlads acceptance suite\n");
    regularity_criterion();
    fixed_point_criterion();
    ode_criterion();
    nash_criterion();
    diffusion_criterion();
    figure_criteria();

    // criterion 4: mass conservation across every completed run above
    record(4, worst_mass_drift < 1e-12,
           fmt("worst relative mass drift across all completed runs: %.2e (tol 1e-12)",
               worst_mass_drift));

    std::sort(verdicts.begin(), verdicts.end(),
              [](const Verdict& a, const Verdict& b) { return a.id < b.id; });
    int failures = 0;
    std::printf("---- summary ----\n");
    for (const auto& v : verdicts) {
        std::printf("criterion %2d: %s\n", v.id, v.pass ? "PASS" : "FAIL");
        failures += v.pass ? 0 : 1;
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(verdicts.size()) - failures,
                verdicts.size());
    return failures;
}
