#pragma once

// Conservative pseudo-spectral IMEX solver for the 1D system on a large
// periodic domain [-L, L). Diffusion is applied through the exact spectral
// propagator exp(-D k^2 dt); the nonlocal advective flux u_i v_i with
// v_i = d/dx sum_j (K_ij * u_j) is explicit, formed pointwise in physical
// space with optional 2/3-rule dealiasing of the product. The k = 0 mode is
// untouched by the update, so discrete mass is conserved by construction.

#include <cmath>
#include <cstdint>
#include <deque>
#include <fstream>
#include <functional>
#include <limits>
#include <vector>

#include "nlads/diagnostics.hpp"
#include "nlads/errors.hpp"
#include "nlads/fft.hpp"
#include "nlads/kernel.hpp"
#include "nlads/system.hpp"

namespace nlads {

struct GridState {
    double L = 0.0;  // half-width; domain [-L, L)
    int M = 0;       // cells, power of two
    double t = 0.0;
    std::vector<std::vector<double>> u;  // N arrays of M cell values
    std::vector<double> khat;            // k_m = pi m / L, m = 0..M/2

    double dx() const { return 2.0 * L / M; }
};

struct SolverConfig {
    double dt = 1e-3;
    double cfl = 0.5;  // advective CFL multiplier in (0, 1]
    bool dealias = true;
    double t_end = 20.0;
    double blowup_threshold = 1e6;
    int record_every = 100;
    // trailing-window steady-state stop; 0 disables
    double steady_window = 0.0;
    double steady_rtol = 1e-5;
    // bounded-effort CFL refinement: a run demanding more than
    // max_substeps refinements of dt in one step, or more than
    // substep_budget_factor * nsteps substeps in total, terminates NonFinite
    long max_substeps = 256;
    long substep_budget_factor = 64;

    void validate() const {
        if (!(dt > 0.0)) throw ConfigError("solver: dt > 0 required");
        if (!(cfl > 0.0 && cfl <= 1.0)) throw ConfigError("solver: cfl in (0,1] required");
        if (!(t_end > 0.0)) throw ConfigError("solver: t_end > 0 required");
        if (record_every < 1) throw ConfigError("solver: record_every >= 1 required");
    }
};

enum class Termination { Completed, BlowUp, NonFinite };

inline const char* termination_name(Termination t) {
    switch (t) {
        case Termination::Completed: return "completed";
        case Termination::BlowUp: return "blow_up";
        case Termination::NonFinite: return "non_finite";
    }
    return "?";
}

struct RunOutput {
    GridState state;
    std::vector<DiagnosticsRecord> records;
    Termination termination = Termination::Completed;
    bool converged = false;          // steady-state window triggered
    double stabilization_time = -1;  // time of detection, -1 if never
    double max_mass_drift = 0.0;     // max relative drift seen in the records
    long steps = 0;
};

class Solver {
  public:
    Solver(const InteractionSystem& sys, SolverConfig cfg, double L, int M)
        : sys_(sys), cfg_(cfg), L_(L), M_(M), half_(M / 2), fft_(static_cast<std::size_t>(M)) {
        sys_.validate();
        cfg_.validate();
        if (M < 8 || !is_power_of_two(static_cast<std::size_t>(M)))
            throw BadResolution("solver: M must be a power of two >= 8");
        if (!(L > 0.0)) throw DomainTooSmall("solver: L > 0 required");
        khat_.resize(half_ + 1);
        for (int m = 0; m <= half_; ++m) khat_[m] = std::numbers::pi * m / L_;
        kernel_hat_.assign(sys_.n, std::vector<std::vector<double>>(sys_.n));
        for (int i = 0; i < sys_.n; ++i) {
            for (int j = 0; j < sys_.n; ++j) {
                const KernelSpec& k = sys_.kernels[i][j];
                if (k.is_zero()) continue;
                const auto hat = fourier_coefficients(k, L_, M_);
                auto& dst = kernel_hat_[i][j];
                dst.resize(hat.size());
                for (std::size_t m = 0; m < hat.size(); ++m) dst[m] = hat[m].real();
            }
        }
        dealias_cut_ = M_ / 3;  // 2/3 rule: keep modes m <= M/3
        scratch_phys_.assign(3 * sys_.n, std::vector<double>(M_));
        scratch_hat_.assign(2 * sys_.n, std::vector<cplx>(half_ + 1));
    }

    const InteractionSystem& system() const { return sys_; }
    const SolverConfig& config() const { return cfg_; }

    // Cell-average sampling of the initial data; exact fractional coverage
    // for indicators, 4-point Gauss-Legendre per cell otherwise.
    GridState init(const std::vector<InitialData>& data) const {
        if (static_cast<int>(data.size()) != sys_.n)
            throw ConfigError("init: one initial datum per species required");
        double kernel_radius = 0.0;
        for (const auto& row : sys_.kernels)
            for (const auto& k : row) kernel_radius = std::max(kernel_radius, support_radius(k));
        double data_radius = 0.0;
        for (const auto& d : data) data_radius = std::max(data_radius, d.support_radius());
        if (!(L_ > kernel_radius + data_radius))
            throw DomainTooSmall("init: L must exceed kernel radius + initial support");

        GridState s;
        s.L = L_;
        s.M = M_;
        s.t = 0.0;
        s.khat = khat_;
        s.u.assign(sys_.n, std::vector<double>(M_, 0.0));
        const double dx = s.dx();
        // 4-point Gauss-Legendre nodes/weights on [-1, 1]
        static constexpr double gl_x[2] = {0.3399810435848563, 0.8611363115940526};
        static constexpr double gl_w[2] = {0.6521451548625461, 0.3478548451374538};
        for (int i = 0; i < sys_.n; ++i) {
            const InitialData& d = data[i];
            for (int cell = 0; cell < M_; ++cell) {
                const double x0 = -L_ + cell * dx;
                const double x1 = x0 + dx;
                if (d.kind == InitialData::Kind::Zero) continue;
                if (d.kind == InitialData::Kind::Indicator) {
                    const double overlap =
                        std::max(0.0, std::min(x1, d.b) - std::max(x0, d.a));
                    s.u[i][cell] = d.height * overlap / dx;
                    continue;
                }
                const double c = 0.5 * (x0 + x1);
                const double h = 0.5 * dx;
                double acc = 0.0;
                for (int g = 0; g < 2; ++g)
                    acc += gl_w[g] * (d.eval(c - h * gl_x[g]) + d.eval(c + h * gl_x[g]));
                s.u[i][cell] = 0.5 * acc;
            }
        }
        return s;
    }

    // v_i = d/dx sum_j (K_ij * u_j), spectrally; real by construction.
    std::vector<std::vector<double>> nonlocal_velocity(const GridState& s) {
        load_state(s);
        compute_velocity(false);
        std::vector<std::vector<double>> v(sys_.n, std::vector<double>(M_));
        for (int i = 0; i < sys_.n; ++i) v[i] = vel_phys(i);
        return v;
    }

    // One step of size cfg.dt. Throws CflViolation when dt exceeds
    // cfl * dx / max|v| (the caller reduces dt); run() substeps instead.
    GridState step(const GridState& s) {
        load_state(s);
        compute_velocity(cfg_.dealias);
        const double vmax = max_abs_velocity();
        if (vmax > 0.0 && cfg_.dt > cfg_.cfl * s.dx() / vmax)
            throw CflViolation("step: dt exceeds the advective CFL bound");
        advance(cfg_.dt);
        if (!finite_probe()) throw NonFiniteState("step: state became non-finite");
        GridState out = s;
        out.t = s.t + cfg_.dt;
        materialize(out.u);
        return out;
    }

    RunOutput run(const GridState& start,
                  const std::function<void(const GridState&)>& on_record = {}) {
        load_state(start);
        RunOutput out;
        out.state = start;
        const double dx = start.dx();
        std::vector<double> mass0(sys_.n);
        for (int i = 0; i < sys_.n; ++i) mass0[i] = uhat_[i][0].real() * dx;

        std::deque<std::pair<double, std::vector<double>>> window;
        auto record_state = [&](double t, long step_idx) -> bool {
            materialize(out.state.u);
            out.state.t = t;
            const auto rec = diagnostics_of(t, out.state.u, dx, sys_.p, mass0);
            out.records.push_back(rec);
            if (on_record) on_record(out.state);
            for (int i = 0; i < sys_.n; ++i) {
                const double ref = std::max(std::abs(mass0[i]), 1e-300);
                out.max_mass_drift =
                    std::max(out.max_mass_drift, std::abs(rec.mass[i] - mass0[i]) / ref);
            }
            if (blowup_indicator(rec, cfg_.blowup_threshold)) {
                out.termination = Termination::BlowUp;
                return false;
            }
            if (cfg_.steady_window > 0.0 && step_idx > 0) {
                window.emplace_back(t, rec.l2_norms);
                while (!window.empty() && window.front().first < t - cfg_.steady_window - 1e-12)
                    window.pop_front();
                if (window.back().first - window.front().first >= cfg_.steady_window - 1e-12) {
                    bool steady = true;
                    for (int i = 0; i < sys_.n && steady; ++i) {
                        double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
                        for (const auto& [wt, norms] : window) {
                            lo = std::min(lo, norms[i]);
                            hi = std::max(hi, norms[i]);
                        }
                        const double ref = std::max(std::abs(window.back().second[i]), 1e-300);
                        steady = (hi - lo) / ref < cfg_.steady_rtol;
                    }
                    if (steady) {
                        out.converged = true;
                        out.stabilization_time = t;
                        return false;
                    }
                }
            }
            return true;
        };

        long step_idx = 0;
        if (!record_state(0.0, step_idx)) {
            out.steps = 0;
            return out;
        }
        const long nsteps = static_cast<long>(std::ceil(cfg_.t_end / cfg_.dt - 1e-9));
        // transient substepping is fine; a run that persistently demands
        // large refinements of its configured dt is mis-configured (dt must
        // be reduced by the caller) or under-resolved, and reports unstable
        const long max_substeps = cfg_.max_substeps;
        long substep_budget = cfg_.substep_budget_factor * (nsteps + 1);
        for (step_idx = 1; step_idx <= nsteps; ++step_idx) {
            const double t_prev = (step_idx - 1) * cfg_.dt;
            const double t_next = std::min(step_idx * cfg_.dt, cfg_.t_end);
            const double dt_here = t_next - t_prev;
            compute_velocity(cfg_.dealias);
            const double vmax = max_abs_velocity();
            long nsub = 1;
            if (vmax > 0.0) {
                const double allowed = cfg_.cfl * dx / vmax;
                if (dt_here > allowed)
                    nsub = static_cast<long>(std::ceil(dt_here / allowed));
            }
            substep_budget -= nsub;
            if (nsub > max_substeps || substep_budget < 0) {
                out.termination = Termination::NonFinite;
                materialize(out.state.u);
                out.state.t = t_prev;
                out.steps = step_idx - 1;
                return out;
            }
            const double dt_sub = dt_here / static_cast<double>(nsub);
            for (long sub = 0; sub < nsub; ++sub) {
                if (sub > 0) compute_velocity(cfg_.dealias);
                advance(dt_sub);
            }
            out.steps = step_idx;
            if (!finite_probe()) {
                out.termination = Termination::NonFinite;
                materialize(out.state.u);
                out.state.t = t_next;
                return out;
            }
            if (step_idx % cfg_.record_every == 0 || step_idx == nsteps) {
                if (!record_state(t_next, step_idx)) return out;
            }
        }
        out.termination = Termination::Completed;
        return out;
    }

  private:
    void load_state(const GridState& s) {
        if (s.M != M_ || s.L != L_) throw ConfigError("solver: state grid mismatch");
        uhat_.assign(sys_.n, std::vector<cplx>(half_ + 1));
        for (int i = 0; i < sys_.n; ++i) {
            std::vector<double> tmp = s.u[i];
            fft_.forward(tmp.data(), uhat_[i].data());
        }
    }

    std::vector<double>& vel_phys(int i) { return scratch_phys_[i]; }
    std::vector<double>& u_phys(int i) { return scratch_phys_[sys_.n + i]; }
    std::vector<double>& prod_phys(int i) { return scratch_phys_[2 * sys_.n + i]; }

    void apply_dealias(std::vector<cplx>& hat) const {
        for (int m = dealias_cut_ + 1; m <= half_; ++m) hat[m] = {0.0, 0.0};
    }

    // Materialises the (optionally dealiased) velocity and the matching
    // physical densities used to form the advective product.
    void compute_velocity(bool dealias) {
        for (int i = 0; i < sys_.n; ++i) {
            auto& vhat = scratch_hat_[i];
            std::fill(vhat.begin(), vhat.end(), cplx{0.0, 0.0});
            for (int j = 0; j < sys_.n; ++j) {
                const auto& kh = kernel_hat_[i][j];
                if (kh.empty()) continue;
                const auto& uh = uhat_[j];
                for (int m = 0; m < half_; ++m) vhat[m] += kh[m] * uh[m];
            }
            for (int m = 0; m < half_; ++m) vhat[m] *= cplx{0.0, khat_[m]};
            vhat[half_] = {0.0, 0.0};  // Nyquist derivative
            if (dealias) apply_dealias(vhat);
            fft_.inverse(vhat.data(), vel_phys(i).data());
        }
        for (int i = 0; i < sys_.n; ++i) {
            if (dealias) {
                auto& masked = scratch_hat_[sys_.n + i];
                masked = uhat_[i];
                apply_dealias(masked);
                fft_.inverse(masked.data(), u_phys(i).data());
            } else {
                fft_.inverse(uhat_[i].data(), u_phys(i).data());
            }
        }
    }

    double max_abs_velocity() const {
        double vmax = 0.0;
        for (int i = 0; i < sys_.n; ++i)
            for (double v : scratch_phys_[i]) vmax = std::max(vmax, std::abs(v));
        return vmax;
    }

    // One explicit-advection / exact-diffusion update of uhat_ using the
    // currently materialised velocity.
    void advance(double dt) {
        if (dt != cached_dt_) {
            diff_factor_.assign(sys_.n, std::vector<double>(half_ + 1));
            for (int i = 0; i < sys_.n; ++i)
                for (int m = 0; m <= half_; ++m)
                    diff_factor_[i][m] = std::exp(-sys_.diffusion[i] * khat_[m] * khat_[m] * dt);
            cached_dt_ = dt;
        }
        for (int i = 0; i < sys_.n; ++i) {
            auto& g = prod_phys(i);
            const auto& up = u_phys(i);
            const auto& vp = vel_phys(i);
            for (int x = 0; x < M_; ++x) g[x] = up[x] * vp[x];
            auto& ghat = scratch_hat_[i];
            fft_.forward(g.data(), ghat.data());
            if (cfg_.dealias) apply_dealias(ghat);
            auto& uh = uhat_[i];
            const auto& df = diff_factor_[i];
            for (int m = 0; m < half_; ++m)
                uh[m] = df[m] * (uh[m] - dt * cplx{0.0, khat_[m]} * ghat[m]);
            uh[half_] = df[half_] * uh[half_];  // Nyquist: no derivative term
        }
    }

    bool finite_probe() const {
        for (int i = 0; i < sys_.n; ++i) {
            const cplx probe = uhat_[i][std::min(1, half_)];
            if (!std::isfinite(probe.real()) || !std::isfinite(probe.imag()) ||
                !std::isfinite(uhat_[i][0].real()))
                return false;
        }
        return true;
    }

    void materialize(std::vector<std::vector<double>>& u) {
        u.resize(sys_.n);
        for (int i = 0; i < sys_.n; ++i) {
            u[i].resize(M_);
            std::vector<cplx> tmp = uhat_[i];
            fft_.inverse(tmp.data(), u[i].data());
        }
    }

    InteractionSystem sys_;
    SolverConfig cfg_;
    double L_;
    int M_, half_;
    RealFft fft_;
    std::vector<double> khat_;
    std::vector<std::vector<std::vector<double>>> kernel_hat_;
    int dealias_cut_ = 0;
    std::vector<std::vector<cplx>> uhat_;
    std::vector<std::vector<double>> scratch_phys_;
    std::vector<std::vector<cplx>> scratch_hat_;
    std::vector<std::vector<double>> diff_factor_;
    double cached_dt_ = -1.0;
};

// Convenience wrappers matching the per-operation surface.
inline GridState init(const InteractionSystem& sys, const std::vector<InitialData>& data,
                      double L, int M) {
    return Solver(sys, SolverConfig{}, L, M).init(data);
}

inline std::vector<std::vector<double>> nonlocal_velocity(const GridState& s,
                                                          const InteractionSystem& sys) {
    return Solver(sys, SolverConfig{}, s.L, s.M).nonlocal_velocity(s);
}

inline GridState step(const GridState& s, const InteractionSystem& sys, const SolverConfig& cfg) {
    return Solver(sys, cfg, s.L, s.M).step(s);
}

inline RunOutput run(const GridState& s, const InteractionSystem& sys, const SolverConfig& cfg) {
    return Solver(sys, cfg, s.L, s.M).run(s);
}

// rho_i = (||u_i||_{L^{p_i}} / M_i)^{p_i'} with the system's recorded
// initial masses (d = 1 on the grid).
inline std::vector<double> rho_of_state(const GridState& s, const InteractionSystem& sys) {
    std::vector<double> out(sys.n);
    for (int i = 0; i < sys.n; ++i)
        out[i] = rho_from_norms(lp_norm(s.u[i], sys.p[i], s.dx()), sys.masses[i], sys.p[i]);
    return out;
}

// Little-endian binary trajectory stream:
// header { N u64, M u64, L f64, record_count u64 }, then per record
// { t f64, N*M f64 cell values }. The count is patched on close.
class TrajectoryWriter {
  public:
    TrajectoryWriter(const std::string& path, std::uint64_t n, std::uint64_t m, double L)
        : out_(path, std::ios::binary), n_(n), m_(m) {
        if (!out_) throw ConfigError("trajectory: cannot open " + path);
        write_u64(n_);
        write_u64(m_);
        write_f64(L);
        write_u64(0);  // record count placeholder
    }

    void append(const GridState& s) {
        write_f64(s.t);
        for (const auto& row : s.u)
            for (double v : row) write_f64(v);
        ++count_;
    }

    void close() {
        if (!out_.is_open()) return;
        out_.seekp(24);
        write_u64(count_);
        out_.close();
    }

    ~TrajectoryWriter() { close(); }

  private:
    void write_u64(std::uint64_t v) { out_.write(reinterpret_cast<const char*>(&v), 8); }
    void write_f64(double v) { out_.write(reinterpret_cast<const char*>(&v), 8); }

    std::ofstream out_;
    std::uint64_t n_, m_;
    std::uint64_t count_ = 0;
};

}  // namespace nlads
