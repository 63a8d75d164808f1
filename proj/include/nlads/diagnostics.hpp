#pragma once

// Monitored functionals of grid functions: L^p norms, masses, the scaled
// states rho_i, the per-species energy, and Nash-inequality residuals.
// Everything here works on raw cell-value arrays; the solver attaches the
// grid metadata.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <span>
#include <string>
#include <vector>

#include "nlads/errors.hpp"
#include "nlads/fft.hpp"

namespace nlads {

// Midpoint-rule L^p norm of cell values.
inline double lp_norm(std::span<const double> values, double p, double dx) {
    if (!(p >= 1.0)) throw ConfigError("lp_norm: p >= 1 required");
    if (!(dx > 0.0)) throw ConfigError("lp_norm: dx > 0 required");
    double acc = 0.0;
    if (p == 1.0) {
        for (double v : values) acc += std::abs(v);
        return acc * dx;
    }
    if (p == 2.0) {
        for (double v : values) acc += v * v;
        return std::sqrt(acc * dx);
    }
    for (double v : values) acc += std::pow(std::abs(v), p);
    return std::pow(acc * dx, 1.0 / p);
}

inline double signed_mass(std::span<const double> values, double dx) {
    double acc = 0.0;
    for (double v : values) acc += v;
    return acc * dx;
}

// Spectral derivative on the periodic grid of length M*dx.
inline std::vector<double> spectral_derivative(std::span<const double> values, double dx) {
    const std::size_t m = values.size();
    RealFft fft(m);
    std::vector<cplx> hat(fft.spectrum_size());
    std::vector<double> x(values.begin(), values.end());
    fft.forward(x.data(), hat.data());
    const double domain = static_cast<double>(m) * dx;
    for (std::size_t j = 0; j < hat.size(); ++j) {
        const double k = 2.0 * std::numbers::pi * static_cast<double>(j) / domain;
        hat[j] = (j + 1 == hat.size()) ? cplx{0.0, 0.0} : cplx{0.0, k} * hat[j];
    }
    std::vector<double> out(m);
    fft.inverse(hat.data(), out.data());
    return out;
}

// ||grad(phi^{p/2})||_{L^2}; negative round-off values are clamped to zero
// before the fractional power.
inline double grad_power_l2(std::span<const double> values, double p, double dx) {
    std::vector<double> w(values.size());
    for (std::size_t i = 0; i < w.size(); ++i)
        w[i] = std::pow(std::max(values[i], 0.0), 0.5 * p);
    const auto dw = spectral_derivative(w, dx);
    return lp_norm(dw, 2.0, dx);
}

// C_N ||phi||_1^{p'/d} ||grad(phi^{p/2})||_2 - ||phi||_p^{p/2 + p'/d} with
// d = 1; nonnegative iff the Nash-type inequality holds with this C_N.
inline double nash_residual(std::span<const double> values, double dx, double p, double c_nash) {
    if (!(p >= 2.0)) throw ConfigError("nash_residual: p >= 2 required");
    const double pprime = p / (p - 1.0);
    const double l1 = lp_norm(values, 1.0, dx);
    const double lp = lp_norm(values, p, dx);
    const double grad = grad_power_l2(values, p, dx);
    return c_nash * std::pow(l1, pprime) * grad - std::pow(lp, 0.5 * p + pprime);
}

// rho_i = (||u_i||_{L^{p_i}} / M_i)^{p_i'/d}
inline double rho_from_norms(double lp, double initial_mass, double p, double d = 1.0) {
    if (!(initial_mass > 0.0)) throw ZeroMass("rho: initial mass must be positive");
    const double pprime = p / (p - 1.0);
    return std::pow(lp / initial_mass, pprime / d);
}

struct DiagnosticsRecord {
    double t = 0.0;
    std::vector<double> mass;      // signed discrete mass per species
    std::vector<double> lp_norms;  // ||u_i||_{L^{p_i}}
    std::vector<double> l2_norms;
    std::vector<double> rho;
    std::vector<double> l1capLp;   // mass_i + lp_i
    double energy = 0.0;           // sum_i lp_i^{p_i} / (2(p_i - 1))
    double min_value = 0.0;
};

inline DiagnosticsRecord diagnostics_of(double t, const std::vector<std::vector<double>>& u,
                                        double dx, const std::vector<double>& p,
                                        const std::vector<double>& initial_mass) {
    DiagnosticsRecord rec;
    rec.t = t;
    const std::size_t n = u.size();
    rec.mass.resize(n);
    rec.lp_norms.resize(n);
    rec.l2_norms.resize(n);
    rec.rho.resize(n);
    rec.l1capLp.resize(n);
    rec.min_value = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        rec.mass[i] = signed_mass(u[i], dx);
        rec.lp_norms[i] = lp_norm(u[i], p[i], dx);
        rec.l2_norms[i] = lp_norm(u[i], 2.0, dx);
        rec.rho[i] = initial_mass[i] > 0.0
                         ? rho_from_norms(rec.lp_norms[i], initial_mass[i], p[i])
                         : 0.0;
        rec.l1capLp[i] = rec.mass[i] + rec.lp_norms[i];
        rec.energy += std::pow(rec.lp_norms[i], p[i]) / (2.0 * (p[i] - 1.0));
        for (double v : u[i]) rec.min_value = std::min(rec.min_value, v);
    }
    return rec;
}

// True iff any ||u_i||_{L^1 cap L^{p_i}} = mass_i + lp_i exceeds the threshold.
inline bool blowup_indicator(const DiagnosticsRecord& rec, double threshold) {
    for (double v : rec.l1capLp)
        if (v > threshold) return true;
    return false;
}

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string diagnostics_csv_header(std::size_t n) {
    std::string h = "t";
    auto block = [&](const char* name) {
        for (std::size_t i = 1; i <= n; ++i) h += "," + std::string(name) + "_" + std::to_string(i);
    };
    block("mass");
    block("lp");
    block("l2");
    block("rho");
    block("l1capLp");
    h += ",energy,min_value";
    return h;
}

inline std::string diagnostics_csv_row(const DiagnosticsRecord& rec) {
    std::string row = format_double(rec.t);
    auto block = [&](const std::vector<double>& v) {
        for (double x : v) row += "," + format_double(x);
    };
    block(rec.mass);
    block(rec.lp_norms);
    block(rec.l2_norms);
    block(rec.rho);
    block(rec.l1capLp);
    row += "," + format_double(rec.energy);
    row += "," + format_double(rec.min_value);
    return row;
}

}  // namespace nlads
