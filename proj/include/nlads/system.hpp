#pragma once

// The model description shared by the cycle analysis, the dynamics module
// and the solver: species count, dimension, diffusion constants, the
// kernel matrix, masses, and the exponent vectors P and Q.

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "nlads/errors.hpp"
#include "nlads/kernel.hpp"

namespace nlads {

struct InitialData {
    enum class Kind { Zero, Indicator, Gaussian };
    Kind kind = Kind::Zero;
    // indicator chi_[a,b] * height
    double a = -1.0, b = 1.0, height = 1.0;
    // gaussian amplitude * exp(-((x-center)/width)^2)
    double center = 0.0, width = 1.0, amplitude = 1.0;

    static InitialData zero() { return {}; }
    static InitialData indicator(double a = -1.0, double b = 1.0, double height = 1.0) {
        InitialData d;
        d.kind = Kind::Indicator;
        d.a = a;
        d.b = b;
        d.height = height;
        return d;
    }
    static InitialData gaussian(double center = 0.0, double width = 1.0, double amplitude = 1.0) {
        InitialData d;
        d.kind = Kind::Gaussian;
        d.center = center;
        d.width = width;
        d.amplitude = amplitude;
        return d;
    }

    double mass() const {
        switch (kind) {
            case Kind::Zero: return 0.0;
            case Kind::Indicator: return height * (b - a);
            case Kind::Gaussian: return amplitude * width * std::sqrt(std::numbers::pi);
        }
        return 0.0;
    }

    double eval(double x) const {
        switch (kind) {
            case Kind::Zero: return 0.0;
            case Kind::Indicator: return (x >= a && x <= b) ? height : 0.0;
            case Kind::Gaussian: {
                const double z = (x - center) / width;
                return amplitude * std::exp(-z * z);
            }
        }
        return 0.0;
    }

    // radius beyond which the data is zero or below 1e-12 of its peak
    double support_radius() const {
        switch (kind) {
            case Kind::Zero: return 0.0;
            case Kind::Indicator: return std::max(std::abs(a), std::abs(b));
            case Kind::Gaussian: return std::abs(center) + width * std::sqrt(std::log(1e12));
        }
        return 0.0;
    }
};

struct InteractionSystem {
    int n = 0;
    double d = 1.0;  // arithmetic dimension for the cycle/dynamics modules
    std::vector<double> diffusion;                 // D_i > 0
    std::vector<std::vector<KernelSpec>> kernels;  // K_ij
    std::vector<double> masses;                    // M_i = ||u_0i||_{L^1}
    std::vector<double> p;                         // exponents p_i >= 2
    std::optional<std::vector<std::vector<double>>> q_override;

    void validate() const {
        if (n < 1) throw ConfigError("system: N >= 1 required");
        if (!(d >= 1.0)) throw ConfigError("system: d >= 1 required");
        auto check_len = [&](std::size_t len, const char* what) {
            if (len != static_cast<std::size_t>(n)) throw ConfigError(std::string("system: ") + what);
        };
        check_len(diffusion.size(), "D must have N entries");
        check_len(kernels.size(), "kernel matrix must be N x N");
        check_len(masses.size(), "masses must have N entries");
        check_len(p.size(), "P must have N entries");
        for (double v : diffusion)
            if (!(v > 0.0)) throw ConfigError("system: D_i > 0 required");
        for (double v : p)
            if (!(v >= 2.0)) throw ConfigError("system: p_i >= 2 required");
        for (const auto& row : kernels) {
            check_len(row.size(), "kernel matrix must be N x N");
            for (const auto& k : row) k.validate();
        }
        if (q_override) {
            check_len(q_override->size(), "Q must be N x N");
            for (const auto& row : *q_override) {
                check_len(row.size(), "Q must be N x N");
                for (double v : row)
                    if (!(v > 1.0)) throw ConfigError("system: q_ij > 1 required");
            }
        }
    }

    // Regularity exponent used for the (i,j) pair: the explicit override if
    // present, otherwise the supremum exponent qbar of the kernel (limit
    // policy for the W_s family).
    double q_exponent(int i, int j) const {
        if (q_override) return (*q_override)[i][j];
        return qbar(kernels[i][j]);
    }

    // All non-zero kernel strengths scaled by `factor` (gamma sweeps).
    InteractionSystem with_gamma_scaled(double factor) const {
        InteractionSystem out = *this;
        for (auto& row : out.kernels)
            for (auto& k : row)
                if (!k.is_zero()) k.gamma *= factor;
        return out;
    }
};

}  // namespace nlads
