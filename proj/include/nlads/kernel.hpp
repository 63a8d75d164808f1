#pragma once

// Perception kernels K = gamma * W, where W is a probability density.
// The W_s family has a cusp at the origin whose weak gradient lies in
// L^q exactly for q(1 - 1/s) < 1; the solver therefore never samples the
// gradient on a grid and instead consumes Fourier coefficients of W itself.

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "nlads/errors.hpp"
#include "nlads/fft.hpp"
#include "nlads/quadrature.hpp"

namespace nlads {

enum class KernelFamily { Ws, TopHat, RaisedCosine, Exponential, Zero };

inline const char* family_name(KernelFamily f) {
    switch (f) {
        case KernelFamily::Ws: return "ws";
        case KernelFamily::TopHat: return "top_hat";
        case KernelFamily::RaisedCosine: return "raised_cosine";
        case KernelFamily::Exponential: return "exponential";
        case KernelFamily::Zero: return "zero";
    }
    return "?";
}

struct KernelSpec {
    KernelFamily family = KernelFamily::Zero;
    double gamma = 0.0;   // attraction strength, sign allowed
    double s = 0.0;       // Ws sharpness; s=0 and s=inf are the documented limit cases
    double radius = 0.0;  // sensing radius (TopHat, RaisedCosine)
    double rate = 0.0;    // Exponential lambda

    static KernelSpec ws(double gamma, double s) { return {KernelFamily::Ws, gamma, s, 0.0, 0.0}; }
    static KernelSpec top_hat(double gamma, double radius) {
        return {KernelFamily::TopHat, gamma, 0.0, radius, 0.0};
    }
    static KernelSpec raised_cosine(double gamma, double radius) {
        return {KernelFamily::RaisedCosine, gamma, 0.0, radius, 0.0};
    }
    static KernelSpec exponential(double gamma, double rate) {
        return {KernelFamily::Exponential, gamma, 0.0, 0.0, rate};
    }
    static KernelSpec zero() { return {}; }

    bool is_zero() const { return family == KernelFamily::Zero || gamma == 0.0; }

    void validate() const {
        if (!std::isfinite(gamma)) throw ConfigError("kernel: gamma must be finite");
        switch (family) {
            case KernelFamily::Ws:
                if (std::isnan(s) || s < 0.0) throw ConfigError("kernel: Ws needs s >= 0");
                break;
            case KernelFamily::TopHat:
            case KernelFamily::RaisedCosine:
                if (!(radius > 0.0) || !std::isfinite(radius))
                    throw ConfigError("kernel: radius must be positive");
                break;
            case KernelFamily::Exponential:
                if (!(rate > 0.0) || !std::isfinite(rate))
                    throw ConfigError("kernel: rate must be positive");
                break;
            case KernelFamily::Zero:
                break;
        }
    }
};

// Total integral of K; every non-zero family is a probability density
// scaled by gamma.
inline double kernel_mass(const KernelSpec& k) { return k.is_zero() ? 0.0 : k.gamma; }

// Radius beyond which the kernel is zero (or negligible below 1e-12 of
// its mass, for the exponential tail).
inline double support_radius(const KernelSpec& k) {
    switch (k.family) {
        case KernelFamily::Ws: return k.is_zero() ? 0.0 : 1.0;
        case KernelFamily::TopHat:
        case KernelFamily::RaisedCosine: return k.is_zero() ? 0.0 : k.radius;
        case KernelFamily::Exponential:
            return k.is_zero() ? 0.0 : -std::log(1e-12) / k.rate;
        case KernelFamily::Zero: return 0.0;
    }
    return 0.0;
}

inline double eval(const KernelSpec& k, double x) {
    if (k.is_zero()) return 0.0;
    const double ax = std::abs(x);
    switch (k.family) {
        case KernelFamily::Ws: {
            if (ax > 1.0) return 0.0;
            if (k.s == 0.0) return k.gamma * 0.5;  // s->0 limit: half indicator
            if (std::isinf(k.s)) {                 // s->inf limit: 0.5 log+(1/|x|)
                if (ax == 0.0) return std::numeric_limits<double>::infinity() * (k.gamma > 0 ? 1 : -1);
                return k.gamma * (-0.5) * std::log(ax);
            }
            return k.gamma * 0.5 * (k.s + 1.0) * (1.0 - std::pow(ax, 1.0 / k.s));
        }
        case KernelFamily::TopHat:
            return ax <= k.radius ? k.gamma / (2.0 * k.radius) : 0.0;
        case KernelFamily::RaisedCosine:
            return ax <= k.radius
                       ? k.gamma / (2.0 * k.radius) * (1.0 + std::cos(std::numbers::pi * ax / k.radius))
                       : 0.0;
        case KernelFamily::Exponential:
            return k.gamma * 0.5 * k.rate * std::exp(-k.rate * ax);
        case KernelFamily::Zero: return 0.0;
    }
    return 0.0;
}

// Pointwise (a.e.) derivative K'. Throws SingularPoint at x = 0 when the
// gradient is unbounded there (Ws with s > 1, including the s = inf case).
inline double eval_grad(const KernelSpec& k, double x) {
    if (k.is_zero()) return 0.0;
    const double ax = std::abs(x);
    const double sgn_minus_x = (x > 0.0) ? -1.0 : (x < 0.0 ? 1.0 : 0.0);
    switch (k.family) {
        case KernelFamily::Ws: {
            if (ax > 1.0) return 0.0;
            if (k.s == 0.0) return 0.0;  // indicator limit: zero a.e.
            if (std::isinf(k.s)) {
                if (x == 0.0) throw SingularPoint("W_inf' is unbounded at x = 0");
                return k.gamma * 0.5 * sgn_minus_x / ax;
            }
            if (x == 0.0) {
                if (k.s > 1.0) throw SingularPoint("W_s' is unbounded at x = 0 for s > 1");
                return 0.0;
            }
            return k.gamma * (k.s + 1.0) / (2.0 * k.s) * sgn_minus_x * std::pow(ax, -(1.0 - 1.0 / k.s));
        }
        case KernelFamily::TopHat:
            return 0.0;  // zero a.e.; the jumps at |x| = R are not functions
        case KernelFamily::RaisedCosine:
            if (ax > k.radius) return 0.0;
            return k.gamma / (2.0 * k.radius) * (std::numbers::pi / k.radius) *
                   std::sin(std::numbers::pi * ax / k.radius) * sgn_minus_x;
        case KernelFamily::Exponential:
            return k.gamma * 0.5 * k.rate * k.rate * std::exp(-k.rate * ax) * sgn_minus_x;
        case KernelFamily::Zero: return 0.0;
    }
    return 0.0;
}

// Supremum of exponents q for which the weak gradient lies in L^q(R).
// Families whose gradient is in every L^q report +inf; families whose
// gradient is not a function for any q >= 1 report 1.
inline double qbar(const KernelSpec& k) {
    const double inf = std::numeric_limits<double>::infinity();
    switch (k.family) {
        case KernelFamily::Ws:
            if (k.s == 0.0 || std::isinf(k.s)) return 1.0;
            if (k.s > 1.0) return k.s / (k.s - 1.0);
            return inf;
        case KernelFamily::TopHat: return 1.0;  // jump: gradient is a measure
        case KernelFamily::RaisedCosine:
        case KernelFamily::Exponential:
        case KernelFamily::Zero: return inf;
    }
    return inf;
}

// ||K'||_{L^q(R)}. Closed form for the W_s family; adaptive quadrature
// (abs tol 1e-12) for the raised cosine and exponential families.
inline double grad_lq_norm(const KernelSpec& k, double q) {
    if (!(q >= 1.0)) throw ConfigError("grad_lq_norm: q must satisfy q >= 1");
    if (k.is_zero()) return 0.0;
    const double g = std::abs(k.gamma);
    switch (k.family) {
        case KernelFamily::Ws: {
            if (k.s == 0.0) throw DivergentNorm("W_0' is a pair of point masses, not in any L^q");
            if (std::isinf(k.s)) throw DivergentNorm("W_inf' = 0.5 sgn(-x)/|x| is not in L^q for q >= 1");
            const double expo = q * (1.0 - 1.0 / k.s);
            if (expo >= 1.0)
                throw DivergentNorm("||W_s'||_{L^q} diverges for q >= s/(s-1)");
            return g * std::pow(2.0, 1.0 / q) * (k.s + 1.0) / (2.0 * k.s) *
                   std::pow(1.0 - expo, -1.0 / q);
        }
        case KernelFamily::TopHat:
            throw DivergentNorm("top-hat gradient is a measure, not in any L^q");
        case KernelFamily::RaisedCosine: {
            const double r = k.radius;
            const double amp = g / (2.0 * r) * std::numbers::pi / r;
            const double integral = integrate_adaptive(
                [&](double x) { return std::pow(amp * std::sin(std::numbers::pi * x / r), q); }, 0.0,
                r, 1e-12);
            return std::pow(2.0 * integral, 1.0 / q);
        }
        case KernelFamily::Exponential: {
            const double lam = k.rate;
            const double amp = g * 0.5 * lam * lam;
            const double cutoff = 60.0 / (q * lam);
            const double integral = integrate_adaptive(
                [&](double x) { return std::pow(amp * std::exp(-lam * x), q); }, 0.0, cutoff, 1e-12);
            return std::pow(2.0 * integral, 1.0 / q);
        }
        case KernelFamily::Zero: return 0.0;
    }
    return 0.0;
}

// Continuous Fourier transform K^(k_m) = int K(x) e^{-i k_m x} dx evaluated
// at the retained grid wavenumbers k_m = pi m / L, m = 0..M/2. These are
// exactly (2L times) the Fourier coefficients of the L-periodisation of K,
// so the spectral convolution with them is exact for band-limited data.
// Computed per mode by quadrature of the kernel value (never K', whose
// singularity would make grid sampling uncontrolled); families with simple
// transforms use the closed form.
inline std::vector<std::complex<double>> fourier_coefficients(const KernelSpec& k, double L, int M) {
    if (M < 4 || !is_power_of_two(static_cast<std::size_t>(M)))
        throw BadResolution("fourier_coefficients: M must be a power of two >= 4");
    if (!(L > 0.0)) throw DomainTooSmall("fourier_coefficients: L must be positive");
    if (support_radius(k) >= L)
        throw DomainTooSmall("kernel support exceeds [-L, L)");
    const int half = M / 2;
    std::vector<std::complex<double>> out(static_cast<std::size_t>(half) + 1, {0.0, 0.0});
    if (k.is_zero()) return out;

    auto cosine_transform = [&](auto profile, double r) {
        for (int m = 0; m <= half; ++m) {
            const double kk = std::numbers::pi * m / L;
            const double val = integrate_oscillatory(
                [&](double x) { return profile(x) * std::cos(kk * x); }, 0.0, r, kk, 1e-13);
            out[static_cast<std::size_t>(m)] = {2.0 * k.gamma * val, 0.0};
        }
    };

    switch (k.family) {
        case KernelFamily::Ws: {
            if (k.s == 0.0) {  // half indicator: sin(k)/k exactly
                for (int m = 0; m <= half; ++m) {
                    const double kk = std::numbers::pi * m / L;
                    out[static_cast<std::size_t>(m)] = {m == 0 ? k.gamma : k.gamma * std::sin(kk) / kk, 0.0};
                }
                break;
            }
            if (std::isinf(k.s)) {
                cosine_transform([&](double x) { return x == 0.0 ? 0.0 : -0.5 * std::log(x); }, 1.0);
                break;
            }
            const double s = k.s;
            cosine_transform(
                [&](double x) { return 0.5 * (s + 1.0) * (1.0 - std::pow(x, 1.0 / s)); }, 1.0);
            break;
        }
        case KernelFamily::TopHat:
            for (int m = 0; m <= half; ++m) {
                const double kk = std::numbers::pi * m / L;
                const double kr = kk * k.radius;
                out[static_cast<std::size_t>(m)] = {m == 0 ? k.gamma : k.gamma * std::sin(kr) / kr, 0.0};
            }
            break;
        case KernelFamily::RaisedCosine: {
            const double r = k.radius;
            cosine_transform(
                [&](double x) {
                    return 1.0 / (2.0 * r) * (1.0 + std::cos(std::numbers::pi * x / r));
                },
                r);
            break;
        }
        case KernelFamily::Exponential:
            // transform of the periodisation equals the analytic transform
            // at the grid wavenumbers (Poisson summation)
            for (int m = 0; m <= half; ++m) {
                const double kk = std::numbers::pi * m / L;
                out[static_cast<std::size_t>(m)] = {
                    k.gamma * k.rate * k.rate / (k.rate * k.rate + kk * kk), 0.0};
            }
            break;
        case KernelFamily::Zero: break;
    }
    return out;
}

}  // namespace nlads
