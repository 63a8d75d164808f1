#pragma once

// Adaptive Gauss-Kronrod (G7, K15) quadrature. Used for kernel norms,
// Fourier coefficients of the periodised kernels, and the test oracles.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <vector>

namespace nlads {

namespace qk15 {
// Kronrod abscissae on [-1,1] (positive half) and weights; Gauss-7 weights
// sit on the odd-indexed Kronrod nodes.
inline constexpr double xgk[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.000000000000000};
inline constexpr double wgk[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
inline constexpr double wg[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469};
}  // namespace qk15

struct PanelEstimate {
    double value;
    double error;
};

template <typename F>
PanelEstimate gauss_kronrod_15(const F& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    double fv[15];
    for (int i = 0; i < 7; ++i) {
        fv[i] = f(c - h * qk15::xgk[i]);
        fv[14 - i] = f(c + h * qk15::xgk[i]);
    }
    fv[7] = f(c);
    double kron = qk15::wgk[7] * fv[7];
    double gauss = qk15::wg[3] * fv[7];
    for (int i = 0; i < 7; ++i) {
        kron += qk15::wgk[i] * (fv[i] + fv[14 - i]);
        if (i % 2 == 1) gauss += qk15::wg[i / 2] * (fv[i] + fv[14 - i]);
    }
    kron *= h;
    gauss *= h;
    return {kron, std::abs(kron - gauss)};
}

// Stack-based bisection refinement. Handles integrable endpoint
// singularities (the W_s gradient powers) through depth alone.
template <typename F>
double integrate_adaptive(const F& f, double a, double b, double abs_tol = 1e-12,
                          double rel_tol = 1e-12, int max_depth = 60) {
    struct Panel {
        double a, b, value, error;
        int depth;
    };
    PanelEstimate first = gauss_kronrod_15(f, a, b);
    std::vector<Panel> stack{{a, b, first.value, first.error, 0}};
    double total = 0.0;
    double pending = first.value;
    while (!stack.empty()) {
        Panel p = stack.back();
        stack.pop_back();
        const double tol = std::max(abs_tol, rel_tol * std::abs(pending + total)) *
                           std::max(1e-3, std::abs(p.b - p.a) / std::abs(b - a));
        if (p.error <= tol || p.depth >= max_depth) {
            total += p.value;
            continue;
        }
        const double mid = 0.5 * (p.a + p.b);
        PanelEstimate left = gauss_kronrod_15(f, p.a, mid);
        PanelEstimate right = gauss_kronrod_15(f, mid, p.b);
        pending += left.value + right.value - p.value;
        stack.push_back({p.a, mid, left.value, left.error, p.depth + 1});
        stack.push_back({mid, p.b, right.value, right.error, p.depth + 1});
    }
    return total;
}

// Oscillatory integrand with wavenumber k: split into half-period panels
// first, then refine adaptively inside each.
template <typename F>
double integrate_oscillatory(const F& f, double a, double b, double k,
                             double abs_tol = 1e-12) {
    const double span = b - a;
    std::size_t panels = 1;
    if (k > 0.0) {
        panels = static_cast<std::size_t>(std::ceil(span * k / std::numbers::pi));
        panels = std::clamp<std::size_t>(panels, 1, 1u << 20);
    }
    double sum = 0.0;
    const double per_panel = abs_tol / static_cast<double>(panels);
    for (std::size_t i = 0; i < panels; ++i) {
        const double pa = a + span * static_cast<double>(i) / static_cast<double>(panels);
        const double pb = a + span * static_cast<double>(i + 1) / static_cast<double>(panels);
        sum += integrate_adaptive(f, pa, pb, per_panel, 1e-13, 30);
    }
    return sum;
}

}  // namespace nlads
