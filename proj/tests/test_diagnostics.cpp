#include <catch2/catch.hpp>

#include <cmath>
#include <random>

#include "nlads/diagnostics.hpp"
#include "nlads/rhodynamics.hpp"

using namespace nlads;

namespace {

std::vector<double> gaussian_grid(double L, int m, double width = 1.0, double center = 0.0,
                                  double amp = 1.0) {
    std::vector<double> u(m);
    const double dx = 2.0 * L / m;
    for (int i = 0; i < m; ++i) {
        const double x = -L + (i + 0.5) * dx;
        const double z = (x - center) / width;
        u[i] = amp * std::exp(-z * z);
    }
    return u;
}

}  // namespace

TEST_CASE("L^p norms on the grid") {
    const double L = 8.0;  // dx = 1/32 so the cells tile [-1, 1] exactly
    const int m = 512;
    const double dx = 2.0 * L / m;
    std::vector<double> ones(m, 1.0);
    for (double p : {1.0, 2.0, 3.5}) {
        REQUIRE(lp_norm(ones, p, dx) == Approx(std::pow(2.0 * L, 1.0 / p)).epsilon(1e-12));
    }
    // indicator with exact cell coverage: [-1, 1] on a grid with dx = 2L/M
    std::vector<double> chi(m, 0.0);
    for (int i = 0; i < m; ++i) {
        const double x0 = -L + i * dx, x1 = x0 + dx;
        if (x0 >= -1.0 - 1e-12 && x1 <= 1.0 + 1e-12) chi[i] = 1.0;
    }
    REQUIRE(lp_norm(chi, 2.0, dx) == Approx(std::sqrt(2.0)).epsilon(1e-12));
    // homogeneity
    std::vector<double> scaled = chi;
    for (auto& v : scaled) v *= 3.7;
    REQUIRE(lp_norm(scaled, 2.0, dx) == Approx(3.7 * lp_norm(chi, 2.0, dx)).epsilon(1e-13));
}

TEST_CASE("rho from norms") {
    // u = chi_[-1,1], p = 2, M = 2: rho = (sqrt(2)/2)^2 = 0.5
    REQUIRE(rho_from_norms(std::sqrt(2.0), 2.0, 2.0) == Approx(0.5).epsilon(1e-13));
    REQUIRE(rho_from_norms(1.0, 1.0, 2.0) == Approx(1.0));
    REQUIRE_THROWS_AS(rho_from_norms(1.0, 0.0, 2.0), ZeroMass);
    // translation invariance comes for free: norms are translation invariant
    const double L = 10.0;
    const int m = 1024;
    const double dx = 2.0 * L / m;
    auto u0 = gaussian_grid(L, m, 1.0, 0.0);
    auto u1 = gaussian_grid(L, m, 1.0, 2.5);
    REQUIRE(lp_norm(u0, 2.0, dx) == Approx(lp_norm(u1, 2.0, dx)).epsilon(1e-12));
}

TEST_CASE("nash residual: zero, gaussians, dilation sign-invariance") {
    const double L = 20.0;
    const int m = 2048;
    const double dx = 2.0 * L / m;
    std::vector<double> zero(m, 0.0);
    REQUIRE(nash_residual(zero, dx, 2.0, 0.42) == Approx(0.0).margin(1e-14));

    const double cn = calibrate_nash_constant(L, m);
    for (double width : {0.5, 1.0, 2.0}) {
        const auto g = gaussian_grid(L, m, width);
        const double res = nash_residual(g, dx, 2.0, cn);
        REQUIRE(res >= 0.0);
        // gaussians are near-extremal: residual small relative to the norm term
        const double scale = std::pow(lp_norm(g, 2.0, dx), 3.0);
        REQUIRE(res <= 0.25 * scale);
    }

    // the sign of the residual is dilation invariant
    std::mt19937 rng(53);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        const double w = 0.4 + 2.0 * unit(rng);
        const double c = -2.0 + 4.0 * unit(rng);
        for (double p : {2.0, 2.5, 3.0}) {
            const auto base = gaussian_grid(L, m, w, c);
            const double r0 = nash_residual(base, dx, p, cn);
            for (double beta : {0.5, 2.0}) {
                const auto dil = gaussian_grid(L, m, w / beta, c / beta);
                const double r1 = nash_residual(dil, dx, p, cn);
                REQUIRE((r0 >= 0.0) == (r1 >= 0.0));
            }
        }
    }
}

TEST_CASE("blow-up indicator") {
    DiagnosticsRecord rec;
    rec.mass = {0.0};
    rec.lp_norms = {11.0};
    rec.l1capLp = {11.0};
    REQUIRE(blowup_indicator(rec, 10.0));
    REQUIRE_FALSE(blowup_indicator(rec, 12.0));
    // monotone in the threshold
    REQUIRE(blowup_indicator(rec, 5.0));
    DiagnosticsRecord zero;
    zero.l1capLp = {0.0, 0.0};
    REQUIRE_FALSE(blowup_indicator(zero, 1e-9));
}

TEST_CASE("interpolation inequality on random grid functions") {
    const double L = 10.0;
    const int m = 256;
    const double dx = 2.0 * L / m;
    std::mt19937 rng(59);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> u(m);
        for (auto& v : u) v = unit(rng);
        double p = 1.0 + 3.0 * unit(rng);
        double q = p + 3.0 * unit(rng) + 1e-3;
        const double theta_mix = unit(rng);
        // 1/r = (1-theta)/p + theta/q
        const double r = 1.0 / ((1.0 - theta_mix) / p + theta_mix / q);
        const double lhs = lp_norm(u, r, dx);
        const double rhs = std::pow(lp_norm(u, p, dx), 1.0 - theta_mix) *
                           std::pow(lp_norm(u, q, dx), theta_mix);
        REQUIRE(lhs <= rhs * (1.0 + 1e-12));
    }
}

TEST_CASE("diagnostics record and csv round") {
    const double L = 5.0;
    const int m = 64;
    const double dx = 2.0 * L / m;
    std::vector<std::vector<double>> u{std::vector<double>(m, 1.0),
                                       std::vector<double>(m, 0.5)};
    const auto rec = diagnostics_of(0.25, u, dx, {2.0, 2.0}, {2.0 * L, L});
    REQUIRE(rec.mass[0] == Approx(2.0 * L).epsilon(1e-13));
    REQUIRE(rec.mass[1] == Approx(L).epsilon(1e-13));
    REQUIRE(rec.l1capLp[0] == Approx(rec.mass[0] + rec.lp_norms[0]).epsilon(1e-13));
    // energy = sum lp^p / (2(p-1)) with p = 2
    const double expect =
        0.5 * (rec.lp_norms[0] * rec.lp_norms[0] + rec.lp_norms[1] * rec.lp_norms[1]);
    REQUIRE(rec.energy == Approx(expect).epsilon(1e-13));
    REQUIRE(rec.min_value == Approx(0.5));

    const auto header = diagnostics_csv_header(2);
    REQUIRE(header.substr(0, 15) == "t,mass_1,mass_2");
    const auto row = diagnostics_csv_row(rec);
    REQUIRE(row.substr(0, 4) == "0.25");
    REQUIRE(std::count(header.begin(), header.end(), ',') ==
            std::count(row.begin(), row.end(), ','));
}
