#include <catch2/catch.hpp>

#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include "nlads/fft.hpp"
#include "nlads/quadrature.hpp"

using namespace nlads;

namespace {

// brute-force DFT oracle
std::vector<cplx> naive_dft(const std::vector<cplx>& x) {
    const std::size_t n = x.size();
    std::vector<cplx> out(n);
    for (std::size_t m = 0; m < n; ++m) {
        cplx acc{0.0, 0.0};
        for (std::size_t j = 0; j < n; ++j) {
            const double ang = -2.0 * std::numbers::pi * double(m * j % n) / double(n);
            acc += x[j] * cplx{std::cos(ang), std::sin(ang)};
        }
        out[m] = acc;
    }
    return out;
}

}  // namespace

TEST_CASE("complex FFT matches the naive DFT") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (std::size_t n : {4u, 8u, 64u, 256u}) {
        std::vector<cplx> x(n);
        for (auto& v : x) v = {dist(rng), dist(rng)};
        auto expect = naive_dft(x);
        Fft fft(n);
        auto got = x;
        fft.forward(got.data());
        for (std::size_t i = 0; i < n; ++i) {
            REQUIRE(std::abs(got[i] - expect[i]) < 1e-10 * double(n));
        }
        fft.inverse(got.data());
        for (std::size_t i = 0; i < n; ++i) REQUIRE(std::abs(got[i] - x[i]) < 1e-12);
    }
}

TEST_CASE("real FFT matches the naive DFT and round-trips") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> dist(-2.0, 2.0);
    for (std::size_t m : {4u, 16u, 128u, 2048u}) {
        std::vector<double> x(m);
        for (auto& v : x) v = dist(rng);
        std::vector<cplx> xc(m);
        for (std::size_t i = 0; i < m; ++i) xc[i] = {x[i], 0.0};
        auto expect = naive_dft(xc);
        RealFft rfft(m);
        std::vector<cplx> hat(rfft.spectrum_size());
        rfft.forward(x.data(), hat.data());
        for (std::size_t k = 0; k <= m / 2; ++k)
            REQUIRE(std::abs(hat[k] - expect[k]) < 1e-9 * double(m));
        std::vector<double> back(m);
        rfft.inverse(hat.data(), back.data());
        for (std::size_t i = 0; i < m; ++i) REQUIRE(back[i] == Approx(x[i]).margin(1e-12));
    }
}

TEST_CASE("Gauss-Kronrod panel integrates low-order polynomials exactly") {
    auto unit = gauss_kronrod_15([](double) { return 1.0; }, -1.0, 1.0);
    REQUIRE(unit.value == Approx(2.0).epsilon(1e-14));
    auto quad = gauss_kronrod_15([](double x) { return x * x; }, -1.0, 1.0);
    REQUIRE(quad.value == Approx(2.0 / 3.0).epsilon(1e-14));
    auto cubic = gauss_kronrod_15([](double x) { return x * x * x + 0.5 * x; }, -2.0, 2.0);
    REQUIRE(cubic.value == Approx(0.0).margin(1e-13));
}

TEST_CASE("adaptive quadrature handles oscillation and endpoint singularities") {
    const double osc = integrate_oscillatory([](double x) { return std::cos(57.0 * x); }, 0.0,
                                             1.0, 57.0, 1e-13);
    REQUIRE(osc == Approx(std::sin(57.0) / 57.0).margin(1e-12));

    // integrable endpoint singularity: int_0^1 x^{-1/2} dx = 2
    const double sing =
        integrate_adaptive([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0, 1e-10);
    REQUIRE(sing == Approx(2.0).epsilon(1e-8));

    // log singularity: int_0^1 -ln x dx = 1
    const double lg = integrate_adaptive(
        [](double x) { return x > 0.0 ? -std::log(x) : 0.0; }, 0.0, 1.0, 1e-12);
    REQUIRE(lg == Approx(1.0).epsilon(1e-10));

    const double gauss = integrate_adaptive(
        [](double x) { return std::exp(-x * x); }, -8.0, 8.0, 1e-13);
    REQUIRE(gauss == Approx(std::sqrt(std::numbers::pi)).epsilon(1e-12));
}
