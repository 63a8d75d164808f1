#pragma once

// Radix-2 transforms for the periodic grids used by the solver and the
// spectral diagnostics. Sizes are powers of two by construction, so a
// self-contained iterative Cooley-Tukey kernel is all that is needed.
// Real transforms go through a half-length complex FFT.

#include <cassert>
#include <complex>
#include <cstddef>
#include <numbers>
#include <vector>

namespace nlads {

using cplx = std::complex<double>;

inline bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// In-place complex FFT of a fixed power-of-two size. Twiddles and the
// bit-reversal permutation are precomputed once per plan.
class Fft {
  public:
    explicit Fft(std::size_t n) : n_(n) {
        assert(is_power_of_two(n));
        rev_.resize(n);
        std::size_t log2n = 0;
        while ((std::size_t{1} << log2n) < n) ++log2n;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t r = 0;
            for (std::size_t b = 0; b < log2n; ++b)
                if (i & (std::size_t{1} << b)) r |= std::size_t{1} << (log2n - 1 - b);
            rev_[i] = r;
        }
        tw_.resize(n / 2);
        for (std::size_t j = 0; j < n / 2; ++j) {
            const double ang = -2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n);
            tw_[j] = cplx{std::cos(ang), std::sin(ang)};
        }
    }

    std::size_t size() const { return n_; }

    void forward(cplx* a) const { transform(a, false); }

    void inverse(cplx* a) const {
        transform(a, true);
        const double scale = 1.0 / static_cast<double>(n_);
        for (std::size_t i = 0; i < n_; ++i) a[i] *= scale;
    }

  private:
    void transform(cplx* a, bool inv) const {
        for (std::size_t i = 0; i < n_; ++i)
            if (rev_[i] > i) std::swap(a[i], a[rev_[i]]);
        for (std::size_t len = 2; len <= n_; len <<= 1) {
            const std::size_t half = len >> 1;
            const std::size_t stride = n_ / len;
            for (std::size_t blk = 0; blk < n_; blk += len) {
                for (std::size_t j = 0; j < half; ++j) {
                    cplx w = tw_[j * stride];
                    if (inv) w = std::conj(w);
                    const cplx t = a[blk + j + half] * w;
                    a[blk + j + half] = a[blk + j] - t;
                    a[blk + j] += t;
                }
            }
        }
    }

    std::size_t n_;
    std::vector<std::size_t> rev_;
    std::vector<cplx> tw_;
};

// Real-to-complex FFT of length M (power of two, M >= 4) producing the
// hermitian half spectrum X[0..M/2], via one complex FFT of length M/2.
// Conventions: forward is the plain unnormalised DFT sum, inverse carries
// the 1/M factor, so inverse(forward(x)) == x.
class RealFft {
  public:
    explicit RealFft(std::size_t m) : m_(m), half_(m / 2), fft_(m / 2) {
        assert(is_power_of_two(m) && m >= 4);
        w_.resize(half_ + 1);
        for (std::size_t j = 0; j <= half_; ++j) {
            const double ang = -2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(m);
            w_[j] = cplx{std::cos(ang), std::sin(ang)};
        }
        z_.resize(half_);
    }

    std::size_t size() const { return m_; }
    std::size_t spectrum_size() const { return half_ + 1; }

    // x: M reals; X: M/2+1 complex
    void forward(const double* x, cplx* X) {
        for (std::size_t j = 0; j < half_; ++j) z_[j] = cplx{x[2 * j], x[2 * j + 1]};
        fft_.forward(z_.data());
        for (std::size_t m = 0; m <= half_; ++m) {
            const cplx zm = (m == half_) ? z_[0] : z_[m];
            const cplx zc = std::conj(z_[(half_ - m) % half_]);
            const cplx even = 0.5 * (zm + zc);
            const cplx odd = cplx{0.0, -0.5} * (zm - zc);
            X[m] = even + w_[m] * odd;
        }
    }

    // X: M/2+1 complex (hermitian half); x: M reals
    void inverse(const cplx* X, double* x) {
        for (std::size_t m = 0; m < half_; ++m) {
            const cplx xc = std::conj(X[half_ - m]);
            const cplx even = 0.5 * (X[m] + xc);
            const cplx odd = 0.5 * std::conj(w_[m]) * (X[m] - xc);
            z_[m] = even + cplx{0.0, 1.0} * odd;
        }
        fft_.inverse(z_.data());
        for (std::size_t j = 0; j < half_; ++j) {
            x[2 * j] = z_[j].real();
            x[2 * j + 1] = z_[j].imag();
        }
    }

  private:
    std::size_t m_, half_;
    Fft fft_;
    std::vector<cplx> w_;
    std::vector<cplx> z_;
};

}  // namespace nlads
