#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "collapse_lab/errors.hpp"

namespace collapse_lab {

// Radix-2 complex FFT for power-of-two sizes, with precomputed twiddles and
// bit-reversal table. forward() applies e^{-2pi i jk/n} without scaling;
// inverse() applies the conjugate kernel and scales by 1/n, so
// inverse(forward(x)) == x up to rounding and both directions preserve the
// 2-norm up to the sqrt(n) factor.
class Fft {
public:
    explicit Fft(std::size_t n) : n_(n) {
        if (n_ == 0 || (n_ & (n_ - 1)) != 0)
            throw DomainError("FFT size must be a power of two");
        rev_.resize(n_);
        std::size_t log2n = 0;
        while ((std::size_t{1} << log2n) < n_) ++log2n;
        for (std::size_t i = 0; i < n_; ++i) {
            std::size_t r = 0;
            for (std::size_t b = 0; b < log2n; ++b)
                if (i & (std::size_t{1} << b)) r |= std::size_t{1} << (log2n - 1 - b);
            rev_[i] = r;
        }
        tw_.resize(n_ / 2);
        constexpr double two_pi = 2.0 * 3.14159265358979323846;
        for (std::size_t j = 0; j < n_ / 2; ++j) {
            const double angle = -two_pi * static_cast<double>(j) / static_cast<double>(n_);
            tw_[j] = {std::cos(angle), std::sin(angle)};
        }
    }

    std::size_t size() const { return n_; }

    void forward(std::complex<double>* a) const { transform(a, false); }

    void inverse(std::complex<double>* a) const {
        transform(a, true);
        const double scale = 1.0 / static_cast<double>(n_);
        for (std::size_t i = 0; i < n_; ++i) a[i] *= scale;
    }

private:
    void transform(std::complex<double>* a, bool conjugate) const {
        for (std::size_t i = 0; i < n_; ++i)
            if (rev_[i] > i) std::swap(a[i], a[rev_[i]]);
        for (std::size_t len = 2; len <= n_; len <<= 1) {
            const std::size_t stride = n_ / len;
            const std::size_t half = len / 2;
            for (std::size_t start = 0; start < n_; start += len) {
                for (std::size_t j = 0; j < half; ++j) {
                    std::complex<double> w = tw_[j * stride];
                    if (conjugate) w = std::conj(w);
                    const std::complex<double> u = a[start + j];
                    const std::complex<double> v = a[start + j + half] * w;
                    a[start + j] = u + v;
                    a[start + j + half] = u - v;
                }
            }
        }
    }

    std::size_t n_;
    std::vector<std::size_t> rev_;
    std::vector<std::complex<double>> tw_;
};

}  // namespace collapse_lab
