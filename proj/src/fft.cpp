#include "thz/fft.hpp"

#include <cmath>
#include <cstddef>

#include "thz/error.hpp"

namespace thz {
namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

}  // namespace

void fft_pow2(std::vector<std::complex<double>>& a) {
    const std::size_t n = a.size();
    if (!is_pow2(n)) throw Error("fft_pow2: length must be a power of two");
    if (n == 1) return;

    // Bit-reversal permutation.
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }

    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = -kTwoPi / static_cast<double>(len);
        const std::complex<double> wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const std::complex<double> u = a[i + k];
                const std::complex<double> v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
}

std::vector<std::complex<double>> dft_forward(const std::vector<std::complex<double>>& x) {
    const std::size_t n = x.size();
    if (n == 0) throw Error("dft_forward: empty input");
    if (is_pow2(n)) {
        auto a = x;
        fft_pow2(a);
        return a;
    }

    // Bluestein: X[k] = conj(w[k]) * (y * v)[k] with y[t] = x[t] conj(w[t]),
    // v[t] = w[t] extended symmetrically, w[t] = e^{-i pi t^2 / n}.
    const std::size_t m = next_pow2(2 * n - 1);
    std::vector<std::complex<double>> w(n);
    for (std::size_t t = 0; t < n; ++t) {
        // t^2 mod 2n keeps the phase argument small for large t.
        const std::size_t t2 = (t * t) % (2 * n);
        const double ang = -kTwoPi * static_cast<double>(t2) / (2.0 * static_cast<double>(n));
        w[t] = {std::cos(ang), std::sin(ang)};
    }

    std::vector<std::complex<double>> y(m, {0.0, 0.0});
    std::vector<std::complex<double>> v(m, {0.0, 0.0});
    for (std::size_t t = 0; t < n; ++t) y[t] = x[t] * w[t];
    for (std::size_t t = 0; t < n; ++t) {
        const std::complex<double> c = std::conj(w[t]);
        v[t] = c;
        if (t != 0) v[m - t] = c;
    }

    fft_pow2(y);
    fft_pow2(v);
    for (std::size_t i = 0; i < m; ++i) y[i] *= v[i];

    // Inverse FFT of the product via conjugation.
    for (auto& c : y) c = std::conj(c);
    fft_pow2(y);
    const double inv_m = 1.0 / static_cast<double>(m);
    std::vector<std::complex<double>> out(n);
    for (std::size_t k = 0; k < n; ++k) out[k] = std::conj(y[k]) * inv_m * w[k];
    return out;
}

}  // namespace thz
