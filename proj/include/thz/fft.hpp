#pragma once

#include <complex>
#include <vector>

namespace thz {

// In-place forward DFT (unnormalized, e^{-i2pi kt/N} convention) for
// power-of-two lengths: iterative radix-2 Cooley-Tukey.
void fft_pow2(std::vector<std::complex<double>>& a);

// Forward DFT of arbitrary length. Radix-2 when the length is a power of two,
// Bluestein's chirp-z otherwise.
std::vector<std::complex<double>> dft_forward(const std::vector<std::complex<double>>& x);

}  // namespace thz
