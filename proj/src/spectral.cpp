#include "thz/spectral.hpp"

#include <cmath>

#include "thz/error.hpp"
#include "thz/fft.hpp"

namespace thz {

void BandSelection::validate() const {
    if (!(f_initial >= 0.0)) throw ConfigError("band selection: f_initial must be >= 0");
    if (!(f_initial < f_end)) throw ConfigError("band selection: requires f_initial < f_end");
}

SpectralCube to_spectrum(const TimeDomainCube& cube, Window window) {
    cube.validate();
    const int T = cube.samples;
    const int out_bands = T / 2 + 1;

    std::vector<double> win(static_cast<std::size_t>(T), 1.0);
    if (window == Window::Hann) {
        for (int t = 0; t < T; ++t)
            win[t] = 0.5 * (1.0 - std::cos(6.283185307179586476925286766559 * t / (T - 1)));
    }

    SpectralCube out;
    out.height = cube.height;
    out.width = cube.width;
    out.bands = out_bands;
    out.df = 1.0 / (static_cast<double>(T) * cube.dt);  // ps^-1 == THz
    out.f_start = 0.0;
    out.data.resize(static_cast<std::size_t>(cube.height) * cube.width * out_bands);

    std::vector<std::complex<double>> wave(static_cast<std::size_t>(T));
    for (int y = 0; y < cube.height; ++y) {
        for (int x = 0; x < cube.width; ++x) {
            for (int t = 0; t < T; ++t) wave[t] = {cube.at(y, x, t) * win[t], 0.0};
            const auto spec = dft_forward(wave);
            for (int b = 0; b < out_bands; ++b) out.at(y, x, b) = static_cast<float>(std::abs(spec[b]));
        }
    }
    return out;
}

std::pair<int, int> resolve_band_indices(const SpectralCube& cube, const BandSelection& sel) {
    sel.validate();
    // Nearest bin, ties rounding up.
    const int lo = static_cast<int>(std::floor((sel.f_initial - cube.f_start) / cube.df + 0.5));
    const int hi = static_cast<int>(std::floor((sel.f_end - cube.f_start) / cube.df + 0.5));
    if (lo < 0 || hi >= cube.bands || lo > hi)
        throw ConfigError("band selection: range outside the cube's frequency axis");
    return {lo, hi};
}

SpectralCube select_bands(const SpectralCube& cube, const BandSelection& sel) {
    const auto [lo, hi] = resolve_band_indices(cube, sel);
    SpectralCube out;
    out.height = cube.height;
    out.width = cube.width;
    out.bands = hi - lo + 1;
    out.df = cube.df;
    out.f_start = cube.band_freq(lo);
    out.data.resize(static_cast<std::size_t>(out.height) * out.width * out.bands);
    for (int y = 0; y < out.height; ++y)
        for (int x = 0; x < out.width; ++x)
            for (int b = 0; b < out.bands; ++b) out.at(y, x, b) = cube.at(y, x, lo + b);
    return out;
}

double band_center(const BandSelection& sel) {
    sel.validate();
    return 0.5 * (sel.f_initial + sel.f_end);
}

}  // namespace thz
