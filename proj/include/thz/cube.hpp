#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "thz/image.hpp"

namespace thz {

// One waveform per pixel, layout (row, col, t) with t fastest so a pixel's
// waveform is contiguous. dt is the sample interval in picoseconds.
struct TimeDomainCube {
    int height = 0;
    int width = 0;
    int samples = 0;
    double dt = 0.0;
    std::vector<float> data;

    float& at(int y, int x, int t) {
        return data[(static_cast<std::size_t>(y) * width + x) * samples + t];
    }
    float at(int y, int x, int t) const {
        return data[(static_cast<std::size_t>(y) * width + x) * samples + t];
    }
    void validate() const;
};

// One amplitude spectrum per pixel, layout (row, col, band) with band fastest.
// Bin b sits at frequency f_start + b * df (THz).
struct SpectralCube {
    int height = 0;
    int width = 0;
    int bands = 0;
    double df = 0.0;
    double f_start = 0.0;
    std::vector<float> data;

    float& at(int y, int x, int b) {
        return data[(static_cast<std::size_t>(y) * width + x) * bands + b];
    }
    float at(int y, int x, int b) const {
        return data[(static_cast<std::size_t>(y) * width + x) * bands + b];
    }
    double band_freq(int b) const { return f_start + b * df; }
    Image band_image(int b) const;
    void set_band(int b, const Image& img);
    void validate() const;
};

using Cube = std::variant<TimeDomainCube, SpectralCube>;

inline constexpr char kCubeMagic[8] = {'T', 'H', 'Z', 'C', 'U', 'B', 'E', '1'};
inline constexpr std::uint32_t kCubeVersion = 1;

// Binary cube file: 44-byte header (magic "THZCUBE1", u32 version, u32 kind,
// u32 H, u32 W, u32 axis length, two f64 axis fields) followed by the payload
// as 32-bit IEEE-754 little-endian floats in (row, col, axis) order.
// kind 0 = time (axis fields dt, 0), kind 1 = spectral (axis fields df, f_start).
void write_cube(const Cube& cube, const std::string& path);
Cube read_cube(const std::string& path);

SpectralCube read_spectral_cube(const std::string& path);
TimeDomainCube read_time_cube(const std::string& path);

// 8-bit grayscale PNG of one band, min-max normalized; a constant band maps
// to mid-gray (128). Rounding is half-up.
void export_band_png(const SpectralCube& cube, int band, const std::string& path);

// Per-band statistics CSV: header `band,freq_thz,min,max,mean`.
void export_band_stats_csv(const SpectralCube& cube, const std::string& path);

}  // namespace thz
