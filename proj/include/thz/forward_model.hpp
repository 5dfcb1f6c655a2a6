#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "thz/cube.hpp"
#include "thz/psf.hpp"

namespace thz {

// Frequency-dependent observation noise: variance sigma0^2 + beta*f^p plus an
// optional signal-scaled term (poisson_gain * blurred amplitude).
struct NoiseParams {
    double sigma0_sq = 0.0;
    double beta = 0.0;
    double p = 2.0;
    double poisson_gain = 0.0;

    void validate() const;
};

double variance_at(const NoiseParams& noise, double freq_thz);

// Per-band amplitude profile of one phantom shape.
struct AmplitudeProfile {
    enum class Kind { Flat, Decay, Ramp };
    Kind kind = Kind::Flat;
    double a0 = 0.5;  // Flat: level; Decay: level at f=0; Ramp: level at f_start
    double a1 = 0.0;  // Decay: rate per THz; Ramp: level at the last band

    double value_at(double freq_thz, double f_start, double f_end) const;
};

struct Shape {
    enum class Kind { Disk, Rect };
    Kind kind = Kind::Disk;
    // Disk: cx, cy, radius. Rect: x0, y0, w, h.
    int p0 = 0, p1 = 0, p2 = 0, p3 = 0;
    AmplitudeProfile profile;
};

struct PhantomSpec {
    int height = 64;
    int width = 64;
    int bands = 16;
    double df = 0.126666666666666666;
    double f_start = 0.1;
    double background = 0.9;      // background amplitude at f = 0
    double absorption = 0.5;      // background decays as exp(-absorption * f)
    std::vector<Shape> shapes;
    std::uint64_t seed = 0;       // recorded in run manifests; shapes are deterministic

    void validate() const;
};

// Clean ground-truth cube: values in [0, 1], layout (row, col, band).
struct Phantom {
    int height = 0;
    int width = 0;
    int bands = 0;
    double df = 0.0;
    double f_start = 0.0;
    std::vector<float> data;

    float at(int y, int x, int b) const {
        return data[(static_cast<std::size_t>(y) * width + x) * bands + b];
    }
    double band_freq(int b) const { return f_start + b * df; }
    Image band_image(int b) const;
    SpectralCube to_cube() const;
};

Phantom make_phantom(const PhantomSpec& spec);

// Observation model: per band, blur with that band's kernel (reflect padding),
// add zero-mean Gaussian noise with variance sigma0^2 + beta*f^p +
// poisson_gain*blurred, clamp at zero. Noise streams derive from (seed, band).
SpectralCube degrade(const Phantom& phantom, const std::vector<PsfKernel>& psf_bank, const NoiseParams& noise,
                     std::uint64_t seed);

}  // namespace thz
