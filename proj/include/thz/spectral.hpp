#pragma once

#include "thz/cube.hpp"

namespace thz {

enum class Window { None, Hann };

// Frequency band [f_initial, f_end] in THz; bin indices are resolved against
// a cube's axis with round-to-nearest (ties up).
struct BandSelection {
    double f_initial = 0.0;
    double f_end = 0.0;

    void validate() const;
};

// Per-pixel amplitude spectrum: magnitude of the unnormalized forward DFT over
// bins 0..floor(T/2). df = 1/(T*dt) in THz (dt in ps), f_start = 0.
SpectralCube to_spectrum(const TimeDomainCube& cube, Window window = Window::None);

// Resolved inclusive bin range for a selection on a cube's frequency axis.
std::pair<int, int> resolve_band_indices(const SpectralCube& cube, const BandSelection& sel);

// Sub-cube over [f_initial, f_end] with updated axis metadata.
SpectralCube select_bands(const SpectralCube& cube, const BandSelection& sel);

// The frequency the 2-D restoration kernel is built at: (f_i + f_e) / 2.
double band_center(const BandSelection& sel);

}  // namespace thz
