#pragma once

#include <string>
#include <vector>

#include "thz/cube.hpp"
#include "thz/spectral.hpp"

namespace thz {

// Gaussian-beam focusing optics. c is fixed: 0.299792458 mm/ps, so the
// wavelength at f THz is c/f in millimetres.
struct OpticsConfig {
    double focal_length_mm = 100.0;
    double aperture_mm = 25.0;
    double pixel_pitch_mm = 0.5;
    static constexpr double c_mm_per_ps = 0.299792458;

    void validate() const;
};

// Discrete isotropic Gaussian blur kernel for one frequency. Values sum to 1;
// the layout is row-major over a size x size grid.
struct PsfKernel {
    int size = 1;
    std::vector<double> values{1.0};
    double sigma_px = 0.0;
    double freq_thz = 0.0;

    bool is_delta() const { return size == 1; }
};

enum class PsfBankMode { PerBand, BandMean };

// Beam waist w0 = 2*lambda*f/(pi*D) in mm.
double beam_waist(const OpticsConfig& optics, double freq_thz);

// Gaussian std dev sigma_f = w0/sqrt(2) in mm (about 1.8 lambda at f/D = 4).
double sigma_for(const OpticsConfig& optics, double freq_thz);

// Discrete kernel: side 2*ceil(truncation*sigma_px)+1, Gaussian sampled at
// pixel centers, renormalized. sigma_px below 0.3 collapses to a 1x1 delta.
PsfKernel make_kernel(const OpticsConfig& optics, double freq_thz, double truncation_sigmas = 3.0,
                      int max_kernel_size = 51);

// PerBand: one kernel per bin at the bin's center frequency (DC bin gets a
// delta). BandMean: a single kernel at (f_i + f_e)/2 shared by all bins.
std::vector<PsfKernel> make_bank(const OpticsConfig& optics, const SpectralCube& cube, PsfBankMode mode,
                                 const BandSelection* sel = nullptr, double truncation_sigmas = 3.0,
                                 int max_kernel_size = 51);

// Kernel grid as CSV rows (one row per kernel line) for inspection.
void dump_kernel_csv(const PsfKernel& kernel, const std::string& path);

}  // namespace thz
