#pragma once

#include <optional>
#include <string>
#include <vector>

#include "thz/cube.hpp"
#include "thz/image.hpp"

namespace thz {

// 10*log10(peak^2 / MSE) in dB; identical images give +infinity.
double psnr(const Image& test, const Image& ref, double peak = 255.0);

// sqrt(sum |proc - orig|^2) / sqrt(sum |orig|^2).
double rse(const Image& proc, const Image& orig);
double rse(const SpectralCube& proc, const SpectralCube& orig);

struct MetricReport {
    std::vector<double> band_freqs;
    std::vector<double> psnr_vs_degraded;       // restored vs degraded, per band
    std::vector<double> psnr_vs_truth;          // restored vs truth (synthetic mode)
    std::vector<double> psnr_degraded_vs_truth; // degraded vs truth (synthetic mode)
    std::vector<double> rse_per_band;           // restored vs degraded
    double rse_overall = 0.0;
    bool has_truth = false;
};

// Cube amplitudes are treated as [0, 1] normalized and mapped to the 0-255
// scale before PSNR. Truth is optional (measurement mode).
MetricReport report(const SpectralCube& restored, const SpectralCube& degraded,
                    const SpectralCube* truth = nullptr);

// CSV: `band,freq_thz,psnr_vs_degraded,psnr_vs_truth,psnr_degraded_vs_truth,rse`
// plus a final `overall` row carrying the cube-level RSE. Truth columns stay
// empty without a truth cube; infinite PSNR prints as `inf`.
void write_metrics_csv(const MetricReport& rep, const std::string& path);

// Grayscale line plot of the PSNR curves over frequency (truth-referenced
// curves included when present). Infinite values are clipped to the axis top.
void write_psnr_plot_png(const MetricReport& rep, const std::string& path);

}  // namespace thz
