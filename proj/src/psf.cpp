#include "thz/psf.hpp"

#include <cmath>
#include <fstream>

#include "thz/error.hpp"
#include "thz/text.hpp"

namespace thz {

namespace {
constexpr double kPi = 3.141592653589793238462643383279;
constexpr double kDeltaSigmaPx = 0.3;
}  // namespace

void OpticsConfig::validate() const {
    if (!(focal_length_mm > 0.0)) throw ConfigError("optics.focal_length must be > 0");
    if (!(aperture_mm > 0.0)) throw ConfigError("optics.aperture must be > 0");
    if (!(pixel_pitch_mm > 0.0)) throw ConfigError("optics.pixel_pitch must be > 0");
}

double beam_waist(const OpticsConfig& optics, double freq_thz) {
    optics.validate();
    if (!(freq_thz > 0.0)) throw ConfigError("beam_waist: frequency must be > 0");
    const double lambda_mm = OpticsConfig::c_mm_per_ps / freq_thz;
    return 2.0 * lambda_mm * optics.focal_length_mm / (kPi * optics.aperture_mm);
}

double sigma_for(const OpticsConfig& optics, double freq_thz) {
    return beam_waist(optics, freq_thz) / std::sqrt(2.0);
}

PsfKernel make_kernel(const OpticsConfig& optics, double freq_thz, double truncation_sigmas,
                      int max_kernel_size) {
    if (!(truncation_sigmas > 0.0)) throw ConfigError("psf.truncation must be > 0");
    const double sigma_px = sigma_for(optics, freq_thz) / optics.pixel_pitch_mm;

    PsfKernel k;
    k.freq_thz = freq_thz;
    k.sigma_px = sigma_px;
    if (sigma_px < kDeltaSigmaPx) {
        // Sampling a Gaussian far below pixel pitch aliases; emit a delta.
        k.size = 1;
        k.values = {1.0};
        return k;
    }

    const int radius = static_cast<int>(std::ceil(truncation_sigmas * sigma_px));
    const int size = 2 * radius + 1;
    if (size > max_kernel_size)
        throw ConfigError("psf: kernel side " + std::to_string(size) + " exceeds the maximum " +
                          std::to_string(max_kernel_size) + "; use a coarser pixel pitch or lower truncation");

    k.size = size;
    k.values.assign(static_cast<std::size_t>(size) * size, 0.0);
    const double inv_two_sigma_sq = 1.0 / (2.0 * sigma_px * sigma_px);
    double sum = 0.0;
    for (int dy = -radius; dy <= radius; ++dy) {
        for (int dx = -radius; dx <= radius; ++dx) {
            const double v = std::exp(-(static_cast<double>(dx) * dx + static_cast<double>(dy) * dy) *
                                      inv_two_sigma_sq);
            k.values[static_cast<std::size_t>(dy + radius) * size + (dx + radius)] = v;
            sum += v;
        }
    }
    for (double& v : k.values) v /= sum;
    return k;
}

std::vector<PsfKernel> make_bank(const OpticsConfig& optics, const SpectralCube& cube, PsfBankMode mode,
                                 const BandSelection* sel, double truncation_sigmas, int max_kernel_size) {
    cube.validate();
    std::vector<PsfKernel> bank;
    if (mode == PsfBankMode::PerBand) {
        bank.reserve(static_cast<std::size_t>(cube.bands));
        for (int b = 0; b < cube.bands; ++b) {
            const double f = cube.band_freq(b);
            if (f <= 0.0) {
                // Blur diverges as f -> 0; the DC band passes through unblurred.
                PsfKernel delta;
                delta.freq_thz = f;
                bank.push_back(delta);
            } else {
                bank.push_back(make_kernel(optics, f, truncation_sigmas, max_kernel_size));
            }
        }
        return bank;
    }

    double f;
    if (sel != nullptr) {
        f = band_center(*sel);
    } else if (cube.bands == 1) {
        f = cube.f_start;
    } else {
        f = 0.5 * (cube.f_start + cube.band_freq(cube.bands - 1));
    }
    if (f <= 0.0) {
        PsfKernel delta;
        delta.freq_thz = f;
        bank.push_back(delta);
    } else {
        bank.push_back(make_kernel(optics, f, truncation_sigmas, max_kernel_size));
    }
    return bank;
}

void dump_kernel_csv(const PsfKernel& kernel, const std::string& path) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw IoError("psf dump: cannot open for writing: " + path);
    f << "# freq_thz=" << fmt_double(kernel.freq_thz) << " sigma_px=" << fmt_double(kernel.sigma_px)
      << " size=" << kernel.size << '\n';
    for (int y = 0; y < kernel.size; ++y) {
        for (int x = 0; x < kernel.size; ++x) {
            if (x) f << ',';
            f << fmt_double_full(kernel.values[static_cast<std::size_t>(y) * kernel.size + x]);
        }
        f << '\n';
    }
    if (!f) throw IoError("psf dump: write failed: " + path);
}

}  // namespace thz
