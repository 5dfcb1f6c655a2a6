#include "thz/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>

#include "thz/error.hpp"
#include "thz/png.hpp"
#include "thz/text.hpp"

namespace thz {
namespace {

std::string fmt_psnr(double v) {
    if (std::isinf(v)) return "inf";
    return fmt_double(v);
}

void check_same_shape(const SpectralCube& a, const SpectralCube& b, const char* what) {
    if (a.height != b.height || a.width != b.width || a.bands != b.bands)
        throw ShapeMismatchError(std::string(what) + ": cube shapes differ");
}

}  // namespace

double psnr(const Image& test, const Image& ref, double peak) {
    if (test.height != ref.height || test.width != ref.width)
        throw ShapeMismatchError("psnr: image shapes differ");
    if (!(peak > 0.0)) throw ConfigError("psnr: peak must be > 0");
    double mse = 0.0;
    for (std::size_t i = 0; i < test.data.size(); ++i) {
        const double d = test.data[i] - ref.data[i];
        mse += d * d;
    }
    mse /= static_cast<double>(test.data.size());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(peak * peak / mse);
}

double rse(const Image& proc, const Image& orig) {
    if (proc.height != orig.height || proc.width != orig.width)
        throw ShapeMismatchError("rse: image shapes differ");
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < proc.data.size(); ++i) {
        const double d = proc.data[i] - orig.data[i];
        num += d * d;
        den += orig.data[i] * orig.data[i];
    }
    if (den == 0.0) throw DegenerateDataError("rse: reference signal is all zero");
    return std::sqrt(num) / std::sqrt(den);
}

double rse(const SpectralCube& proc, const SpectralCube& orig) {
    check_same_shape(proc, orig, "rse");
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < proc.data.size(); ++i) {
        const double d = static_cast<double>(proc.data[i]) - orig.data[i];
        num += d * d;
        den += static_cast<double>(orig.data[i]) * orig.data[i];
    }
    if (den == 0.0) throw DegenerateDataError("rse: reference cube is all zero");
    return std::sqrt(num) / std::sqrt(den);
}

MetricReport report(const SpectralCube& restored, const SpectralCube& degraded, const SpectralCube* truth) {
    check_same_shape(restored, degraded, "report");
    if (truth != nullptr) check_same_shape(restored, *truth, "report");

    MetricReport rep;
    rep.has_truth = truth != nullptr;
    for (int b = 0; b < restored.bands; ++b) {
        Image r = restored.band_image(b);
        Image d = degraded.band_image(b);
        for (double& v : r.data) v *= 255.0;
        for (double& v : d.data) v *= 255.0;
        rep.band_freqs.push_back(restored.band_freq(b));
        rep.psnr_vs_degraded.push_back(psnr(r, d));
        rep.rse_per_band.push_back(rse(restored.band_image(b), degraded.band_image(b)));
        if (truth != nullptr) {
            Image t = truth->band_image(b);
            for (double& v : t.data) v *= 255.0;
            rep.psnr_vs_truth.push_back(psnr(r, t));
            rep.psnr_degraded_vs_truth.push_back(psnr(d, t));
        }
    }
    rep.rse_overall = rse(restored, degraded);
    return rep;
}

void write_metrics_csv(const MetricReport& rep, const std::string& path) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw IoError("metrics csv: cannot open for writing: " + path);
    f << "band,freq_thz,psnr_vs_degraded,psnr_vs_truth,psnr_degraded_vs_truth,rse\n";
    for (std::size_t b = 0; b < rep.band_freqs.size(); ++b) {
        f << b << ',' << fmt_double(rep.band_freqs[b]) << ',' << fmt_psnr(rep.psnr_vs_degraded[b]) << ',';
        if (rep.has_truth) f << fmt_psnr(rep.psnr_vs_truth[b]);
        f << ',';
        if (rep.has_truth) f << fmt_psnr(rep.psnr_degraded_vs_truth[b]);
        f << ',' << fmt_double(rep.rse_per_band[b]) << '\n';
    }
    f << "overall,,,,," << fmt_double(rep.rse_overall) << '\n';
    if (!f) throw IoError("metrics csv: write failed: " + path);
}

namespace {

struct Canvas {
    int w, h;
    std::vector<std::uint8_t> px;
    Canvas(int width, int height) : w(width), h(height), px(static_cast<std::size_t>(width) * height, 255) {}

    void set(int x, int y, std::uint8_t v) {
        if (x >= 0 && x < w && y >= 0 && y < h) px[static_cast<std::size_t>(y) * w + x] = v;
    }

    void line(int x0, int y0, int x1, int y1, std::uint8_t v) {
        const int dx = std::abs(x1 - x0), dy = -std::abs(y1 - y0);
        const int sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
        int err = dx + dy;
        while (true) {
            set(x0, y0, v);
            if (x0 == x1 && y0 == y1) break;
            const int e2 = 2 * err;
            if (e2 >= dy) {
                err += dy;
                x0 += sx;
            }
            if (e2 <= dx) {
                err += dx;
                y0 += sy;
            }
        }
    }
};

}  // namespace

void write_psnr_plot_png(const MetricReport& rep, const std::string& path) {
    if (rep.band_freqs.empty()) throw DegenerateDataError("psnr plot: empty report");
    const int W = 640, H = 400, left = 56, right = 16, top = 16, bottom = 40;
    Canvas canvas(W, H);

    std::vector<const std::vector<double>*> curves{&rep.psnr_vs_degraded};
    std::vector<std::uint8_t> shades{0};
    if (rep.has_truth) {
        curves.push_back(&rep.psnr_vs_truth);
        curves.push_back(&rep.psnr_degraded_vs_truth);
        shades.push_back(96);
        shades.push_back(176);
    }

    double lo = 1e300, hi = -1e300;
    for (const auto* c : curves)
        for (double v : *c)
            if (std::isfinite(v)) {
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
    if (!(lo < hi)) {
        lo = 0.0;
        hi = 1.0;
    }
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;

    const double f0 = rep.band_freqs.front(), f1 = rep.band_freqs.back();
    auto px = [&](double f) {
        const double t = f1 > f0 ? (f - f0) / (f1 - f0) : 0.5;
        return left + static_cast<int>(t * (W - left - right));
    };
    auto py = [&](double v) {
        const double clipped = std::isfinite(v) ? std::min(std::max(v, lo), hi) : hi;
        const double t = (clipped - lo) / (hi - lo);
        return H - bottom - static_cast<int>(t * (H - top - bottom));
    };

    canvas.line(left, top, left, H - bottom, 0);
    canvas.line(left, H - bottom, W - right, H - bottom, 0);
    // y ticks at quarter steps
    for (int i = 0; i <= 4; ++i) {
        const int y = py(lo + (hi - lo) * i / 4.0);
        canvas.line(left - 4, y, left, y, 0);
    }
    for (std::size_t ci = 0; ci < curves.size(); ++ci) {
        const auto& c = *curves[ci];
        for (std::size_t b = 1; b < c.size(); ++b)
            canvas.line(px(rep.band_freqs[b - 1]), py(c[b - 1]), px(rep.band_freqs[b]), py(c[b]), shades[ci]);
        for (std::size_t b = 0; b < c.size(); ++b) {
            const int x = px(rep.band_freqs[b]), y = py(c[b]);
            canvas.line(x - 1, y, x + 1, y, shades[ci]);
            canvas.line(x, y - 1, x, y + 1, shades[ci]);
        }
    }
    write_gray8_png(canvas.px, W, H, path);
}

}  // namespace thz
