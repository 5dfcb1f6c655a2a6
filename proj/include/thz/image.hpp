#pragma once

#include <cstddef>
#include <vector>

namespace thz {

// Single-channel 64-bit image, row-major. The working currency of the
// restoration math; cubes hold 32-bit payloads and are lifted on demand.
struct Image {
    int height = 0;
    int width = 0;
    std::vector<double> data;

    Image() = default;
    Image(int h, int w, double fill = 0.0) : height(h), width(w), data(static_cast<std::size_t>(h) * w, fill) {}

    double& at(int y, int x) { return data[static_cast<std::size_t>(y) * width + x]; }
    double at(int y, int x) const { return data[static_cast<std::size_t>(y) * width + x]; }
    std::size_t size() const { return data.size(); }
};

// Reflect index into [0, n): ... 2 1 | 0 1 2 ... n-1 | n-2 n-3 ...
inline int reflect_index(int i, int n) {
    if (n == 1) return 0;
    const int period = 2 * n - 2;
    i %= period;
    if (i < 0) i += period;
    return i < n ? i : period - i;
}

// 2-D convolution with an odd square kernel and reflect padding.
// Kernel is applied as a correlation; all kernels here are symmetric.
Image convolve_reflect(const Image& img, const std::vector<double>& kernel, int ksize);

// 5x5 box filter with reflect padding (the H(.) smoother of the pair scheme).
Image box_filter_reflect(const Image& img, int ksize);

// s x s average-pool; requires s to divide both dimensions.
Image downsample_mean(const Image& img, int s);

double min_value(const Image& img);
double max_value(const Image& img);
double mean_value(const Image& img);

}  // namespace thz
