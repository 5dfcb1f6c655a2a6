#include "thz/image.hpp"

#include <algorithm>
#include <stdexcept>

#include "thz/error.hpp"

namespace thz {

Image convolve_reflect(const Image& img, const std::vector<double>& kernel, int ksize) {
    if (ksize < 1 || ksize % 2 == 0) throw Error("convolve_reflect: kernel side must be odd and >= 1");
    if (static_cast<std::size_t>(ksize) * ksize != kernel.size())
        throw Error("convolve_reflect: kernel size mismatch");
    if (ksize > img.height || ksize > img.width)
        throw ShapeMismatchError("convolve_reflect: kernel larger than image");

    const int r = ksize / 2;
    const int H = img.height, W = img.width;

    // Pad once; the hot loop then runs without bounds checks.
    Image padded(H + 2 * r, W + 2 * r);
    for (int y = 0; y < H + 2 * r; ++y) {
        const int sy = reflect_index(y - r, H);
        for (int x = 0; x < W + 2 * r; ++x) {
            padded.at(y, x) = img.at(sy, reflect_index(x - r, W));
        }
    }

    Image out(H, W);
    for (int y = 0; y < H; ++y) {
        for (int x = 0; x < W; ++x) {
            double acc = 0.0;
            const double* k = kernel.data();
            for (int ky = 0; ky < ksize; ++ky) {
                const double* row = &padded.at(y + ky, x);
                for (int kx = 0; kx < ksize; ++kx) acc += k[ky * ksize + kx] * row[kx];
            }
            out.at(y, x) = acc;
        }
    }
    return out;
}

Image box_filter_reflect(const Image& img, int ksize) {
    std::vector<double> kernel(static_cast<std::size_t>(ksize) * ksize,
                               1.0 / (static_cast<double>(ksize) * ksize));
    return convolve_reflect(img, kernel, ksize);
}

Image downsample_mean(const Image& img, int s) {
    if (s < 1) throw Error("downsample_mean: factor must be >= 1");
    if (s == 1) return img;
    if (img.height % s != 0 || img.width % s != 0)
        throw ShapeMismatchError("downsample_mean: factor must divide image dimensions");
    Image out(img.height / s, img.width / s);
    const double inv = 1.0 / (static_cast<double>(s) * s);
    for (int y = 0; y < out.height; ++y)
        for (int x = 0; x < out.width; ++x) {
            double acc = 0.0;
            for (int dy = 0; dy < s; ++dy)
                for (int dx = 0; dx < s; ++dx) acc += img.at(y * s + dy, x * s + dx);
            out.at(y, x) = acc * inv;
        }
    return out;
}

double min_value(const Image& img) { return *std::min_element(img.data.begin(), img.data.end()); }
double max_value(const Image& img) { return *std::max_element(img.data.begin(), img.data.end()); }

double mean_value(const Image& img) {
    double acc = 0.0;
    for (double v : img.data) acc += v;
    return acc / static_cast<double>(img.data.size());
}

}  // namespace thz
