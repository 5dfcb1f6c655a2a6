#include "thz/r2r.hpp"

#include <algorithm>
#include <cmath>

#include "thz/error.hpp"
#include "thz/rng.hpp"

namespace thz {
namespace {

// Linear-interpolated percentile over a copy of the values.
double percentile(std::vector<double> values, double q) {
    std::sort(values.begin(), values.end());
    if (values.size() == 1) return values[0];
    const double rank = q / 100.0 * static_cast<double>(values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(rank));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = rank - static_cast<double>(lo);
    return values[lo] + (values[hi] - values[lo]) * frac;
}

}  // namespace

void R2RConfig::validate() const {
    if (alpha == 0.0) throw ConfigError("r2r.alpha must be nonzero");
    if (!(background_q >= 0.0 && background_q <= 100.0))
        throw ConfigError("r2r.background_q must lie in [0, 100]");
    if (!(variance_floor > 0.0)) throw ConfigError("r2r.variance_floor must be > 0");
    if (!(noise_scale > 0.0)) throw ConfigError("r2r.noise_scale must be > 0");
}

Image estimate_sigma(const Image& y, const R2RConfig& cfg) {
    cfg.validate();
    if (y.height < 5 || y.width < 5) throw ShapeMismatchError("estimate_sigma: image must be at least 5x5");

    const Image smoothed = box_filter_reflect(y, 5);
    const double b = cfg.background_mode == R2RConfig::Background::Fixed
                         ? cfg.background_fixed
                         : percentile(smoothed.data, cfg.background_q);

    Image sigma(y.height, y.width);
    const double s2 = cfg.noise_scale * cfg.noise_scale;
    for (std::size_t i = 0; i < smoothed.data.size(); ++i)
        sigma.data[i] = std::sqrt(std::max(s2 * (smoothed.data[i] - b), cfg.variance_floor));
    return sigma;
}

R2RPair recorrupt(const Image& y, const Image& noise, const Image& sigma_map, double alpha) {
    if (noise.height != y.height || noise.width != y.width)
        throw ShapeMismatchError("recorrupt: noise shape mismatch");
    R2RPair pair;
    pair.y_hat = Image(y.height, y.width);
    pair.y_tilde = Image(y.height, y.width);
    pair.sigma_map = sigma_map;
    if (alpha == 1.0) {
        // y_tilde derived from y_hat so the pair midpoint stays pinned to y
        // at the rounding level.
        for (std::size_t i = 0; i < y.data.size(); ++i) {
            pair.y_hat.data[i] = y.data[i] + noise.data[i];
            pair.y_tilde.data[i] = 2.0 * y.data[i] - pair.y_hat.data[i];
        }
    } else {
        for (std::size_t i = 0; i < y.data.size(); ++i) {
            pair.y_hat.data[i] = y.data[i] + alpha * noise.data[i];
            pair.y_tilde.data[i] = y.data[i] - noise.data[i] / alpha;
        }
    }
    return pair;
}

R2RPair make_pair(const Image& y, const R2RConfig& cfg) {
    const Image sigma = estimate_sigma(y, cfg);
    Rng rng(cfg.seed);
    Image noise(y.height, y.width);
    for (std::size_t i = 0; i < noise.data.size(); ++i)
        noise.data[i] = sigma.data[i] * rng.next_gaussian();
    return recorrupt(y, noise, sigma, cfg.alpha);
}

PairStream::PairStream(std::vector<Image> images, const R2RConfig& cfg) : images_(std::move(images)), cfg_(cfg) {
    if (images_.empty()) throw ConfigError("pair stream: image list is empty");
    cfg_.validate();
    sigma_maps_.reserve(images_.size());
    for (const auto& img : images_) sigma_maps_.push_back(estimate_sigma(img, cfg_));
}

R2RPair PairStream::next() {
    const std::size_t idx = counter_ % images_.size();
    const Image& y = images_[idx];
    const Image& sigma = sigma_maps_[idx];
    Rng rng(derive_seed(cfg_.seed, counter_));
    ++counter_;
    Image noise(y.height, y.width);
    for (std::size_t i = 0; i < noise.data.size(); ++i)
        noise.data[i] = sigma.data[i] * rng.next_gaussian();
    return recorrupt(y, noise, sigma, cfg_.alpha);
}

std::vector<R2RPair> pair_stream(const std::vector<Image>& images, const R2RConfig& cfg, std::size_t count) {
    PairStream stream(images, cfg);
    std::vector<R2RPair> pairs;
    pairs.reserve(count);
    for (std::size_t i = 0; i < count; ++i) pairs.push_back(stream.next());
    return pairs;
}

}  // namespace thz
