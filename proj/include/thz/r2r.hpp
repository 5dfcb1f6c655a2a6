#pragma once

#include <cstdint>
#include <vector>

#include "thz/image.hpp"

namespace thz {

// Recorrupted-pair generation. D = alpha * I; the per-pixel noise variance is
// noise_scale^2 * (5x5 box-smoothed image minus background), floored at
// variance_floor.
struct R2RConfig {
    double alpha = 1.0;
    enum class Background { Percentile, Fixed };
    Background background_mode = Background::Percentile;
    double background_q = 1.0;    // percentile in [0, 100]
    double background_fixed = 0.0;
    double variance_floor = 1e-6;
    double noise_scale = 1.0;     // training noise level knob (1 = raw estimate)
    std::uint64_t seed = 0;

    void validate() const;
};

struct R2RPair {
    Image y_hat;      // y + alpha * n
    Image y_tilde;    // y - n / alpha
    Image sigma_map;  // per-pixel std dev used for n
};

// Per-pixel noise std dev: sqrt(max(noise_scale^2 * (H(y) - b), variance_floor)).
Image estimate_sigma(const Image& y, const R2RConfig& cfg);

// Draw n ~ N(0, diag(sigma_map^2)) and recorrupt. Deterministic per cfg.seed.
R2RPair make_pair(const Image& y, const R2RConfig& cfg);

// Recorruption with caller-supplied noise (test hook and worker for make_pair).
R2RPair recorrupt(const Image& y, const Image& noise, const Image& sigma_map, double alpha);

// Deterministic pair sequence cycling the image list, advancing the noise seed
// per pair. Not safe for concurrent pulls from one instance.
class PairStream {
  public:
    PairStream(std::vector<Image> images, const R2RConfig& cfg);

    R2RPair next();
    // Index of the image the next pair will be drawn from.
    std::size_t next_image_index() const { return counter_ % images_.size(); }
    std::uint64_t pairs_drawn() const { return counter_; }

  private:
    std::vector<Image> images_;
    std::vector<Image> sigma_maps_;
    R2RConfig cfg_;
    std::uint64_t counter_ = 0;
};

std::vector<R2RPair> pair_stream(const std::vector<Image>& images, const R2RConfig& cfg, std::size_t count);

}  // namespace thz
