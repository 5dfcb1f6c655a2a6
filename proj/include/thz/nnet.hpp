#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "thz/image.hpp"
#include "thz/pca.hpp"
#include "thz/psf.hpp"
#include "thz/r2r.hpp"

namespace thz {

// Encoder-decoder shape shared by both networks: two 2x down/up stages,
// 3x3 convolutions with ReLU, skip concatenations, final 1x1 convolution.
// widths are the channel counts at full, half and quarter resolution.
struct ArchConfig {
    std::array<int, 3> widths{16, 32, 64};

    void validate() const;
    std::size_t params_per_net() const;
    std::size_t total_params() const { return 2 * params_per_net(); }
};

// One convolution's slice of the flat parameter vector.
struct LayerView {
    int in_ch = 0;
    int out_ch = 0;
    int k = 0;
    std::size_t w_off = 0;
    std::size_t b_off = 0;
    std::size_t w_count() const { return static_cast<std::size_t>(out_ch) * in_ch * k * k; }
};

// The eight convolutions of one network, offsets relative to the net base.
std::vector<LayerView> layer_views(const ArchConfig& arch);

// Both networks' parameters in one flat 64-bit vector. Order: denoiser then
// deblurrer; within a network, layers in forward order, weights before biases.
// Weight layout per layer: [out][in][ky][kx].
struct NetworkParams {
    ArchConfig arch;
    std::vector<double> values;

    std::size_t denoiser_offset() const { return 0; }
    std::size_t deblurrer_offset() const { return arch.params_per_net(); }
};

struct LossConfig {
    double xi = 1.0;                 // deblur-consistency weight
    double gamma = 0.01;             // Hessian penalty weight
    int downsample_factor = 1;       // 1 = identity measurement grid
    bool detach_deblur_input = false;  // stop deblur-path gradients at the denoiser output

    void validate() const;
};

struct TrainConfig {
    int batch_size = 16;
    int epochs = 100;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    int patch_size = 64;
    int steps_per_epoch = 0;  // 0 = one optimizer step per training image
    std::uint64_t seed = 0;

    void validate() const;
};

// Kaiming-initialized parameters: conv weights ~ N(0, 2/fan_in), biases zero.
NetworkParams init_params(const ArchConfig& arch, std::uint64_t seed);

struct ForwardResult {
    Image denoised;  // denoiser(input)
    Image restored;  // deblurrer(denoised)
};

// Pure forward pass; height and width must be divisible by 4.
ForwardResult forward(const NetworkParams& params, const Image& input);

// Mean over interior pixels of |z_xx| + |z_yy| + 2|z_xy| (unit-spaced second
// differences; boundary rows and columns excluded so affine images score 0).
double hessian_penalty(const Image& z);

struct LossBreakdown {
    double total = 0.0;
    double term1 = 0.0;  // ||denoiser(y_hat) - y_tilde||^2 / pixels
    double term2 = 0.0;  // ||down(restored (x) psf) - down(y_tilde)||^2 / pixels
    double term3 = 0.0;  // hessian penalty of restored
};

LossBreakdown loss(const NetworkParams& params, const R2RPair& pair, const PsfKernel& kernel,
                   const LossConfig& cfg);

// Reverse-mode gradient of the total loss for every parameter.
LossBreakdown backward(const NetworkParams& params, const R2RPair& pair, const PsfKernel& kernel,
                       const LossConfig& cfg, std::vector<double>& grad);

struct EpochStats {
    int epoch = 0;
    double loss = 0.0;
    double term1 = 0.0;
    double term2 = 0.0;
    double term3 = 0.0;
    double psnr = 0.0;  // denoised output vs network input, 0-255 scale
};

struct TrainResult {
    NetworkParams params;
    std::vector<EpochStats> history;
};

// Adam over random patches of recorrupted pairs. Deterministic for a fixed
// seed; aborts with guidance if the loss goes non-finite.
TrainResult train(const std::vector<Image>& images, const PsfKernel& kernel, const R2RConfig& r2r_cfg,
                  const LossConfig& loss_cfg, const TrainConfig& train_cfg, const ArchConfig& arch = {});

// Run every component image through the trained model; restored outputs
// (clamped to [0, 1]) replace the images, normalization metadata is kept.
// Shapes not divisible by 4 are reflect-padded and cropped back.
ComponentStack apply(const NetworkParams& params, const ComponentStack& components);

// History CSV: `epoch,loss,term1,term2,term3,psnr`.
void write_history_csv(const std::vector<EpochStats>& history, const std::string& path);

// Checkpoint: magic "THZNET01", u32 version, u32 widths[3], u64 parameter
// count, then the flat parameter vector as 64-bit little-endian doubles.
void save_checkpoint(const NetworkParams& params, const std::string& path);
NetworkParams load_checkpoint(const std::string& path);

}  // namespace thz
