#include "thz/nnet.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <thread>

#include "thz/error.hpp"
#include "thz/metrics.hpp"
#include "thz/rng.hpp"
#include "thz/text.hpp"

namespace thz {

namespace {

// ---------------------------------------------------------------------------
// Tensors and primitive layers
// ---------------------------------------------------------------------------

struct Tensor {
    int ch = 0, h = 0, w = 0;
    std::vector<double> v;

    Tensor() = default;
    Tensor(int c, int hh, int ww) : ch(c), h(hh), w(ww), v(static_cast<std::size_t>(c) * hh * ww, 0.0) {}

    void resize(int c, int hh, int ww) {
        ch = c;
        h = hh;
        w = ww;
        v.assign(static_cast<std::size_t>(c) * hh * ww, 0.0);
    }
    double* plane(int c) { return v.data() + static_cast<std::size_t>(c) * h * w; }
    const double* plane(int c) const { return v.data() + static_cast<std::size_t>(c) * h * w; }
};

Tensor from_image(const Image& img) {
    Tensor t(1, img.height, img.width);
    t.v = img.data;
    return t;
}

Image to_image(const Tensor& t) {
    Image img(t.h, t.w);
    img.data = t.v;
    return img;
}

void pad_reflect(const Tensor& src, int r, Tensor& dst) {
    dst.resize(src.ch, src.h + 2 * r, src.w + 2 * r);
    for (int c = 0; c < src.ch; ++c) {
        const double* sp = src.plane(c);
        double* dp = dst.plane(c);
        for (int y = 0; y < dst.h; ++y) {
            const int sy = reflect_index(y - r, src.h);
            for (int x = 0; x < dst.w; ++x)
                dp[static_cast<std::size_t>(y) * dst.w + x] =
                    sp[static_cast<std::size_t>(sy) * src.w + reflect_index(x - r, src.w)];
        }
    }
}

// Scatter a padded-buffer gradient back through the reflection map.
void fold_padded(const Tensor& grad_padded, int r, Tensor& grad) {
    grad.resize(grad_padded.ch, grad_padded.h - 2 * r, grad_padded.w - 2 * r);
    for (int c = 0; c < grad.ch; ++c) {
        const double* gp = grad_padded.plane(c);
        double* g = grad.plane(c);
        for (int y = 0; y < grad_padded.h; ++y) {
            const int sy = reflect_index(y - r, grad.h);
            for (int x = 0; x < grad_padded.w; ++x)
                g[static_cast<std::size_t>(sy) * grad.w + reflect_index(x - r, grad.w)] +=
                    gp[static_cast<std::size_t>(y) * grad_padded.w + x];
        }
    }
}

// Convolution with reflect padding, same spatial size out.
void conv_forward(const Tensor& in, const LayerView& lv, const double* wp, const double* bp, Tensor& padded,
                  Tensor& out) {
    const int r = lv.k / 2;
    pad_reflect(in, r, padded);
    out.resize(lv.out_ch, in.h, in.w);
    const int H = in.h, W = in.w, PW = padded.w;
    for (int oc = 0; oc < lv.out_ch; ++oc) {
        double* op = out.plane(oc);
        const double bias = bp[oc];
        for (std::size_t i = 0; i < static_cast<std::size_t>(H) * W; ++i) op[i] = bias;
        for (int ic = 0; ic < lv.in_ch; ++ic) {
            const double* pp = padded.plane(ic);
            const double* wbase = wp + (static_cast<std::size_t>(oc) * lv.in_ch + ic) * lv.k * lv.k;
            for (int ky = 0; ky < lv.k; ++ky) {
                for (int kx = 0; kx < lv.k; ++kx) {
                    const double s = wbase[ky * lv.k + kx];
                    for (int y = 0; y < H; ++y) {
                        const double* srow = pp + static_cast<std::size_t>(y + ky) * PW + kx;
                        double* orow = op + static_cast<std::size_t>(y) * W;
                        for (int x = 0; x < W; ++x) orow[x] += s * srow[x];
                    }
                }
            }
        }
    }
}

// Gradients w.r.t. weights, biases, and (optionally) the layer input.
// `padded` must be the buffer produced by the matching conv_forward call.
void conv_backward(const Tensor& padded, const LayerView& lv, const double* wp, const Tensor& gout,
                   double* gw, double* gb, Tensor* grad_in, Tensor& grad_padded_scratch) {
    const int r = lv.k / 2;
    const int H = gout.h, W = gout.w, PW = padded.w;

    for (int oc = 0; oc < lv.out_ch; ++oc) {
        const double* gp = gout.plane(oc);
        double acc_b = 0.0;
        for (std::size_t i = 0; i < static_cast<std::size_t>(H) * W; ++i) acc_b += gp[i];
        gb[oc] += acc_b;
        for (int ic = 0; ic < lv.in_ch; ++ic) {
            const double* pp = padded.plane(ic);
            double* wg = gw + (static_cast<std::size_t>(oc) * lv.in_ch + ic) * lv.k * lv.k;
            for (int ky = 0; ky < lv.k; ++ky) {
                for (int kx = 0; kx < lv.k; ++kx) {
                    double acc = 0.0;
                    for (int y = 0; y < H; ++y) {
                        const double* srow = pp + static_cast<std::size_t>(y + ky) * PW + kx;
                        const double* grow = gp + static_cast<std::size_t>(y) * W;
                        for (int x = 0; x < W; ++x) acc += srow[x] * grow[x];
                    }
                    wg[ky * lv.k + kx] += acc;
                }
            }
        }
    }

    if (grad_in == nullptr) return;
    grad_padded_scratch.resize(lv.in_ch, padded.h, padded.w);
    for (int oc = 0; oc < lv.out_ch; ++oc) {
        const double* gp = gout.plane(oc);
        for (int ic = 0; ic < lv.in_ch; ++ic) {
            double* gpp = grad_padded_scratch.plane(ic);
            const double* wbase = wp + (static_cast<std::size_t>(oc) * lv.in_ch + ic) * lv.k * lv.k;
            for (int ky = 0; ky < lv.k; ++ky) {
                for (int kx = 0; kx < lv.k; ++kx) {
                    const double s = wbase[ky * lv.k + kx];
                    for (int y = 0; y < H; ++y) {
                        const double* grow = gp + static_cast<std::size_t>(y) * W;
                        double* prow = gpp + static_cast<std::size_t>(y + ky) * PW + kx;
                        for (int x = 0; x < W; ++x) prow[x] += s * grow[x];
                    }
                }
            }
        }
    }
    fold_padded(grad_padded_scratch, r, *grad_in);
}

void relu_forward(const Tensor& pre, Tensor& out) {
    out.resize(pre.ch, pre.h, pre.w);
    for (std::size_t i = 0; i < pre.v.size(); ++i) out.v[i] = pre.v[i] > 0.0 ? pre.v[i] : 0.0;
}

void relu_backward(const Tensor& pre, Tensor& grad) {
    for (std::size_t i = 0; i < pre.v.size(); ++i)
        if (!(pre.v[i] > 0.0)) grad.v[i] = 0.0;
}

void avgpool2_forward(const Tensor& in, Tensor& out) {
    out.resize(in.ch, in.h / 2, in.w / 2);
    for (int c = 0; c < in.ch; ++c) {
        const double* ip = in.plane(c);
        double* op = out.plane(c);
        for (int y = 0; y < out.h; ++y)
            for (int x = 0; x < out.w; ++x) {
                const std::size_t base = static_cast<std::size_t>(2 * y) * in.w + 2 * x;
                op[static_cast<std::size_t>(y) * out.w + x] =
                    0.25 * (ip[base] + ip[base + 1] + ip[base + in.w] + ip[base + in.w + 1]);
            }
    }
}

void avgpool2_backward(const Tensor& gout, Tensor& gin) {
    gin.resize(gout.ch, gout.h * 2, gout.w * 2);
    for (int c = 0; c < gout.ch; ++c) {
        const double* gp = gout.plane(c);
        double* ip = gin.plane(c);
        for (int y = 0; y < gout.h; ++y)
            for (int x = 0; x < gout.w; ++x) {
                const double g = 0.25 * gp[static_cast<std::size_t>(y) * gout.w + x];
                const std::size_t base = static_cast<std::size_t>(2 * y) * gin.w + 2 * x;
                ip[base] = g;
                ip[base + 1] = g;
                ip[base + gin.w] = g;
                ip[base + gin.w + 1] = g;
            }
    }
}

void upsample2_forward(const Tensor& in, Tensor& out) {
    out.resize(in.ch, in.h * 2, in.w * 2);
    for (int c = 0; c < in.ch; ++c) {
        const double* ip = in.plane(c);
        double* op = out.plane(c);
        for (int y = 0; y < out.h; ++y) {
            const double* irow = ip + static_cast<std::size_t>(y / 2) * in.w;
            double* orow = op + static_cast<std::size_t>(y) * out.w;
            for (int x = 0; x < out.w; ++x) orow[x] = irow[x / 2];
        }
    }
}

void upsample2_backward(const Tensor& gout, Tensor& gin) {
    gin.resize(gout.ch, gout.h / 2, gout.w / 2);
    for (int c = 0; c < gout.ch; ++c) {
        const double* gp = gout.plane(c);
        double* ip = gin.plane(c);
        for (int y = 0; y < gout.h; ++y) {
            const double* grow = gp + static_cast<std::size_t>(y) * gout.w;
            double* irow = ip + static_cast<std::size_t>(y / 2) * gin.w;
            for (int x = 0; x < gout.w; ++x) irow[x / 2] += grow[x];
        }
    }
}

void concat_forward(const Tensor& a, const Tensor& b, Tensor& out) {
    out.resize(a.ch + b.ch, a.h, a.w);
    std::copy(a.v.begin(), a.v.end(), out.v.begin());
    std::copy(b.v.begin(), b.v.end(), out.v.begin() + static_cast<std::ptrdiff_t>(a.v.size()));
}

void concat_backward(const Tensor& gout, int a_ch, Tensor& ga, Tensor& gb) {
    ga.resize(a_ch, gout.h, gout.w);
    gb.resize(gout.ch - a_ch, gout.h, gout.w);
    std::copy(gout.v.begin(), gout.v.begin() + static_cast<std::ptrdiff_t>(ga.v.size()), ga.v.begin());
    std::copy(gout.v.begin() + static_cast<std::ptrdiff_t>(ga.v.size()), gout.v.end(), gb.v.begin());
}

// ---------------------------------------------------------------------------
// One encoder-decoder network
// ---------------------------------------------------------------------------

struct UNetCache {
    Tensor x;
    Tensor pre0, a0, p1, pre1, a1, p2, pre2, a2;
    Tensor u1, pre_d1a, b1, k1, pre_d1b, b2;
    Tensor u2, pre_d0a, d1, k2, pre_d0b, d2;
    Tensor out;
    // padded inputs kept per conv layer for the weight gradients
    std::array<Tensor, 8> padded;
    Tensor scratch;
};

void unet_forward(const ArchConfig& arch, const double* pv, const Image& input, UNetCache& c) {
    const auto lvs = layer_views(arch);
    auto W = [&](int i) { return pv + lvs[i].w_off; };
    auto B = [&](int i) { return pv + lvs[i].b_off; };

    c.x = from_image(input);
    conv_forward(c.x, lvs[0], W(0), B(0), c.padded[0], c.pre0);
    relu_forward(c.pre0, c.a0);
    avgpool2_forward(c.a0, c.p1);
    conv_forward(c.p1, lvs[1], W(1), B(1), c.padded[1], c.pre1);
    relu_forward(c.pre1, c.a1);
    avgpool2_forward(c.a1, c.p2);
    conv_forward(c.p2, lvs[2], W(2), B(2), c.padded[2], c.pre2);
    relu_forward(c.pre2, c.a2);

    upsample2_forward(c.a2, c.u1);
    conv_forward(c.u1, lvs[3], W(3), B(3), c.padded[3], c.pre_d1a);
    relu_forward(c.pre_d1a, c.b1);
    concat_forward(c.b1, c.a1, c.k1);
    conv_forward(c.k1, lvs[4], W(4), B(4), c.padded[4], c.pre_d1b);
    relu_forward(c.pre_d1b, c.b2);

    upsample2_forward(c.b2, c.u2);
    conv_forward(c.u2, lvs[5], W(5), B(5), c.padded[5], c.pre_d0a);
    relu_forward(c.pre_d0a, c.d1);
    concat_forward(c.d1, c.a0, c.k2);
    conv_forward(c.k2, lvs[6], W(6), B(6), c.padded[6], c.pre_d0b);
    relu_forward(c.pre_d0b, c.d2);

    conv_forward(c.d2, lvs[7], W(7), B(7), c.padded[7], c.out);
}

// grad_input may be null when the chain ends at this network's input.
void unet_backward(const ArchConfig& arch, const double* pv, UNetCache& c, const Tensor& g_out, double* gv,
                   Tensor* grad_input) {
    const auto lvs = layer_views(arch);
    auto W = [&](int i) { return pv + lvs[i].w_off; };
    auto GW = [&](int i) { return gv + lvs[i].w_off; };
    auto GB = [&](int i) { return gv + lvs[i].b_off; };

    Tensor g_d2, g_k2, g_d1, g_a0_dec, g_u2, g_b2, g_k1, g_b1, g_a1_dec, g_u1, g_a2, g_p2, g_a1, g_p1, g_a0;

    conv_backward(c.padded[7], lvs[7], W(7), g_out, GW(7), GB(7), &g_d2, c.scratch);
    relu_backward(c.pre_d0b, g_d2);
    conv_backward(c.padded[6], lvs[6], W(6), g_d2, GW(6), GB(6), &g_k2, c.scratch);
    concat_backward(g_k2, arch.widths[0], g_d1, g_a0_dec);
    relu_backward(c.pre_d0a, g_d1);
    conv_backward(c.padded[5], lvs[5], W(5), g_d1, GW(5), GB(5), &g_u2, c.scratch);
    upsample2_backward(g_u2, g_b2);
    relu_backward(c.pre_d1b, g_b2);
    conv_backward(c.padded[4], lvs[4], W(4), g_b2, GW(4), GB(4), &g_k1, c.scratch);
    concat_backward(g_k1, arch.widths[1], g_b1, g_a1_dec);
    relu_backward(c.pre_d1a, g_b1);
    conv_backward(c.padded[3], lvs[3], W(3), g_b1, GW(3), GB(3), &g_u1, c.scratch);
    upsample2_backward(g_u1, g_a2);
    relu_backward(c.pre2, g_a2);
    conv_backward(c.padded[2], lvs[2], W(2), g_a2, GW(2), GB(2), &g_p2, c.scratch);

    avgpool2_backward(g_p2, g_a1);
    for (std::size_t i = 0; i < g_a1.v.size(); ++i) g_a1.v[i] += g_a1_dec.v[i];
    relu_backward(c.pre1, g_a1);
    conv_backward(c.padded[1], lvs[1], W(1), g_a1, GW(1), GB(1), &g_p1, c.scratch);

    avgpool2_backward(g_p1, g_a0);
    for (std::size_t i = 0; i < g_a0.v.size(); ++i) g_a0.v[i] += g_a0_dec.v[i];
    relu_backward(c.pre0, g_a0);
    conv_backward(c.padded[0], lvs[0], W(0), g_a0, GW(0), GB(0), grad_input, c.scratch);
}

// ---------------------------------------------------------------------------
// Loss pieces
// ---------------------------------------------------------------------------

double mse(const Image& a, const Image& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        const double d = a.data[i] - b.data[i];
        acc += d * d;
    }
    return acc / static_cast<double>(a.data.size());
}

// d mse / d a, written into grad (image-shaped tensor).
void mse_backward(const Image& a, const Image& b, double weight, Tensor& grad) {
    grad.resize(1, a.height, a.width);
    const double s = 2.0 * weight / static_cast<double>(a.data.size());
    for (std::size_t i = 0; i < a.data.size(); ++i) grad.v[i] = s * (a.data[i] - b.data[i]);
}

void downsample_backward(const Image& gout, int s, Tensor& gin) {
    gin.resize(1, gout.height * s, gout.width * s);
    const double inv = 1.0 / (static_cast<double>(s) * s);
    for (int y = 0; y < gout.height; ++y)
        for (int x = 0; x < gout.width; ++x) {
            const double g = gout.at(y, x) * inv;
            for (int dy = 0; dy < s; ++dy)
                for (int dx = 0; dx < s; ++dx)
                    gin.v[static_cast<std::size_t>(y * s + dy) * gin.w + (x * s + dx)] = g;
        }
}

// Gradient of image (x) kernel w.r.t. the image, under reflect padding:
// scatter each grad_out tap back through the reflected source index.
void blur_backward(const Image& gout, const PsfKernel& kernel, Tensor& gin) {
    gin.resize(1, gout.height, gout.width);
    if (kernel.is_delta()) {
        gin.v = gout.data;
        return;
    }
    const int r = kernel.size / 2;
    const int H = gout.height, W = gout.width;
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
            const double g = gout.at(y, x);
            if (g == 0.0) continue;
            for (int ky = 0; ky < kernel.size; ++ky) {
                const int sy = reflect_index(y + ky - r, H);
                for (int kx = 0; kx < kernel.size; ++kx) {
                    const int sx = reflect_index(x + kx - r, W);
                    gin.v[static_cast<std::size_t>(sy) * W + sx] +=
                        g * kernel.values[static_cast<std::size_t>(ky) * kernel.size + kx];
                }
            }
        }
}

inline double sign_of(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

// Accumulates into an already-sized image-shaped gradient tensor.
void hessian_backward_accum(const Image& z, double weight, Tensor& grad) {
    const int H = z.height, W = z.width;
    const double s = weight / (static_cast<double>(H - 2) * (W - 2));
    auto add = [&](int y, int x, double v) { grad.v[static_cast<std::size_t>(y) * W + x] += v; };
    for (int y = 1; y < H - 1; ++y) {
        for (int x = 1; x < W - 1; ++x) {
            const double zxx = z.at(y, x - 1) - 2.0 * z.at(y, x) + z.at(y, x + 1);
            const double zyy = z.at(y - 1, x) - 2.0 * z.at(y, x) + z.at(y + 1, x);
            const double zxy =
                0.25 * (z.at(y + 1, x + 1) - z.at(y + 1, x - 1) - z.at(y - 1, x + 1) + z.at(y - 1, x - 1));
            const double s1 = s * sign_of(zxx);
            if (s1 != 0.0) {
                add(y, x - 1, s1);
                add(y, x, -2.0 * s1);
                add(y, x + 1, s1);
            }
            const double s2 = s * sign_of(zyy);
            if (s2 != 0.0) {
                add(y - 1, x, s2);
                add(y, x, -2.0 * s2);
                add(y + 1, x, s2);
            }
            const double s3 = 2.0 * s * sign_of(zxy) * 0.25;
            if (s3 != 0.0) {
                add(y + 1, x + 1, s3);
                add(y + 1, x - 1, -s3);
                add(y - 1, x + 1, -s3);
                add(y - 1, x - 1, s3);
            }
        }
    }
}

struct LossWork {
    UNetCache den;
    UNetCache deb;
    Image denoised;
    Image restored;
    Image blurred;
    Image blurred_down;
    Image target_down;
};

void check_forward_shape(const Image& input) {
    if (input.height < 4 || input.width < 4 || input.height % 4 != 0 || input.width % 4 != 0)
        throw ShapeMismatchError("nnet: image height and width must be divisible by 4");
}

LossBreakdown loss_forward(const NetworkParams& params, const R2RPair& pair, const PsfKernel& kernel,
                           const LossConfig& cfg, LossWork& work) {
    cfg.validate();
    params.arch.validate();
    check_forward_shape(pair.y_hat);
    if (pair.y_tilde.height != pair.y_hat.height || pair.y_tilde.width != pair.y_hat.width)
        throw ShapeMismatchError("nnet loss: pair shapes differ");
    if (kernel.size > pair.y_hat.height || kernel.size > pair.y_hat.width)
        throw ShapeMismatchError("nnet loss: psf kernel larger than the patch");
    if (pair.y_hat.height % cfg.downsample_factor != 0 || pair.y_hat.width % cfg.downsample_factor != 0)
        throw ShapeMismatchError("nnet loss: downsample factor must divide the patch size");

    unet_forward(params.arch, params.values.data() + params.denoiser_offset(), pair.y_hat, work.den);
    work.denoised = to_image(work.den.out);
    unet_forward(params.arch, params.values.data() + params.deblurrer_offset(), work.denoised, work.deb);
    work.restored = to_image(work.deb.out);

    work.blurred = kernel.is_delta() ? work.restored : convolve_reflect(work.restored, kernel.values, kernel.size);
    work.blurred_down = downsample_mean(work.blurred, cfg.downsample_factor);
    work.target_down = downsample_mean(pair.y_tilde, cfg.downsample_factor);

    LossBreakdown out;
    out.term1 = mse(work.denoised, pair.y_tilde);
    out.term2 = mse(work.blurred_down, work.target_down);
    out.term3 = hessian_penalty(work.restored);
    out.total = out.term1 + cfg.xi * out.term2 + cfg.gamma * out.term3;
    return out;
}

void loss_backward_from_work(const NetworkParams& params, const R2RPair& pair, const PsfKernel& kernel,
                             const LossConfig& cfg, LossWork& work, std::vector<double>& grad) {
    grad.assign(params.values.size(), 0.0);

    // d total / d restored: deblur-consistency term plus the Hessian penalty.
    Tensor g_down, g_restored;
    mse_backward(work.blurred_down, work.target_down, cfg.xi, g_down);
    downsample_backward(to_image(g_down), cfg.downsample_factor, g_restored);
    Tensor g_restored_full;
    blur_backward(to_image(g_restored), kernel, g_restored_full);
    hessian_backward_accum(work.restored, cfg.gamma, g_restored_full);

    Tensor g_denoised_from_deb;
    unet_backward(params.arch, params.values.data() + params.deblurrer_offset(), work.deb, g_restored_full,
                  grad.data() + params.deblurrer_offset(),
                  cfg.detach_deblur_input ? nullptr : &g_denoised_from_deb);

    Tensor g_denoised;
    mse_backward(work.denoised, pair.y_tilde, 1.0, g_denoised);
    if (!cfg.detach_deblur_input)
        for (std::size_t i = 0; i < g_denoised.v.size(); ++i) g_denoised.v[i] += g_denoised_from_deb.v[i];

    unet_backward(params.arch, params.values.data() + params.denoiser_offset(), work.den, g_denoised,
                  grad.data() + params.denoiser_offset(), nullptr);
}

}  // namespace

// ---------------------------------------------------------------------------
// Public surface
// ---------------------------------------------------------------------------

void ArchConfig::validate() const {
    for (int w : widths)
        if (w < 1) throw ConfigError("arch widths must be >= 1");
}

std::vector<LayerView> layer_views(const ArchConfig& arch) {
    const int w0 = arch.widths[0], w1 = arch.widths[1], w2 = arch.widths[2];
    std::vector<LayerView> lvs;
    auto push = [&](int in_ch, int out_ch, int k) {
        LayerView lv;
        lv.in_ch = in_ch;
        lv.out_ch = out_ch;
        lv.k = k;
        lvs.push_back(lv);
    };
    push(1, w0, 3);
    push(w0, w1, 3);
    push(w1, w2, 3);
    push(w2, w1, 3);
    push(2 * w1, w1, 3);
    push(w1, w0, 3);
    push(2 * w0, w0, 3);
    push(w0, 1, 1);

    std::size_t off = 0;
    for (auto& lv : lvs) {
        lv.w_off = off;
        off += lv.w_count();
        lv.b_off = off;
        off += static_cast<std::size_t>(lv.out_ch);
    }
    return lvs;
}

std::size_t ArchConfig::params_per_net() const {
    const auto lvs = layer_views(*this);
    const auto& last = lvs.back();
    return last.b_off + static_cast<std::size_t>(last.out_ch);
}

void LossConfig::validate() const {
    if (!(xi >= 0.0)) throw ConfigError("loss.xi must be >= 0");
    if (!(gamma >= 0.0)) throw ConfigError("loss.gamma must be >= 0");
    if (downsample_factor < 1) throw ConfigError("loss.downsample must be >= 1");
}

void TrainConfig::validate() const {
    if (batch_size < 1) throw ConfigError("train.batch_size must be >= 1");
    if (epochs < 1) throw ConfigError("train.epochs must be >= 1");
    if (!(learning_rate >= 0.0)) throw ConfigError("train.learning_rate must be >= 0");
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
        throw ConfigError("train.beta1/beta2 must lie in [0, 1)");
    if (!(eps > 0.0)) throw ConfigError("train.eps must be > 0");
    if (patch_size < 16 || patch_size % 4 != 0)
        throw ConfigError("train.patch_size must be >= 16 and divisible by 4");
    if (steps_per_epoch < 0) throw ConfigError("train.steps_per_epoch must be >= 0");
}

NetworkParams init_params(const ArchConfig& arch, std::uint64_t seed) {
    arch.validate();
    NetworkParams p;
    p.arch = arch;
    p.values.assign(arch.total_params(), 0.0);
    Rng rng(seed);
    const auto lvs = layer_views(arch);
    for (int net = 0; net < 2; ++net) {
        double* base = p.values.data() + (net == 0 ? p.denoiser_offset() : p.deblurrer_offset());
        for (const auto& lv : lvs) {
            const double std_dev = std::sqrt(2.0 / (static_cast<double>(lv.in_ch) * lv.k * lv.k));
            double* w = base + lv.w_off;
            for (std::size_t i = 0; i < lv.w_count(); ++i) w[i] = std_dev * rng.next_gaussian();
            // biases stay zero
        }
    }
    return p;
}

ForwardResult forward(const NetworkParams& params, const Image& input) {
    params.arch.validate();
    check_forward_shape(input);
    UNetCache den, deb;
    unet_forward(params.arch, params.values.data() + params.denoiser_offset(), input, den);
    Image denoised = to_image(den.out);
    unet_forward(params.arch, params.values.data() + params.deblurrer_offset(), denoised, deb);
    return {std::move(denoised), to_image(deb.out)};
}

double hessian_penalty(const Image& z) {
    if (z.height < 3 || z.width < 3) throw ShapeMismatchError("hessian_penalty: image must be at least 3x3");
    double acc = 0.0;
    for (int y = 1; y < z.height - 1; ++y) {
        for (int x = 1; x < z.width - 1; ++x) {
            const double zxx = z.at(y, x - 1) - 2.0 * z.at(y, x) + z.at(y, x + 1);
            const double zyy = z.at(y - 1, x) - 2.0 * z.at(y, x) + z.at(y + 1, x);
            const double zxy =
                0.25 * (z.at(y + 1, x + 1) - z.at(y + 1, x - 1) - z.at(y - 1, x + 1) + z.at(y - 1, x - 1));
            acc += std::abs(zxx) + std::abs(zyy) + 2.0 * std::abs(zxy);
        }
    }
    return acc / (static_cast<double>(z.height - 2) * (z.width - 2));
}

LossBreakdown loss(const NetworkParams& params, const R2RPair& pair, const PsfKernel& kernel,
                   const LossConfig& cfg) {
    LossWork work;
    return loss_forward(params, pair, kernel, cfg, work);
}

LossBreakdown backward(const NetworkParams& params, const R2RPair& pair, const PsfKernel& kernel,
                       const LossConfig& cfg, std::vector<double>& grad) {
    LossWork work;
    const LossBreakdown breakdown = loss_forward(params, pair, kernel, cfg, work);
    loss_backward_from_work(params, pair, kernel, cfg, work, grad);
    return breakdown;
}

namespace {

Image pad_to_multiple4(const Image& img) {
    const int H = (img.height + 3) / 4 * 4;
    const int W = (img.width + 3) / 4 * 4;
    if (H == img.height && W == img.width) return img;
    Image out(H, W);
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x)
            out.at(y, x) = img.at(reflect_index(y, img.height), reflect_index(x, img.width));
    return out;
}

Image crop(const Image& img, int h, int w) {
    Image out(h, w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) out.at(y, x) = img.at(y, x);
    return out;
}

// Reflect-pad so both dimensions reach at least `size`.
Image pad_to_size(const Image& img, int size) {
    const int H = std::max(img.height, size);
    const int W = std::max(img.width, size);
    if (H == img.height && W == img.width) return img;
    Image out(H, W);
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x)
            out.at(y, x) = img.at(reflect_index(y, img.height), reflect_index(x, img.width));
    return out;
}

Image crop_flip(const Image& img, int oy, int ox, int size, bool flip_h, bool flip_v) {
    Image out(size, size);
    for (int y = 0; y < size; ++y) {
        const int sy = oy + (flip_v ? size - 1 - y : y);
        for (int x = 0; x < size; ++x) {
            const int sx = ox + (flip_h ? size - 1 - x : x);
            out.at(y, x) = img.at(sy, sx);
        }
    }
    return out;
}

}  // namespace

ComponentStack apply(const NetworkParams& params, const ComponentStack& components) {
    ComponentStack out = components;
    for (auto& img : out.images) {
        const int H = img.height, W = img.width;
        const Image padded = pad_to_multiple4(img);
        ForwardResult res = forward(params, padded);
        Image restored = (padded.height == H && padded.width == W) ? std::move(res.restored)
                                                                   : crop(res.restored, H, W);
        for (double& v : restored.data) v = std::clamp(v, 0.0, 1.0);
        img = std::move(restored);
    }
    return out;
}

TrainResult train(const std::vector<Image>& images, const PsfKernel& kernel, const R2RConfig& r2r_cfg,
                  const LossConfig& loss_cfg, const TrainConfig& train_cfg, const ArchConfig& arch) {
    train_cfg.validate();
    loss_cfg.validate();
    if (images.empty()) throw ConfigError("train: no training images");

    NetworkParams params = init_params(arch, derive_seed(train_cfg.seed, 0xA5C3));
    const std::size_t n_params = params.values.size();

    PairStream stream(images, r2r_cfg);
    Rng aug(derive_seed(train_cfg.seed, 0xC4A7));

    std::vector<double> adam_m(n_params, 0.0), adam_v(n_params, 0.0);
    std::int64_t adam_t = 0;

    const int steps = train_cfg.steps_per_epoch > 0 ? train_cfg.steps_per_epoch
                                                    : static_cast<int>(images.size());
    const int batch = train_cfg.batch_size;
    const int P = train_cfg.patch_size;
    const unsigned n_threads =
        std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(), static_cast<unsigned>(batch)));

    std::vector<R2RPair> batch_pairs(batch);
    std::vector<std::vector<double>> sample_grads(batch);
    std::vector<LossBreakdown> sample_losses(batch);
    std::vector<double> grad_accum(n_params);

    TrainResult result;
    result.history.reserve(train_cfg.epochs);

    for (int epoch = 0; epoch < train_cfg.epochs; ++epoch) {
        double sum_loss = 0.0, sum_t1 = 0.0, sum_t2 = 0.0, sum_t3 = 0.0;
        long samples_seen = 0;

        for (int step = 0; step < steps; ++step) {
            // Draw the whole batch sequentially so results are independent of
            // the worker count.
            for (int i = 0; i < batch; ++i) {
                R2RPair pair = stream.next();
                if (pair.y_hat.height < P || pair.y_hat.width < P) {
                    pair.y_hat = pad_to_size(pair.y_hat, P);
                    pair.y_tilde = pad_to_size(pair.y_tilde, P);
                }
                const int oy = static_cast<int>(aug.next_below(pair.y_hat.height - P + 1));
                const int ox = static_cast<int>(aug.next_below(pair.y_hat.width - P + 1));
                const bool fh = aug.next_below(2) != 0;
                const bool fv = aug.next_below(2) != 0;
                batch_pairs[i].y_hat = crop_flip(pair.y_hat, oy, ox, P, fh, fv);
                batch_pairs[i].y_tilde = crop_flip(pair.y_tilde, oy, ox, P, fh, fv);
            }

            auto worker = [&](unsigned tid) {
                for (int i = static_cast<int>(tid); i < batch; i += static_cast<int>(n_threads)) {
                    sample_losses[i] =
                        backward(params, batch_pairs[i], kernel, loss_cfg, sample_grads[i]);
                }
            };
            if (n_threads == 1) {
                worker(0);
            } else {
                std::vector<std::thread> pool;
                pool.reserve(n_threads);
                for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker, t);
                for (auto& t : pool) t.join();
            }

            std::fill(grad_accum.begin(), grad_accum.end(), 0.0);
            const double inv_batch = 1.0 / static_cast<double>(batch);
            for (int i = 0; i < batch; ++i) {
                const auto& g = sample_grads[i];
                for (std::size_t k = 0; k < n_params; ++k) grad_accum[k] += g[k];
                sum_loss += sample_losses[i].total;
                sum_t1 += sample_losses[i].term1;
                sum_t2 += sample_losses[i].term2;
                sum_t3 += sample_losses[i].term3;
                if (!std::isfinite(sample_losses[i].total))
                    throw Error("train: non-finite loss at epoch " + std::to_string(epoch + 1) +
                                "; lower train.learning_rate");
                ++samples_seen;
            }
            for (std::size_t k = 0; k < n_params; ++k) grad_accum[k] *= inv_batch;

            // Adam step with bias correction.
            ++adam_t;
            const double bc1 = 1.0 - std::pow(train_cfg.beta1, static_cast<double>(adam_t));
            const double bc2 = 1.0 - std::pow(train_cfg.beta2, static_cast<double>(adam_t));
            for (std::size_t k = 0; k < n_params; ++k) {
                adam_m[k] = train_cfg.beta1 * adam_m[k] + (1.0 - train_cfg.beta1) * grad_accum[k];
                adam_v[k] = train_cfg.beta2 * adam_v[k] + (1.0 - train_cfg.beta2) * grad_accum[k] * grad_accum[k];
                const double mh = adam_m[k] / bc1;
                const double vh = adam_v[k] / bc2;
                params.values[k] -= train_cfg.learning_rate * mh / (std::sqrt(vh) + train_cfg.eps);
            }
            for (double v : params.values)
                if (!std::isfinite(v))
                    throw Error("train: non-finite parameter after epoch " + std::to_string(epoch + 1) +
                                "; lower train.learning_rate");
        }

        // Epoch PSNR: denoiser output vs its input over the full images.
        double psnr_sum = 0.0;
        for (const auto& img : images) {
            const Image padded = pad_to_multiple4(img);
            ForwardResult res = forward(params, padded);
            Image den = (padded.height == img.height && padded.width == img.width)
                            ? std::move(res.denoised)
                            : crop(res.denoised, img.height, img.width);
            Image scaled_in = img;
            for (double& v : den.data) v *= 255.0;
            for (double& v : scaled_in.data) v *= 255.0;
            psnr_sum += psnr(den, scaled_in, 255.0);
        }

        EpochStats stats;
        stats.epoch = epoch + 1;
        const double inv_seen = 1.0 / static_cast<double>(samples_seen);
        stats.loss = sum_loss * inv_seen;
        stats.term1 = sum_t1 * inv_seen;
        stats.term2 = sum_t2 * inv_seen;
        stats.term3 = sum_t3 * inv_seen;
        stats.psnr = psnr_sum / static_cast<double>(images.size());
        result.history.push_back(stats);
    }

    result.params = std::move(params);
    return result;
}

void write_history_csv(const std::vector<EpochStats>& history, const std::string& path) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw IoError("history csv: cannot open for writing: " + path);
    f << "epoch,loss,term1,term2,term3,psnr\n";
    for (const auto& e : history) {
        f << e.epoch << ',' << fmt_double(e.loss) << ',' << fmt_double(e.term1) << ',' << fmt_double(e.term2)
          << ',' << fmt_double(e.term3) << ',';
        if (std::isinf(e.psnr)) {
            f << "inf";
        } else {
            f << fmt_double(e.psnr);
        }
        f << '\n';
    }
    if (!f) throw IoError("history csv: write failed: " + path);
}

namespace {
constexpr char kNetMagic[8] = {'T', 'H', 'Z', 'N', 'E', 'T', '0', '1'};
constexpr std::uint32_t kNetVersion = 1;
}  // namespace

void save_checkpoint(const NetworkParams& params, const std::string& path) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("checkpoint: cannot open for writing: " + path);
    f.write(kNetMagic, 8);
    std::uint32_t version = kNetVersion;
    f.write(reinterpret_cast<const char*>(&version), 4);
    for (int w : params.arch.widths) {
        const std::uint32_t u = static_cast<std::uint32_t>(w);
        f.write(reinterpret_cast<const char*>(&u), 4);
    }
    const std::uint64_t count = params.values.size();
    f.write(reinterpret_cast<const char*>(&count), 8);
    f.write(reinterpret_cast<const char*>(params.values.data()),
            static_cast<std::streamsize>(params.values.size() * sizeof(double)));
    if (!f) throw IoError("checkpoint: write failed: " + path);
}

NetworkParams load_checkpoint(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("checkpoint: cannot open: " + path);
    char magic[8];
    f.read(magic, 8);
    if (f.gcount() != 8 || std::memcmp(magic, kNetMagic, 8) != 0)
        throw CheckpointMismatchError("checkpoint: bad magic in " + path);
    std::uint32_t version = 0;
    f.read(reinterpret_cast<char*>(&version), 4);
    if (!f || version != kNetVersion) throw CheckpointMismatchError("checkpoint: unsupported version in " + path);

    NetworkParams p;
    for (int i = 0; i < 3; ++i) {
        std::uint32_t u = 0;
        f.read(reinterpret_cast<char*>(&u), 4);
        if (!f || u == 0) throw CheckpointMismatchError("checkpoint: bad architecture descriptor in " + path);
        p.arch.widths[i] = static_cast<int>(u);
    }
    std::uint64_t count = 0;
    f.read(reinterpret_cast<char*>(&count), 8);
    if (!f || count != p.arch.total_params())
        throw CheckpointMismatchError("checkpoint: parameter count does not match the architecture in " + path);
    p.values.resize(count);
    f.read(reinterpret_cast<char*>(p.values.data()), static_cast<std::streamsize>(count * sizeof(double)));
    if (static_cast<std::uint64_t>(f.gcount()) != count * sizeof(double))
        throw CheckpointMismatchError("checkpoint: truncated parameters in " + path);
    for (double v : p.values)
        if (!std::isfinite(v)) throw CheckpointMismatchError("checkpoint: non-finite parameter in " + path);
    return p;
}

}  // namespace thz
