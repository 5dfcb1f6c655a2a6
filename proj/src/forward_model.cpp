#include "thz/forward_model.hpp"

#include <algorithm>
#include <cmath>

#include "thz/error.hpp"
#include "thz/rng.hpp"

namespace thz {

void NoiseParams::validate() const {
    if (!(sigma0_sq >= 0.0)) throw ConfigError("noise.sigma0_sq must be >= 0");
    if (!(beta >= 0.0)) throw ConfigError("noise.beta must be >= 0");
    if (!(p >= 0.0)) throw ConfigError("noise.p must be >= 0");
    if (!(poisson_gain >= 0.0)) throw ConfigError("noise.poisson_gain must be >= 0");
}

double variance_at(const NoiseParams& noise, double freq_thz) {
    noise.validate();
    if (!(freq_thz >= 0.0)) throw ConfigError("variance_at: frequency must be >= 0");
    return noise.sigma0_sq + noise.beta * std::pow(freq_thz, noise.p);
}

double AmplitudeProfile::value_at(double freq_thz, double f_start, double f_end) const {
    switch (kind) {
        case Kind::Flat:
            return a0;
        case Kind::Decay:
            return a0 * std::exp(-a1 * freq_thz);
        case Kind::Ramp: {
            const double span = f_end - f_start;
            const double t = span > 0.0 ? (freq_thz - f_start) / span : 0.0;
            return a0 + (a1 - a0) * t;
        }
    }
    return a0;
}

void PhantomSpec::validate() const {
    if (height < 1 || width < 1) throw ConfigError("phantom: height and width must be >= 1");
    if (bands < 1) throw ConfigError("phantom: bands must be >= 1");
    if (!(df > 0.0)) throw ConfigError("phantom.df must be > 0");
    if (!(f_start >= 0.0)) throw ConfigError("phantom.f_start must be >= 0");
    if (!(background >= 0.0 && background <= 1.0)) throw ConfigError("phantom.background must lie in [0, 1]");
    if (!(absorption >= 0.0)) throw ConfigError("phantom.absorption must be >= 0");
    for (const auto& s : shapes) {
        if (s.kind == Shape::Kind::Disk) {
            if (s.p2 < 0) throw ConfigError("phantom: disk radius must be >= 0");
            if (s.p0 - s.p2 < 0 || s.p0 + s.p2 >= width || s.p1 - s.p2 < 0 || s.p1 + s.p2 >= height)
                throw ConfigError("phantom: disk out of bounds");
        } else {
            if (s.p2 < 1 || s.p3 < 1) throw ConfigError("phantom: rect extent must be >= 1");
            if (s.p0 < 0 || s.p1 < 0 || s.p0 + s.p2 > width || s.p1 + s.p3 > height)
                throw ConfigError("phantom: rect out of bounds");
        }
        if (!(s.profile.a0 >= 0.0 && s.profile.a0 <= 1.0))
            throw ConfigError("phantom: shape amplitude must lie in [0, 1]");
        if (s.profile.kind == AmplitudeProfile::Kind::Ramp &&
            !(s.profile.a1 >= 0.0 && s.profile.a1 <= 1.0))
            throw ConfigError("phantom: ramp endpoint must lie in [0, 1]");
        if (s.profile.kind == AmplitudeProfile::Kind::Decay && !(s.profile.a1 >= 0.0))
            throw ConfigError("phantom: decay rate must be >= 0");
    }
}

Image Phantom::band_image(int b) const {
    Image img(height, width);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) img.at(y, x) = at(y, x, b);
    return img;
}

SpectralCube Phantom::to_cube() const {
    SpectralCube c;
    c.height = height;
    c.width = width;
    c.bands = bands;
    c.df = df;
    c.f_start = f_start;
    c.data = data;
    return c;
}

Phantom make_phantom(const PhantomSpec& spec) {
    spec.validate();
    Phantom ph;
    ph.height = spec.height;
    ph.width = spec.width;
    ph.bands = spec.bands;
    ph.df = spec.df;
    ph.f_start = spec.f_start;
    ph.data.resize(static_cast<std::size_t>(spec.height) * spec.width * spec.bands);

    const double f_end = spec.f_start + (spec.bands - 1) * spec.df;
    for (int b = 0; b < spec.bands; ++b) {
        const double f = spec.f_start + b * spec.df;
        const double bg = spec.background * std::exp(-spec.absorption * f);
        // Paint background, then shapes in declaration order (later wins).
        std::vector<double> band(static_cast<std::size_t>(spec.height) * spec.width, bg);
        for (const auto& s : spec.shapes) {
            const double amp = s.profile.value_at(f, spec.f_start, f_end);
            if (s.kind == Shape::Kind::Disk) {
                const long r2 = static_cast<long>(s.p2) * s.p2;
                for (int y = s.p1 - s.p2; y <= s.p1 + s.p2; ++y)
                    for (int x = s.p0 - s.p2; x <= s.p0 + s.p2; ++x) {
                        const long dx = x - s.p0, dy = y - s.p1;
                        if (dx * dx + dy * dy <= r2)
                            band[static_cast<std::size_t>(y) * spec.width + x] = amp;
                    }
            } else {
                for (int y = s.p1; y < s.p1 + s.p3; ++y)
                    for (int x = s.p0; x < s.p0 + s.p2; ++x)
                        band[static_cast<std::size_t>(y) * spec.width + x] = amp;
            }
        }
        for (int y = 0; y < spec.height; ++y)
            for (int x = 0; x < spec.width; ++x)
                ph.data[(static_cast<std::size_t>(y) * spec.width + x) * spec.bands + b] =
                    static_cast<float>(band[static_cast<std::size_t>(y) * spec.width + x]);
    }
    return ph;
}

SpectralCube degrade(const Phantom& phantom, const std::vector<PsfKernel>& psf_bank, const NoiseParams& noise,
                     std::uint64_t seed) {
    noise.validate();
    if (static_cast<int>(psf_bank.size()) != phantom.bands)
        throw ShapeMismatchError("degrade: psf bank length must equal the band count");

    SpectralCube out;
    out.height = phantom.height;
    out.width = phantom.width;
    out.bands = phantom.bands;
    out.df = phantom.df;
    out.f_start = phantom.f_start;
    out.data.resize(phantom.data.size());

    for (int b = 0; b < phantom.bands; ++b) {
        const double f = phantom.band_freq(b);
        const double base_var = variance_at(noise, f);
        const Image clean = phantom.band_image(b);
        const PsfKernel& k = psf_bank[b];
        const Image blurred = k.is_delta() ? clean : convolve_reflect(clean, k.values, k.size);

        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(b)));
        for (int y = 0; y < out.height; ++y) {
            for (int x = 0; x < out.width; ++x) {
                const double signal = blurred.at(y, x);
                const double var = base_var + noise.poisson_gain * std::max(signal, 0.0);
                double v = signal;
                if (var > 0.0) v += std::sqrt(var) * rng.next_gaussian();
                out.at(y, x, b) = static_cast<float>(v < 0.0 ? 0.0 : v);
            }
        }
    }
    return out;
}

}  // namespace thz
