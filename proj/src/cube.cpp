#include "thz/cube.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "thz/error.hpp"
#include "thz/png.hpp"
#include "thz/text.hpp"

static_assert(std::endian::native == std::endian::little, "cube io assumes a little-endian host");
static_assert(sizeof(float) == 4, "cube payload requires 32-bit float");

namespace thz {
namespace {

constexpr std::uint32_t kKindTime = 0;
constexpr std::uint32_t kKindSpectral = 1;

struct RawHeader {
    char magic[8];
    std::uint32_t version;
    std::uint32_t kind;
    std::uint32_t height;
    std::uint32_t width;
    std::uint32_t axis;
    double meta0;
    double meta1;
};

void write_exact(std::ofstream& f, const void* p, std::size_t n, const std::string& path) {
    f.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
    if (!f) throw IoError("cube: write failed: " + path);
}

void check_finite(const std::vector<float>& data, const char* what) {
    for (float v : data)
        if (!std::isfinite(v)) throw CubeFormatError(CubeErrorKind::NonFinite, std::string(what) + ": non-finite value");
}

}  // namespace

void TimeDomainCube::validate() const {
    if (height < 1 || width < 1) throw Error("time cube: height and width must be >= 1");
    if (samples < 2) throw Error("time cube: needs at least 2 samples");
    if (!(dt > 0.0)) throw Error("time cube: dt must be > 0");
    if (data.size() != static_cast<std::size_t>(height) * width * samples)
        throw ShapeMismatchError("time cube: payload length mismatch");
    check_finite(data, "time cube");
}

void SpectralCube::validate() const {
    if (height < 1 || width < 1) throw Error("spectral cube: height and width must be >= 1");
    if (bands < 1) throw Error("spectral cube: needs at least 1 band");
    if (!(df > 0.0)) throw Error("spectral cube: df must be > 0");
    if (data.size() != static_cast<std::size_t>(height) * width * bands)
        throw ShapeMismatchError("spectral cube: payload length mismatch");
    check_finite(data, "spectral cube");
    for (float v : data)
        if (v < 0.0f)
            throw CubeFormatError(CubeErrorKind::NegativeAmplitude, "spectral cube: negative amplitude");
}

Image SpectralCube::band_image(int b) const {
    if (b < 0 || b >= bands) throw Error("spectral cube: band index out of range");
    Image img(height, width);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) img.at(y, x) = at(y, x, b);
    return img;
}

void SpectralCube::set_band(int b, const Image& img) {
    if (b < 0 || b >= bands) throw Error("spectral cube: band index out of range");
    if (img.height != height || img.width != width) throw ShapeMismatchError("spectral cube: band image shape mismatch");
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) at(y, x, b) = static_cast<float>(img.at(y, x));
}

void write_cube(const Cube& cube, const std::string& path) {
    RawHeader h{};
    std::memcpy(h.magic, kCubeMagic, 8);
    h.version = kCubeVersion;
    const std::vector<float>* payload = nullptr;

    if (const auto* t = std::get_if<TimeDomainCube>(&cube)) {
        t->validate();
        h.kind = kKindTime;
        h.height = static_cast<std::uint32_t>(t->height);
        h.width = static_cast<std::uint32_t>(t->width);
        h.axis = static_cast<std::uint32_t>(t->samples);
        h.meta0 = t->dt;
        h.meta1 = 0.0;
        payload = &t->data;
    } else {
        const auto& s = std::get<SpectralCube>(cube);
        s.validate();
        h.kind = kKindSpectral;
        h.height = static_cast<std::uint32_t>(s.height);
        h.width = static_cast<std::uint32_t>(s.width);
        h.axis = static_cast<std::uint32_t>(s.bands);
        h.meta0 = s.df;
        h.meta1 = s.f_start;
        payload = &s.data;
    }

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cube: cannot open for writing: " + path);
    write_exact(f, h.magic, 8, path);
    write_exact(f, &h.version, 4, path);
    write_exact(f, &h.kind, 4, path);
    write_exact(f, &h.height, 4, path);
    write_exact(f, &h.width, 4, path);
    write_exact(f, &h.axis, 4, path);
    write_exact(f, &h.meta0, 8, path);
    write_exact(f, &h.meta1, 8, path);
    write_exact(f, payload->data(), payload->size() * 4, path);
}

Cube read_cube(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cube: cannot open: " + path);

    char magic[8];
    f.read(magic, 8);
    if (f.gcount() != 8 || std::memcmp(magic, kCubeMagic, 8) != 0)
        throw CubeFormatError(CubeErrorKind::BadMagic, "cube: bad magic in " + path);

    std::uint32_t version = 0, kind = 0, height = 0, width = 0, axis = 0;
    double meta0 = 0.0, meta1 = 0.0;
    f.read(reinterpret_cast<char*>(&version), 4);
    f.read(reinterpret_cast<char*>(&kind), 4);
    f.read(reinterpret_cast<char*>(&height), 4);
    f.read(reinterpret_cast<char*>(&width), 4);
    f.read(reinterpret_cast<char*>(&axis), 4);
    f.read(reinterpret_cast<char*>(&meta0), 8);
    f.read(reinterpret_cast<char*>(&meta1), 8);
    if (!f) throw CubeFormatError(CubeErrorKind::Truncated, "cube: truncated header in " + path);
    if (version != kCubeVersion)
        throw CubeFormatError(CubeErrorKind::BadHeader, "cube: unsupported version in " + path);
    if (kind != kKindTime && kind != kKindSpectral)
        throw CubeFormatError(CubeErrorKind::BadHeader, "cube: unknown kind in " + path);
    if (height == 0 || width == 0 || axis == 0)
        throw CubeFormatError(CubeErrorKind::BadHeader, "cube: zero dimension in " + path);

    const std::size_t count = static_cast<std::size_t>(height) * width * axis;
    std::vector<float> payload(count);
    f.read(reinterpret_cast<char*>(payload.data()), static_cast<std::streamsize>(count * 4));
    if (static_cast<std::size_t>(f.gcount()) != count * 4)
        throw CubeFormatError(CubeErrorKind::Truncated, "cube: truncated payload in " + path);
    // Trailing bytes mean the header does not describe the payload.
    char extra;
    if (f.read(&extra, 1) && f.gcount() == 1)
        throw CubeFormatError(CubeErrorKind::Truncated, "cube: payload longer than header claims in " + path);

    if (kind == kKindTime) {
        TimeDomainCube c;
        c.height = static_cast<int>(height);
        c.width = static_cast<int>(width);
        c.samples = static_cast<int>(axis);
        c.dt = meta0;
        c.data = std::move(payload);
        c.validate();
        return c;
    }
    SpectralCube c;
    c.height = static_cast<int>(height);
    c.width = static_cast<int>(width);
    c.bands = static_cast<int>(axis);
    c.df = meta0;
    c.f_start = meta1;
    c.data = std::move(payload);
    c.validate();
    return c;
}

SpectralCube read_spectral_cube(const std::string& path) {
    Cube c = read_cube(path);
    if (auto* s = std::get_if<SpectralCube>(&c)) return std::move(*s);
    throw CubeFormatError(CubeErrorKind::BadHeader, "cube: expected a spectral cube: " + path);
}

TimeDomainCube read_time_cube(const std::string& path) {
    Cube c = read_cube(path);
    if (auto* t = std::get_if<TimeDomainCube>(&c)) return std::move(*t);
    throw CubeFormatError(CubeErrorKind::BadHeader, "cube: expected a time-domain cube: " + path);
}

void export_band_png(const SpectralCube& cube, int band, const std::string& path) {
    if (band < 0 || band >= cube.bands) throw Error("export_band_png: band out of range");
    const Image img = cube.band_image(band);
    const double lo = min_value(img);
    const double hi = max_value(img);
    std::vector<std::uint8_t> pixels(img.size());
    if (hi > lo) {
        const double scale = 255.0 / (hi - lo);
        for (std::size_t i = 0; i < img.data.size(); ++i) {
            // Half-up rounding: 0.5 maps to 128.
            const double v = std::floor((img.data[i] - lo) * scale + 0.5);
            pixels[i] = static_cast<std::uint8_t>(v < 0.0 ? 0.0 : (v > 255.0 ? 255.0 : v));
        }
    } else {
        std::fill(pixels.begin(), pixels.end(), static_cast<std::uint8_t>(128));
    }
    write_gray8_png(pixels, cube.width, cube.height, path);
}

void export_band_stats_csv(const SpectralCube& cube, const std::string& path) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw IoError("stats csv: cannot open for writing: " + path);
    f << "band,freq_thz,min,max,mean\n";
    for (int b = 0; b < cube.bands; ++b) {
        const Image img = cube.band_image(b);
        f << b << ',' << fmt_double(cube.band_freq(b)) << ',' << fmt_double(min_value(img)) << ','
          << fmt_double(max_value(img)) << ',' << fmt_double(mean_value(img)) << '\n';
    }
    if (!f) throw IoError("stats csv: write failed: " + path);
}

}  // namespace thz
