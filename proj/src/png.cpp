#include "thz/png.hpp"

#include <zlib.h>

#include <cstring>
#include <fstream>

#include "thz/error.hpp"

namespace thz {
namespace {

void put_u32_be(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

void put_chunk(std::vector<std::uint8_t>& out, const char type[4], const std::vector<std::uint8_t>& payload) {
    put_u32_be(out, static_cast<std::uint32_t>(payload.size()));
    const std::size_t crc_start = out.size();
    out.insert(out.end(), type, type + 4);
    out.insert(out.end(), payload.begin(), payload.end());
    uLong crc = crc32(0L, Z_NULL, 0);
    crc = crc32(crc, out.data() + crc_start, static_cast<uInt>(out.size() - crc_start));
    put_u32_be(out, static_cast<std::uint32_t>(crc));
}

}  // namespace

std::vector<std::uint8_t> encode_gray8_png(const std::vector<std::uint8_t>& pixels, int width, int height) {
    if (width < 1 || height < 1) throw Error("png: empty image");
    if (pixels.size() != static_cast<std::size_t>(width) * height) throw Error("png: pixel buffer size mismatch");

    // Raw stream: one filter byte (0 = none) before each scanline.
    std::vector<std::uint8_t> raw;
    raw.reserve(static_cast<std::size_t>(height) * (width + 1));
    for (int y = 0; y < height; ++y) {
        raw.push_back(0);
        raw.insert(raw.end(), pixels.begin() + static_cast<std::size_t>(y) * width,
                   pixels.begin() + static_cast<std::size_t>(y + 1) * width);
    }

    uLongf bound = compressBound(static_cast<uLong>(raw.size()));
    std::vector<std::uint8_t> deflated(bound);
    if (compress2(deflated.data(), &bound, raw.data(), static_cast<uLong>(raw.size()), 6) != Z_OK)
        throw Error("png: deflate failed");
    deflated.resize(bound);

    std::vector<std::uint8_t> out;
    static const std::uint8_t signature[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    out.insert(out.end(), signature, signature + 8);

    std::vector<std::uint8_t> ihdr;
    put_u32_be(ihdr, static_cast<std::uint32_t>(width));
    put_u32_be(ihdr, static_cast<std::uint32_t>(height));
    ihdr.push_back(8);  // bit depth
    ihdr.push_back(0);  // color type: grayscale
    ihdr.push_back(0);  // compression
    ihdr.push_back(0);  // filter
    ihdr.push_back(0);  // no interlace
    put_chunk(out, "IHDR", ihdr);
    put_chunk(out, "IDAT", deflated);
    put_chunk(out, "IEND", {});
    return out;
}

void write_gray8_png(const std::vector<std::uint8_t>& pixels, int width, int height, const std::string& path) {
    const auto bytes = encode_gray8_png(pixels, width, height);
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("png: cannot open for writing: " + path);
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw IoError("png: write failed: " + path);
}

}  // namespace thz
