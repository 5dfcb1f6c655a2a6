#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace thz {

// Minimal 8-bit grayscale PNG writer (IHDR/IDAT/IEND, zlib-deflated, filter 0
// per scanline). Output bytes are deterministic for a given pixel buffer.
std::vector<std::uint8_t> encode_gray8_png(const std::vector<std::uint8_t>& pixels, int width, int height);

void write_gray8_png(const std::vector<std::uint8_t>& pixels, int width, int height, const std::string& path);

}  // namespace thz
