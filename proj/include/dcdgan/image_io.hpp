#pragma once

#include <cstdint>
#include <filesystem>

#include "dcdgan/tensor.hpp"

namespace dcdgan {

/// [0, 255] -> [-1, 1]: p / 127.5 - 1.
inline double pixel_to_unit(double p) { return p / 127.5 - 1.0; }
/// [-1, 1] -> {0..255}: round((v + 1) * 127.5), clamped.
std::uint8_t unit_to_pixel(double v);
/// Snaps values to the 8-bit grid so PNG round trips are exact.
void quantize_8bit(Tensor& t);

/// Writes sample `index` of a 1- or 3-channel batch as an 8-bit PNG.
void write_png(const std::filesystem::path& file, const Tensor& img, std::int64_t index = 0);

/// Reads an 8-bit PNG as a (1, 3, H, W) tensor in [-1, 1]. Throws IoError naming the file.
Tensor read_png(const std::filesystem::path& file);

}  // namespace dcdgan
