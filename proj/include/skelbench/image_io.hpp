#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "skelbench/types.hpp"

namespace skelbench {

/// Decodes any PNG libpng understands; pixels with gray value >= 128 (after
/// conversion to 8-bit gray, alpha ignored) are foreground.
BinaryImage decode_png(std::span<const std::uint8_t> bytes);
/// 8-bit grayscale, foreground 255, background 0.
std::vector<std::uint8_t> encode_png(const BinaryImage& img);

/// 8-bit grayscale image from raw row-major values.
std::vector<std::uint8_t> encode_gray_png(int width, int height,
                                          std::span<const std::uint8_t> values);

BinaryImage read_png(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const BinaryImage& img);

}  // namespace skelbench
