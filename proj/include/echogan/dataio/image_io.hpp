#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "echogan/dataio/types.hpp"

namespace echogan::dataio {

/// Decodes an 8-bit grayscale raster from PNG bytes. Color, palette, alpha and
/// 16-bit inputs are reduced to 8-bit luminance.
GrayImage8 decode_png(std::string_view bytes);
std::string encode_png(const GrayImage8& image);

/// Reads PNG, binary PGM (P5) or MetaImage (.mhd with a raw 8-bit payload),
/// chosen by extension. Missing file -> NotFound, malformed file -> IoError.
GrayImage8 read_gray_image(const std::filesystem::path& path);
/// Writes PNG or PGM depending on the extension.
void write_gray_image(const std::filesystem::path& path, const GrayImage8& image);

GrayImage8 read_metaimage(const std::filesystem::path& header_path);

std::string base64_encode(std::string_view bytes);
/// Throws IoError on malformed input.
std::string base64_decode(std::string_view text);

/// v / 255 per pixel.
EchoFrame to_echo_frame(const GrayImage8& image);
/// Round-half-up quantization of [0,1] intensities; values are clamped first.
GrayImage8 quantize(const EchoFrame& frame);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

}  // namespace echogan::dataio
