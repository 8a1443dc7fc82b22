#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dia/tensor.hpp"

namespace dia {

/// 8-bit PNG in any color type; gray and alpha are folded into RGB.
Image read_png(const std::string& path);
void write_png(const std::string& path, const Image& img);

/// NNF dump: "DNNF", version u32 = 1, height, width, targetHeight,
/// targetWidth (u32 each), then row-major (row u32, col u32) pairs.
/// All integers little-endian.
std::vector<std::uint8_t> encode_nnf(const NNField& nnf);
NNField decode_nnf(std::span<const std::uint8_t> bytes);
void write_nnf(const std::string& path, const NNField& nnf);
NNField read_nnf(const std::string& path);

}  // namespace dia
