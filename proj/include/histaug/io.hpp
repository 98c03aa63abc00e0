// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "histaug/image.hpp"

namespace histaug::io {

/// Reads an 8-bit PNG, converting gray/alpha/palette inputs to RGB.
Patch read_png(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const Patch& patch);

/// Tensor dump: "MTNT", u32 C, u32 H, u32 W (all little-endian), then C*H*W
/// little-endian float32 values, channel-planar.
std::string encode_tensor(const NormalizedTensor& tensor);
NormalizedTensor decode_tensor(std::string_view bytes);
void write_tensor(const std::filesystem::path& path, const NormalizedTensor& tensor);
NormalizedTensor read_tensor(const std::filesystem::path& path);

/// Writes to a sibling temporary file and renames it over `path`, so readers
/// never observe a partial file.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);
std::string read_file(const std::filesystem::path& path);

}  // namespace histaug::io
