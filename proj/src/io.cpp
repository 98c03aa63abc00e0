// SPDX-License-Identifier: Apache-2.0
#include "histaug/io.hpp"

#include <png.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace histaug::io {
namespace {

constexpr char kTensorMagic[4] = {'M', 'T', 'N', 'T'};
constexpr std::size_t kTensorHeader = 16;

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

std::uint32_t get_u32(std::string_view in, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[at + i])) << (8 * i);
  }
  return v;
}

}  // namespace

Patch read_png(const std::filesystem::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.string().c_str())) {
    throw IoError("cannot read PNG " + path.string() + ": " + image.message);
  }
  image.format = PNG_FORMAT_RGB;
  if (image.width < 1 || image.height < 1) {
    png_image_free(&image);
    throw IoError("empty PNG " + path.string());
  }
  std::vector<std::uint8_t> data(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, data.data(), 0, nullptr)) {
    const std::string message = image.message;
    png_image_free(&image);
    throw IoError("cannot decode PNG " + path.string() + ": " + message);
  }
  return Patch(static_cast<int>(image.width), static_cast<int>(image.height), std::move(data));
}

void write_png(const std::filesystem::path& path, const Patch& patch) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(patch.width());
  image.height = static_cast<png_uint_32>(patch.height());
  image.format = PNG_FORMAT_RGB;

  png_alloc_size_t size = 0;
  if (!png_image_write_get_memory_size(image, size, 0, patch.data().data(), 0, nullptr)) {
    throw IoError("cannot encode PNG " + path.string() + ": " + image.message);
  }
  std::string buffer(size, '\0');
  if (!png_image_write_to_memory(&image, buffer.data(), &size, 0, patch.data().data(), 0,
                                 nullptr)) {
    throw IoError("cannot encode PNG " + path.string() + ": " + image.message);
  }
  buffer.resize(size);
  write_file_atomic(path, buffer);
}

std::string encode_tensor(const NormalizedTensor& tensor) {
  std::string out;
  out.reserve(kTensorHeader + tensor.values().size() * 4);
  out.append(kTensorMagic, 4);
  put_u32(out, static_cast<std::uint32_t>(tensor.channels()));
  put_u32(out, static_cast<std::uint32_t>(tensor.height()));
  put_u32(out, static_cast<std::uint32_t>(tensor.width()));
  for (float v : tensor.values()) put_u32(out, std::bit_cast<std::uint32_t>(v));
  return out;
}

NormalizedTensor decode_tensor(std::string_view bytes) {
  if (bytes.size() < kTensorHeader || bytes.substr(0, 4) != std::string_view(kTensorMagic, 4)) {
    throw IoError("not a tensor dump (bad magic)");
  }
  const auto c = get_u32(bytes, 4);
  const auto h = get_u32(bytes, 8);
  const auto w = get_u32(bytes, 12);
  const std::size_t count = static_cast<std::size_t>(c) * h * w;
  if (bytes.size() != kTensorHeader + count * 4) throw IoError("tensor dump length mismatch");
  std::vector<float> values(count);
  for (std::size_t i = 0; i < count; ++i) {
    values[i] = std::bit_cast<float>(get_u32(bytes, kTensorHeader + 4 * i));
  }
  return NormalizedTensor(static_cast<int>(c), static_cast<int>(h), static_cast<int>(w),
                          std::move(values));
}

void write_tensor(const std::filesystem::path& path, const NormalizedTensor& tensor) {
  write_file_atomic(path, encode_tensor(tensor));
}

NormalizedTensor read_tensor(const std::filesystem::path& path) {
  return decode_tensor(read_file(path));
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot move " + tmp.string() + " to " + path.string());
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace histaug::io
