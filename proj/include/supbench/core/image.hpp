#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace supbench::img {

// Interleaved 8-bit raster, row-major, 1 (gray) or 3 (RGB) channels.
struct ImageU8 {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<std::uint8_t> data;

  std::uint8_t& at(int x, int y, int c) {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  std::uint8_t at(int x, int y, int c) const {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
};

ImageU8 make_image(int width, int height, int channels,
                   std::uint8_t fill = 0);

// PPM (P6) for 3-channel, PGM (P5) for 1-channel, chosen by `channels`.
void write_pnm(const std::filesystem::path& path, const ImageU8& image);
ImageU8 read_pnm(const std::filesystem::path& path);

// Bit-packed bilevel PBM (P4). `bits` is row-major, one byte per pixel (0/1).
void write_pbm(const std::filesystem::path& path, int width, int height,
               const std::vector<std::uint8_t>& bits);
std::vector<std::uint8_t> read_pbm(const std::filesystem::path& path,
                                   int& width, int& height);

}  // namespace supbench::img
