#include "supbench/core/image.hpp"

#include <fstream>
#include <string>

#include "supbench/core/errors.hpp"

namespace supbench::img {

namespace {

void skip_pnm_whitespace(std::istream& in) {
  for (;;) {
    const int c = in.peek();
    if (c == '#') {
      std::string line;
      std::getline(in, line);
    } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      in.get();
    } else {
      return;
    }
  }
}

int read_pnm_int(std::istream& in) {
  skip_pnm_whitespace(in);
  int v = 0;
  if (!(in >> v)) throw ExecutionError("malformed PNM header");
  return v;
}

}  // namespace

ImageU8 make_image(int width, int height, int channels, std::uint8_t fill) {
  ImageU8 image;
  image.width = width;
  image.height = height;
  image.channels = channels;
  image.data.assign(static_cast<std::size_t>(width) * height * channels, fill);
  return image;
}

void write_pnm(const std::filesystem::path& path, const ImageU8& image) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ExecutionError("cannot open for writing: " + path.string());
  out << (image.channels == 3 ? "P6\n" : "P5\n")
      << image.width << ' ' << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.data.data()),
            static_cast<std::streamsize>(image.data.size()));
  if (!out) throw ExecutionError("short write: " + path.string());
}

ImageU8 read_pnm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ExecutionError("cannot open image: " + path.string());
  std::string magic;
  in >> magic;
  int channels = 0;
  if (magic == "P6") {
    channels = 3;
  } else if (magic == "P5") {
    channels = 1;
  } else {
    throw ExecutionError("unsupported image format '" + magic + "' in " +
                         path.string());
  }
  const int width = read_pnm_int(in);
  const int height = read_pnm_int(in);
  const int maxval = read_pnm_int(in);
  if (maxval != 255)
    throw ExecutionError("only 8-bit images supported: " + path.string());
  in.get();  // single whitespace after maxval
  ImageU8 image = make_image(width, height, channels);
  in.read(reinterpret_cast<char*>(image.data.data()),
          static_cast<std::streamsize>(image.data.size()));
  if (in.gcount() != static_cast<std::streamsize>(image.data.size()))
    throw ExecutionError("truncated image: " + path.string());
  return image;
}

void write_pbm(const std::filesystem::path& path, int width, int height,
               const std::vector<std::uint8_t>& bits) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ExecutionError("cannot open for writing: " + path.string());
  out << "P4\n" << width << ' ' << height << '\n';
  const int row_bytes = (width + 7) / 8;
  std::vector<std::uint8_t> row(static_cast<std::size_t>(row_bytes));
  for (int y = 0; y < height; ++y) {
    std::fill(row.begin(), row.end(), 0);
    for (int x = 0; x < width; ++x) {
      if (bits[static_cast<std::size_t>(y) * width + x])
        row[x / 8] |= static_cast<std::uint8_t>(0x80u >> (x % 8));
    }
    out.write(reinterpret_cast<const char*>(row.data()), row_bytes);
  }
  if (!out) throw ExecutionError("short write: " + path.string());
}

std::vector<std::uint8_t> read_pbm(const std::filesystem::path& path,
                                   int& width, int& height) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ExecutionError("cannot open mask: " + path.string());
  std::string magic;
  in >> magic;
  if (magic != "P4") throw ExecutionError("not a P4 PBM: " + path.string());
  width = read_pnm_int(in);
  height = read_pnm_int(in);
  in.get();
  const int row_bytes = (width + 7) / 8;
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(width) * height, 0);
  std::vector<char> row(static_cast<std::size_t>(row_bytes));
  for (int y = 0; y < height; ++y) {
    in.read(row.data(), row_bytes);
    if (in.gcount() != row_bytes)
      throw ExecutionError("truncated mask: " + path.string());
    for (int x = 0; x < width; ++x) {
      const auto byte = static_cast<std::uint8_t>(row[x / 8]);
      bits[static_cast<std::size_t>(y) * width + x] =
          (byte & (0x80u >> (x % 8))) ? 1 : 0;
    }
  }
  return bits;
}

}  // namespace supbench::img
