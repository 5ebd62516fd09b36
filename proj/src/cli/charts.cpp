#include "supbench/cli/charts.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "supbench/core/errors.hpp"
#include "supbench/core/tsv.hpp"

namespace supbench::cli {
namespace {

// Layout shared by the SVG and PNG renderers (SVG units; PNG draws at 2x).
constexpr int kWidth = 720;
constexpr int kHeight = 440;
constexpr int kLeft = 64;
constexpr int kRight = 540;   // plot area right edge; legend lives beyond
constexpr int kTop = 48;
constexpr int kBottom = 392;

double x_pixel(double x) { return kLeft + x * (kRight - kLeft); }
double y_pixel(double y) { return kBottom - y * (kBottom - kTop); }

void validate(const std::vector<ChartSeries>& series) {
  if (series.empty()) {
    throw ValidationError("chart needs at least one series");
  }
  for (const ChartSeries& s : series) {
    if (s.points.empty()) {
      throw ValidationError("chart series '" + s.label + "' has no points");
    }
    if (s.color.size() != 7 || s.color[0] != '#') {
      throw ValidationError("chart series '" + s.label +
                            "' needs a #rrggbb color, got '" + s.color + "'");
    }
  }
}

std::string tick_label(double v) {
  std::string s = tsv::format_number(v);
  while (s.size() > 1 && s.back() == '0') s.pop_back();
  if (!s.empty() && s.back() == '.') s.pop_back();
  return s;
}

const std::vector<double>& axis_ticks() {
  static const std::vector<double> t = {0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
  return t;
}

// --- SVG -----------------------------------------------------------------

void write_svg_file(const std::filesystem::path& path,
                    const std::string& title,
                    const std::vector<ChartSeries>& series) {
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
      << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << " "
      << kHeight << "\">\n";
  out << "<rect width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" fill=\"white\"/>\n";
  out << "<text x=\"" << (kLeft + kRight) / 2 << "\" y=\"24\" "
      << "text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">"
      << title << "</text>\n";

  // Axes and grid.
  out << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\""
      << kRight - kLeft << "\" height=\"" << kBottom - kTop
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double t : axis_ticks()) {
    const double xp = x_pixel(t);
    const double yp = y_pixel(t);
    out << "<line x1=\"" << xp << "\" y1=\"" << kTop << "\" x2=\"" << xp
        << "\" y2=\"" << kBottom << "\" stroke=\"#dddddd\"/>\n";
    out << "<line x1=\"" << kLeft << "\" y1=\"" << yp << "\" x2=\"" << kRight
        << "\" y2=\"" << yp << "\" stroke=\"#dddddd\"/>\n";
    out << "<text x=\"" << xp << "\" y=\"" << kBottom + 18
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        << "font-size=\"11\">" << tick_label(t * 100) << "</text>\n";
    out << "<text x=\"" << kLeft - 8 << "\" y=\"" << yp + 4
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
        << "font-size=\"11\">" << tick_label(t) << "</text>\n";
  }
  out << "<text x=\"" << (kLeft + kRight) / 2 << "\" y=\"" << kBottom + 38
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
      << "font-size=\"12\">training data (%)</text>\n";
  out << "<text x=\"16\" y=\"" << (kTop + kBottom) / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
      << "font-size=\"12\" transform=\"rotate(-90 16 "
      << (kTop + kBottom) / 2 << ")\">score</text>\n";

  for (const ChartSeries& s : series) {
    out << "<polyline fill=\"none\" stroke=\"" << s.color
        << "\" stroke-width=\"2\"";
    if (s.dashed) out << " stroke-dasharray=\"7 4\"";
    out << " points=\"";
    for (const auto& [x, y] : s.points) {
      out << x_pixel(x) << "," << y_pixel(y) << " ";
    }
    out << "\"/>\n";
  }

  // Legend.
  int ly = kTop + 8;
  for (const ChartSeries& s : series) {
    out << "<line x1=\"" << kRight + 16 << "\" y1=\"" << ly << "\" x2=\""
        << kRight + 48 << "\" y2=\"" << ly << "\" stroke=\"" << s.color
        << "\" stroke-width=\"2\"";
    if (s.dashed) out << " stroke-dasharray=\"7 4\"";
    out << "/>\n";
    out << "<text x=\"" << kRight + 54 << "\" y=\"" << ly + 4
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << s.label
        << "</text>\n";
    ly += 20;
  }
  out << "</svg>\n";

  const std::string text = out.str();
  std::FILE* f = std::fopen(path.string().c_str(), "wb");
  if (f == nullptr) {
    throw ExecutionError("cannot write chart: " + path.string());
  }
  std::fwrite(text.data(), 1, text.size(), f);
  std::fclose(f);
}

// --- PNG -----------------------------------------------------------------

constexpr int kScale = 2;  // PNG renders the SVG layout at 2x

struct Rgb {
  unsigned char r = 0, g = 0, b = 0;
};

Rgb parse_color(const std::string& hex) {
  auto nib = [&](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw ValidationError("bad hex digit in chart color '" + hex + "'");
  };
  auto byte = [&](int i) {
    return static_cast<unsigned char>(nib(hex[i]) * 16 + nib(hex[i + 1]));
  };
  return {byte(1), byte(3), byte(5)};
}

struct Canvas {
  int width;
  int height;
  std::vector<unsigned char> pixels;  // RGB8

  Canvas(int w, int h) : width(w), height(h), pixels(w * h * 3, 255) {}

  void set(int x, int y, Rgb c) {
    if (x < 0 || y < 0 || x >= width || y >= height) return;
    unsigned char* p = &pixels[(static_cast<std::size_t>(y) * width + x) * 3];
    p[0] = c.r;
    p[1] = c.g;
    p[2] = c.b;
  }

  void dot(int x, int y, Rgb c, int thickness) {
    for (int dy = 0; dy < thickness; ++dy) {
      for (int dx = 0; dx < thickness; ++dx) set(x + dx, y + dy, c);
    }
  }

  // Bresenham with an on/off pattern measured in steps (solid when off == 0).
  void line(double x0, double y0, double x1, double y1, Rgb c, int thickness,
            int on = 0, int off = 0) {
    int ix0 = static_cast<int>(std::lround(x0));
    int iy0 = static_cast<int>(std::lround(y0));
    const int ix1 = static_cast<int>(std::lround(x1));
    const int iy1 = static_cast<int>(std::lround(y1));
    const int dx = std::abs(ix1 - ix0), sx = ix0 < ix1 ? 1 : -1;
    const int dy = -std::abs(iy1 - iy0), sy = iy0 < iy1 ? 1 : -1;
    int err = dx + dy;
    int step = 0;
    while (true) {
      const bool pen = off == 0 || (step % (on + off)) < on;
      if (pen) dot(ix0, iy0, c, thickness);
      if (ix0 == ix1 && iy0 == iy1) break;
      const int e2 = 2 * err;
      if (e2 >= dy) {
        err += dy;
        ix0 += sx;
      }
      if (e2 <= dx) {
        err += dx;
        iy0 += sy;
      }
      ++step;
    }
  }
};

// Classic 5x7 column-major font: bit k of byte j is row k of column j.
struct Glyph {
  char ch;
  std::array<unsigned char, 5> cols;
};

const Glyph kFont[] = {
    {' ', {0x00, 0x00, 0x00, 0x00, 0x00}},
    {'%', {0x62, 0x64, 0x08, 0x13, 0x23}},
    {'(', {0x00, 0x1C, 0x22, 0x41, 0x00}},
    {')', {0x00, 0x41, 0x22, 0x1C, 0x00}},
    {'-', {0x08, 0x08, 0x08, 0x08, 0x08}},
    {'.', {0x00, 0x60, 0x60, 0x00, 0x00}},
    {'0', {0x3E, 0x51, 0x49, 0x45, 0x3E}},
    {'1', {0x00, 0x42, 0x7F, 0x40, 0x00}},
    {'2', {0x42, 0x61, 0x51, 0x49, 0x46}},
    {'3', {0x21, 0x41, 0x45, 0x4B, 0x31}},
    {'4', {0x18, 0x14, 0x12, 0x7F, 0x10}},
    {'5', {0x27, 0x45, 0x45, 0x45, 0x39}},
    {'6', {0x3C, 0x4A, 0x49, 0x49, 0x30}},
    {'7', {0x01, 0x71, 0x09, 0x05, 0x03}},
    {'8', {0x36, 0x49, 0x49, 0x49, 0x36}},
    {'9', {0x06, 0x49, 0x49, 0x29, 0x1E}},
    {'A', {0x7E, 0x11, 0x11, 0x11, 0x7E}},
    {'B', {0x7F, 0x49, 0x49, 0x49, 0x36}},
    {'C', {0x3E, 0x41, 0x41, 0x41, 0x22}},
    {'D', {0x7F, 0x41, 0x41, 0x22, 0x1C}},
    {'E', {0x7F, 0x49, 0x49, 0x49, 0x41}},
    {'F', {0x7F, 0x09, 0x09, 0x09, 0x01}},
    {'G', {0x3E, 0x41, 0x49, 0x49, 0x7A}},
    {'H', {0x7F, 0x08, 0x08, 0x08, 0x7F}},
    {'I', {0x00, 0x41, 0x7F, 0x41, 0x00}},
    {'J', {0x20, 0x40, 0x41, 0x3F, 0x01}},
    {'K', {0x7F, 0x08, 0x14, 0x22, 0x41}},
    {'L', {0x7F, 0x40, 0x40, 0x40, 0x40}},
    {'M', {0x7F, 0x02, 0x0C, 0x02, 0x7F}},
    {'N', {0x7F, 0x04, 0x08, 0x10, 0x7F}},
    {'O', {0x3E, 0x41, 0x41, 0x41, 0x3E}},
    {'P', {0x7F, 0x09, 0x09, 0x09, 0x06}},
    {'Q', {0x3E, 0x41, 0x51, 0x21, 0x5E}},
    {'R', {0x7F, 0x09, 0x19, 0x29, 0x46}},
    {'S', {0x46, 0x49, 0x49, 0x49, 0x31}},
    {'T', {0x01, 0x01, 0x7F, 0x01, 0x01}},
    {'U', {0x3F, 0x40, 0x40, 0x40, 0x3F}},
    {'V', {0x1F, 0x20, 0x40, 0x20, 0x1F}},
    {'W', {0x3F, 0x40, 0x38, 0x40, 0x3F}},
    {'X', {0x63, 0x14, 0x08, 0x14, 0x63}},
    {'Y', {0x07, 0x08, 0x70, 0x08, 0x07}},
    {'Z', {0x61, 0x51, 0x49, 0x45, 0x43}},
};

const std::array<unsigned char, 5>* find_glyph(char c) {
  const char u =
      static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  for (const Glyph& g : kFont) {
    if (g.ch == u) return &g.cols;
  }
  return nullptr;  // unknown characters render as a gap
}

enum class Anchor { Left, Middle, Right };

void draw_text(Canvas& canvas, double x, double y, const std::string& text,
               Anchor anchor, Rgb color = {0, 0, 0}) {
  const int advance = 6 * kScale;
  const int width = static_cast<int>(text.size()) * advance;
  int px = static_cast<int>(std::lround(x));
  if (anchor == Anchor::Middle) px -= width / 2;
  if (anchor == Anchor::Right) px -= width;
  const int py = static_cast<int>(std::lround(y)) - 7 * kScale / 2;
  for (char c : text) {
    if (const auto* cols = find_glyph(c)) {
      for (int cx = 0; cx < 5; ++cx) {
        for (int cy = 0; cy < 7; ++cy) {
          if ((*cols)[cx] >> cy & 1) {
            canvas.dot(px + cx * kScale, py + cy * kScale, color, kScale);
          }
        }
      }
    }
    px += advance;
  }
}

void write_png_file(const std::filesystem::path& path, const Canvas& canvas) {
  std::FILE* f = std::fopen(path.string().c_str(), "wb");
  if (f == nullptr) {
    throw ExecutionError("cannot write chart: " + path.string());
  }
  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png != nullptr ? png_create_info_struct(png) : nullptr;
  if (info == nullptr || setjmp(png_jmpbuf(png)) != 0) {
    png_destroy_write_struct(&png, &info);
    std::fclose(f);
    throw ExecutionError("libpng failure writing " + path.string());
  }
  png_init_io(png, f);
  png_set_IHDR(png, info, canvas.width, canvas.height, 8,
               PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < canvas.height; ++y) {
    png_write_row(png, const_cast<unsigned char*>(
                           &canvas.pixels[static_cast<std::size_t>(y) *
                                          canvas.width * 3]));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(f);
}

}  // namespace

void write_chart_svg(const std::filesystem::path& path,
                     const std::string& title,
                     const std::vector<ChartSeries>& series) {
  validate(series);
  write_svg_file(path, title, series);
}

void write_chart_png(const std::filesystem::path& path,
                     const std::string& title,
                     const std::vector<ChartSeries>& series) {
  validate(series);
  const int s = kScale;
  Canvas canvas(kWidth * s, kHeight * s);
  const Rgb black{0, 0, 0};
  const Rgb grid{221, 221, 221};

  for (double t : axis_ticks()) {
    canvas.line(x_pixel(t) * s, kTop * s, x_pixel(t) * s, kBottom * s, grid,
                1);
    canvas.line(kLeft * s, y_pixel(t) * s, kRight * s, y_pixel(t) * s, grid,
                1);
    draw_text(canvas, x_pixel(t) * s, (kBottom + 16) * s,
              tick_label(t * 100), Anchor::Middle);
    draw_text(canvas, (kLeft - 8) * s, y_pixel(t) * s, tick_label(t),
              Anchor::Right);
  }
  canvas.line(kLeft * s, kTop * s, kRight * s, kTop * s, black, 1);
  canvas.line(kLeft * s, kBottom * s, kRight * s, kBottom * s, black, 1);
  canvas.line(kLeft * s, kTop * s, kLeft * s, kBottom * s, black, 1);
  canvas.line(kRight * s, kTop * s, kRight * s, kBottom * s, black, 1);
  draw_text(canvas, (kLeft + kRight) / 2 * s, 22 * s, title, Anchor::Middle);
  draw_text(canvas, (kLeft + kRight) / 2 * s, (kBottom + 34) * s,
            "training data (%)", Anchor::Middle);

  for (const ChartSeries& sr : series) {
    const Rgb color = parse_color(sr.color);
    const int on = sr.dashed ? 7 * s : 0;
    const int off = sr.dashed ? 4 * s : 0;
    for (std::size_t i = 1; i < sr.points.size(); ++i) {
      canvas.line(x_pixel(sr.points[i - 1].first) * s,
                  y_pixel(sr.points[i - 1].second) * s,
                  x_pixel(sr.points[i].first) * s,
                  y_pixel(sr.points[i].second) * s, color, 2, on, off);
    }
  }

  int ly = kTop + 8;
  for (const ChartSeries& sr : series) {
    const Rgb color = parse_color(sr.color);
    const int on = sr.dashed ? 7 * s : 0;
    const int off = sr.dashed ? 4 * s : 0;
    canvas.line((kRight + 16) * s, ly * s, (kRight + 48) * s, ly * s, color, 2,
                on, off);
    draw_text(canvas, (kRight + 54) * s, ly * s, sr.label, Anchor::Left);
    ly += 20;
  }
  write_png_file(path, canvas);
}

}  // namespace supbench::cli
