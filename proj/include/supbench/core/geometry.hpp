#pragma once

#include <cstdint>
#include <vector>

namespace supbench::geom {

struct PointD {
  double x = 0.0;
  double y = 0.0;
};

struct BoxD {
  double x1 = 0.0;
  double y1 = 0.0;
  double x2 = 0.0;
  double y2 = 0.0;

  double width() const { return x2 - x1; }
  double height() const { return y2 - y1; }
  double area() const { return width() * height(); }
  bool valid() const { return x2 > x1 && y2 > y1; }
};

using Ring = std::vector<PointD>;

// Signed polygon area (shoelace); positive for counter-clockwise rings in a
// y-down raster frame the sign is irrelevant to callers here.
double signed_area(const Ring& ring);

// Tight axis-aligned bounding box of the vertices.
BoxD bounding_box(const Ring& ring);

// Sutherland-Hodgman clip of a simple polygon against an axis-aligned
// rectangle. May return an empty ring when nothing remains.
Ring clip_to_box(const Ring& ring, const BoxD& box);

// Grid raster mask of width*height booleans, row-major.
struct GridMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> values;  // 0/1

  bool at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x] != 0; }
  void set(int x, int y, bool v) { values[static_cast<std::size_t>(y) * width + x] = v ? 1 : 0; }
  std::size_t count() const;
};

GridMask make_grid_mask(int width, int height);

// Scanline polygon fill. A pixel (px, py) is covered iff its center
// (px+0.5, py+0.5) lies inside the polygon; centers exactly on an edge are
// resolved by the top-left fill rule (half-open [enter, exit) spans in x,
// half-open [ymin, ymax) edge coverage in y). Even-odd rule for
// self-overlapping input.
void fill_polygon(const Ring& ring, GridMask& mask);

// Number of pixels fill_polygon would set, without materializing a mask.
std::size_t rasterized_area(const Ring& ring, int width, int height);

// Fills pixels whose centers fall in [x1, x2) x [y1, y2).
void fill_box(const BoxD& box, GridMask& mask);

// Intersection-over-union of two boxes.
double box_iou(const BoxD& a, const BoxD& b);

}  // namespace supbench::geom
